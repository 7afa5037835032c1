// Copyright 2026 The planartrack Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "planartrack/core.hpp"

namespace planartrack {

/// Row-major 8-bit image with 1 or 3 interleaved channels and an optional
/// validity mask (1 = pixel comes from a source view).
struct Raster {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> data;
  std::optional<std::vector<std::uint8_t>> validity;

  Raster() = default;
  Raster(int w, int h, int c) : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, 0) {}

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
  std::uint8_t& at(int x, int y, int ch = 0) { return data[index(x, y) * channels + ch]; }
  std::uint8_t at(int x, int y, int ch = 0) const { return data[index(x, y) * channels + ch]; }
  bool valid(int x, int y) const { return !validity || (*validity)[index(x, y)] != 0; }

  friend bool operator==(const Raster&, const Raster&) = default;
};

namespace detail {
inline int read_pnm_int(std::istream& in) {
  int c = in.peek();
  while (c != EOF) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
    c = in.peek();
  }
  int v = -1;
  if (!(in >> v)) throw Error(ErrorCode::ParseError, "malformed PNM header");
  return v;
}
}  // namespace detail

/// Reads binary PGM (P5) or PPM (P6) with maxval 255.
inline Raster read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::string magic;
  in >> magic;
  int channels = 0;
  if (magic == "P5") channels = 1;
  else if (magic == "P6") channels = 3;
  else throw Error(ErrorCode::ParseError, path + ": unsupported PNM magic '" + magic + "'");
  const int w = detail::read_pnm_int(in);
  const int h = detail::read_pnm_int(in);
  const int maxval = detail::read_pnm_int(in);
  if (w <= 0 || h <= 0 || maxval != 255) throw Error(ErrorCode::ParseError, path + ": bad PNM header");
  in.get();  // single whitespace before the raster
  Raster r(w, h, channels);
  in.read(reinterpret_cast<char*>(r.data.data()), static_cast<std::streamsize>(r.data.size()));
  if (in.gcount() != static_cast<std::streamsize>(r.data.size())) {
    throw Error(ErrorCode::ParseError, path + ": truncated raster data");
  }
  return r;
}

inline std::string encode_pnm(const Raster& r) {
  std::ostringstream out(std::ios::binary);
  out << (r.channels == 3 ? "P6" : "P5") << '\n' << r.width << ' ' << r.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(r.data.data()), static_cast<std::streamsize>(r.data.size()));
  return out.str();
}

/// Validity mask as a single-channel raster with 0/255 samples.
inline Raster validity_image(const Raster& r) {
  Raster v(r.width, r.height, 1);
  for (std::size_t i = 0; i < r.pixel_count(); ++i) {
    v.data[i] = (!r.validity || (*r.validity)[i]) ? 255 : 0;
  }
  return v;
}

}  // namespace planartrack
