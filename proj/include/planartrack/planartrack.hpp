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

#include "planartrack/assignment.hpp"
#include "planartrack/config.hpp"
#include "planartrack/core.hpp"
#include "planartrack/geometry.hpp"
#include "planartrack/ingest.hpp"
#include "planartrack/kalman.hpp"
#include "planartrack/mask.hpp"
#include "planartrack/metrics.hpp"
#include "planartrack/mosaic.hpp"
#include "planartrack/raster.hpp"
#include "planartrack/simulator.hpp"
#include "planartrack/tracker.hpp"
