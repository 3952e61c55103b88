// Copyright 2026 The ndisc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "ndisc/coloring.hpp"
#include "ndisc/error.hpp"
#include "ndisc/experiments.hpp"
#include "ndisc/measures.hpp"
#include "ndisc/multilinear.hpp"
#include "ndisc/random.hpp"
#include "ndisc/rounding.hpp"
#include "ndisc/serialization.hpp"
#include "ndisc/splitter.hpp"
#include "ndisc/subset.hpp"
#include "ndisc/subsidy.hpp"
#include "ndisc/valuations.hpp"
