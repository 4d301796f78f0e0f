// Copyright 2026 The Fabrics Authors
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

#include "fabrics/energization.hpp"
#include "fabrics/fabric_terms.hpp"
#include "fabrics/finite_diff.hpp"
#include "fabrics/geometry.hpp"
#include "fabrics/invariants.hpp"
#include "fabrics/io.hpp"
#include "fabrics/lagrangian.hpp"
#include "fabrics/linalg.hpp"
#include "fabrics/planar_arm.hpp"
#include "fabrics/potential.hpp"
#include "fabrics/scenario.hpp"
#include "fabrics/simulate.hpp"
#include "fabrics/spec.hpp"
#include "fabrics/speed_control.hpp"
#include "fabrics/task_map.hpp"
#include "fabrics/transform_tree.hpp"
#include "fabrics/types.hpp"
