// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The bfmimo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "bfmimo/version.hpp"
#include "bfmimo/core/error.hpp"
#include "bfmimo/core/units.hpp"
#include "bfmimo/core/matrix.hpp"
#include "bfmimo/core/quadrature.hpp"
#include "bfmimo/core/rng.hpp"
#include "bfmimo/core/parallel.hpp"
#include "bfmimo/propagation.hpp"
#include "bfmimo/apod/layout.hpp"
#include "bfmimo/apod/jacobi.hpp"
#include "bfmimo/apod/spectrum.hpp"
#include "bfmimo/apod/sweep.hpp"
#include "bfmimo/outage/allocation.hpp"
#include "bfmimo/outage/capacity.hpp"
#include "bfmimo/outage/envelope.hpp"
#include "bfmimo/outage/equalization.hpp"
