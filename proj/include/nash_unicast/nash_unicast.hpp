// Copyright 2026 The nash-unicast Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "nash_unicast/cli.hpp"
#include "nash_unicast/dynamics.hpp"
#include "nash_unicast/equilibrium.hpp"
#include "nash_unicast/error.hpp"
#include "nash_unicast/mechanism.hpp"
#include "nash_unicast/network.hpp"
#include "nash_unicast/scenario.hpp"
#include "nash_unicast/solver.hpp"
#include "nash_unicast/utility.hpp"
