/* Copyright 2026 The p1echo Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include "p1echo/bath.hpp"
#include "p1echo/common.hpp"
#include "p1echo/constants.hpp"
#include "p1echo/dynamics.hpp"
#include "p1echo/echo_analysis.hpp"
#include "p1echo/hamiltonians.hpp"
#include "p1echo/lattice.hpp"
#include "p1echo/parallel.hpp"
#include "p1echo/pulse_parser.hpp"
#include "p1echo/pulse_program.hpp"
#include "p1echo/spectroscopy.hpp"
#include "p1echo/spin_core.hpp"
#include "p1echo/statistics.hpp"
