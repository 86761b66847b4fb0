// Copyright 2026 The oscqubit Authors
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

// Everything in one include.

#include "oscqubit/analysis.hpp"
#include "oscqubit/appendix.hpp"
#include "oscqubit/core.hpp"
#include "oscqubit/ensemble.hpp"
#include "oscqubit/experiment.hpp"
#include "oscqubit/io.hpp"
#include "oscqubit/mechanics.hpp"
#include "oscqubit/noise.hpp"
#include "oscqubit/ode.hpp"
#include "oscqubit/redfield.hpp"
#include "oscqubit/tls.hpp"
