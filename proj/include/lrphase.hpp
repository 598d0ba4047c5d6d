// Copyright 2026 The lrphase Authors
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

#include "lrphase/common.hpp"
#include "lrphase/evaluation.hpp"
#include "lrphase/feedback.hpp"
#include "lrphase/io.hpp"
#include "lrphase/lossy_detection.hpp"
#include "lrphase/phase_inference.hpp"
#include "lrphase/sequence_optimizer.hpp"
#include "lrphase/state_prep.hpp"
