// Copyright 2026 The AGE Toolkit Authors. All Rights Reserved.
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

#include "agekit/am.hpp"
#include "agekit/error.hpp"
#include "agekit/feature_io.hpp"
#include "agekit/features.hpp"
#include "agekit/fixture.hpp"
#include "agekit/harness.hpp"
#include "agekit/manifest.hpp"
#include "agekit/measures.hpp"
#include "agekit/mix.hpp"
#include "agekit/model_io.hpp"
#include "agekit/posterior.hpp"
#include "agekit/resample.hpp"
#include "agekit/stats.hpp"
#include "agekit/stoi.hpp"
#include "agekit/train.hpp"
#include "agekit/wav.hpp"
#include "agekit/waveform.hpp"
