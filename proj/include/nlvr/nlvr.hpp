/*
   Copyright 2026 The nlvr Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include "nlvr/abm.hpp"
#include "nlvr/detect.hpp"
#include "nlvr/io.hpp"
#include "nlvr/nonlocal.hpp"
#include "nlvr/parallel.hpp"
#include "nlvr/pipeline.hpp"
#include "nlvr/rng.hpp"
#include "nlvr/stats.hpp"
#include "nlvr/timeseries.hpp"
