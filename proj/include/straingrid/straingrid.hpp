/*
* Copyright (C) 2026 The straingrid authors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/
#pragma once

#include "straingrid/errors.hpp"
#include "straingrid/model_core.hpp"
#include "straingrid/reduction.hpp"
#include "straingrid/ode.hpp"
#include "straingrid/full_sim.hpp"
#include "straingrid/replicator.hpp"
#include "straingrid/validator.hpp"
