// Copyright 2026 The ldphist Authors
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

// Umbrella header for the core library (everything except the harness).

#ifndef LDPHIST_LDPHIST_H_
#define LDPHIST_LDPHIST_H_

#include "ldphist/densities.h"
#include "ldphist/estimator.h"
#include "ldphist/lowerbound.h"
#include "ldphist/mechanism.h"
#include "ldphist/metrics.h"
#include "ldphist/partition.h"
#include "ldphist/quadrature.h"
#include "ldphist/random.h"

#endif  // LDPHIST_LDPHIST_H_
