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

#ifndef LDPHIST_INTERNAL_STATUS_MACROS_H_
#define LDPHIST_INTERNAL_STATUS_MACROS_H_

#include <utility>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

#define LDPHIST_RETURN_IF_ERROR(expr)      \
  do {                                     \
    const absl::Status _status = (expr);   \
    if (!_status.ok()) return _status;     \
  } while (0)

#define LDPHIST_STATUS_CONCAT_INNER_(x, y) x##y
#define LDPHIST_STATUS_CONCAT_(x, y) LDPHIST_STATUS_CONCAT_INNER_(x, y)

#define LDPHIST_ASSIGN_OR_RETURN_IMPL_(statusor, lhs, rexpr) \
  auto statusor = (rexpr);                                   \
  if (!statusor.ok()) return statusor.status();              \
  lhs = std::move(statusor).value()

// Evaluates an expression yielding absl::StatusOr<T>; on error returns the
// status from the enclosing function, otherwise assigns the value to `lhs`.
#define LDPHIST_ASSIGN_OR_RETURN(lhs, rexpr) \
  LDPHIST_ASSIGN_OR_RETURN_IMPL_(            \
      LDPHIST_STATUS_CONCAT_(_statusor_, __LINE__), lhs, rexpr)

#endif  // LDPHIST_INTERNAL_STATUS_MACROS_H_
