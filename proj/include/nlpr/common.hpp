// Copyright 2026 The nlpr Authors. All Rights Reserved.
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

#include <stdexcept>
#include <string>

namespace nlpr {

// Error taxonomy for the whole library. The CLI maps these onto process
// exit codes: data/format/config problems -> 2, numeric failures -> 3.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Mismatched or invalid grid shapes.
struct dimension_error : error {
  using error::error;
};

// Values outside an operation's domain (negative luminance, out-of-range
// normalized values, NaN/Inf).
struct domain_error : error {
  using error::error;
};

// Invalid or inconsistent configuration (unknown mapping, infeasible mean,
// too-small dither window).
struct config_error : error {
  using error::error;
};

// File and format problems.
struct io_error : error {
  using error::error;
};

// Non-finite intermediate results or failed iterative procedures.
struct numeric_error : error {
  using error::error;
};

}  // namespace nlpr
