// Copyright 2026 The IBMB Authors.
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

#include <cstddef>
#include <functional>

namespace ibmb {

/**
 * Worker count for parallel loops: IBMB_THREADS when set to a positive
 * integer, otherwise the hardware concurrency (at least 1).
 */
std::size_t worker_count();

/**
 * Runs body(i) for i in [0, n) on up to `workers` threads. Work is handed out
 * in index order; callers write results into slot i so output order never
 * depends on scheduling. The first exception thrown by any body is rethrown.
 */
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, std::size_t workers = worker_count());

}  // namespace ibmb
