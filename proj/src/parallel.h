// Copyright 2026 The dxtext Authors
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

#ifndef DXTEXT_SRC_PARALLEL_H_
#define DXTEXT_SRC_PARALLEL_H_

#include <algorithm>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

#include "absl/status/status.h"

namespace dxtext::internal {

// Runs fn(i) for i in [0, n) over contiguous blocks on up to `workers`
// threads. Results must be written to per-index slots so that the outcome is
// independent of the worker count. Returns the error of the lowest failing
// index, if any.
inline absl::Status ParallelFor(size_t n, size_t workers,
                                const std::function<absl::Status(size_t)>& fn) {
  workers = std::clamp<size_t>(workers, 1, std::max<size_t>(n, 1));
  std::vector<absl::Status> status(n);
  auto run_block = [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) status[i] = fn(i);
  };
  if (workers == 1) {
    run_block(0, n);
  } else {
    std::vector<std::thread> threads;
    const size_t block = (n + workers - 1) / workers;
    for (size_t t = 0; t < workers; ++t) {
      const size_t begin = std::min(n, t * block);
      const size_t end = std::min(n, begin + block);
      threads.emplace_back(run_block, begin, end);
    }
    for (auto& th : threads) th.join();
  }
  for (auto& s : status) {
    if (!s.ok()) return s;
  }
  return absl::OkStatus();
}

}  // namespace dxtext::internal

#endif  // DXTEXT_SRC_PARALLEL_H_
