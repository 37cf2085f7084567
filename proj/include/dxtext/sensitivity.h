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

// Data-dependent noise scales over an embedding vocabulary.
//
// The local sensitivity of a word is taken to be the distance to its nearest
// distinct neighbor: the smallest displacement that can turn it into another
// vocabulary word. This is an interpretation for embedding spaces; the
// classical definition is stated for functions of neighboring datasets.
//
//   local(w)      = min_{u != w} d(w, u)
//   local_t(w)    = max_{u : d(w, u) <= t} local(u)
//   smooth_b(w)   = max_{u} local(u) * exp(-b * d(w, u))
//   global        = max_{w} local(w)
//
// smooth_b is a b-smooth upper bound on local: smooth_b(w) >= local(w), and
// smooth_b(w) <= exp(b * d(w, u)) * smooth_b(u) for all w, u.

#ifndef DXTEXT_SENSITIVITY_H_
#define DXTEXT_SENSITIVITY_H_

#include <cstdint>
#include <vector>

#include "absl/status/statusor.h"
#include "dxtext/embedding_store.h"

namespace dxtext {

struct SensitivityProfile {
  std::vector<double> local;
  std::vector<double> smooth;
  double beta = 0.0;
  double global = 0.0;
  // EmbeddingStore::fingerprint() of the store the profile was built from.
  uint64_t store_fingerprint = 0;

  double local_at(WordId w) const { return local[w.index()]; }
  double smooth_at(WordId w) const { return smooth[w.index()]; }
};

absl::StatusOr<double> LocalSensitivity(const EmbeddingStore& store, WordId w);

absl::StatusOr<double> LocalSensitivityWithin(const EmbeddingStore& store,
                                              WordId w, double t);

absl::StatusOr<double> SmoothSensitivity(const EmbeddingStore& store, WordId w,
                                         double beta);

absl::StatusOr<double> GlobalSensitivity(const EmbeddingStore& store);

// All per-word values in O(|W|^2 d).
absl::StatusOr<SensitivityProfile> BuildProfile(const EmbeddingStore& store,
                                                double beta);

}  // namespace dxtext

#endif  // DXTEXT_SENSITIVITY_H_
