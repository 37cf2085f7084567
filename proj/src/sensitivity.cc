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

#include "dxtext/sensitivity.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/strings/str_cat.h"

namespace dxtext {
namespace {

absl::Status CheckWord(const EmbeddingStore& store, WordId w) {
  if (!store.Contains(w)) {
    return absl::OutOfRangeError(
        absl::StrCat("InvalidWordId: ", w.index(), " not below ", store.size()));
  }
  return absl::OkStatus();
}

double RowDistance(const EmbeddingStore& store, WordId w, WordId u) {
  return std::sqrt(store.SquaredDistanceTo(w, store.vector(u)));
}

// max_u local[u] * exp(-beta * d(w, u)). At beta == 0 every factor is exactly
// 1, so the result is exactly the global maximum.
double SmoothFromLocals(const EmbeddingStore& store,
                        const std::vector<double>& local, WordId w,
                        double beta) {
  double best = 0.0;
  for (size_t i = 0; i < store.size(); ++i) {
    const double factor =
        beta == 0.0 ? 1.0 : std::exp(-beta * RowDistance(store, w, WordId(i)));
    best = std::max(best, local[i] * factor);
  }
  return best;
}

}  // namespace

absl::StatusOr<double> LocalSensitivity(const EmbeddingStore& store, WordId w) {
  if (absl::Status s = CheckWord(store, w); !s.ok()) return s;
  if (store.size() < 2) {
    return absl::FailedPreconditionError(
        "SingletonVocabulary: need at least two words");
  }
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < store.size(); ++i) {
    if (i == w.index()) continue;
    best = std::min(best, RowDistance(store, w, WordId(i)));
  }
  return best;
}

absl::StatusOr<double> LocalSensitivityWithin(const EmbeddingStore& store,
                                              WordId w, double t) {
  if (absl::Status s = CheckWord(store, w); !s.ok()) return s;
  if (!(t > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("radius t must be positive, got ", t));
  }
  auto local = NearestNeighborDistances(store);
  if (!local.ok()) return local.status();
  double best = 0.0;
  for (size_t i = 0; i < store.size(); ++i) {
    if (RowDistance(store, w, WordId(i)) <= t) {
      best = std::max(best, (*local)[i]);
    }
  }
  return best;
}

absl::StatusOr<double> SmoothSensitivity(const EmbeddingStore& store, WordId w,
                                         double beta) {
  if (absl::Status s = CheckWord(store, w); !s.ok()) return s;
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    return absl::InvalidArgumentError(
        absl::StrCat("beta must be non-negative, got ", beta));
  }
  auto local = NearestNeighborDistances(store);
  if (!local.ok()) return local.status();
  return SmoothFromLocals(store, *local, w, beta);
}

absl::StatusOr<double> GlobalSensitivity(const EmbeddingStore& store) {
  auto local = NearestNeighborDistances(store);
  if (!local.ok()) return local.status();
  return *std::max_element(local->begin(), local->end());
}

absl::StatusOr<SensitivityProfile> BuildProfile(const EmbeddingStore& store,
                                                double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    return absl::InvalidArgumentError(
        absl::StrCat("beta must be non-negative, got ", beta));
  }
  auto local = NearestNeighborDistances(store);
  if (!local.ok()) return local.status();
  SensitivityProfile profile;
  profile.beta = beta;
  profile.store_fingerprint = store.fingerprint();
  profile.global = *std::max_element(local->begin(), local->end());
  profile.smooth.resize(store.size());
  for (size_t i = 0; i < store.size(); ++i) {
    profile.smooth[i] = SmoothFromLocals(store, *local, WordId(i), beta);
  }
  profile.local = *std::move(local);
  return profile;
}

}  // namespace dxtext
