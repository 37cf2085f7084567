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

#ifndef DXTEXT_SAMPLERS_H_
#define DXTEXT_SAMPLERS_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace dxtext {

// Well-known stream ids, one per (module, purpose) pair. Child streams are
// derived from these with RngStream::Fork().
enum class StreamPurpose : uint64_t {
  kMechanism = 1,
  kCorpus = 2,
  kLocalizer = 3,
  kAmplifier = 4,
  kAnalysis = 5,
  kMatrix = 6,
  kAttack = 7,
};

// A seedable pseudo-random stream. The pair (seed, stream_id) fully determines
// the output sequence; streams are not thread-safe and are meant to be owned
// by one task at a time. Not suitable for cryptographic use.
class RngStream {
 public:
  using Engine = std::mt19937_64;

  RngStream(uint64_t seed, uint64_t stream_id);

  uint64_t seed() const { return seed_; }
  uint64_t stream_id() const { return stream_id_; }

  // Independent child stream. Depends only on (seed, stream_id, child_id),
  // never on how many values this stream has produced.
  RngStream Fork(uint64_t child_id) const;
  RngStream Fork(StreamPurpose purpose) const {
    return Fork(static_cast<uint64_t>(purpose));
  }

  uint64_t NextU64() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double Uniform01();
  // Uniform on (0, 1).
  double UniformOpen01();
  // Uniform integer in [0, bound]; bound may be 0.
  uint64_t UniformInclusive(uint64_t bound);
  double StandardNormal();

  Engine& engine() { return engine_; }

 private:
  uint64_t seed_;
  uint64_t stream_id_;
  Engine engine_;
  std::normal_distribution<double> normal_;
};

// Noise parameter for the d-dimensional Laplacian with density proportional
// to exp(-epsilon * ||z||).
class MultivariateLaplaceParam {
 public:
  static absl::StatusOr<MultivariateLaplaceParam> Create(size_t dim,
                                                         double epsilon);

  size_t dim() const { return dim_; }
  double epsilon() const { return epsilon_; }

 private:
  MultivariateLaplaceParam(size_t dim, double epsilon)
      : dim_(dim), epsilon_(epsilon) {}

  size_t dim_;
  double epsilon_;
};

absl::StatusOr<double> SampleLaplace(RngStream& rng, double scale);

absl::StatusOr<std::vector<double>> SampleUnitSphere(RngStream& rng,
                                                     size_t dim);

// z = r * u with u uniform on the sphere and r ~ Gamma(dim, 1/epsilon). This
// is exactly the density proportional to exp(-epsilon * ||z||) on R^dim.
std::vector<double> SampleMultivariateLaplace(
    RngStream& rng, const MultivariateLaplaceParam& param);

// Radius of SampleMultivariateLaplace(): Gamma(dim, 1/epsilon).
double SampleLaplaceRadius(RngStream& rng,
                           const MultivariateLaplaceParam& param);

// SampleMultivariateLaplace() conditioned on ||z|| <= tau. The radius is drawn
// by inverting the Gamma CDF restricted to [0, tau]; ||z|| <= tau holds for
// every returned vector.
absl::StatusOr<std::vector<double>> SampleMultivariateLaplaceTruncated(
    RngStream& rng, const MultivariateLaplaceParam& param, double tau);

// Pr[||z|| <= radius] for the multivariate Laplacian, i.e. the regularized
// lower incomplete gamma P(dim, epsilon * radius).
double LaplaceRadiusCdf(const MultivariateLaplaceParam& param, double radius);

// Fisher-Yates: for i = n-1 down to 1, swap position i with a uniform
// j in [0, i].
std::vector<size_t> SamplePermutation(RngStream& rng, size_t n);

}  // namespace dxtext

#endif  // DXTEXT_SAMPLERS_H_
