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

#include "dxtext/samplers.h"

#include <cmath>
#include <numeric>
#include <utility>

#include <boost/math/special_functions/gamma.hpp>

#include "absl/strings/str_cat.h"

namespace dxtext {
namespace {

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::Engine MakeEngine(uint64_t seed, uint64_t stream_id) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(stream_id),
                    static_cast<uint32_t>(stream_id >> 32)};
  return RngStream::Engine(seq);
}

double Norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

RngStream::RngStream(uint64_t seed, uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(MakeEngine(seed, stream_id)) {}

RngStream RngStream::Fork(uint64_t child_id) const {
  return RngStream(seed_, SplitMix64(stream_id_ ^ SplitMix64(child_id)));
}

double RngStream::Uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::UniformOpen01() {
  double u = 0.0;
  do {
    u = Uniform01();
  } while (u == 0.0);
  return u;
}

uint64_t RngStream::UniformInclusive(uint64_t bound) {
  return std::uniform_int_distribution<uint64_t>(0, bound)(engine_);
}

double RngStream::StandardNormal() { return normal_(engine_); }

absl::StatusOr<MultivariateLaplaceParam> MultivariateLaplaceParam::Create(
    size_t dim, double epsilon) {
  if (dim == 0) {
    return absl::InvalidArgumentError("dimension must be at least 1");
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must be positive and finite, got ", epsilon));
  }
  return MultivariateLaplaceParam(dim, epsilon);
}

absl::StatusOr<double> SampleLaplace(RngStream& rng, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    return absl::InvalidArgumentError(
        absl::StrCat("Laplace scale must be positive, got ", scale));
  }
  const double magnitude = -scale * std::log(rng.UniformOpen01());
  return (rng.NextU64() & 1) ? magnitude : -magnitude;
}

absl::StatusOr<std::vector<double>> SampleUnitSphere(RngStream& rng,
                                                     size_t dim) {
  if (dim == 0) {
    return absl::InvalidArgumentError("dimension must be at least 1");
  }
  std::vector<double> v(dim);
  double norm = 0.0;
  do {
    for (double& x : v) x = rng.StandardNormal();
    norm = Norm(v);
  } while (!(norm > 0.0));
  for (double& x : v) x /= norm;
  return v;
}

double SampleLaplaceRadius(RngStream& rng,
                           const MultivariateLaplaceParam& param) {
  std::gamma_distribution<double> gamma(static_cast<double>(param.dim()),
                                        1.0 / param.epsilon());
  return gamma(rng.engine());
}

std::vector<double> SampleMultivariateLaplace(
    RngStream& rng, const MultivariateLaplaceParam& param) {
  std::vector<double> z = *SampleUnitSphere(rng, param.dim());
  const double r = SampleLaplaceRadius(rng, param);
  for (double& x : z) x *= r;
  return z;
}

double LaplaceRadiusCdf(const MultivariateLaplaceParam& param, double radius) {
  if (radius <= 0.0) return 0.0;
  if (std::isinf(radius)) return 1.0;
  return boost::math::gamma_p(static_cast<double>(param.dim()),
                              param.epsilon() * radius);
}

absl::StatusOr<std::vector<double>> SampleMultivariateLaplaceTruncated(
    RngStream& rng, const MultivariateLaplaceParam& param, double tau) {
  if (!(tau > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("truncation radius must be positive, got ", tau));
  }
  const double shape = static_cast<double>(param.dim());
  const double mass = LaplaceRadiusCdf(param, tau);
  std::vector<double> z = *SampleUnitSphere(rng, param.dim());
  const double target = rng.Uniform01() * mass;
  double r = target > 0.0
                 ? boost::math::gamma_p_inv(shape, target) / param.epsilon()
                 : 0.0;
  r = std::min(r, tau);
  for (double& x : z) x *= r;
  // Rounding in the direction or the inverse CDF can overshoot by an ulp.
  for (double norm = Norm(z); norm > tau; norm = Norm(z)) {
    const double shrink = (tau / norm) * (1.0 - 0x1.0p-50);
    for (double& x : z) x *= shrink;
  }
  return z;
}

std::vector<size_t> SamplePermutation(RngStream& rng, size_t n) {
  std::vector<size_t> perm(n);
  std::iota(perm.begin(), perm.end(), size_t{0});
  for (size_t i = n; i-- > 1;) {
    const size_t j = rng.UniformInclusive(i);
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

}  // namespace dxtext
