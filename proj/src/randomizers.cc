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

#include "dxtext/randomizers.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "absl/strings/str_cat.h"
#include "parallel.h"

namespace dxtext {
namespace {

constexpr std::string_view kVariantNames[] = {"baseline", "density", "smooth",
                                              "trunc_distance", "trunc_knn"};

absl::Status CheckWord(const EmbeddingStore& store, WordId w) {
  if (!store.Contains(w)) {
    return absl::OutOfRangeError(absl::StrCat(
        "InvalidWordId: ", w.index(), " not below ", store.size()));
  }
  return absl::OkStatus();
}

absl::Status CheckEpsilon(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must be positive and finite, got ", epsilon));
  }
  return absl::OkStatus();
}

std::vector<double> Shifted(const EmbeddingStore& store, WordId w,
                            std::span<const double> offset) {
  std::span<const double> base = store.vector(w);
  std::vector<double> point(base.begin(), base.end());
  for (size_t j = 0; j < point.size(); ++j) point[j] += offset[j];
  return point;
}

double KdeLogPriorUnchecked(const EmbeddingStore& store,
                            std::span<const double> z, double sigma) {
  const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
  // Streaming log-sum-exp. `rest` excludes the largest term, which is
  // exactly 1 after scaling, so log1p keeps tiny contributions.
  double max_term = -std::numeric_limits<double>::infinity();
  double rest = 0.0;
  for (size_t i = 0; i < store.size(); ++i) {
    const double term = -store.SquaredDistanceTo(WordId(i), z) * inv_two_var;
    if (term > max_term) {
      rest = i == 0 ? 0.0 : (rest + 1.0) * std::exp(max_term - term);
      max_term = term;
    } else {
      rest += std::exp(term - max_term);
    }
  }
  return max_term + std::log1p(rest);
}

double DistanceToPoint(const EmbeddingStore& store, WordId w,
                       std::span<const double> x) {
  return std::sqrt(store.SquaredDistanceTo(w, x));
}

}  // namespace

std::string_view VariantName(MechanismVariant variant) {
  return kVariantNames[static_cast<size_t>(variant)];
}

absl::StatusOr<MechanismVariant> ParseVariant(std::string_view name) {
  for (size_t i = 0; i < std::size(kVariantNames); ++i) {
    if (kVariantNames[i] == name) return static_cast<MechanismVariant>(i);
  }
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown mechanism '", std::string(name),
      "' (expected baseline, density, smooth, trunc_distance or trunc_knn)"));
}

std::string_view TruncStrategyName(TruncStrategy strategy) {
  return strategy == TruncStrategy::kProject ? "project" : "residual";
}

absl::StatusOr<TruncStrategy> ParseTruncStrategy(std::string_view name) {
  if (name == "project") return TruncStrategy::kProject;
  if (name == "residual") return TruncStrategy::kResidual;
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown truncation strategy '", std::string(name), "' (expected project or residual)"));
}

absl::Status MechanismConfig::Validate() const {
  if (absl::Status s = CheckEpsilon(epsilon); !s.ok()) return s;
  if (const auto* p = std::get_if<DensityParams>(&params)) {
    if (p->sigma.has_value() && !(*p->sigma > 0.0 && std::isfinite(*p->sigma))) {
      return absl::InvalidArgumentError(
          absl::StrCat("sigma must be positive, got ", *p->sigma));
    }
    if (p->mh.thin == 0) {
      return absl::InvalidArgumentError("mh thin must be at least 1");
    }
    if (p->mh.proposal_step.has_value() &&
        !(*p->mh.proposal_step > 0.0 && std::isfinite(*p->mh.proposal_step))) {
      return absl::InvalidArgumentError(absl::StrCat(
          "mh proposal_step must be positive, got ", *p->mh.proposal_step));
    }
  } else if (const auto* p = std::get_if<SmoothParams>(&params)) {
    if (!(p->beta >= 0.0) || !std::isfinite(p->beta)) {
      return absl::InvalidArgumentError(
          absl::StrCat("beta must be non-negative, got ", p->beta));
    }
  } else if (const auto* p = std::get_if<TruncDistanceParams>(&params)) {
    if (!(p->tau > 0.0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("tau must be positive, got ", p->tau));
    }
  } else if (const auto* p = std::get_if<TruncKnnParams>(&params)) {
    if (p->k == 0) return absl::InvalidArgumentError("k must be at least 1");
    if (!(p->k_jitter >= 0.0) || !std::isfinite(p->k_jitter)) {
      return absl::InvalidArgumentError(
          absl::StrCat("k jitter must be non-negative, got ", p->k_jitter));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<WordId> DiscretizeNoisy(const EmbeddingStore& store, WordId w,
                                       std::span<const double> noise) {
  if (absl::Status s = CheckWord(store, w); !s.ok()) return s;
  if (noise.size() != store.dim()) {
    return absl::InvalidArgumentError(
        absl::StrCat("DimensionMismatch: noise has ", noise.size(),
                     " components, store dimension is ", store.dim()));
  }
  return store.NearestWord(Shifted(store, w, noise));
}

absl::StatusOr<WordId> PerturbBaseline(const EmbeddingStore& store,
                                       RngStream& rng, WordId w,
                                       double epsilon) {
  if (absl::Status s = CheckWord(store, w); !s.ok()) return s;
  auto param = MultivariateLaplaceParam::Create(store.dim(), epsilon);
  if (!param.ok()) return param.status();
  const std::vector<double> z = SampleMultivariateLaplace(rng, *param);
  return DiscretizeNoisy(store, w, z);
}

absl::StatusOr<double> KdeLogPrior(const EmbeddingStore& store,
                                   std::span<const double> z, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    return absl::InvalidArgumentError(
        absl::StrCat("sigma must be positive, got ", sigma));
  }
  if (z.size() != store.dim()) {
    return absl::InvalidArgumentError(
        absl::StrCat("DimensionMismatch: point has ", z.size(),
                     " components, store dimension is ", store.dim()));
  }
  return KdeLogPriorUnchecked(store, z, sigma);
}

double MhAcceptanceProbability(double log_target_current,
                               double log_target_proposal) {
  const double log_ratio = log_target_proposal - log_target_current;
  return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}

absl::StatusOr<DensityDraw> PerturbDensity(const EmbeddingStore& store,
                                           RngStream& rng, WordId w,
                                           double epsilon, double sigma,
                                           const MhParams& mh) {
  if (absl::Status s = CheckWord(store, w); !s.ok()) return s;
  if (absl::Status s = CheckEpsilon(epsilon); !s.ok()) return s;
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    return absl::InvalidArgumentError(
        absl::StrCat("sigma must be positive, got ", sigma));
  }
  if (!mh.proposal_step.has_value() || !(*mh.proposal_step > 0.0)) {
    return absl::InvalidArgumentError("mh proposal_step must be set and positive");
  }
  if (mh.thin == 0) {
    return absl::InvalidArgumentError("mh thin must be at least 1");
  }
  const double step = *mh.proposal_step;
  auto log_target = [&](std::span<const double> x) {
    return KdeLogPriorUnchecked(store, x, sigma) -
           epsilon * DistanceToPoint(store, w, x);
  };

  std::span<const double> origin = store.vector(w);
  std::vector<double> state(origin.begin(), origin.end());
  std::vector<double> proposal(state.size());
  double current = log_target(state);
  const size_t steps = mh.burn_in + mh.thin;
  size_t accepted = 0;
  for (size_t t = 0; t < steps; ++t) {
    for (size_t j = 0; j < state.size(); ++j) {
      proposal[j] = state[j] + step * rng.StandardNormal();
    }
    const double candidate = log_target(proposal);
    // Compare in log space: accept iff log U < log p(x') - log p(x).
    if (std::log(rng.UniformOpen01()) < candidate - current) {
      std::swap(state, proposal);
      current = candidate;
      ++accepted;
    }
  }
  for (double x : state) {
    if (!std::isfinite(x)) {
      return absl::InternalError("Metropolis-Hastings chain diverged");
    }
  }
  auto word = store.NearestWord(state);
  if (!word.ok()) return word.status();
  return DensityDraw{*word, static_cast<double>(accepted) /
                                static_cast<double>(steps)};
}

double SmoothCalibratedEpsilon(double epsilon,
                               const SensitivityProfile& profile, WordId w) {
  // global == 0 means every vector coincides; there is nothing to rescale.
  if (!(profile.global > 0.0)) return epsilon;
  const double smooth = profile.smooth_at(w);
  if (!(smooth > 0.0)) return std::numeric_limits<double>::infinity();
  return epsilon * profile.global / smooth;
}

absl::StatusOr<WordId> PerturbSmooth(const EmbeddingStore& store,
                                     RngStream& rng, WordId w, double epsilon,
                                     const SensitivityProfile& profile) {
  if (absl::Status s = CheckWord(store, w); !s.ok()) return s;
  if (profile.smooth.size() != store.size() ||
      profile.store_fingerprint != store.fingerprint()) {
    return absl::InvalidArgumentError(
        "MismatchedProfile: sensitivity profile was built from another store");
  }
  const double scaled_epsilon = SmoothCalibratedEpsilon(epsilon, profile, w);
  if (std::isinf(scaled_epsilon)) {
    const std::vector<double> zero(store.dim(), 0.0);
    return DiscretizeNoisy(store, w, zero);
  }
  return PerturbBaseline(store, rng, w, scaled_epsilon);
}

absl::StatusOr<TruncatedDraw> PerturbTruncDistance(const EmbeddingStore& store,
                                                   RngStream& rng, WordId w,
                                                   double epsilon, double tau,
                                                   TruncStrategy strategy) {
  if (absl::Status s = CheckWord(store, w); !s.ok()) return s;
  auto param = MultivariateLaplaceParam::Create(store.dim(), epsilon);
  if (!param.ok()) return param.status();
  if (!(tau > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("tau must be positive, got ", tau));
  }
  std::vector<WordId> admissible;
  std::vector<WordId> far;
  for (size_t i = 0; i < store.size(); ++i) {
    const WordId u(i);
    if (u == w || *store.Distance(w, u) <= tau) {
      admissible.push_back(u);
    } else {
      far.push_back(u);
    }
  }

  TruncPath path = TruncPath::kInside;
  if (strategy == TruncStrategy::kResidual) {
    if (far.empty()) {
      path = TruncPath::kFallbackProject;
    } else {
      const double p_inside = LaplaceRadiusCdf(*param, tau);
      if (rng.Uniform01() >= p_inside) {
        const WordId pick = far[rng.UniformInclusive(far.size() - 1)];
        return TruncatedDraw{pick, TruncPath::kResidual};
      }
    }
  }
  auto z = SampleMultivariateLaplaceTruncated(rng, *param, tau);
  if (!z.ok()) return z.status();
  auto word = store.NearestWordAmong(Shifted(store, w, *z), admissible);
  if (!word.ok()) return word.status();
  return TruncatedDraw{*word, path};
}

absl::StatusOr<WordId> PerturbTruncKnn(const EmbeddingStore& store,
                                       RngStream& rng, WordId w, double epsilon,
                                       size_t k, double k_jitter) {
  if (absl::Status s = CheckWord(store, w); !s.ok()) return s;
  auto param = MultivariateLaplaceParam::Create(store.dim(), epsilon);
  if (!param.ok()) return param.status();
  if (store.size() < 2 || k == 0 || k > store.size() - 1) {
    return absl::OutOfRangeError(absl::StrCat(
        "k must be in [1, ", store.size() - 1, "], got ", k));
  }
  size_t effective_k = k;
  if (k_jitter > 0.0) {
    auto jitter = SampleLaplace(rng, k_jitter);
    if (!jitter.ok()) return jitter.status();
    const double jittered = static_cast<double>(k) + std::round(*jitter);
    effective_k = static_cast<size_t>(
        std::clamp(jittered, 1.0, static_cast<double>(store.size() - 1)));
  }
  auto neighbors = store.KNearest(w, effective_k, /*include_self=*/false);
  if (!neighbors.ok()) return neighbors.status();
  std::vector<WordId> candidates;
  candidates.reserve(effective_k + 1);
  candidates.push_back(w);
  for (const Neighbor& n : neighbors->entries) candidates.push_back(n.word);

  const std::vector<double> z = SampleMultivariateLaplace(rng, *param);
  return store.NearestWordAmong(Shifted(store, w, z), candidates);
}

absl::StatusOr<Mechanism> Mechanism::Create(const EmbeddingStore& store,
                                            MechanismConfig config) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  Mechanism mechanism(store, std::move(config));
  MechanismParams& params = mechanism.config_.params;
  if (auto* p = std::get_if<DensityParams>(&params)) {
    if (store.size() < 2) {
      // A single word has no geometry to tune against; any scale works.
      if (!p->sigma.has_value()) p->sigma = 1.0;
      if (!p->mh.proposal_step.has_value()) p->mh.proposal_step = 1.0;
    } else {
      if (!p->sigma.has_value()) {
        auto median = MedianNearestNeighborDistance(store);
        if (!median.ok()) return median.status();
        p->sigma = *median > 0.0 ? *median : 1.0;
      }
      if (!p->mh.proposal_step.has_value()) {
        auto mean = MeanNearestNeighborDistance(store);
        if (!mean.ok()) return mean.status();
        p->mh.proposal_step = *mean > 0.0 ? *mean : 1.0;
      }
    }
  } else if (auto* p = std::get_if<SmoothParams>(&params)) {
    auto profile = BuildProfile(store, p->beta);
    if (!profile.ok()) return profile.status();
    mechanism.profile_ = *std::move(profile);
  } else if (auto* p = std::get_if<TruncKnnParams>(&params)) {
    if (store.size() < 2 || p->k > store.size() - 1) {
      return absl::OutOfRangeError(absl::StrCat(
          "k must be in [1, ", store.size() - 1, "], got ", p->k));
    }
  }
  return mechanism;
}

absl::StatusOr<WordId> Mechanism::Perturb(RngStream& rng, WordId w) const {
  auto outcome = PerturbDetailed(rng, w);
  if (!outcome.ok()) return outcome.status();
  return outcome->word;
}

absl::StatusOr<PerturbOutcome> Mechanism::PerturbDetailed(RngStream& rng,
                                                          WordId w) const {
  const EmbeddingStore& store = *store_;
  const double epsilon = config_.epsilon;
  PerturbOutcome outcome;
  switch (config_.variant()) {
    case MechanismVariant::kBaseline: {
      auto word = PerturbBaseline(store, rng, w, epsilon);
      if (!word.ok()) return word.status();
      outcome.word = *word;
      break;
    }
    case MechanismVariant::kDensity: {
      const auto& p = std::get<DensityParams>(config_.params);
      auto draw = PerturbDensity(store, rng, w, epsilon, *p.sigma, p.mh);
      if (!draw.ok()) return draw.status();
      outcome.word = draw->word;
      outcome.acceptance_rate = draw->acceptance_rate;
      break;
    }
    case MechanismVariant::kSmooth: {
      auto word = PerturbSmooth(store, rng, w, epsilon, *profile_);
      if (!word.ok()) return word.status();
      outcome.word = *word;
      break;
    }
    case MechanismVariant::kTruncDistance: {
      const auto& p = std::get<TruncDistanceParams>(config_.params);
      auto draw = PerturbTruncDistance(store, rng, w, epsilon, p.tau, p.strategy);
      if (!draw.ok()) return draw.status();
      outcome.word = draw->word;
      outcome.trunc_path = draw->path;
      break;
    }
    case MechanismVariant::kTruncKnn: {
      const auto& p = std::get<TruncKnnParams>(config_.params);
      auto word = PerturbTruncKnn(store, rng, w, epsilon, p.k, p.k_jitter);
      if (!word.ok()) return word.status();
      outcome.word = *word;
      break;
    }
  }
  return outcome;
}

absl::StatusOr<std::vector<WordId>> PerturbSentence(
    const EmbeddingStore& store, RngStream& rng,
    std::span<const WordId> words, const MechanismConfig& config) {
  for (WordId w : words) {
    if (absl::Status s = CheckWord(store, w); !s.ok()) return s;
  }
  auto mechanism = Mechanism::Create(store, config);
  if (!mechanism.ok()) return mechanism.status();
  std::vector<WordId> out;
  out.reserve(words.size());
  for (WordId w : words) {
    auto word = mechanism->Perturb(rng, w);
    if (!word.ok()) return word.status();
    out.push_back(*word);
  }
  return out;
}

absl::StatusOr<TransitionMatrix> BuildTransitionMatrix(
    const Mechanism& mechanism, const RngStream& rng,
    uint64_t samples_per_word, size_t workers) {
  if (samples_per_word == 0) {
    return absl::InvalidArgumentError("samples_per_word must be at least 1");
  }
  const EmbeddingStore& store = mechanism.store();
  const size_t n = store.size();
  std::vector<uint64_t> counts(n * n, 0);
  absl::Status status = internal::ParallelFor(n, workers, [&](size_t row) {
    RngStream row_rng = rng.Fork(row);
    for (uint64_t s = 0; s < samples_per_word; ++s) {
      auto out = mechanism.Perturb(row_rng, WordId(row));
      if (!out.ok()) return out.status();
      ++counts[row * n + out->index()];
    }
    return absl::OkStatus();
  });
  if (!status.ok()) return status;
  return TransitionMatrix::FromCounts(n, std::move(counts), samples_per_word,
                                      store.fingerprint());
}

absl::StatusOr<TransitionMatrix> BuildTransitionMatrix(
    const EmbeddingStore& store, const RngStream& rng,
    const MechanismConfig& config, uint64_t samples_per_word, size_t workers) {
  auto mechanism = Mechanism::Create(store, config);
  if (!mechanism.ok()) return mechanism.status();
  return BuildTransitionMatrix(*mechanism, rng, samples_per_word, workers);
}

}  // namespace dxtext
