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

// Word-level d_X-private randomizers over an embedding space.
//
// Every mechanism maps an input word w to an output word by perturbing phi(w)
// in R^d and projecting back onto the vocabulary:
//
//   baseline        z ~ exp(-eps ||z||);  argmin_u ||phi(u) - phi(w) - z||
//   density         x ~ mu(x) exp(-eps ||x - phi(w)||) by Metropolis-Hastings,
//                   mu a Gaussian KDE over the vocabulary; argmin_u ||phi(u)-x||
//   smooth          baseline with eps scaled by global / smooth_beta(w)
//   trunc_distance  ||z|| <= tau and outputs restricted to d(w, u) <= tau,
//                   optionally spending the outside mass uniformly on far words
//   trunc_knn       baseline with the argmin restricted to {w} U kNN(w)
//
// Only the baseline carries a formal eps * d(w, w') guarantee. The others
// trade it for utility and are measured empirically (see analysis.h).

#ifndef DXTEXT_RANDOMIZERS_H_
#define DXTEXT_RANDOMIZERS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dxtext/embedding_store.h"
#include "dxtext/samplers.h"
#include "dxtext/sensitivity.h"
#include "dxtext/transition_matrix.h"

namespace dxtext {

enum class MechanismVariant { kBaseline, kDensity, kSmooth, kTruncDistance, kTruncKnn };
enum class TruncStrategy { kProject, kResidual };

std::string_view VariantName(MechanismVariant variant);
absl::StatusOr<MechanismVariant> ParseVariant(std::string_view name);
std::string_view TruncStrategyName(TruncStrategy strategy);
absl::StatusOr<TruncStrategy> ParseTruncStrategy(std::string_view name);

struct MhParams {
  size_t burn_in = 1000;
  size_t thin = 10;
  // Standard deviation of the isotropic Gaussian random-walk proposal.
  // Unset means the store's mean nearest-neighbor distance.
  std::optional<double> proposal_step;
};

struct BaselineParams {};
struct DensityParams {
  // KDE bandwidth. Unset means the store's median nearest-neighbor distance.
  std::optional<double> sigma;
  MhParams mh;
};
struct SmoothParams {
  double beta = 0.0;
};
struct TruncDistanceParams {
  double tau = 1.0;
  TruncStrategy strategy = TruncStrategy::kProject;
};
struct TruncKnnParams {
  size_t k = 1;
  // Scale of a rounded Laplace jitter on k, clamped to [1, |W|-1]. 0 is off.
  double k_jitter = 0.0;
};

using MechanismParams = std::variant<BaselineParams, DensityParams, SmoothParams,
                                     TruncDistanceParams, TruncKnnParams>;

struct MechanismConfig {
  double epsilon = 1.0;
  MechanismParams params;

  MechanismVariant variant() const {
    return static_cast<MechanismVariant>(params.index());
  }
  absl::Status Validate() const;
};

// Outcome path of a distance-truncated draw.
enum class TruncPath {
  kInside,           // truncated noise, projected onto the admissible set
  kResidual,         // uniform draw from the words farther than tau
  kFallbackProject,  // residual chosen but no far words exist
};

struct TruncatedDraw {
  WordId word;
  TruncPath path = TruncPath::kInside;
};

struct DensityDraw {
  WordId word;
  double acceptance_rate = 0.0;
};

// nearest_word(phi(w) + noise). Deterministic; the noise is supplied by the
// caller, which makes the discretization step testable in isolation.
absl::StatusOr<WordId> DiscretizeNoisy(const EmbeddingStore& store, WordId w,
                                       std::span<const double> noise);

absl::StatusOr<WordId> PerturbBaseline(const EmbeddingStore& store,
                                       RngStream& rng, WordId w,
                                       double epsilon);

// log sum_u exp(-||z - phi(u)||^2 / (2 sigma^2)), evaluated stably.
absl::StatusOr<double> KdeLogPrior(const EmbeddingStore& store,
                                   std::span<const double> z, double sigma);

// min(1, exp(log_target_proposal - log_target_current)) for a symmetric
// proposal.
double MhAcceptanceProbability(double log_target_current,
                               double log_target_proposal);

// Runs one fresh chain of burn_in + thin steps targeting
// mu(x) * exp(-epsilon * ||x - phi(w)||), started at phi(w), and discretizes
// its final state. `mh.proposal_step` must be set.
absl::StatusOr<DensityDraw> PerturbDensity(const EmbeddingStore& store,
                                           RngStream& rng, WordId w,
                                           double epsilon, double sigma,
                                           const MhParams& mh);

// epsilon * global / smooth(w): the noise scale shrinks where the smooth
// sensitivity is below the global one. Infinite when smooth(w) underflows to 0.
double SmoothCalibratedEpsilon(double epsilon,
                               const SensitivityProfile& profile, WordId w);

absl::StatusOr<WordId> PerturbSmooth(const EmbeddingStore& store,
                                     RngStream& rng, WordId w, double epsilon,
                                     const SensitivityProfile& profile);

absl::StatusOr<TruncatedDraw> PerturbTruncDistance(const EmbeddingStore& store,
                                                   RngStream& rng, WordId w,
                                                   double epsilon, double tau,
                                                   TruncStrategy strategy);

absl::StatusOr<WordId> PerturbTruncKnn(const EmbeddingStore& store,
                                       RngStream& rng, WordId w, double epsilon,
                                       size_t k, double k_jitter = 0.0);

struct PerturbOutcome {
  WordId word;
  std::optional<TruncPath> trunc_path;
  std::optional<double> acceptance_rate;
};

// A validated mechanism bound to a store, with store-dependent defaults
// resolved and the smooth-sensitivity profile precomputed. The store must
// outlive the mechanism. Perturb() is const and safe to call concurrently
// with distinct RNG streams.
class Mechanism {
 public:
  static absl::StatusOr<Mechanism> Create(const EmbeddingStore& store,
                                          MechanismConfig config);

  absl::StatusOr<WordId> Perturb(RngStream& rng, WordId w) const;
  absl::StatusOr<PerturbOutcome> PerturbDetailed(RngStream& rng,
                                                 WordId w) const;

  // Config with every default filled in.
  const MechanismConfig& config() const { return config_; }
  const EmbeddingStore& store() const { return *store_; }

 private:
  Mechanism(const EmbeddingStore& store, MechanismConfig config)
      : store_(&store), config_(std::move(config)) {}

  const EmbeddingStore* store_;
  MechanismConfig config_;
  std::optional<SensitivityProfile> profile_;
};

// Applies the configured mechanism independently at every position.
absl::StatusOr<std::vector<WordId>> PerturbSentence(
    const EmbeddingStore& store, RngStream& rng,
    std::span<const WordId> words, const MechanismConfig& config);

// Row w is the empirical output distribution of `samples_per_word` runs on w,
// drawn from rng.Fork(w). Rows are split across `workers` threads; the result
// does not depend on the worker count.
absl::StatusOr<TransitionMatrix> BuildTransitionMatrix(
    const EmbeddingStore& store, const RngStream& rng,
    const MechanismConfig& config, uint64_t samples_per_word,
    size_t workers = 1);

absl::StatusOr<TransitionMatrix> BuildTransitionMatrix(
    const Mechanism& mechanism, const RngStream& rng,
    uint64_t samples_per_word, size_t workers = 1);

}  // namespace dxtext

#endif  // DXTEXT_RANDOMIZERS_H_
