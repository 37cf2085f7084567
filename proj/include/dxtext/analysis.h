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

// Empirical privacy analysis of word mechanisms.
//
// Plausible deniability is summarized per word by three Monte Carlo
// statistics: the probability the word survives unchanged, the number of
// distinct substitutes observed, and the entropy (nats) of the output.
//
// The attacker is informed: it knows the prior over inputs and the
// mechanism's transition matrix, computes the Bayes posterior over inputs for
// an observed output, and guesses the word minimizing posterior-expected
// embedding distance.

#ifndef DXTEXT_ANALYSIS_H_
#define DXTEXT_ANALYSIS_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "dxtext/embedding_store.h"
#include "dxtext/randomizers.h"
#include "dxtext/samplers.h"
#include "dxtext/transition_matrix.h"

namespace dxtext {

// Any randomized word-to-word map. Lets analyses run over test stubs as well
// as real mechanisms.
using WordMechanism = std::function<absl::StatusOr<WordId>(RngStream&, WordId)>;

// Wraps `mechanism` by reference; it must outlive the returned function.
WordMechanism AsWordMechanism(const Mechanism& mechanism);

struct DeniabilityStats {
  WordId word;
  uint64_t n_trials = 0;
  double p_unchanged = 0.0;
  size_t support_size = 0;
  double entropy = 0.0;
};

absl::StatusOr<DeniabilityStats> ComputeDeniabilityStats(
    const EmbeddingStore& store, RngStream& rng,
    const WordMechanism& mechanism, WordId w, uint64_t n_trials);

absl::StatusOr<DeniabilityStats> ComputeDeniabilityStats(
    const EmbeddingStore& store, RngStream& rng, const MechanismConfig& config,
    WordId w, uint64_t n_trials);

struct WordTriple {
  WordId from;
  WordId other;
  WordId output;
};

// Per-output check of Pr[M(from) = y] <= e^{eps d(from, other)} Pr[M(other) = y]
// on an estimated transition matrix.
//
// For every ordered pair (from, other) and output y with a non-zero estimate
// for `from`, violation = ln p(from->y) - ln p(other->y) - eps * d(from, other).
// When the matrix is sampled (sample_count > 0):
//   * a zero estimate for `other` is replaced by its one-sided Clopper-Pearson
//     upper bound at level 1e-3, i.e. 1 - 0.001^{1/n};
//   * slack is 3 standard errors of the log-ratio by the delta method,
//     3 * sqrt((1-p1)/(n p1) + (1-p2)/(n p2)), with the p2 term dropped for
//     substituted entries (the bound already is an upper confidence limit).
// Exact matrices (sample_count == 0) get no slack and zero estimates are true
// zeros, so a support mismatch is an infinite violation.
struct MetricDpReport {
  double epsilon = 0.0;
  uint64_t sample_count = 0;
  size_t triples_checked = 0;
  double max_violation = 0.0;
  WordTriple worst_triple;
  double slack_at_worst = 0.0;
  // max of violation - slack, and where it occurs.
  double max_excess = 0.0;
  WordTriple most_significant_triple;
  size_t significant_violations = 0;
  size_t zero_estimate_substitutions = 0;
  // No triple exceeds its slack.
  bool private_within_slack = true;
};

inline constexpr double kClopperPearsonLevel = 1e-3;
inline constexpr double kSlackStandardErrors = 3.0;

absl::StatusOr<MetricDpReport> VerifyMetricDp(const TransitionMatrix& matrix,
                                              const EmbeddingStore& store,
                                              double epsilon);

struct Posterior {
  WordId observed;
  std::vector<double> probs;
};

// Pr(w | observed) = prior(w) M[w][observed] / sum_v prior(v) M[v][observed].
// Fails with UnreachableObservation when the denominator is zero.
absl::StatusOr<Posterior> ComputePosterior(std::span<const double> prior,
                                           const TransitionMatrix& matrix,
                                           WordId observed);

// argmin_g sum_w Pr(w | observed) d(g, w); ties go to the lowest id.
absl::StatusOr<WordId> OptimalAttack(const EmbeddingStore& store,
                                     const Posterior& posterior);

// Fraction of `n_trials` in which the optimal attack recovers the input.
// Inputs are drawn from `prior`, observations from `mechanism`, and the
// attacker's likelihood model is `attacker_model`. Observations the model
// deems unreachable are attacked with the prior alone.
absl::StatusOr<double> AttackAccuracy(const EmbeddingStore& store,
                                      RngStream& rng,
                                      const TransitionMatrix& attacker_model,
                                      const WordMechanism& mechanism,
                                      std::span<const double> prior,
                                      uint64_t n_trials);

// Builds the attacker model from `model_samples_per_word` runs of the
// configured mechanism (on rng.Fork(StreamPurpose::kMatrix)), then attacks.
absl::StatusOr<double> AttackAccuracy(const EmbeddingStore& store,
                                      RngStream& rng,
                                      const MechanismConfig& config,
                                      std::span<const double> prior,
                                      uint64_t n_trials,
                                      uint64_t model_samples_per_word = 10000,
                                      size_t workers = 1);

absl::Status ValidatePrior(std::span<const double> prior, size_t size);

std::vector<double> UniformPrior(size_t size);

// p(rank r) proportional to r^{-s}, ranks in vocabulary order starting at 1.
absl::StatusOr<std::vector<double>> ZipfPrior(size_t size, double s);

}  // namespace dxtext

#endif  // DXTEXT_ANALYSIS_H_
