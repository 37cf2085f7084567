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

#include "dxtext/analysis.h"

#include <cmath>
#include <limits>
#include <map>
#include <optional>

#include "absl/strings/str_cat.h"

namespace dxtext {
namespace {

constexpr double kPriorSumTolerance = 1e-9;

WordId SampleCategorical(RngStream& rng, std::span<const double> probs) {
  const double u = rng.Uniform01();
  double cumulative = 0.0;
  size_t last_nonzero = 0;
  for (size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last_nonzero = i;
    cumulative += probs[i];
    if (u < cumulative) return WordId(i);
  }
  return WordId(last_nonzero);
}

}  // namespace

WordMechanism AsWordMechanism(const Mechanism& mechanism) {
  return [&mechanism](RngStream& rng, WordId w) {
    return mechanism.Perturb(rng, w);
  };
}

absl::StatusOr<DeniabilityStats> ComputeDeniabilityStats(
    const EmbeddingStore& store, RngStream& rng,
    const WordMechanism& mechanism, WordId w, uint64_t n_trials) {
  if (!store.Contains(w)) {
    return absl::OutOfRangeError(
        absl::StrCat("InvalidWordId: ", w.index(), " not below ", store.size()));
  }
  if (n_trials == 0) {
    return absl::InvalidArgumentError("n_trials must be at least 1");
  }
  std::map<WordId, uint64_t> counts;
  for (uint64_t t = 0; t < n_trials; ++t) {
    auto out = mechanism(rng, w);
    if (!out.ok()) return out.status();
    ++counts[*out];
  }
  DeniabilityStats stats;
  stats.word = w;
  stats.n_trials = n_trials;
  stats.support_size = counts.size();
  const double n = static_cast<double>(n_trials);
  if (auto it = counts.find(w); it != counts.end()) {
    stats.p_unchanged = static_cast<double>(it->second) / n;
  }
  for (const auto& [word, count] : counts) {
    const double p = static_cast<double>(count) / n;
    stats.entropy -= p * std::log(p);
  }
  // -p log p summed in floating point can land a hair below zero.
  stats.entropy = std::max(0.0, stats.entropy);
  return stats;
}

absl::StatusOr<DeniabilityStats> ComputeDeniabilityStats(
    const EmbeddingStore& store, RngStream& rng, const MechanismConfig& config,
    WordId w, uint64_t n_trials) {
  auto mechanism = Mechanism::Create(store, config);
  if (!mechanism.ok()) return mechanism.status();
  return ComputeDeniabilityStats(store, rng, AsWordMechanism(*mechanism), w,
                                 n_trials);
}

absl::StatusOr<MetricDpReport> VerifyMetricDp(const TransitionMatrix& matrix,
                                              const EmbeddingStore& store,
                                              double epsilon) {
  if (absl::Status s = matrix.CheckMatches(store); !s.ok()) return s;
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must be non-negative, got ", epsilon));
  }
  const size_t size = matrix.size();
  const uint64_t samples = matrix.sample_count();
  const bool sampled = samples > 0;
  const double n = static_cast<double>(samples);
  const double zero_upper =
      sampled ? -std::expm1(std::log(kClopperPearsonLevel) / n) : 0.0;

  MetricDpReport report;
  report.epsilon = epsilon;
  report.sample_count = samples;
  report.max_violation = -std::numeric_limits<double>::infinity();
  report.max_excess = -std::numeric_limits<double>::infinity();

  for (size_t a = 0; a < size; ++a) {
    for (size_t b = 0; b < size; ++b) {
      if (a == b) continue;
      const double bound = epsilon * *store.Distance(WordId(a), WordId(b));
      for (size_t y = 0; y < size; ++y) {
        const double p1 = matrix.at(WordId(a), WordId(y));
        if (p1 <= 0.0) continue;
        double p2 = matrix.at(WordId(b), WordId(y));
        double slack_var = 0.0;
        if (sampled) slack_var += (1.0 - p1) / (n * p1);
        if (p2 <= 0.0 && sampled) {
          p2 = zero_upper;
          ++report.zero_estimate_substitutions;
        } else if (sampled) {
          slack_var += (1.0 - p2) / (n * p2);
        }
        const double violation =
            p2 > 0.0 ? std::log(p1) - std::log(p2) - bound
                     : std::numeric_limits<double>::infinity();
        const double slack = kSlackStandardErrors * std::sqrt(slack_var);
        const double excess = violation - slack;
        const WordTriple triple{WordId(a), WordId(b), WordId(y)};
        ++report.triples_checked;
        if (violation > report.max_violation) {
          report.max_violation = violation;
          report.worst_triple = triple;
          report.slack_at_worst = slack;
        }
        if (excess > report.max_excess) {
          report.max_excess = excess;
          report.most_significant_triple = triple;
        }
        if (excess > 0.0) ++report.significant_violations;
      }
    }
  }
  report.private_within_slack = report.significant_violations == 0;
  return report;
}

absl::Status ValidatePrior(std::span<const double> prior, size_t size) {
  if (prior.size() != size) {
    return absl::InvalidArgumentError(absl::StrCat(
        "prior has ", prior.size(), " entries, expected ", size));
  }
  double sum = 0.0;
  for (double p : prior) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      return absl::InvalidArgumentError("prior entries must be non-negative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kPriorSumTolerance) {
    return absl::InvalidArgumentError(
        absl::StrCat("prior sums to ", sum, ", not 1"));
  }
  return absl::OkStatus();
}

absl::StatusOr<Posterior> ComputePosterior(std::span<const double> prior,
                                           const TransitionMatrix& matrix,
                                           WordId observed) {
  if (absl::Status s = ValidatePrior(prior, matrix.size()); !s.ok()) return s;
  if (observed.index() >= matrix.size()) {
    return absl::OutOfRangeError(absl::StrCat(
        "InvalidWordId: ", observed.index(), " not below ", matrix.size()));
  }
  Posterior post{observed, std::vector<double>(matrix.size())};
  double evidence = 0.0;
  for (size_t w = 0; w < matrix.size(); ++w) {
    post.probs[w] = prior[w] * matrix.at(WordId(w), observed);
    evidence += post.probs[w];
  }
  if (!(evidence > 0.0)) {
    return absl::FailedPreconditionError(absl::StrCat(
        "UnreachableObservation: output ", observed.index(),
        " has zero probability under the prior and matrix"));
  }
  for (double& p : post.probs) p /= evidence;
  return post;
}

absl::StatusOr<WordId> OptimalAttack(const EmbeddingStore& store,
                                     const Posterior& posterior) {
  if (posterior.probs.size() != store.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("posterior has ", posterior.probs.size(),
                     " entries, store has ", store.size(), " words"));
  }
  std::vector<size_t> support;
  for (size_t w = 0; w < store.size(); ++w) {
    if (posterior.probs[w] > 0.0) support.push_back(w);
  }
  WordId best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (size_t g = 0; g < store.size(); ++g) {
    double cost = 0.0;
    for (size_t w : support) {
      cost += posterior.probs[w] *
              std::sqrt(store.SquaredDistanceTo(WordId(g), store.vector(WordId(w))));
    }
    if (cost < best_cost) {
      best_cost = cost;
      best = WordId(g);
    }
  }
  return best;
}

absl::StatusOr<double> AttackAccuracy(const EmbeddingStore& store,
                                      RngStream& rng,
                                      const TransitionMatrix& attacker_model,
                                      const WordMechanism& mechanism,
                                      std::span<const double> prior,
                                      uint64_t n_trials) {
  if (absl::Status s = attacker_model.CheckMatches(store); !s.ok()) return s;
  if (absl::Status s = ValidatePrior(prior, store.size()); !s.ok()) return s;
  if (n_trials == 0) {
    return absl::InvalidArgumentError("n_trials must be at least 1");
  }
  // The guess depends only on the observation, so cache it per output word.
  std::vector<std::optional<WordId>> guesses(store.size());
  auto guess_for = [&](WordId observed) -> absl::StatusOr<WordId> {
    if (guesses[observed.index()].has_value()) return *guesses[observed.index()];
    auto post = ComputePosterior(prior, attacker_model, observed);
    if (!post.ok()) {
      if (!absl::IsFailedPrecondition(post.status())) return post.status();
      post = Posterior{observed, std::vector<double>(prior.begin(), prior.end())};
    }
    auto guess = OptimalAttack(store, *post);
    if (!guess.ok()) return guess.status();
    guesses[observed.index()] = *guess;
    return *guess;
  };

  uint64_t hits = 0;
  for (uint64_t t = 0; t < n_trials; ++t) {
    const WordId input = SampleCategorical(rng, prior);
    auto observed = mechanism(rng, input);
    if (!observed.ok()) return observed.status();
    auto guess = guess_for(*observed);
    if (!guess.ok()) return guess.status();
    if (*guess == input) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n_trials);
}

absl::StatusOr<double> AttackAccuracy(const EmbeddingStore& store,
                                      RngStream& rng,
                                      const MechanismConfig& config,
                                      std::span<const double> prior,
                                      uint64_t n_trials,
                                      uint64_t model_samples_per_word,
                                      size_t workers) {
  auto mechanism = Mechanism::Create(store, config);
  if (!mechanism.ok()) return mechanism.status();
  auto model = BuildTransitionMatrix(*mechanism, rng.Fork(StreamPurpose::kMatrix),
                                     model_samples_per_word, workers);
  if (!model.ok()) return model.status();
  return AttackAccuracy(store, rng, *model, AsWordMechanism(*mechanism), prior,
                        n_trials);
}

std::vector<double> UniformPrior(size_t size) {
  return std::vector<double>(size, 1.0 / static_cast<double>(size));
}

absl::StatusOr<std::vector<double>> ZipfPrior(size_t size, double s) {
  if (size == 0) return absl::InvalidArgumentError("empty vocabulary");
  if (!(s >= 0.0) || !std::isfinite(s)) {
    return absl::InvalidArgumentError(
        absl::StrCat("Zipf exponent must be non-negative, got ", s));
  }
  std::vector<double> p(size);
  double total = 0.0;
  for (size_t r = 0; r < size; ++r) {
    p[r] = std::pow(static_cast<double>(r + 1), -s);
    total += p[r];
  }
  for (double& x : p) x /= total;
  return p;
}

}  // namespace dxtext
