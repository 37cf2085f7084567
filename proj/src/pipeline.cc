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

#include "dxtext/pipeline.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

#include "absl/strings/str_cat.h"
#include "parallel.h"

namespace dxtext {
namespace {

uint64_t Total(const Histogram& h) {
  uint64_t total = 0;
  for (const auto& [w, c] : h) total += c;
  return total;
}

}  // namespace

absl::Status ProtocolConfig::Validate() const {
  if (n_users == 0 || m_per_user == 0) {
    return absl::InvalidArgumentError("n_users and m_per_user must be positive");
  }
  if (absl::Status s = mechanism.Validate(); !s.ok()) return s;
  for (const auto& a : amplifiers) {
    if (absl::Status s = ValidateAmplifier(a); !s.ok()) return s;
  }
  if (const auto* z = std::get_if<ZipfCorpus>(&corpus)) {
    if (!(z->s >= 0.0) || !std::isfinite(z->s)) {
      return absl::InvalidArgumentError(
          absl::StrCat("Zipf exponent must be non-negative, got ", z->s));
    }
  } else if (std::get<TokenCorpus>(corpus).tokens.empty()) {
    return absl::InvalidArgumentError("corpus has no tokens");
  }
  return absl::OkStatus();
}

absl::StatusOr<UserInputs> ResolveCorpus(const EmbeddingStore& store,
                                         const RngStream& root,
                                         const ProtocolConfig& config) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  UserInputs inputs(config.n_users);
  if (const auto* zipf = std::get_if<ZipfCorpus>(&config.corpus)) {
    auto prior = ZipfPrior(store.size(), zipf->s);
    if (!prior.ok()) return prior.status();
    std::vector<double> cdf(prior->size());
    double acc = 0.0;
    for (size_t i = 0; i < cdf.size(); ++i) cdf[i] = acc += (*prior)[i];
    const RngStream corpus_rng = root.Fork(StreamPurpose::kCorpus);
    for (uint64_t u = 0; u < config.n_users; ++u) {
      RngStream rng = corpus_rng.Fork(u);
      inputs[u].reserve(config.m_per_user);
      for (uint64_t j = 0; j < config.m_per_user; ++j) {
        const double x = rng.Uniform01() * acc;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), x);
        const size_t idx = std::min<size_t>(it - cdf.begin(), cdf.size() - 1);
        inputs[u].push_back(WordId(idx));
      }
    }
    return inputs;
  }
  const auto& tokens = std::get<TokenCorpus>(config.corpus).tokens;
  for (uint64_t u = 0; u < config.n_users; ++u) {
    inputs[u].reserve(config.m_per_user);
    for (uint64_t j = 0; j < config.m_per_user; ++j) {
      const std::string& token = tokens[(u * config.m_per_user + j) % tokens.size()];
      auto id = store.Find(token);
      if (!id.has_value()) {
        return absl::InvalidArgumentError(
            absl::StrCat("OutOfVocabulary: corpus word '", token, "'"));
      }
      inputs[u].push_back(*id);
    }
  }
  return inputs;
}

absl::StatusOr<std::vector<Message>> RunLocalPhase(
    const WordMechanism& mechanism, const RngStream& root,
    const UserInputs& inputs, size_t workers) {
  const RngStream local_rng = root.Fork(StreamPurpose::kLocalizer);
  std::vector<std::vector<Message>> per_user(inputs.size());
  absl::Status status =
      internal::ParallelFor(inputs.size(), workers, [&](size_t u) {
        RngStream rng = local_rng.Fork(u);
        per_user[u].reserve(inputs[u].size());
        for (size_t j = 0; j < inputs[u].size(); ++j) {
          auto out = mechanism(rng, inputs[u][j]);
          if (!out.ok()) return out.status();
          per_user[u].push_back(Message{static_cast<int64_t>(u),
                                        static_cast<int64_t>(j), *out});
        }
        return absl::OkStatus();
      });
  if (!status.ok()) return status;
  std::vector<Message> messages;
  for (auto& batch : per_user) {
    messages.insert(messages.end(), batch.begin(), batch.end());
  }
  return messages;
}

absl::StatusOr<std::vector<Message>> RunLocalPhase(
    const EmbeddingStore& store, const RngStream& root,
    const MechanismConfig& config, const UserInputs& inputs, size_t workers) {
  auto mechanism = Mechanism::Create(store, config);
  if (!mechanism.ok()) return mechanism.status();
  return RunLocalPhase(AsWordMechanism(*mechanism), root, inputs, workers);
}

absl::StatusOr<std::vector<Message>> RunAmplifiers(
    const RngStream& root, std::span<const Message> messages,
    std::span<const AmplifierConfig> amplifiers) {
  const RngStream amp_rng = root.Fork(StreamPurpose::kAmplifier);
  std::vector<Message> current(messages.begin(), messages.end());
  for (size_t i = 0; i < amplifiers.size(); ++i) {
    RngStream rng = amp_rng.Fork(i);
    auto next = ApplyAmplifier(rng, current, amplifiers[i]);
    if (!next.ok()) return next.status();
    current = *std::move(next);
  }
  return current;
}

Histogram RunCurator(std::span<const Message> messages) {
  Histogram h;
  for (const Message& m : messages) ++h[m.payload];
  return h;
}

double HistogramL1(const Histogram& a, const Histogram& b) {
  std::set<WordId> keys;
  for (const auto& [w, c] : a) keys.insert(w);
  for (const auto& [w, c] : b) keys.insert(w);
  double l1 = 0.0;
  for (WordId w : keys) {
    const auto ia = a.find(w);
    const auto ib = b.find(w);
    const double ca = ia == a.end() ? 0.0 : static_cast<double>(ia->second);
    const double cb = ib == b.end() ? 0.0 : static_cast<double>(ib->second);
    l1 += std::abs(ca - cb);
  }
  return l1;
}

double HistogramTv(const Histogram& a, const Histogram& b) {
  const double ta = static_cast<double>(Total(a));
  const double tb = static_cast<double>(Total(b));
  if (ta == 0.0 || tb == 0.0) return ta == tb ? 0.0 : 1.0;
  std::set<WordId> keys;
  for (const auto& [w, c] : a) keys.insert(w);
  for (const auto& [w, c] : b) keys.insert(w);
  double tv = 0.0;
  for (WordId w : keys) {
    const auto ia = a.find(w);
    const auto ib = b.find(w);
    const double pa = ia == a.end() ? 0.0 : static_cast<double>(ia->second) / ta;
    const double pb = ib == b.end() ? 0.0 : static_cast<double>(ib->second) / tb;
    tv += std::abs(pa - pb);
  }
  return std::min(1.0, 0.5 * tv);
}

absl::StatusOr<CuratorReport> RunProtocolWith(const EmbeddingStore& store,
                                              const ProtocolConfig& config,
                                              const WordMechanism& mechanism) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  const RngStream root(config.seed, 0);
  auto inputs = ResolveCorpus(store, root, config);
  if (!inputs.ok()) return inputs.status();
  auto local = RunLocalPhase(mechanism, root, *inputs, config.workers);
  if (!local.ok()) return local.status();
  auto released = RunAmplifiers(root, *local, config.amplifiers);
  if (!released.ok()) return released.status();

  CuratorReport report;
  for (const auto& user : *inputs) {
    for (WordId w : user) ++report.true_histogram[w];
  }
  report.histogram = RunCurator(*released);
  report.utility_l1 = HistogramL1(report.histogram, report.true_histogram);
  report.utility_tv = HistogramTv(report.histogram, report.true_histogram);
  report.local_messages = local->size();
  report.released_messages = released->size();

  double q_total = 1.0;
  bool subsampled = false;
  for (const auto& a : config.amplifiers) {
    if (const auto* s = std::get_if<SubsampleStage>(&a)) {
      q_total *= s->q;
      subsampled = true;
    }
  }
  if (subsampled) {
    auto amplified = ComputeAmplifiedEpsilon(config.mechanism.epsilon, q_total);
    if (!amplified.ok()) return amplified.status();
    report.amplified_epsilon = *amplified;
  }
  report.released = *std::move(released);
  return report;
}

absl::StatusOr<CuratorReport> RunProtocol(const EmbeddingStore& store,
                                          const ProtocolConfig& config) {
  auto mechanism = Mechanism::Create(store, config.mechanism);
  if (!mechanism.ok()) return mechanism.status();
  return RunProtocolWith(store, config, AsWordMechanism(*mechanism));
}

}  // namespace dxtext
