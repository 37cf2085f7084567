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

// Localize-Amplify-Curate protocol simulation.
//
// n users each hold m words. Every word is randomized locally, the n*m
// messages go through an ordered chain of amplifiers, and the curator
// computes a word-frequency histogram. Utility is the distance between that
// histogram and the histogram of the original (pre-noise) words.
//
// Random streams, all derived from RngStream(seed, 0):
//   corpus     Fork(kCorpus).Fork(user)
//   localizer  Fork(kLocalizer).Fork(user)
//   amplifier  Fork(kAmplifier).Fork(stage index)
// so results do not depend on the number of worker threads.

#ifndef DXTEXT_PIPELINE_H_
#define DXTEXT_PIPELINE_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dxtext/amplification.h"
#include "dxtext/analysis.h"
#include "dxtext/embedding_store.h"
#include "dxtext/randomizers.h"
#include "dxtext/samplers.h"

namespace dxtext {

// Users draw words i.i.d. with p(rank r) proportional to r^{-s}; rank follows
// vocabulary order.
struct ZipfCorpus {
  double s = 1.1;
};

// Whitespace-separated tokens. User i's slot j takes token (i*m + j) modulo
// the token count.
struct TokenCorpus {
  std::string path;
  std::vector<std::string> tokens;
};

using CorpusSpec = std::variant<ZipfCorpus, TokenCorpus>;

struct ProtocolConfig {
  uint64_t n_users = 1;
  uint64_t m_per_user = 1;
  MechanismConfig mechanism;
  std::vector<AmplifierConfig> amplifiers;
  uint64_t seed = 0;
  CorpusSpec corpus = ZipfCorpus{};
  size_t workers = 1;

  absl::Status Validate() const;
};

using Histogram = std::map<WordId, uint64_t>;

struct CuratorReport {
  Histogram histogram;
  Histogram true_histogram;
  double utility_l1 = 0.0;
  double utility_tv = 0.0;
  uint64_t local_messages = 0;
  uint64_t released_messages = 0;
  // Present when the amplifier chain sub-samples: q_total * eps with q_total
  // the product of all sub-sampling fractions.
  std::optional<AmplifiedEpsilon> amplified_epsilon;
  // The amplified batch as seen by the curator.
  std::vector<Message> released;
};

// words[i] holds user i's m inputs.
using UserInputs = std::vector<std::vector<WordId>>;

absl::StatusOr<UserInputs> ResolveCorpus(const EmbeddingStore& store,
                                         const RngStream& root,
                                         const ProtocolConfig& config);

// Message (i, j) carries the mechanism's output on user i's j-th word.
// Output is ordered by (user, slot).
absl::StatusOr<std::vector<Message>> RunLocalPhase(
    const WordMechanism& mechanism, const RngStream& root,
    const UserInputs& inputs, size_t workers = 1);

absl::StatusOr<std::vector<Message>> RunLocalPhase(
    const EmbeddingStore& store, const RngStream& root,
    const MechanismConfig& config, const UserInputs& inputs,
    size_t workers = 1);

// Stages applied left to right; stage i draws from
// root.Fork(kAmplifier).Fork(i).
absl::StatusOr<std::vector<Message>> RunAmplifiers(
    const RngStream& root, std::span<const Message> messages,
    std::span<const AmplifierConfig> amplifiers);

Histogram RunCurator(std::span<const Message> messages);

double HistogramL1(const Histogram& a, const Histogram& b);
// Total variation between the normalized histograms.
double HistogramTv(const Histogram& a, const Histogram& b);

absl::StatusOr<CuratorReport> RunProtocol(const EmbeddingStore& store,
                                          const ProtocolConfig& config);

// Same, with the configured mechanism replaced by `mechanism`.
absl::StatusOr<CuratorReport> RunProtocolWith(const EmbeddingStore& store,
                                              const ProtocolConfig& config,
                                              const WordMechanism& mechanism);

}  // namespace dxtext

#endif  // DXTEXT_PIPELINE_H_
