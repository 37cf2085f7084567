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

// Post-randomization amplifiers. They operate on message structure only and
// never look at what a payload means.

#ifndef DXTEXT_AMPLIFICATION_H_
#define DXTEXT_AMPLIFICATION_H_

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dxtext/embedding_store.h"
#include "dxtext/samplers.h"

namespace dxtext {

// One randomized submission. `user_id` is cleared once the message has been
// through a shuffler.
struct Message {
  std::optional<int64_t> user_id;
  int64_t slot = 0;
  WordId payload;

  friend bool operator==(const Message&, const Message&) = default;
};

struct ShuffleStage {};
struct SubsampleStage {
  double q = 1.0;
};
struct KThresholdStage {
  size_t k = 1;
};

using AmplifierConfig = std::variant<ShuffleStage, SubsampleStage, KThresholdStage>;

absl::Status ValidateAmplifier(const AmplifierConfig& config);
std::string_view AmplifierName(const AmplifierConfig& config);

// Permutes the batch with SamplePermutation() and strips provenance.
std::vector<Message> ShuffleBatch(RngStream& rng, std::span<const Message> batch);

// Keeps each message independently with probability q in (0, 1].
absl::StatusOr<std::vector<Message>> SubsampleBatch(
    RngStream& rng, std::span<const Message> batch, double q);

// Drops messages whose payload occurs fewer than k times in the batch.
// Survivors keep their relative order.
absl::StatusOr<std::vector<Message>> KThresholdBatch(
    std::span<const Message> batch, size_t k);

// Applies one stage.
absl::StatusOr<std::vector<Message>> ApplyAmplifier(
    RngStream& rng, std::span<const Message> batch,
    const AmplifierConfig& config);

// Warner's randomized response: keeps `bit` with probability
// e^eps / (1 + e^eps) and flips it otherwise.
absl::StatusOr<bool> RandomizedResponse(RngStream& rng, bool bit,
                                        double epsilon);

struct AmplifiedEpsilon {
  double value = 0.0;
  // Always true: q * eps is the first-order approximation, not a tight bound.
  bool approximate = true;
};

// Privacy of an eps-DP mechanism run on a q-fraction sub-sample: ~ q * eps.
absl::StatusOr<AmplifiedEpsilon> ComputeAmplifiedEpsilon(double epsilon,
                                                         double q);

// JSON-lines batch files: {"user": int|null, "slot": int, "word": string}.
absl::Status WriteBatchJsonl(const EmbeddingStore& store,
                             std::span<const Message> batch, std::ostream& out);
absl::StatusOr<std::vector<Message>> ReadBatchJsonl(const EmbeddingStore& store,
                                                    std::istream& in);

}  // namespace dxtext

#endif  // DXTEXT_AMPLIFICATION_H_
