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

#include "dxtext/amplification.h"

#include <cmath>
#include <map>
#include <string>

#include "absl/strings/str_cat.h"
#include "json.hpp"

namespace dxtext {

absl::Status ValidateAmplifier(const AmplifierConfig& config) {
  if (const auto* s = std::get_if<SubsampleStage>(&config)) {
    if (!(s->q > 0.0 && s->q <= 1.0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("sub-sampling fraction q must be in (0, 1], got ", s->q));
    }
  } else if (const auto* s = std::get_if<KThresholdStage>(&config)) {
    if (s->k == 0) return absl::InvalidArgumentError("k-threshold k must be >= 1");
  }
  return absl::OkStatus();
}

std::string_view AmplifierName(const AmplifierConfig& config) {
  switch (config.index()) {
    case 0:
      return "shuffle";
    case 1:
      return "subsample";
    default:
      return "kthreshold";
  }
}

std::vector<Message> ShuffleBatch(RngStream& rng,
                                  std::span<const Message> batch) {
  const std::vector<size_t> perm = SamplePermutation(rng, batch.size());
  std::vector<Message> out;
  out.reserve(batch.size());
  for (size_t i : perm) {
    Message m = batch[i];
    m.user_id.reset();
    out.push_back(m);
  }
  return out;
}

absl::StatusOr<std::vector<Message>> SubsampleBatch(
    RngStream& rng, std::span<const Message> batch, double q) {
  if (absl::Status s = ValidateAmplifier(SubsampleStage{q}); !s.ok()) return s;
  std::vector<Message> out;
  for (const Message& m : batch) {
    if (rng.Uniform01() < q) out.push_back(m);
  }
  return out;
}

absl::StatusOr<std::vector<Message>> KThresholdBatch(
    std::span<const Message> batch, size_t k) {
  if (absl::Status s = ValidateAmplifier(KThresholdStage{k}); !s.ok()) return s;
  std::map<WordId, size_t> counts;
  for (const Message& m : batch) ++counts[m.payload];
  std::vector<Message> out;
  for (const Message& m : batch) {
    if (counts[m.payload] >= k) out.push_back(m);
  }
  return out;
}

absl::StatusOr<std::vector<Message>> ApplyAmplifier(
    RngStream& rng, std::span<const Message> batch,
    const AmplifierConfig& config) {
  if (absl::Status s = ValidateAmplifier(config); !s.ok()) return s;
  if (std::holds_alternative<ShuffleStage>(config)) {
    return ShuffleBatch(rng, batch);
  }
  if (const auto* s = std::get_if<SubsampleStage>(&config)) {
    return SubsampleBatch(rng, batch, s->q);
  }
  return KThresholdBatch(batch, std::get<KThresholdStage>(config).k);
}

absl::StatusOr<bool> RandomizedResponse(RngStream& rng, bool bit,
                                        double epsilon) {
  if (!(epsilon >= 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must be non-negative, got ", epsilon));
  }
  // e^eps / (1 + e^eps) written to stay finite for large eps.
  const double keep = 1.0 / (1.0 + std::exp(-epsilon));
  return rng.Uniform01() < keep ? bit : !bit;
}

absl::StatusOr<AmplifiedEpsilon> ComputeAmplifiedEpsilon(double epsilon,
                                                         double q) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must be positive, got ", epsilon));
  }
  if (!(q > 0.0 && q <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("q must be in (0, 1], got ", q));
  }
  return AmplifiedEpsilon{q * epsilon, true};
}

absl::Status WriteBatchJsonl(const EmbeddingStore& store,
                             std::span<const Message> batch,
                             std::ostream& out) {
  for (const Message& m : batch) {
    if (!store.Contains(m.payload)) {
      return absl::OutOfRangeError(
          absl::StrCat("InvalidWordId: payload ", m.payload.index()));
    }
    nlohmann::ordered_json line;
    line["user"] = m.user_id.has_value() ? nlohmann::ordered_json(*m.user_id)
                                         : nlohmann::ordered_json(nullptr);
    line["slot"] = m.slot;
    line["word"] = store.word(m.payload);
    out << line.dump() << '\n';
  }
  if (!out) return absl::UnavailableError("write failed");
  return absl::OkStatus();
}

absl::StatusOr<std::vector<Message>> ReadBatchJsonl(const EmbeddingStore& store,
                                                    std::istream& in) {
  std::vector<Message> batch;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("slot") ||
        !j.contains("word") || !j["slot"].is_number_integer() ||
        !j["word"].is_string()) {
      return absl::InvalidArgumentError(
          absl::StrCat("malformed message on line ", line_no));
    }
    Message m;
    if (j.contains("user") && !j["user"].is_null()) {
      if (!j["user"].is_number_integer()) {
        return absl::InvalidArgumentError(
            absl::StrCat("malformed user on line ", line_no));
      }
      m.user_id = j["user"].get<int64_t>();
    }
    m.slot = j["slot"].get<int64_t>();
    const std::string word = j["word"].get<std::string>();
    auto id = store.Find(word);
    if (!id.has_value()) {
      return absl::InvalidArgumentError(
          absl::StrCat("OutOfVocabulary: '", word, "' on line ", line_no));
    }
    m.payload = *id;
    batch.push_back(m);
  }
  return batch;
}

}  // namespace dxtext
