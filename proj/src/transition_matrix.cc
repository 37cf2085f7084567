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

#include "dxtext/transition_matrix.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string_view>

#include "absl/strings/match.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"

namespace dxtext {
namespace {

constexpr std::string_view kTsvMagic = "dxtext transition-matrix v1";
constexpr double kRowSumTolerance = 1e-9;

std::string FormatProbability(double p) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", p);
  return buf;
}

}  // namespace

absl::StatusOr<TransitionMatrix> TransitionMatrix::FromCounts(
    size_t size, std::vector<uint64_t> counts, uint64_t samples_per_word,
    uint64_t store_fingerprint) {
  if (size == 0 || counts.size() != size * size) {
    return absl::InvalidArgumentError("count table is not square");
  }
  if (samples_per_word == 0) {
    return absl::InvalidArgumentError("samples_per_word must be positive");
  }
  std::vector<double> probs(counts.size());
  for (size_t r = 0; r < size; ++r) {
    uint64_t total = 0;
    for (size_t c = 0; c < size; ++c) total += counts[r * size + c];
    if (total != samples_per_word) {
      return absl::InvalidArgumentError(
          absl::StrCat("row ", r, " has ", total, " samples, expected ",
                       samples_per_word));
    }
    for (size_t c = 0; c < size; ++c) {
      probs[r * size + c] = static_cast<double>(counts[r * size + c]) /
                            static_cast<double>(samples_per_word);
    }
  }
  return TransitionMatrix(size, std::move(probs), samples_per_word,
                          store_fingerprint);
}

absl::StatusOr<TransitionMatrix> TransitionMatrix::FromProbabilities(
    size_t size, std::vector<double> probs, uint64_t sample_count,
    uint64_t store_fingerprint) {
  if (size == 0 || probs.size() != size * size) {
    return absl::InvalidArgumentError("probability table is not square");
  }
  for (size_t r = 0; r < size; ++r) {
    double sum = 0.0;
    for (size_t c = 0; c < size; ++c) {
      const double p = probs[r * size + c];
      if (!(p >= 0.0) || !std::isfinite(p)) {
        return absl::InvalidArgumentError(
            absl::StrCat("entry (", r, ", ", c, ") is not a probability"));
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      return absl::InvalidArgumentError(
          absl::StrCat("row ", r, " sums to ", sum, ", not 1"));
    }
  }
  return TransitionMatrix(size, std::move(probs), sample_count,
                          store_fingerprint);
}

absl::Status TransitionMatrix::CheckMatches(const EmbeddingStore& store) const {
  if (size_ != store.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("MatrixStoreMismatch: matrix has ", size_,
                     " rows, store has ", store.size(), " words"));
  }
  if (store_fingerprint_ != 0 && store_fingerprint_ != store.fingerprint()) {
    return absl::InvalidArgumentError(
        "MatrixStoreMismatch: matrix was built from a different store");
  }
  return absl::OkStatus();
}

absl::StatusOr<WordId> SampleFromMatrix(RngStream& rng,
                                        const TransitionMatrix& matrix,
                                        WordId w) {
  if (w.index() >= matrix.size()) {
    return absl::OutOfRangeError(absl::StrCat(
        "InvalidWordId: ", w.index(), " not below ", matrix.size()));
  }
  const std::span<const double> row = matrix.row(w);
  const double u = rng.Uniform01();
  double cumulative = 0.0;
  size_t last_nonzero = 0;
  for (size_t i = 0; i < row.size(); ++i) {
    if (row[i] <= 0.0) continue;
    last_nonzero = i;
    cumulative += row[i];
    if (u < cumulative) return WordId(i);
  }
  // Row sums can fall short of 1 by rounding.
  return WordId(last_nonzero);
}

absl::Status WriteMatrixTsv(const EmbeddingStore& store,
                            const TransitionMatrix& matrix, std::ostream& out,
                            const std::vector<std::string>& extra_comments) {
  if (absl::Status s = matrix.CheckMatches(store); !s.ok()) return s;
  out << "# " << kTsvMagic << "\n";
  out << "# sample_count=" << matrix.sample_count() << "\n";
  out << "# store_fingerprint=" << matrix.store_fingerprint() << "\n";
  for (const auto& c : extra_comments) out << "# " << c << "\n";
  for (size_t r = 0; r < matrix.size(); ++r) {
    for (size_t c = 0; c < matrix.size(); ++c) {
      const double p = matrix.at(WordId(r), WordId(c));
      if (p == 0.0) continue;
      out << store.word(WordId(r)) << '\t' << store.word(WordId(c)) << '\t'
          << FormatProbability(p) << '\n';
    }
  }
  if (!out) return absl::UnavailableError("write failed");
  return absl::OkStatus();
}

absl::StatusOr<TransitionMatrix> ReadMatrixTsv(const EmbeddingStore& store,
                                               std::istream& in) {
  const size_t n = store.size();
  std::vector<double> probs(n * n, 0.0);
  uint64_t sample_count = 0;
  uint64_t fingerprint = 0;
  bool saw_magic = false;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    absl::string_view view = absl::StripTrailingAsciiWhitespace(line);
    if (view.empty()) continue;
    if (absl::ConsumePrefix(&view, "#")) {
      view = absl::StripLeadingAsciiWhitespace(view);
      if (std::string(view) == kTsvMagic) {
        saw_magic = true;
      } else if (absl::ConsumePrefix(&view, "sample_count=")) {
        if (!absl::SimpleAtoi(view, &sample_count)) {
          return absl::InvalidArgumentError("malformed sample_count");
        }
      } else if (absl::ConsumePrefix(&view, "store_fingerprint=")) {
        if (!absl::SimpleAtoi(view, &fingerprint)) {
          return absl::InvalidArgumentError("malformed store_fingerprint");
        }
      }
      continue;
    }
    std::vector<absl::string_view> fields = absl::StrSplit(view, '\t');
    double p = 0.0;
    if (fields.size() != 3 || !absl::SimpleAtod(fields[2], &p)) {
      return absl::InvalidArgumentError(
          absl::StrCat("malformed matrix line ", line_no));
    }
    const auto from = store.Find(std::string(fields[0]));
    const auto to = store.Find(std::string(fields[1]));
    if (!from.has_value() || !to.has_value()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "MatrixStoreMismatch: unknown word on matrix line ", line_no));
    }
    probs[from->index() * n + to->index()] = p;
  }
  if (!saw_magic) {
    return absl::InvalidArgumentError("missing transition-matrix header");
  }
  if (fingerprint != 0 && fingerprint != store.fingerprint()) {
    return absl::InvalidArgumentError(
        "MatrixStoreMismatch: matrix was built from a different store");
  }
  return TransitionMatrix::FromProbabilities(n, std::move(probs), sample_count,
                                             fingerprint);
}

}  // namespace dxtext
