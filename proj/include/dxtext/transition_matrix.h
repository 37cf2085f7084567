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

#ifndef DXTEXT_TRANSITION_MATRIX_H_
#define DXTEXT_TRANSITION_MATRIX_H_

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dxtext/embedding_store.h"
#include "dxtext/samplers.h"

namespace dxtext {

// Row-stochastic |W| x |W| table of Pr[M(w) = u].
//
// `sample_count` is the number of mechanism runs behind each row, or 0 when
// the probabilities are exact (hand-built or analytic). `store_fingerprint`
// is 0 when the matrix is not tied to a particular store.
class TransitionMatrix {
 public:
  static absl::StatusOr<TransitionMatrix> FromCounts(
      size_t size, std::vector<uint64_t> counts, uint64_t samples_per_word,
      uint64_t store_fingerprint = 0);

  // Rows must be non-negative and sum to 1 within 1e-9.
  static absl::StatusOr<TransitionMatrix> FromProbabilities(
      size_t size, std::vector<double> probs, uint64_t sample_count = 0,
      uint64_t store_fingerprint = 0);

  size_t size() const { return size_; }
  uint64_t sample_count() const { return sample_count_; }
  uint64_t store_fingerprint() const { return store_fingerprint_; }

  double at(WordId from, WordId to) const {
    return probs_[from.index() * size_ + to.index()];
  }
  std::span<const double> row(WordId from) const {
    return {probs_.data() + from.index() * size_, size_};
  }

  // Size and, when both are known, fingerprint agree with `store`.
  absl::Status CheckMatches(const EmbeddingStore& store) const;

 private:
  TransitionMatrix(size_t size, std::vector<double> probs,
                   uint64_t sample_count, uint64_t fingerprint)
      : size_(size),
        probs_(std::move(probs)),
        sample_count_(sample_count),
        store_fingerprint_(fingerprint) {}

  size_t size_;
  std::vector<double> probs_;
  uint64_t sample_count_;
  uint64_t store_fingerprint_;
};

// Categorical draw from row `w`.
absl::StatusOr<WordId> SampleFromMatrix(RngStream& rng,
                                        const TransitionMatrix& matrix,
                                        WordId w);

// TSV: "# key=value" header comments, then "row_word<TAB>col_word<TAB>prob"
// for every non-zero entry in row-major order. `extra_comments` are written
// verbatim as additional "# " lines.
absl::Status WriteMatrixTsv(const EmbeddingStore& store,
                            const TransitionMatrix& matrix, std::ostream& out,
                            const std::vector<std::string>& extra_comments = {});
absl::StatusOr<TransitionMatrix> ReadMatrixTsv(const EmbeddingStore& store,
                                               std::istream& in);

}  // namespace dxtext

#endif  // DXTEXT_TRANSITION_MATRIX_H_
