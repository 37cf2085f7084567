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

#ifndef DXTEXT_EMBEDDING_STORE_H_
#define DXTEXT_EMBEDDING_STORE_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace dxtext {

// Dense index of a vocabulary word, in [0, |W|).
class WordId {
 public:
  constexpr WordId() = default;
  constexpr explicit WordId(size_t index) : index_(index) {}

  constexpr size_t index() const { return index_; }

  friend constexpr auto operator<=>(WordId, WordId) = default;

 private:
  size_t index_ = 0;
};

std::ostream& operator<<(std::ostream& os, WordId id);

struct Neighbor {
  WordId word;
  double distance = 0.0;
};

// Neighbors of `origin` sorted by ascending distance, ties by ascending id.
struct NeighborList {
  WordId origin;
  std::vector<Neighbor> entries;
};

// Immutable vocabulary <-> id <-> vector map under the Euclidean metric.
//
// Vectors are stored row-major in a single buffer. All lookups are read-only,
// so a store can be shared freely between threads once constructed.
class EmbeddingStore {
 public:
  // Validates and builds a store. `vectors` holds words.size() * dim values in
  // row-major order. Errors: empty vocabulary, dim == 0, size mismatch,
  // DuplicateWord, non-finite components.
  static absl::StatusOr<EmbeddingStore> Create(std::vector<std::string> words,
                                               std::vector<double> vectors,
                                               size_t dim,
                                               bool normalize = false);

  size_t size() const { return words_.size(); }
  size_t dim() const { return dim_; }
  bool Contains(WordId id) const { return id.index() < words_.size(); }

  const std::string& word(WordId id) const { return words_[id.index()]; }
  const std::vector<std::string>& words() const { return words_; }
  std::optional<WordId> Find(std::string_view word) const;

  // Unchecked row access; `id` must satisfy Contains().
  std::span<const double> vector(WordId id) const {
    return {data_.data() + id.index() * dim_, dim_};
  }
  std::span<const double> data() const { return data_; }

  absl::StatusOr<double> Distance(WordId w, WordId u) const;

  // Unchecked squared distance between a stored row and an arbitrary point.
  double SquaredDistanceTo(WordId id, std::span<const double> point) const;

  // Word whose vector is closest to `point`; ties go to the lowest id.
  absl::StatusOr<WordId> NearestWord(std::span<const double> point) const;

  // Same as NearestWord() but the argmin ranges over `candidates` only.
  // Candidates must be valid and non-empty; ties go to the lowest id.
  absl::StatusOr<WordId> NearestWordAmong(
      std::span<const double> point, std::span<const WordId> candidates) const;

  absl::StatusOr<NeighborList> KNearest(WordId w, size_t k,
                                        bool include_self) const;

  // Content hash over words and vector bits. Used to tie derived artifacts
  // (sensitivity profiles, transition matrices) to the store they came from.
  uint64_t fingerprint() const { return fingerprint_; }

 private:
  EmbeddingStore() = default;

  absl::Status CheckPoint(std::span<const double> point) const;

  std::vector<std::string> words_;
  std::vector<double> data_;
  size_t dim_ = 0;
  std::unordered_map<std::string, WordId> index_;
  uint64_t fingerprint_ = 0;
};

struct LoadOptions {
  std::optional<size_t> expected_dim;
  bool normalize = false;
};

// Parses the text format: an optional "<count> <dim>" header line, then one
// "word v1 ... vd" record per line.
absl::StatusOr<EmbeddingStore> ParseEmbeddings(std::istream& in,
                                               const LoadOptions& options = {});

// Loads either the text format or the binary cache (detected by its magic).
absl::StatusOr<EmbeddingStore> LoadEmbeddings(const std::string& path,
                                              const LoadOptions& options = {});

// Binary cache: "DXEMB" magic, format version, counts, then words and
// little-endian IEEE doubles. Byte-deterministic for a given store.
absl::Status WriteBinaryCache(const EmbeddingStore& store, std::ostream& out);
absl::StatusOr<EmbeddingStore> ReadBinaryCache(std::istream& in,
                                               const LoadOptions& options = {});

// Distance from every word to its nearest other word. Requires |W| >= 2.
absl::StatusOr<std::vector<double>> NearestNeighborDistances(
    const EmbeddingStore& store);

// Summary statistics of NearestNeighborDistances(), used for default tuning
// of the density mechanism.
absl::StatusOr<double> MeanNearestNeighborDistance(const EmbeddingStore& store);
absl::StatusOr<double> MedianNearestNeighborDistance(
    const EmbeddingStore& store);

}  // namespace dxtext

#endif  // DXTEXT_EMBEDDING_STORE_H_
