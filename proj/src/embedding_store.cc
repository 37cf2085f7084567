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

#include "dxtext/embedding_store.h"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <utility>

#include "absl/strings/str_cat.h"

namespace dxtext {
namespace {

constexpr std::array<char, 8> kCacheMagic = {'D', 'X', 'E', 'M',
                                             'B', '\0', '\0', '\0'};
constexpr uint32_t kCacheVersion = 1;

uint64_t Fnv1a(uint64_t hash, const void* bytes, size_t n) {
  const auto* p = static_cast<const unsigned char*>(bytes);
  for (size_t i = 0; i < n; ++i) {
    hash ^= p[i];
    hash *= 1099511628211ULL;
  }
  return hash;
}

uint64_t Fingerprint(const std::vector<std::string>& words,
                     const std::vector<double>& data, size_t dim) {
  uint64_t h = 14695981039346656037ULL;
  h = Fnv1a(h, &dim, sizeof(dim));
  for (const auto& w : words) {
    h = Fnv1a(h, w.data(), w.size());
    h = Fnv1a(h, "\n", 1);
  }
  for (double v : data) {
    const uint64_t bits = std::bit_cast<uint64_t>(v);
    h = Fnv1a(h, &bits, sizeof(bits));
  }
  return h;
}

bool ParseDouble(std::string_view token, double& out) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool ParseSize(std::string_view token, size_t& out) {
  auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && ptr == token.data() + token.size();
}

std::vector<std::string_view> Tokenize(std::string_view line) {
  std::vector<std::string_view> tokens;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

template <typename T>
void PutLe(std::ostream& out, T value) {
  std::array<char, sizeof(T)> buf;
  auto bits = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bits.begin(), bits.end());
  }
  std::memcpy(buf.data(), bits.data(), sizeof(T));
  out.write(buf.data(), sizeof(T));
}

template <typename T>
bool GetLe(std::istream& in, T& value) {
  std::array<unsigned char, sizeof(T)> bits;
  if (!in.read(reinterpret_cast<char*>(bits.data()), sizeof(T))) return false;
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bits.begin(), bits.end());
  }
  value = std::bit_cast<T>(bits);
  return true;
}

absl::Status CheckExpectedDim(size_t dim, const LoadOptions& options) {
  if (options.expected_dim.has_value() && *options.expected_dim != dim) {
    return absl::InvalidArgumentError(
        absl::StrCat("DimensionMismatch: embeddings have dimension ", dim,
                     ", expected ", *options.expected_dim));
  }
  return absl::OkStatus();
}

}  // namespace

std::ostream& operator<<(std::ostream& os, WordId id) {
  return os << "WordId(" << id.index() << ")";
}

absl::StatusOr<EmbeddingStore> EmbeddingStore::Create(
    std::vector<std::string> words, std::vector<double> vectors, size_t dim,
    bool normalize) {
  if (words.empty()) {
    return absl::InvalidArgumentError("EmptyVocabulary: no words given");
  }
  if (dim == 0) {
    return absl::InvalidArgumentError("DimensionMismatch: dimension is 0");
  }
  if (vectors.size() != words.size() * dim) {
    return absl::InvalidArgumentError(absl::StrCat(
        "DimensionMismatch: got ", vectors.size(), " components for ",
        words.size(), " words of dimension ", dim));
  }
  EmbeddingStore store;
  store.index_.reserve(words.size());
  for (size_t i = 0; i < words.size(); ++i) {
    if (words[i].empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("MalformedLine: empty word at index ", i));
    }
    if (!store.index_.emplace(words[i], WordId(i)).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("DuplicateWord: '", words[i], "'"));
    }
  }
  for (size_t i = 0; i < vectors.size(); ++i) {
    if (!std::isfinite(vectors[i])) {
      return absl::InvalidArgumentError(absl::StrCat(
          "NonFinite: component ", i % dim, " of '", words[i / dim], "'"));
    }
  }
  if (normalize) {
    for (size_t i = 0; i < words.size(); ++i) {
      double norm2 = 0.0;
      for (size_t j = 0; j < dim; ++j) norm2 += vectors[i * dim + j] * vectors[i * dim + j];
      if (norm2 > 0.0) {
        const double inv = 1.0 / std::sqrt(norm2);
        for (size_t j = 0; j < dim; ++j) vectors[i * dim + j] *= inv;
      }
    }
  }
  store.fingerprint_ = Fingerprint(words, vectors, dim);
  store.words_ = std::move(words);
  store.data_ = std::move(vectors);
  store.dim_ = dim;
  return store;
}

std::optional<WordId> EmbeddingStore::Find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

absl::StatusOr<double> EmbeddingStore::Distance(WordId w, WordId u) const {
  if (!Contains(w) || !Contains(u)) {
    return absl::OutOfRangeError(absl::StrCat(
        "InvalidWordId: ", w.index(), " or ", u.index(), " not below ", size()));
  }
  return std::sqrt(SquaredDistanceTo(w, vector(u)));
}

double EmbeddingStore::SquaredDistanceTo(WordId id,
                                         std::span<const double> point) const {
  const double* row = data_.data() + id.index() * dim_;
  double sum = 0.0;
  for (size_t j = 0; j < dim_; ++j) {
    const double diff = row[j] - point[j];
    sum += diff * diff;
  }
  return sum;
}

absl::Status EmbeddingStore::CheckPoint(std::span<const double> point) const {
  if (point.size() != dim_) {
    return absl::InvalidArgumentError(
        absl::StrCat("DimensionMismatch: point has ", point.size(),
                     " components, store dimension is ", dim_));
  }
  for (double v : point) {
    if (!std::isfinite(v)) {
      return absl::InvalidArgumentError("NonFinite: query point component");
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<WordId> EmbeddingStore::NearestWord(
    std::span<const double> point) const {
  if (absl::Status s = CheckPoint(point); !s.ok()) return s;
  size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < size(); ++i) {
    const double d2 = SquaredDistanceTo(WordId(i), point);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return WordId(best);
}

absl::StatusOr<WordId> EmbeddingStore::NearestWordAmong(
    std::span<const double> point, std::span<const WordId> candidates) const {
  if (absl::Status s = CheckPoint(point); !s.ok()) return s;
  if (candidates.empty()) {
    return absl::InvalidArgumentError("empty candidate set");
  }
  WordId best = candidates.front();
  double best_d2 = std::numeric_limits<double>::infinity();
  for (WordId c : candidates) {
    if (!Contains(c)) {
      return absl::OutOfRangeError(
          absl::StrCat("InvalidWordId: candidate ", c.index()));
    }
    const double d2 = SquaredDistanceTo(c, point);
    if (d2 < best_d2 || (d2 == best_d2 && c < best)) {
      best_d2 = d2;
      best = c;
    }
  }
  return best;
}

absl::StatusOr<NeighborList> EmbeddingStore::KNearest(WordId w, size_t k,
                                                      bool include_self) const {
  if (!Contains(w)) {
    return absl::OutOfRangeError(
        absl::StrCat("InvalidWordId: ", w.index(), " not below ", size()));
  }
  const size_t available = include_self ? size() : size() - 1;
  if (k == 0 || k > available) {
    return absl::OutOfRangeError(absl::StrCat(
        "k must be in [1, ", available, "], got ", k));
  }
  std::vector<Neighbor> all;
  all.reserve(available);
  for (size_t i = 0; i < size(); ++i) {
    if (!include_self && i == w.index()) continue;
    all.push_back({WordId(i), std::sqrt(SquaredDistanceTo(WordId(i), vector(w)))});
  }
  auto by_distance = [](const Neighbor& a, const Neighbor& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.word < b.word;
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<ptrdiff_t>(k),
                    all.end(), by_distance);
  all.resize(k);
  return NeighborList{w, std::move(all)};
}

absl::StatusOr<EmbeddingStore> ParseEmbeddings(std::istream& in,
                                               const LoadOptions& options) {
  std::vector<std::string> words;
  std::vector<double> values;
  std::optional<size_t> header_count;
  std::optional<size_t> dim;
  std::string line;
  size_t line_no = 0;
  bool first_record = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string_view> tokens = Tokenize(line);
    if (tokens.empty()) continue;
    if (first_record) {
      first_record = false;
      size_t count = 0, header_dim = 0;
      if (tokens.size() == 2 && ParseSize(tokens[0], count) &&
          ParseSize(tokens[1], header_dim)) {
        if (header_dim == 0) {
          return absl::InvalidArgumentError(
              "MalformedLine: header declares dimension 0");
        }
        header_count = count;
        dim = header_dim;
        continue;
      }
    }
    if (tokens.size() < 2) {
      return absl::InvalidArgumentError(absl::StrCat(
          "MalformedLine: line ", line_no, " has no vector components"));
    }
    const size_t components = tokens.size() - 1;
    if (!dim.has_value()) dim = components;
    if (components != *dim) {
      return absl::InvalidArgumentError(
          absl::StrCat("DimensionMismatch: line ", line_no, " has ",
                       components, " components, expected ", *dim));
    }
    words.emplace_back(tokens[0]);
    for (size_t j = 1; j < tokens.size(); ++j) {
      double v = 0.0;
      if (!ParseDouble(tokens[j], v)) {
        return absl::InvalidArgumentError(
            absl::StrCat("MalformedLine: line ", line_no,
                         " has non-numeric token '", std::string(tokens[j]), "'"));
      }
      if (!std::isfinite(v)) {
        return absl::InvalidArgumentError(absl::StrCat(
            "NonFinite: line ", line_no, " has component '", std::string(tokens[j]), "'"));
      }
      values.push_back(v);
    }
  }
  if (words.empty()) {
    return absl::InvalidArgumentError("EmptyFile: no embedding records");
  }
  if (header_count.has_value() && *header_count != words.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("HeaderMismatch: header declares ", *header_count,
                     " words, file has ", words.size()));
  }
  if (absl::Status s = CheckExpectedDim(*dim, options); !s.ok()) return s;
  return EmbeddingStore::Create(std::move(words), std::move(values), *dim,
                                options.normalize);
}

absl::StatusOr<EmbeddingStore> LoadEmbeddings(const std::string& path,
                                              const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return absl::NotFoundError(absl::StrCat("cannot open '", path, "'"));
  }
  std::array<char, kCacheMagic.size()> magic{};
  in.read(magic.data(), magic.size());
  const bool is_cache = in.gcount() == static_cast<std::streamsize>(magic.size()) &&
                        magic == kCacheMagic;
  in.clear();
  in.seekg(0);
  if (is_cache) return ReadBinaryCache(in, options);
  return ParseEmbeddings(in, options);
}

absl::Status WriteBinaryCache(const EmbeddingStore& store, std::ostream& out) {
  out.write(kCacheMagic.data(), kCacheMagic.size());
  PutLe<uint32_t>(out, kCacheVersion);
  PutLe<uint32_t>(out, 0);
  PutLe<uint64_t>(out, store.size());
  PutLe<uint64_t>(out, store.dim());
  for (const auto& w : store.words()) {
    PutLe<uint32_t>(out, static_cast<uint32_t>(w.size()));
    out.write(w.data(), static_cast<std::streamsize>(w.size()));
  }
  for (double v : store.data()) PutLe<double>(out, v);
  if (!out) return absl::UnavailableError("write failed");
  return absl::OkStatus();
}

absl::StatusOr<EmbeddingStore> ReadBinaryCache(std::istream& in,
                                               const LoadOptions& options) {
  std::array<char, kCacheMagic.size()> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kCacheMagic) {
    return absl::InvalidArgumentError("MalformedCache: bad magic");
  }
  uint32_t version = 0, flags = 0;
  uint64_t count = 0, dim = 0;
  if (!GetLe(in, version) || !GetLe(in, flags) || !GetLe(in, count) ||
      !GetLe(in, dim)) {
    return absl::InvalidArgumentError("MalformedCache: truncated header");
  }
  if (version != kCacheVersion) {
    return absl::InvalidArgumentError(
        absl::StrCat("MalformedCache: unsupported version ", version));
  }
  std::vector<std::string> words;
  words.reserve(count);
  for (uint64_t i = 0; i < count; ++i) {
    uint32_t len = 0;
    if (!GetLe(in, len)) {
      return absl::InvalidArgumentError("MalformedCache: truncated words");
    }
    std::string w(len, '\0');
    if (!in.read(w.data(), len)) {
      return absl::InvalidArgumentError("MalformedCache: truncated words");
    }
    words.push_back(std::move(w));
  }
  std::vector<double> values(count * dim);
  for (double& v : values) {
    if (!GetLe(in, v)) {
      return absl::InvalidArgumentError("MalformedCache: truncated vectors");
    }
  }
  if (absl::Status s = CheckExpectedDim(dim, options); !s.ok()) return s;
  return EmbeddingStore::Create(std::move(words), std::move(values), dim,
                                options.normalize);
}

absl::StatusOr<std::vector<double>> NearestNeighborDistances(
    const EmbeddingStore& store) {
  if (store.size() < 2) {
    return absl::FailedPreconditionError(
        "SingletonVocabulary: need at least two words");
  }
  std::vector<double> nearest(store.size(),
                              std::numeric_limits<double>::infinity());
  for (size_t i = 0; i < store.size(); ++i) {
    for (size_t j = i + 1; j < store.size(); ++j) {
      const double d = std::sqrt(store.SquaredDistanceTo(WordId(i), store.vector(WordId(j))));
      nearest[i] = std::min(nearest[i], d);
      nearest[j] = std::min(nearest[j], d);
    }
  }
  return nearest;
}

absl::StatusOr<double> MeanNearestNeighborDistance(const EmbeddingStore& store) {
  auto nearest = NearestNeighborDistances(store);
  if (!nearest.ok()) return nearest.status();
  double sum = 0.0;
  for (double d : *nearest) sum += d;
  return sum / static_cast<double>(nearest->size());
}

absl::StatusOr<double> MedianNearestNeighborDistance(
    const EmbeddingStore& store) {
  auto nearest = NearestNeighborDistances(store);
  if (!nearest.ok()) return nearest.status();
  std::vector<double> v = *std::move(nearest);
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace dxtext
