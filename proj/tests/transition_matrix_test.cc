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

#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.h"

namespace dxtext {
namespace {

using ::dxtext::testing::MakeStore;
using ::dxtext::testing::ThreeWordStore;

TEST(TransitionMatrixTest, FromCounts) {
  auto m = TransitionMatrix::FromCounts(2, {3, 1, 0, 4}, 4, 99);
  ASSERT_TRUE(m.ok()) << m.status();
  EXPECT_EQ(m->at(WordId(0), WordId(0)), 0.75);
  EXPECT_EQ(m->at(WordId(1), WordId(1)), 1.0);
  EXPECT_EQ(m->sample_count(), 4u);
  EXPECT_EQ(m->store_fingerprint(), 99u);
  EXPECT_FALSE(TransitionMatrix::FromCounts(2, {3, 0, 0, 4}, 4).ok());
  EXPECT_FALSE(TransitionMatrix::FromCounts(2, {1, 1, 1}, 2).ok());
}

TEST(TransitionMatrixTest, FromProbabilitiesValidates) {
  EXPECT_TRUE(TransitionMatrix::FromProbabilities(2, {0.5, 0.5, 0.1, 0.9}).ok());
  EXPECT_FALSE(TransitionMatrix::FromProbabilities(2, {0.5, 0.6, 0.1, 0.9}).ok());
  EXPECT_FALSE(TransitionMatrix::FromProbabilities(2, {1.5, -0.5, 0.1, 0.9}).ok());
  EXPECT_FALSE(TransitionMatrix::FromProbabilities(0, {}).ok());
}

TEST(TransitionMatrixTest, CheckMatchesStore) {
  const EmbeddingStore store = ThreeWordStore();
  std::vector<double> id{1, 0, 0, 0, 1, 0, 0, 0, 1};
  EXPECT_TRUE(TransitionMatrix::FromProbabilities(3, id)->CheckMatches(store).ok());
  EXPECT_TRUE(TransitionMatrix::FromProbabilities(3, id, 0, store.fingerprint())
                  ->CheckMatches(store)
                  .ok());
  auto wrong = TransitionMatrix::FromProbabilities(3, id, 0, store.fingerprint() + 1);
  EXPECT_FALSE(wrong->CheckMatches(store).ok());
  auto small = TransitionMatrix::FromProbabilities(1, {1.0});
  EXPECT_FALSE(small->CheckMatches(store).ok());
}

TEST(MatrixTsvTest, RoundTripAndFormat) {
  const EmbeddingStore store = ThreeWordStore();
  auto m = TransitionMatrix::FromCounts(3, {7, 0, 3, 0, 10, 0, 1, 2, 7}, 10,
                                        store.fingerprint());
  ASSERT_TRUE(m.ok());
  std::ostringstream out;
  ASSERT_TRUE(WriteMatrixTsv(store, *m, out, {"note=x"}).ok());
  const std::string text = out.str();
  EXPECT_EQ(text.rfind("# dxtext transition-matrix v1\n", 0), 0u);
  EXPECT_NE(text.find("# note=x\n"), std::string::npos);
  EXPECT_NE(text.find("a\ta\t0.69999999999999996\n"), std::string::npos);
  EXPECT_EQ(text.find("a\tb\t"), std::string::npos);

  std::istringstream in(text);
  auto back = ReadMatrixTsv(store, in);
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(back->sample_count(), 10u);
  for (size_t i = 0; i < 3; ++i) {
    for (size_t j = 0; j < 3; ++j) {
      EXPECT_EQ(back->at(WordId(i), WordId(j)), m->at(WordId(i), WordId(j)));
    }
  }
}

TEST(MatrixTsvTest, RejectsForeignStore) {
  const EmbeddingStore store = ThreeWordStore();
  auto m = TransitionMatrix::FromProbabilities(3, {1, 0, 0, 0, 1, 0, 0, 0, 1}, 5,
                                               store.fingerprint());
  std::ostringstream out;
  ASSERT_TRUE(WriteMatrixTsv(store, *m, out).ok());
  const EmbeddingStore other = MakeStore({"a", "b", "c"}, {0, 0, 3, 4, 0, 2}, 2);
  std::istringstream in(out.str());
  auto back = ReadMatrixTsv(other, in);
  ASSERT_FALSE(back.ok());
  EXPECT_NE(back.status().message().find("MatrixStoreMismatch"), std::string::npos);

  std::istringstream unknown("# dxtext transition-matrix v1\nq\ta\t1\n");
  EXPECT_FALSE(ReadMatrixTsv(store, unknown).ok());
  std::istringstream headless("a\ta\t1\n");
  EXPECT_FALSE(ReadMatrixTsv(store, headless).ok());
}

}  // namespace
}  // namespace dxtext
