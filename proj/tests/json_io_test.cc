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

#include "dxtext/json_io.h"

#include <limits>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.h"

namespace dxtext {
namespace {

using ::dxtext::testing::ThreeWordStore;

TEST(MechanismJsonTest, RoundTripsEveryVariant) {
  const std::vector<MechanismConfig> configs{
      {1.5, BaselineParams{}},
      {2.0, DensityParams{0.3, MhParams{50, 5, 0.25}}},
      {2.0, DensityParams{std::nullopt, MhParams{}}},
      {0.5, SmoothParams{1.25}},
      {3.0, TruncDistanceParams{2.0, TruncStrategy::kResidual}},
      {1.0, TruncKnnParams{4, 0.5}},
  };
  for (const MechanismConfig& c : configs) {
    const Json j = MechanismConfigToJson(c);
    auto back = MechanismConfigFromJson(j);
    ASSERT_TRUE(back.ok()) << back.status() << " " << j.dump();
    EXPECT_EQ(MechanismConfigToJson(*back), j);
  }
}

TEST(MechanismJsonTest, RejectsBadInput) {
  EXPECT_FALSE(MechanismConfigFromJson(Json::parse(R"({"epsilon":1})")).ok());
  EXPECT_FALSE(
      MechanismConfigFromJson(Json::parse(R"({"variant":"nope","epsilon":1})")).ok());
  EXPECT_FALSE(
      MechanismConfigFromJson(Json::parse(R"({"variant":"baseline","epsilon":-1})")).ok());
  EXPECT_FALSE(
      MechanismConfigFromJson(Json::parse(R"({"variant":"baseline","epsilon":"1"})")).ok());
  auto foreign = MechanismConfigFromJson(
      Json::parse(R"({"variant":"baseline","epsilon":1,"tau":2})"));
  ASSERT_FALSE(foreign.ok());
  EXPECT_NE(foreign.status().message().find("tau"), std::string::npos);
  EXPECT_FALSE(
      MechanismConfigFromJson(Json::parse(R"({"variant":"smooth","epsilon":1})")).ok());
  EXPECT_FALSE(MechanismConfigFromJson(
                   Json::parse(R"({"variant":"trunc_knn","epsilon":1,"k":-2})"))
                   .ok());
  EXPECT_FALSE(MechanismConfigFromJson(
                   Json::parse(R"({"variant":"density","epsilon":1,"mh":{"x":1}})"))
                   .ok());
}

TEST(AmplifierJsonTest, RoundTripAndErrors) {
  for (const AmplifierConfig& a : std::vector<AmplifierConfig>{
           ShuffleStage{}, SubsampleStage{0.25}, KThresholdStage{3}}) {
    auto back = AmplifierFromJson(AmplifierToJson(a));
    ASSERT_TRUE(back.ok());
    EXPECT_EQ(AmplifierToJson(*back), AmplifierToJson(a));
  }
  EXPECT_EQ(AmplifierToJson(SubsampleStage{0.25}).dump(),
            R"({"kind":"subsample","q":0.25})");
  EXPECT_FALSE(AmplifierFromJson(Json::parse(R"({"kind":"subsample"})")).ok());
  EXPECT_FALSE(AmplifierFromJson(Json::parse(R"({"kind":"subsample","q":2})")).ok());
  EXPECT_FALSE(AmplifierFromJson(Json::parse(R"({"kind":"shuffle","q":1})")).ok());
  EXPECT_FALSE(AmplifierFromJson(Json::parse(R"({"kind":"other"})")).ok());
}

TEST(ProtocolJsonTest, ParsesAndRoundTrips) {
  const Json j = Json::parse(R"({
    "schema_version": 1, "n_users": 10, "m_per_user": 3, "seed": 42,
    "mechanism": {"variant": "trunc_distance", "epsilon": 2, "tau": 1.5},
    "amplifiers": [{"kind": "subsample", "q": 0.5}, {"kind": "shuffle"}],
    "corpus": {"kind": "zipf", "s": 1.3}})");
  auto c = ProtocolConfigFromJson(j);
  ASSERT_TRUE(c.ok()) << c.status();
  EXPECT_EQ(c->n_users, 10u);
  EXPECT_EQ(c->m_per_user, 3u);
  EXPECT_EQ(c->seed, 42u);
  EXPECT_EQ(c->amplifiers.size(), 2u);
  EXPECT_EQ(std::get<ZipfCorpus>(c->corpus).s, 1.3);
  EXPECT_EQ(c->mechanism.variant(), MechanismVariant::kTruncDistance);
  auto again = ProtocolConfigFromJson(ProtocolConfigToJson(*c));
  ASSERT_TRUE(again.ok());
  EXPECT_EQ(ProtocolConfigToJson(*again), ProtocolConfigToJson(*c));

  auto file = ProtocolConfigFromJson(Json::parse(R"({
    "n_users": 1, "m_per_user": 1,
    "mechanism": {"variant": "baseline", "epsilon": 1},
    "corpus": {"kind": "file", "path": "words.txt"}})"));
  ASSERT_TRUE(file.ok()) << file.status();
  EXPECT_EQ(std::get<TokenCorpus>(file->corpus).path, "words.txt");
  EXPECT_TRUE(std::get<TokenCorpus>(file->corpus).tokens.empty());
}

TEST(ProtocolJsonTest, RejectsBadInput) {
  EXPECT_FALSE(ProtocolConfigFromJson(Json::parse(
                   R"({"n_users":1,"m_per_user":1})"))
                   .ok());
  EXPECT_FALSE(ProtocolConfigFromJson(Json::parse(
                   R"({"n_users":0,"m_per_user":1,
                       "mechanism":{"variant":"baseline","epsilon":1}})"))
                   .ok());
  EXPECT_FALSE(ProtocolConfigFromJson(Json::parse(
                   R"({"n_users":1,"m_per_user":1,"bogus":true,
                       "mechanism":{"variant":"baseline","epsilon":1}})"))
                   .ok());
  EXPECT_FALSE(ProtocolConfigFromJson(Json::parse(
                   R"({"n_users":1,"m_per_user":1,"amplifiers":{},
                       "mechanism":{"variant":"baseline","epsilon":1}})"))
                   .ok());
}

TEST(ReportJsonTest, CuratorReportShape) {
  const EmbeddingStore store = ThreeWordStore();
  CuratorReport r;
  r.histogram = {{WordId(0), 2}, {WordId(2), 1}};
  r.true_histogram = {{WordId(0), 3}};
  r.utility_l1 = 2;
  r.utility_tv = 1.0 / 3.0;
  r.local_messages = 3;
  r.released_messages = 3;
  const Json j = CuratorReportToJson(store, r, Json{{"seed", 1}});
  EXPECT_EQ(j["schema_version"], kReportSchemaVersion);
  EXPECT_EQ(j["kind"], "curator_report");
  EXPECT_EQ(j["config"]["seed"], 1);
  EXPECT_TRUE(j["amplified_epsilon"].is_null());
  EXPECT_EQ(j["histogram"].dump(), R"({"a":2,"c":1})");
  EXPECT_EQ(j["true_histogram"].dump(), R"({"a":3})");
  r.amplified_epsilon = AmplifiedEpsilon{0.5, true};
  const Json k = CuratorReportToJson(store, r, Json::object());
  EXPECT_EQ(k["amplified_epsilon"]["value"], 0.5);
  EXPECT_EQ(k["amplified_epsilon"]["approximate"], true);
}

TEST(ReportJsonTest, MetricDpReportEncodesInfinity) {
  const EmbeddingStore store = ThreeWordStore();
  MetricDpReport r;
  r.triples_checked = 1;
  r.max_violation = std::numeric_limits<double>::infinity();
  r.max_excess = std::numeric_limits<double>::infinity();
  r.worst_triple = {WordId(0), WordId(1), WordId(0)};
  r.private_within_slack = false;
  const Json j = MetricDpReportToJson(store, r);
  EXPECT_EQ(j["max_violation"], "inf");
  EXPECT_EQ(j["worst_triple"]["from"], "a");
  EXPECT_EQ(j["worst_triple"]["other"], "b");
  EXPECT_EQ(j["private_within_slack"], false);

  DeniabilityStats s{WordId(2), 10, 0.5, 2, 0.69};
  const Json d = DeniabilityStatsToJson(store, s);
  EXPECT_EQ(d["word"], "c");
  EXPECT_EQ(d["support_size"], 2);
}

}  // namespace
}  // namespace dxtext
