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

#include <initializer_list>
#include <set>
#include <string>

#include "absl/strings/str_cat.h"

namespace dxtext {
namespace {

absl::Status CheckKeys(const Json& j, const std::string& what,
                       std::initializer_list<const char*> allowed) {
  if (!j.is_object()) {
    return absl::InvalidArgumentError(absl::StrCat(what, " must be an object"));
  }
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!keys.contains(key)) {
      std::string names;
      for (const std::string& k : keys) {
        absl::StrAppend(&names, names.empty() ? "" : ", ", k);
      }
      return absl::InvalidArgumentError(absl::StrCat(
          "unexpected key '", key, "' in ", what, " (allowed: ",
          names, ")"));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<double> GetNumber(const Json& j, const std::string& key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number()) {
    return absl::InvalidArgumentError(
        absl::StrCat("'", key, "' must be a number"));
  }
  return it->get<double>();
}

absl::StatusOr<uint64_t> GetCount(const Json& j, const std::string& key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number_integer() ||
      (it->is_number_integer() && it->get<int64_t>() < 0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("'", key, "' must be a non-negative integer"));
  }
  return it->get<uint64_t>();
}

absl::StatusOr<std::string> GetString(const Json& j, const std::string& key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    return absl::InvalidArgumentError(
        absl::StrCat("'", key, "' must be a string"));
  }
  return it->get<std::string>();
}

Json TripleToJson(const EmbeddingStore& store, const WordTriple& t) {
  return Json{{"from", store.word(t.from)},
              {"other", store.word(t.other)},
              {"output", store.word(t.output)}};
}

// JSON has no infinity; unbounded values are written as strings.
Json NumberOrInfinity(double v) {
  if (std::isinf(v)) return v > 0 ? Json("inf") : Json("-inf");
  return Json(v);
}

}  // namespace

Json MechanismConfigToJson(const MechanismConfig& config) {
  Json j;
  j["variant"] = std::string(VariantName(config.variant()));
  j["epsilon"] = config.epsilon;
  std::visit(
      [&j](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, DensityParams>) {
          if (p.sigma.has_value()) j["sigma"] = *p.sigma;
          Json mh;
          mh["burn_in"] = p.mh.burn_in;
          mh["thin"] = p.mh.thin;
          if (p.mh.proposal_step.has_value()) {
            mh["proposal_step"] = *p.mh.proposal_step;
          }
          j["mh"] = mh;
        } else if constexpr (std::is_same_v<T, SmoothParams>) {
          j["beta"] = p.beta;
        } else if constexpr (std::is_same_v<T, TruncDistanceParams>) {
          j["tau"] = p.tau;
          j["trunc_strategy"] = std::string(TruncStrategyName(p.strategy));
        } else if constexpr (std::is_same_v<T, TruncKnnParams>) {
          j["k"] = p.k;
          j["k_jitter"] = p.k_jitter;
        }
      },
      config.params);
  return j;
}

absl::StatusOr<MechanismConfig> MechanismConfigFromJson(const Json& j) {
  if (!j.is_object()) {
    return absl::InvalidArgumentError("mechanism must be an object");
  }
  auto name = GetString(j, "variant");
  if (!name.ok()) return name.status();
  auto variant = ParseVariant(*name);
  if (!variant.ok()) return variant.status();
  auto epsilon = GetNumber(j, "epsilon");
  if (!epsilon.ok()) return epsilon.status();

  MechanismConfig config;
  config.epsilon = *epsilon;
  switch (*variant) {
    case MechanismVariant::kBaseline: {
      if (auto s = CheckKeys(j, "baseline mechanism", {"variant", "epsilon"});
          !s.ok()) {
        return s;
      }
      config.params = BaselineParams{};
      break;
    }
    case MechanismVariant::kDensity: {
      if (auto s = CheckKeys(j, "density mechanism",
                             {"variant", "epsilon", "sigma", "mh"});
          !s.ok()) {
        return s;
      }
      DensityParams p;
      if (j.contains("sigma")) {
        auto sigma = GetNumber(j, "sigma");
        if (!sigma.ok()) return sigma.status();
        p.sigma = *sigma;
      }
      if (j.contains("mh")) {
        const Json& mh = j["mh"];
        if (auto s = CheckKeys(mh, "mh", {"burn_in", "thin", "proposal_step"});
            !s.ok()) {
          return s;
        }
        if (mh.contains("burn_in")) {
          auto v = GetCount(mh, "burn_in");
          if (!v.ok()) return v.status();
          p.mh.burn_in = *v;
        }
        if (mh.contains("thin")) {
          auto v = GetCount(mh, "thin");
          if (!v.ok()) return v.status();
          p.mh.thin = *v;
        }
        if (mh.contains("proposal_step")) {
          auto v = GetNumber(mh, "proposal_step");
          if (!v.ok()) return v.status();
          p.mh.proposal_step = *v;
        }
      }
      config.params = p;
      break;
    }
    case MechanismVariant::kSmooth: {
      if (auto s = CheckKeys(j, "smooth mechanism", {"variant", "epsilon", "beta"});
          !s.ok()) {
        return s;
      }
      auto beta = GetNumber(j, "beta");
      if (!beta.ok()) return beta.status();
      config.params = SmoothParams{*beta};
      break;
    }
    case MechanismVariant::kTruncDistance: {
      if (auto s = CheckKeys(j, "trunc_distance mechanism",
                             {"variant", "epsilon", "tau", "trunc_strategy"});
          !s.ok()) {
        return s;
      }
      TruncDistanceParams p;
      auto tau = GetNumber(j, "tau");
      if (!tau.ok()) return tau.status();
      p.tau = *tau;
      if (j.contains("trunc_strategy")) {
        auto name = GetString(j, "trunc_strategy");
        if (!name.ok()) return name.status();
        auto strategy = ParseTruncStrategy(*name);
        if (!strategy.ok()) return strategy.status();
        p.strategy = *strategy;
      }
      config.params = p;
      break;
    }
    case MechanismVariant::kTruncKnn: {
      if (auto s = CheckKeys(j, "trunc_knn mechanism",
                             {"variant", "epsilon", "k", "k_jitter"});
          !s.ok()) {
        return s;
      }
      TruncKnnParams p;
      auto k = GetCount(j, "k");
      if (!k.ok()) return k.status();
      p.k = *k;
      if (j.contains("k_jitter")) {
        auto jitter = GetNumber(j, "k_jitter");
        if (!jitter.ok()) return jitter.status();
        p.k_jitter = *jitter;
      }
      config.params = p;
      break;
    }
  }
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  return config;
}

Json AmplifierToJson(const AmplifierConfig& config) {
  Json j;
  j["kind"] = std::string(AmplifierName(config));
  if (const auto* s = std::get_if<SubsampleStage>(&config)) j["q"] = s->q;
  if (const auto* s = std::get_if<KThresholdStage>(&config)) j["k"] = s->k;
  return j;
}

absl::StatusOr<AmplifierConfig> AmplifierFromJson(const Json& j) {
  if (!j.is_object()) {
    return absl::InvalidArgumentError("amplifier must be an object");
  }
  auto kind = GetString(j, "kind");
  if (!kind.ok()) return kind.status();
  AmplifierConfig config;
  if (*kind == "shuffle") {
    if (auto s = CheckKeys(j, "shuffle amplifier", {"kind"}); !s.ok()) return s;
    config = ShuffleStage{};
  } else if (*kind == "subsample") {
    if (auto s = CheckKeys(j, "subsample amplifier", {"kind", "q"}); !s.ok()) {
      return s;
    }
    auto q = GetNumber(j, "q");
    if (!q.ok()) return q.status();
    config = SubsampleStage{*q};
  } else if (*kind == "kthreshold") {
    if (auto s = CheckKeys(j, "kthreshold amplifier", {"kind", "k"}); !s.ok()) {
      return s;
    }
    auto k = GetCount(j, "k");
    if (!k.ok()) return k.status();
    config = KThresholdStage{*k};
  } else {
    return absl::InvalidArgumentError(absl::StrCat(
        "unknown amplifier kind '", *kind,
        "' (expected shuffle, subsample or kthreshold)"));
  }
  if (absl::Status s = ValidateAmplifier(config); !s.ok()) return s;
  return config;
}

Json ProtocolConfigToJson(const ProtocolConfig& config) {
  Json j;
  j["n_users"] = config.n_users;
  j["m_per_user"] = config.m_per_user;
  j["seed"] = config.seed;
  j["mechanism"] = MechanismConfigToJson(config.mechanism);
  Json amps = Json::array();
  for (const auto& a : config.amplifiers) amps.push_back(AmplifierToJson(a));
  j["amplifiers"] = amps;
  if (const auto* z = std::get_if<ZipfCorpus>(&config.corpus)) {
    j["corpus"] = Json{{"kind", "zipf"}, {"s", z->s}};
  } else {
    j["corpus"] =
        Json{{"kind", "file"}, {"path", std::get<TokenCorpus>(config.corpus).path}};
  }
  return j;
}

absl::StatusOr<ProtocolConfig> ProtocolConfigFromJson(const Json& j) {
  if (auto s = CheckKeys(j, "protocol config",
                         {"schema_version", "n_users", "m_per_user", "seed",
                          "workers", "embeddings", "mechanism", "amplifiers",
                          "corpus"});
      !s.ok()) {
    return s;
  }
  ProtocolConfig config;
  auto n = GetCount(j, "n_users");
  if (!n.ok()) return n.status();
  config.n_users = *n;
  auto m = GetCount(j, "m_per_user");
  if (!m.ok()) return m.status();
  config.m_per_user = *m;
  if (config.n_users == 0 || config.m_per_user == 0) {
    return absl::InvalidArgumentError("n_users and m_per_user must be positive");
  }
  if (j.contains("seed")) {
    auto seed = GetCount(j, "seed");
    if (!seed.ok()) return seed.status();
    config.seed = *seed;
  }
  if (j.contains("workers")) {
    auto workers = GetCount(j, "workers");
    if (!workers.ok()) return workers.status();
    config.workers = *workers;
  }
  if (!j.contains("mechanism")) {
    return absl::InvalidArgumentError("protocol config needs a 'mechanism'");
  }
  auto mechanism = MechanismConfigFromJson(j["mechanism"]);
  if (!mechanism.ok()) return mechanism.status();
  config.mechanism = *mechanism;
  if (j.contains("amplifiers")) {
    if (!j["amplifiers"].is_array()) {
      return absl::InvalidArgumentError("'amplifiers' must be an array");
    }
    for (const Json& a : j["amplifiers"]) {
      auto amp = AmplifierFromJson(a);
      if (!amp.ok()) return amp.status();
      config.amplifiers.push_back(*amp);
    }
  }
  if (j.contains("corpus")) {
    const Json& c = j["corpus"];
    auto kind = GetString(c, "kind");
    if (!kind.ok()) return kind.status();
    if (*kind == "zipf") {
      if (auto s = CheckKeys(c, "zipf corpus", {"kind", "s"}); !s.ok()) return s;
      ZipfCorpus z;
      if (c.contains("s")) {
        auto s = GetNumber(c, "s");
        if (!s.ok()) return s.status();
        z.s = *s;
      }
      config.corpus = z;
    } else if (*kind == "file") {
      if (auto s = CheckKeys(c, "file corpus", {"kind", "path"}); !s.ok()) {
        return s;
      }
      auto path = GetString(c, "path");
      if (!path.ok()) return path.status();
      config.corpus = TokenCorpus{*path, {}};
    } else {
      return absl::InvalidArgumentError(absl::StrCat(
          "unknown corpus kind '", *kind, "' (expected zipf or file)"));
    }
  }
  return config;
}

Json HistogramToJson(const EmbeddingStore& store, const Histogram& histogram) {
  Json j = Json::object();
  for (const auto& [w, count] : histogram) j[store.word(w)] = count;
  return j;
}

Json CuratorReportToJson(const EmbeddingStore& store,
                         const CuratorReport& report,
                         const Json& resolved_config) {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "curator_report";
  j["config"] = resolved_config;
  j["local_messages"] = report.local_messages;
  j["released_messages"] = report.released_messages;
  j["utility_l1"] = report.utility_l1;
  j["utility_tv"] = report.utility_tv;
  if (report.amplified_epsilon.has_value()) {
    j["amplified_epsilon"] =
        Json{{"value", report.amplified_epsilon->value},
             {"approximate", report.amplified_epsilon->approximate}};
  } else {
    j["amplified_epsilon"] = nullptr;
  }
  j["histogram"] = HistogramToJson(store, report.histogram);
  j["true_histogram"] = HistogramToJson(store, report.true_histogram);
  return j;
}

Json DeniabilityStatsToJson(const EmbeddingStore& store,
                            const DeniabilityStats& stats) {
  Json j;
  j["word"] = store.word(stats.word);
  j["n_trials"] = stats.n_trials;
  j["p_unchanged"] = stats.p_unchanged;
  j["support_size"] = stats.support_size;
  j["entropy"] = stats.entropy;
  return j;
}

Json MetricDpReportToJson(const EmbeddingStore& store,
                          const MetricDpReport& report) {
  Json j;
  j["epsilon"] = report.epsilon;
  j["sample_count"] = report.sample_count;
  j["triples_checked"] = report.triples_checked;
  j["max_violation"] = NumberOrInfinity(report.max_violation);
  j["worst_triple"] = report.triples_checked > 0
                          ? TripleToJson(store, report.worst_triple)
                          : Json(nullptr);
  j["slack_at_worst"] = report.slack_at_worst;
  j["max_excess"] = NumberOrInfinity(report.max_excess);
  j["most_significant_triple"] =
      report.triples_checked > 0
          ? TripleToJson(store, report.most_significant_triple)
          : Json(nullptr);
  j["significant_violations"] = report.significant_violations;
  j["zero_estimate_substitutions"] = report.zero_estimate_substitutions;
  j["private_within_slack"] = report.private_within_slack;
  return j;
}

}  // namespace dxtext
