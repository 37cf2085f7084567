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

#include "cli.h"

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/statusor.h"
#include "absl/strings/match.h"
#include "absl/strings/str_cat.h"
#include "dxtext/amplification.h"
#include "dxtext/analysis.h"
#include "dxtext/embedding_store.h"
#include "dxtext/json_io.h"
#include "dxtext/pipeline.h"
#include "dxtext/randomizers.h"
#include "dxtext/samplers.h"
#include "dxtext/sensitivity.h"
#include "dxtext/transition_matrix.h"

namespace dxtext::cli {
namespace {

struct Options {
  std::string embeddings;
  uint64_t seed = 0;
  std::string format = "json";
  bool quiet = false;
  size_t workers = 1;
  std::string config_path;
  bool normalize = false;
  std::string out_path;

  // Mechanism overrides.
  std::string mechanism;
  double epsilon = 1.0;
  double sigma = 0.0;
  double beta = 0.0;
  double tau = 0.0;
  std::string trunc_strategy;
  uint64_t k = 0;
  double k_jitter = 0.0;
  uint64_t mh_burn_in = 0;
  uint64_t mh_thin = 0;
  double mh_step = 0.0;

  bool skip_oov = false;
  uint64_t samples = 10000;
  uint64_t trials = 10000;
  uint64_t model_samples = 10000;
  std::vector<std::string> words;
  std::string matrix_path;
  std::string prior = "uniform";
  double zipf_s = 1.1;

  uint64_t n_users = 0;
  uint64_t m_per_user = 0;
  std::string corpus_file;
  std::vector<std::string> amplifiers;
  std::string dump_local;
  std::string dump_released;
};

// Which optional flags were given on the command line.
struct Given {
  CLI::Option* seed = nullptr;
  CLI::Option* workers = nullptr;
  CLI::Option* embeddings = nullptr;
  CLI::Option* mechanism = nullptr;
  CLI::Option* epsilon = nullptr;
  CLI::Option* sigma = nullptr;
  CLI::Option* beta = nullptr;
  CLI::Option* tau = nullptr;
  CLI::Option* trunc_strategy = nullptr;
  CLI::Option* k = nullptr;
  CLI::Option* k_jitter = nullptr;
  CLI::Option* mh_burn_in = nullptr;
  CLI::Option* mh_thin = nullptr;
  CLI::Option* mh_step = nullptr;
  CLI::Option* n_users = nullptr;
  CLI::Option* m_per_user = nullptr;
  CLI::Option* corpus_file = nullptr;
  CLI::Option* zipf_s = nullptr;
  CLI::Option* amplifiers = nullptr;
};

bool Set(const CLI::Option* opt) { return opt != nullptr && opt->count() > 0; }

absl::Status IoError(const absl::Status& s) {
  if (absl::IsNotFound(s) || absl::IsUnavailable(s)) return s;
  return absl::UnavailableError(s.message());
}

absl::StatusOr<std::string> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open '", path, "'"));
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) return absl::UnavailableError(absl::StrCat("cannot read '", path, "'"));
  return buf.str();
}

// Writes through a temporary file in the same directory, then renames, so a
// failed run never leaves a partial file behind.
absl::Status WriteFileAtomic(
    const std::string& path,
    const std::function<absl::Status(std::ostream&)>& write) {
  const std::string tmp = absl::StrCat(path, ".tmp.", ::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      return absl::UnavailableError(absl::StrCat("cannot write '", path, "'"));
    }
    absl::Status s = write(out);
    out.flush();
    if (s.ok() && !out) {
      s = absl::UnavailableError(absl::StrCat("write to '", path, "' failed"));
    }
    if (!s.ok()) {
      out.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      return s;
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    return absl::UnavailableError(absl::StrCat("cannot rename onto '", path, "'"));
  }
  return absl::OkStatus();
}

std::vector<std::string> SplitWhitespace(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream ss(line);
  std::string t;
  while (ss >> t) tokens.push_back(t);
  return tokens;
}

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string Fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

class Runner {
 public:
  Runner(Options& opts, Given& given, std::istream& in, std::ostream& out,
         std::ostream& err)
      : opts_(opts), given_(given), in_(in), out_(out), err_(err) {}

  absl::Status Perturb();
  absl::Status Matrix();
  absl::Status Stats();
  absl::Status VerifyDp();
  absl::Status Attack();
  absl::Status Sensitivity();
  absl::Status Pipeline();
  absl::Status Ingest();

 private:
  // Loads --config and applies flag overrides. Keys left unset stay absent.
  absl::Status LoadConfig();
  absl::StatusOr<MechanismConfig> ResolveMechanismConfig();
  absl::Status LoadStore();
  absl::StatusOr<Mechanism> MakeMechanism();
  Json BaseConfigJson() const;
  // Emits a report: JSON to --out (plus table on stdout) or to stdout.
  absl::Status EmitReport(const Json& report, const std::string& table);
  absl::Status EmitText(const std::function<absl::Status(std::ostream&)>& write);

  Options& opts_;
  Given& given_;
  std::istream& in_;
  std::ostream& out_;
  std::ostream& err_;
  Json config_ = Json::object();
  std::optional<EmbeddingStore> store_;
  std::optional<Json> resolved_mechanism_;
};

absl::Status Runner::LoadConfig() {
  if (!opts_.config_path.empty()) {
    auto text = ReadFile(opts_.config_path);
    if (!text.ok()) return text.status();
    Json parsed = Json::parse(*text, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded() || !parsed.is_object()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "config file '", opts_.config_path, "' is not a JSON object"));
    }
    config_ = parsed;
  }
  if (Set(given_.seed)) config_["seed"] = opts_.seed;
  if (Set(given_.workers)) config_["workers"] = opts_.workers;
  if (Set(given_.embeddings)) config_["embeddings"] = opts_.embeddings;
  if (Set(given_.n_users)) config_["n_users"] = opts_.n_users;
  if (Set(given_.m_per_user)) config_["m_per_user"] = opts_.m_per_user;
  if (Set(given_.corpus_file)) {
    config_["corpus"] = Json{{"kind", "file"}, {"path", opts_.corpus_file}};
  } else if (Set(given_.zipf_s)) {
    config_["corpus"] = Json{{"kind", "zipf"}, {"s", opts_.zipf_s}};
  }
  if (Set(given_.amplifiers)) {
    Json amps = Json::array();
    for (const std::string& spec : opts_.amplifiers) {
      const size_t colon = spec.find(':');
      const std::string kind = spec.substr(0, colon);
      Json a{{"kind", kind}};
      if (colon != std::string::npos) {
        const std::string value = spec.substr(colon + 1);
        double v = 0.0;
        size_t used = 0;
        try {
          v = std::stod(value, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != value.size() || value.empty()) {
          return absl::InvalidArgumentError(
              absl::StrCat("malformed amplifier '", spec, "'"));
        }
        if (kind == "kthreshold") {
          if (v < 0 || v != static_cast<double>(static_cast<uint64_t>(v))) {
            return absl::InvalidArgumentError(
                absl::StrCat("malformed amplifier '", spec, "'"));
          }
          a["k"] = static_cast<uint64_t>(v);
        } else {
          a["q"] = v;
        }
      }
      amps.push_back(a);
    }
    config_["amplifiers"] = amps;
  }

  Json mech = config_.contains("mechanism") ? config_["mechanism"] : Json::object();
  if (!mech.is_object()) {
    return absl::InvalidArgumentError("'mechanism' must be an object");
  }
  if (Set(given_.mechanism)) {
    const bool same = mech.contains("variant") && mech["variant"] == opts_.mechanism;
    if (!same) {
      Json fresh{{"variant", opts_.mechanism}};
      if (mech.contains("epsilon")) fresh["epsilon"] = mech["epsilon"];
      mech = fresh;
    }
  }
  if (!mech.contains("variant")) mech["variant"] = "baseline";
  if (Set(given_.epsilon) || !mech.contains("epsilon")) {
    mech["epsilon"] = opts_.epsilon;
  }
  if (Set(given_.sigma)) mech["sigma"] = opts_.sigma;
  if (Set(given_.beta) && mech["variant"] == "smooth") mech["beta"] = opts_.beta;
  if (Set(given_.tau)) mech["tau"] = opts_.tau;
  if (Set(given_.trunc_strategy)) mech["trunc_strategy"] = opts_.trunc_strategy;
  if (Set(given_.k)) mech["k"] = opts_.k;
  if (Set(given_.k_jitter)) mech["k_jitter"] = opts_.k_jitter;
  if (Set(given_.mh_burn_in)) mech["mh"]["burn_in"] = opts_.mh_burn_in;
  if (Set(given_.mh_thin)) mech["mh"]["thin"] = opts_.mh_thin;
  if (Set(given_.mh_step)) mech["mh"]["proposal_step"] = opts_.mh_step;
  config_["mechanism"] = mech;

  if (config_.contains("seed")) {
    if (!config_["seed"].is_number_unsigned()) {
      return absl::InvalidArgumentError("'seed' must be a non-negative integer");
    }
    opts_.seed = config_["seed"].get<uint64_t>();
  }
  if (config_.contains("workers")) {
    if (!config_["workers"].is_number_unsigned()) {
      return absl::InvalidArgumentError("'workers' must be a positive integer");
    }
    opts_.workers = config_["workers"].get<size_t>();
  }
  if (opts_.workers == 0) {
    return absl::InvalidArgumentError("'workers' must be a positive integer");
  }
  if (config_.contains("embeddings")) {
    if (!config_["embeddings"].is_string()) {
      return absl::InvalidArgumentError("'embeddings' must be a path string");
    }
    opts_.embeddings = config_["embeddings"].get<std::string>();
  }
  return absl::OkStatus();
}

absl::StatusOr<MechanismConfig> Runner::ResolveMechanismConfig() {
  return MechanismConfigFromJson(config_["mechanism"]);
}

absl::Status Runner::LoadStore() {
  if (opts_.embeddings.empty()) {
    return absl::InvalidArgumentError("--embeddings is required");
  }
  LoadOptions load;
  load.normalize = opts_.normalize;
  auto store = LoadEmbeddings(opts_.embeddings, load);
  if (!store.ok()) {
    return IoError(absl::Status(
        store.status().code(),
        absl::StrCat(opts_.embeddings, ": ", store.status().message())));
  }
  store_.emplace(*std::move(store));
  return absl::OkStatus();
}

absl::StatusOr<Mechanism> Runner::MakeMechanism() {
  auto config = ResolveMechanismConfig();
  if (!config.ok()) return config.status();
  auto mechanism = Mechanism::Create(*store_, *config);
  if (!mechanism.ok()) return mechanism.status();
  resolved_mechanism_ = MechanismConfigToJson(mechanism->config());
  return mechanism;
}

Json Runner::BaseConfigJson() const {
  Json j;
  j["embeddings"] = opts_.embeddings;
  j["normalize"] = opts_.normalize;
  j["seed"] = opts_.seed;
  if (resolved_mechanism_.has_value()) j["mechanism"] = *resolved_mechanism_;
  return j;
}

absl::Status Runner::EmitReport(const Json& report, const std::string& table) {
  const std::string text = report.dump(2) + "\n";
  if (!opts_.out_path.empty()) {
    absl::Status s = WriteFileAtomic(opts_.out_path, [&](std::ostream& o) {
      o << text;
      return absl::OkStatus();
    });
    if (!s.ok()) return s;
    if (!opts_.quiet) out_ << table;
    return absl::OkStatus();
  }
  if (opts_.format == "json") {
    out_ << text;
  } else {
    out_ << table;
  }
  return absl::OkStatus();
}

absl::Status Runner::EmitText(
    const std::function<absl::Status(std::ostream&)>& write) {
  if (!opts_.out_path.empty()) return WriteFileAtomic(opts_.out_path, write);
  std::ostringstream buf;
  if (absl::Status s = write(buf); !s.ok()) return s;
  out_ << buf.str();
  return absl::OkStatus();
}

absl::Status Runner::Perturb() {
  if (absl::Status s = LoadConfig(); !s.ok()) return s;
  if (absl::Status s = LoadStore(); !s.ok()) return s;
  auto mechanism = MakeMechanism();
  if (!mechanism.ok()) return mechanism.status();
  if (!opts_.quiet) {
    Json config = BaseConfigJson();
    config["skip_oov"] = opts_.skip_oov;
    err_ << "config: " << config.dump() << "\n";
  }
  RngStream rng = RngStream(opts_.seed, 0).Fork(StreamPurpose::kMechanism);
  std::ostringstream buf;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in_, line)) {
    ++line_no;
    const std::vector<std::string> tokens = SplitWhitespace(line);
    for (size_t i = 0; i < tokens.size(); ++i) {
      if (i > 0) buf << ' ';
      const auto id = store_->Find(tokens[i]);
      if (!id.has_value()) {
        if (opts_.skip_oov) {
          buf << tokens[i];
          continue;
        }
        return absl::InvalidArgumentError(
            absl::StrCat("OutOfVocabulary: token '", tokens[i], "' on line ",
                         line_no));
      }
      auto out = mechanism->Perturb(rng, *id);
      if (!out.ok()) return out.status();
      buf << store_->word(*out);
    }
    buf << '\n';
  }
  if (in_.bad()) return absl::UnavailableError("failed reading standard input");
  out_ << buf.str();
  return absl::OkStatus();
}

absl::Status Runner::Matrix() {
  if (absl::Status s = LoadConfig(); !s.ok()) return s;
  if (absl::Status s = LoadStore(); !s.ok()) return s;
  auto mechanism = MakeMechanism();
  if (!mechanism.ok()) return mechanism.status();
  if (opts_.samples == 0) {
    return absl::InvalidArgumentError("--samples must be at least 1");
  }
  const RngStream rng = RngStream(opts_.seed, 0).Fork(StreamPurpose::kMatrix);
  auto matrix = BuildTransitionMatrix(*mechanism, rng, opts_.samples, opts_.workers);
  if (!matrix.ok()) return matrix.status();
  Json config = BaseConfigJson();
  config["samples"] = opts_.samples;
  return EmitText([&](std::ostream& o) {
    return WriteMatrixTsv(*store_, *matrix, o, {"config=" + config.dump()});
  });
}

absl::Status Runner::Stats() {
  if (absl::Status s = LoadConfig(); !s.ok()) return s;
  if (absl::Status s = LoadStore(); !s.ok()) return s;
  auto mechanism = MakeMechanism();
  if (!mechanism.ok()) return mechanism.status();
  std::vector<WordId> words;
  if (opts_.words.empty()) {
    for (size_t i = 0; i < store_->size(); ++i) words.emplace_back(i);
  } else {
    for (const std::string& w : opts_.words) {
      auto id = store_->Find(w);
      if (!id.has_value()) {
        return absl::InvalidArgumentError(
            absl::StrCat("OutOfVocabulary: word '", w, "'"));
      }
      words.push_back(*id);
    }
  }
  const RngStream base = RngStream(opts_.seed, 0).Fork(StreamPurpose::kAnalysis);
  const WordMechanism wm = AsWordMechanism(*mechanism);
  Json results = Json::array();
  std::string table = "word\tp_unchanged\tsupport_size\tentropy\n";
  for (WordId w : words) {
    RngStream rng = base.Fork(w.index());
    auto stats = ComputeDeniabilityStats(*store_, rng, wm, w, opts_.trials);
    if (!stats.ok()) return stats.status();
    results.push_back(DeniabilityStatsToJson(*store_, *stats));
    absl::StrAppend(&table, store_->word(w), "\t", Fixed(stats->p_unchanged),
                    "\t", stats->support_size, "\t", Fixed(stats->entropy), "\n");
  }
  Json config = BaseConfigJson();
  config["trials"] = opts_.trials;
  Json report;
  report["schema_version"] = kReportSchemaVersion;
  report["kind"] = "deniability_stats";
  report["config"] = config;
  report["results"] = results;
  return EmitReport(report, table);
}

absl::Status Runner::VerifyDp() {
  if (absl::Status s = LoadConfig(); !s.ok()) return s;
  if (absl::Status s = LoadStore(); !s.ok()) return s;
  Json config = BaseConfigJson();
  std::optional<TransitionMatrix> matrix;
  double epsilon = 0.0;
  if (!opts_.matrix_path.empty()) {
    const Json& mech = config_["mechanism"];
    if (!mech.contains("epsilon") || !mech["epsilon"].is_number()) {
      return absl::InvalidArgumentError(
          "--epsilon is required to check a matrix file");
    }
    epsilon = mech["epsilon"].get<double>();
    std::ifstream in(opts_.matrix_path);
    if (!in) {
      return absl::NotFoundError(
          absl::StrCat("cannot open '", opts_.matrix_path, "'"));
    }
    auto read = ReadMatrixTsv(*store_, in);
    if (!read.ok()) {
      const absl::Status s(read.status().code(),
                           absl::StrCat(opts_.matrix_path, ": ",
                                        read.status().message()));
      // A well-formed matrix built for another vocabulary is a usage error.
      if (absl::StrContains(read.status().message(), "MatrixStoreMismatch")) {
        return s;
      }
      return IoError(s);
    }
    matrix.emplace(*std::move(read));
    config["matrix"] = opts_.matrix_path;
    config["epsilon"] = epsilon;
  } else {
    auto mechanism = MakeMechanism();
    if (!mechanism.ok()) return mechanism.status();
    if (opts_.samples == 0) {
      return absl::InvalidArgumentError("--samples must be at least 1");
    }
    epsilon = mechanism->config().epsilon;
    const RngStream rng = RngStream(opts_.seed, 0).Fork(StreamPurpose::kMatrix);
    auto built =
        BuildTransitionMatrix(*mechanism, rng, opts_.samples, opts_.workers);
    if (!built.ok()) return built.status();
    matrix.emplace(*std::move(built));
    config = BaseConfigJson();
    config["samples"] = opts_.samples;
  }
  auto report = VerifyMetricDp(*matrix, *store_, epsilon);
  if (!report.ok()) return report.status();
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "metric_dp";
  j["config"] = config;
  j["result"] = MetricDpReportToJson(*store_, *report);
  std::string table;
  absl::StrAppend(&table, "epsilon\t", FormatDouble(report->epsilon), "\n",
                  "triples_checked\t", report->triples_checked, "\n",
                  "max_violation\t", FormatDouble(report->max_violation), "\n",
                  "max_excess\t", FormatDouble(report->max_excess), "\n",
                  "significant_violations\t", report->significant_violations,
                  "\n", "private_within_slack\t",
                  report->private_within_slack ? "yes" : "no", "\n");
  return EmitReport(j, table);
}

absl::Status Runner::Attack() {
  if (absl::Status s = LoadConfig(); !s.ok()) return s;
  if (absl::Status s = LoadStore(); !s.ok()) return s;
  auto mechanism = MakeMechanism();
  if (!mechanism.ok()) return mechanism.status();
  std::vector<double> prior;
  if (opts_.prior == "uniform") {
    prior = UniformPrior(store_->size());
  } else if (opts_.prior == "zipf") {
    auto zipf = ZipfPrior(store_->size(), opts_.zipf_s);
    if (!zipf.ok()) return zipf.status();
    prior = *std::move(zipf);
  } else {
    return absl::InvalidArgumentError(absl::StrCat(
        "unknown prior '", opts_.prior, "' (expected uniform or zipf)"));
  }
  if (opts_.model_samples == 0) {
    return absl::InvalidArgumentError("--model-samples must be at least 1");
  }
  RngStream rng = RngStream(opts_.seed, 0).Fork(StreamPurpose::kAttack);
  auto accuracy =
      AttackAccuracy(*store_, rng, mechanism->config(), prior, opts_.trials,
                     opts_.model_samples, opts_.workers);
  if (!accuracy.ok()) return accuracy.status();
  Json config = BaseConfigJson();
  config["trials"] = opts_.trials;
  config["model_samples"] = opts_.model_samples;
  config["prior"] = opts_.prior;
  if (opts_.prior == "zipf") config["zipf_s"] = opts_.zipf_s;
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "attack";
  j["config"] = config;
  j["accuracy"] = *accuracy;
  return EmitReport(j, absl::StrCat("accuracy\t", Fixed(*accuracy), "\n"));
}

absl::Status Runner::Sensitivity() {
  if (absl::Status s = LoadConfig(); !s.ok()) return s;
  if (absl::Status s = LoadStore(); !s.ok()) return s;
  double beta = opts_.beta;
  if (!Set(given_.beta)) {
    const Json& mech = config_["mechanism"];
    if (mech.contains("beta") && mech["beta"].is_number()) {
      beta = mech["beta"].get<double>();
    }
  }
  auto profile = BuildProfile(*store_, beta);
  if (!profile.ok()) return profile.status();
  Json config;
  config["embeddings"] = opts_.embeddings;
  config["normalize"] = opts_.normalize;
  config["beta"] = beta;
  return EmitText([&](std::ostream& o) {
    o << "# config=" << config.dump() << "\n";
    o << "word\tlocal\tsmooth\n";
    for (size_t i = 0; i < store_->size(); ++i) {
      o << store_->word(WordId(i)) << '\t' << FormatDouble(profile->local[i])
        << '\t' << FormatDouble(profile->smooth[i]) << '\n';
    }
    o << "#global " << FormatDouble(profile->global) << "\n";
    return absl::OkStatus();
  });
}

absl::Status Runner::Pipeline() {
  if (absl::Status s = LoadConfig(); !s.ok()) return s;
  if (absl::Status s = LoadStore(); !s.ok()) return s;
  auto protocol = ProtocolConfigFromJson(config_);
  if (!protocol.ok()) return protocol.status();
  if (auto* file = std::get_if<TokenCorpus>(&protocol->corpus)) {
    auto text = ReadFile(file->path);
    if (!text.ok()) return text.status();
    file->tokens = SplitWhitespace(*text);
  }
  protocol->seed = opts_.seed;
  protocol->workers = opts_.workers;
  auto mechanism = MakeMechanism();
  if (!mechanism.ok()) return mechanism.status();
  protocol->mechanism = mechanism->config();
  if (absl::Status s = protocol->Validate(); !s.ok()) return s;
  auto report = RunProtocolWith(*store_, *protocol, AsWordMechanism(*mechanism));
  if (!report.ok()) return report.status();

  Json resolved = ProtocolConfigToJson(*protocol);
  resolved["embeddings"] = opts_.embeddings;
  resolved["normalize"] = opts_.normalize;
  const Json j = CuratorReportToJson(*store_, *report, resolved);

  if (!opts_.dump_local.empty()) {
    const RngStream root(protocol->seed, 0);
    auto inputs = ResolveCorpus(*store_, root, *protocol);
    if (!inputs.ok()) return inputs.status();
    auto local = RunLocalPhase(AsWordMechanism(*mechanism), root, *inputs,
                               protocol->workers);
    if (!local.ok()) return local.status();
    absl::Status s = WriteFileAtomic(opts_.dump_local, [&](std::ostream& o) {
      return WriteBatchJsonl(*store_, *local, o);
    });
    if (!s.ok()) return s;
  }
  if (!opts_.dump_released.empty()) {
    absl::Status s = WriteFileAtomic(opts_.dump_released, [&](std::ostream& o) {
      return WriteBatchJsonl(*store_, report->released, o);
    });
    if (!s.ok()) return s;
  }
  std::string table;
  absl::StrAppend(&table, "local_messages\t", report->local_messages, "\n",
                  "released_messages\t", report->released_messages, "\n",
                  "utility_l1\t", FormatDouble(report->utility_l1), "\n",
                  "utility_tv\t", FormatDouble(report->utility_tv), "\n");
  if (report->amplified_epsilon.has_value()) {
    absl::StrAppend(&table, "amplified_epsilon\t",
                    FormatDouble(report->amplified_epsilon->value),
                    " (approximate)\n");
  }
  return EmitReport(j, table);
}

absl::Status Runner::Ingest() {
  if (absl::Status s = LoadConfig(); !s.ok()) return s;
  if (opts_.out_path.empty()) {
    return absl::InvalidArgumentError("ingest needs --out");
  }
  if (absl::Status s = LoadStore(); !s.ok()) return s;
  absl::Status s = WriteFileAtomic(opts_.out_path, [&](std::ostream& o) {
    return WriteBinaryCache(*store_, o);
  });
  if (!s.ok()) return s;
  if (!opts_.quiet) {
    err_ << "wrote " << store_->size() << " words, dim " << store_->dim()
         << " to " << opts_.out_path << "\n";
  }
  return absl::OkStatus();
}

void AddMechanismFlags(CLI::App& app, Options& o, Given& g) {
  g.mechanism = app.add_option("--mechanism", o.mechanism,
                               "baseline, density, smooth, trunc_distance or trunc_knn");
  g.epsilon = app.add_option("--epsilon", o.epsilon, "Privacy parameter (default 1)");
  g.sigma = app.add_option("--sigma", o.sigma, "KDE bandwidth (density)");
  g.tau = app.add_option("--tau", o.tau, "Truncation radius (trunc_distance)");
  g.trunc_strategy = app.add_option("--trunc-strategy", o.trunc_strategy,
                                    "project or residual (trunc_distance)");
  g.k = app.add_option("--k", o.k, "Neighbor count (trunc_knn)");
  g.k_jitter = app.add_option("--k-jitter", o.k_jitter,
                              "Laplace jitter scale on k (trunc_knn)");
  g.mh_burn_in = app.add_option("--mh-burn-in", o.mh_burn_in, "MH burn-in steps");
  g.mh_thin = app.add_option("--mh-thin", o.mh_thin, "MH steps after burn-in");
  g.mh_step = app.add_option("--mh-step", o.mh_step, "MH proposal step size");
}

}  // namespace

int ExitCodeFor(const absl::Status& status) {
  switch (status.code()) {
    case absl::StatusCode::kOk:
      return kExitOk;
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kOutOfRange:
    case absl::StatusCode::kFailedPrecondition:
      return kExitConfig;
    case absl::StatusCode::kNotFound:
    case absl::StatusCode::kUnavailable:
    case absl::StatusCode::kPermissionDenied:
    case absl::StatusCode::kDataLoss:
      return kExitIo;
    default:
      return kExitInternal;
  }
}

int RunCli(const std::vector<std::string>& args, std::istream& in,
           std::ostream& out, std::ostream& err) {
  Options opts;
  Given given;
  CLI::App app{"Metric-DP text perturbation toolkit", "dxtext"};
  app.require_subcommand(1);
  app.fallthrough();
  given.embeddings =
      app.add_option("--embeddings", opts.embeddings, "Embedding file (text or cache)");
  given.seed = app.add_option("--seed", opts.seed, "Random seed (default 0)");
  app.add_option("--format", opts.format, "Report format on stdout")
      ->check(CLI::IsMember({"json", "tsv", "text"}));
  app.add_flag("--quiet", opts.quiet, "Suppress config echo and tables");
  given.workers = app.add_option("--workers", opts.workers, "Worker threads");
  app.add_option("--config", opts.config_path, "JSON config file");
  app.add_flag("--normalize", opts.normalize, "Length-normalize vectors on load");
  app.add_option("--out", opts.out_path, "Output file (written atomically)");
  AddMechanismFlags(app, opts, given);
  given.beta = app.add_option("--beta", opts.beta, "Smoothness parameter");

  Runner runner(opts, given, in, out, err);
  std::function<absl::Status()> action;

  CLI::App* perturb = app.add_subcommand("perturb", "Perturb tokens from stdin");
  perturb->add_flag("--skip-oov", opts.skip_oov,
                    "Pass unknown tokens through unchanged");
  perturb->callback([&] { action = [&] { return runner.Perturb(); }; });

  CLI::App* matrix = app.add_subcommand("matrix", "Estimate the transition matrix");
  matrix->add_option("--samples", opts.samples, "Samples per row");
  matrix->callback([&] { action = [&] { return runner.Matrix(); }; });

  CLI::App* stats = app.add_subcommand("stats", "Plausible-deniability statistics");
  stats->add_option("--word", opts.words, "Words to measure (default all)");
  stats->add_option("--trials", opts.trials, "Trials per word");
  stats->callback([&] { action = [&] { return runner.Stats(); }; });

  CLI::App* verify = app.add_subcommand("verify-dp", "Empirical metric-DP check");
  verify->add_option("--matrix", opts.matrix_path, "Matrix TSV to check");
  verify->add_option("--samples", opts.samples, "Samples per row when estimating");
  verify->callback([&] { action = [&] { return runner.VerifyDp(); }; });

  CLI::App* attack = app.add_subcommand("attack", "Bayes-optimal attack accuracy");
  attack->add_option("--trials", opts.trials, "Attack trials");
  attack->add_option("--model-samples", opts.model_samples,
                     "Samples per row of the attacker's matrix");
  attack->add_option("--prior", opts.prior, "uniform or zipf");
  attack->add_option("--zipf-s", opts.zipf_s, "Zipf exponent for the prior");
  attack->callback([&] { action = [&] { return runner.Attack(); }; });

  CLI::App* sensitivity =
      app.add_subcommand("sensitivity", "Local and smooth sensitivity table");
  sensitivity->callback([&] { action = [&] { return runner.Sensitivity(); }; });

  CLI::App* pipeline = app.add_subcommand("pipeline", "Run the full protocol");
  given.n_users = pipeline->add_option("--n-users", opts.n_users, "Number of users");
  given.m_per_user =
      pipeline->add_option("--m-per-user", opts.m_per_user, "Words per user");
  given.corpus_file =
      pipeline->add_option("--corpus-file", opts.corpus_file, "Token corpus file");
  given.zipf_s = pipeline->add_option("--zipf-s", opts.zipf_s,
                                      "Zipf exponent of the synthetic corpus");
  given.amplifiers = pipeline->add_option(
      "--amplifier", opts.amplifiers,
      "Stage: shuffle, subsample:<q> or kthreshold:<k> (repeatable, in order)");
  pipeline->add_option("--dump-local", opts.dump_local,
                       "Write local messages as JSON lines");
  pipeline->add_option("--dump-released", opts.dump_released,
                       "Write released messages as JSON lines");
  pipeline->callback([&] { action = [&] { return runner.Pipeline(); }; });

  CLI::App* ingest = app.add_subcommand("ingest", "Convert embeddings to the binary cache");
  ingest->callback([&] { action = [&] { return runner.Ingest(); }; });

  std::vector<const char*> argv{"dxtext"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  absl::Status status;
  try {
    status = action();
  } catch (const std::exception& e) {
    status = absl::InternalError(e.what());
  }
  if (!status.ok()) {
    err << "error: " << status.message() << "\n";
    return ExitCodeFor(status);
  }
  out.flush();
  return kExitOk;
}

}  // namespace dxtext::cli
