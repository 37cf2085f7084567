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

// JSON forms of configs and reports.
//
// Mechanism config:
//   {"variant": "baseline" | "density" | "smooth" | "trunc_distance" |
//               "trunc_knn",
//    "epsilon": number,
//    density:        "sigma"?: number, "mh"?: {"burn_in", "thin",
//                    "proposal_step"?}
//    smooth:         "beta": number
//    trunc_distance: "tau": number, "trunc_strategy"?: "project"|"residual"
//    trunc_knn:      "k": integer, "k_jitter"?: number}
// Keys that belong to another variant are rejected.
//
// Amplifier: {"kind": "shuffle"} | {"kind": "subsample", "q": number} |
//            {"kind": "kthreshold", "k": integer}
//
// Protocol config:
//   {"n_users", "m_per_user", "seed"?, "workers"?, "embeddings"?,
//    "mechanism": {...}, "amplifiers"?: [...],
//    "corpus"?: {"kind": "zipf", "s"?: number} | {"kind": "file", "path"}}
//
// Every report carries "schema_version" and the resolved "config".

#ifndef DXTEXT_JSON_IO_H_
#define DXTEXT_JSON_IO_H_

#include <string>

#include "absl/status/statusor.h"
#include "dxtext/amplification.h"
#include "dxtext/analysis.h"
#include "dxtext/embedding_store.h"
#include "dxtext/pipeline.h"
#include "dxtext/randomizers.h"
#include "json.hpp"

namespace dxtext {

using Json = nlohmann::ordered_json;

inline constexpr int kReportSchemaVersion = 1;

Json MechanismConfigToJson(const MechanismConfig& config);
absl::StatusOr<MechanismConfig> MechanismConfigFromJson(const Json& j);

Json AmplifierToJson(const AmplifierConfig& config);
absl::StatusOr<AmplifierConfig> AmplifierFromJson(const Json& j);

// A "file" corpus comes back with its path set and no tokens loaded.
Json ProtocolConfigToJson(const ProtocolConfig& config);
absl::StatusOr<ProtocolConfig> ProtocolConfigFromJson(const Json& j);

Json HistogramToJson(const EmbeddingStore& store, const Histogram& histogram);

Json CuratorReportToJson(const EmbeddingStore& store,
                         const CuratorReport& report,
                         const Json& resolved_config);

Json DeniabilityStatsToJson(const EmbeddingStore& store,
                            const DeniabilityStats& stats);

Json MetricDpReportToJson(const EmbeddingStore& store,
                          const MetricDpReport& report);

}  // namespace dxtext

#endif  // DXTEXT_JSON_IO_H_
