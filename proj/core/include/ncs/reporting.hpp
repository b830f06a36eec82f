/* Copyright 2026 The NCS Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef NCS_REPORTING_HPP_
#define NCS_REPORTING_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ncs/arch_model.hpp"
#include "ncs/candidate_pool.hpp"
#include "ncs/cost_model.hpp"
#include "ncs/eval_gateway.hpp"
#include "ncs/scaling_rules.hpp"
#include "ncs/tournament.hpp"

namespace ncs {

// ---------------------------------------------------------------------------
// Provenance

// 16 hex digits (FNV-1a 64) of the compact JSON dump of `inputs`.
std::string config_hash(const nlohmann::json& inputs);

// {"engine_version": ..., "config_hash": ...}
nlohmann::json provenance(const nlohmann::json& inputs);

// ---------------------------------------------------------------------------
// Run configuration

struct EvaluatorSettings {
  EvaluatorKind kind = EvaluatorKind::kSynthetic;
  std::filesystem::path trace_dir;
  std::uint64_t seed = 1;
  SyntheticCurveModel synthetic;
  ExternalConfig external;
};

struct RunConfig {
  std::filesystem::path pool_file;
  std::filesystem::path groups_file;
  std::filesystem::path state_file;  // optional checkpoint target
  TournamentConfig search;
  int n_groups = 10;
  int max_index = 4;
  unsigned parallelism = 1;
  EvaluatorSettings evaluator;
  std::vector<std::string> report_formats{"md"};
};

// Relative paths resolve against base_dir (the config file's directory).
// Unknown top-level keys are rejected.
RunConfig run_config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const RunConfig& config);

std::unique_ptr<Evaluator> make_evaluator(const EvaluatorSettings& settings);

// ---------------------------------------------------------------------------
// Coefficient table

// Derived ladder next to the published coefficients, with per-cell deltas.
nlohmann::json coefficient_table_json(const ScalingLadder& ladder);
std::string coefficient_table_markdown(const ScalingLadder& ladder);
std::string coefficient_table_csv(const ScalingLadder& ladder);

// ---------------------------------------------------------------------------
// Model cards

struct ModelCard {
  std::string name;   // "Model(w_i, d_j, r_k)" or "HF-Model(w_i, d_j, 128)"
  int wi = 1, dj = 1, rk = 1;
  int hf_resolution = 0;
  ArchDescriptor arch;
  CostReport cost;
  std::optional<double> reference_params_m;
  std::optional<double> reference_macs_m;
};

ModelCard model_card(const ScalingLadder& ladder, int wi, int dj, int rk, std::optional<int> hf_resolution = {},
                     const BuildOptions& options = {});
nlohmann::json to_json(const ModelCard& card);
std::string to_markdown(const ModelCard& card);

// ---------------------------------------------------------------------------
// Tournament report

struct ReportRow {
  int group_id = 0;
  std::string candidate_id;
  std::string status;  // champion | survivor | active | eliminated
  int eliminated_at_round = 0;
  int epochs_trained = 0;
  double avg_accuracy = 0.0;
  double last_accuracy = 0.0;
  std::int64_t params = -1;  // -1 when the pool is not supplied
  std::int64_t macs = -1;
};

// One row per candidate, in group order. `pool` may be empty.
std::vector<ReportRow> report_rows(const TournamentState& state, std::span<const Candidate> pool);
std::string report_markdown(const TournamentState& state, std::span<const Candidate> pool);
std::string report_csv(const TournamentState& state, std::span<const Candidate> pool);
nlohmann::json report_json(const TournamentState& state, std::span<const Candidate> pool);

}  // namespace ncs

#endif  // NCS_REPORTING_HPP_
