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

#include "ncs/reporting.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <unordered_map>

#include "ncs/errors.hpp"
#include "ncs/version.hpp"

namespace ncs {
namespace {

using nlohmann::json;

// Published scale-down coefficients for indices 1..4 at base resolution 224.
constexpr std::array<double, 4> kRefDepth{1.0, 0.7, 0.6, 0.5};
constexpr std::array<int, 4> kRefTotals{18, 17, 15, 12};
constexpr std::array<double, 4> kRefWidth{1.0, 0.8666, 0.701, 0.514};
constexpr std::array<double, 4> kRefResolution{1.0, 0.905, 0.766, 0.587};
constexpr std::array<int, 4> kRefResolutions{224, 203, 172, 132};

struct PublishedModel {
  int wi, dj, rk;
  double params_m;
  double macs_m;
};

constexpr std::array<PublishedModel, 10> kPublished{{
    {1, 1, 1, 5.33, 385.81},
    {1, 2, 1, 4.74, 362.62},
    {1, 3, 1, 4.42, 313.86},
    {2, 2, 1, 3.78, 296.88},
    {2, 3, 2, 3.17, 231.88},
    {3, 2, 1, 2.68, 206.72},
    {3, 3, 1, 2.52, 181.32},
    {3, 4, 2, 2.18, 127.99},
    {4, 2, 1, 1.6, 114.52},
    {4, 4, 1, 1.34, 74.56},
}};

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

struct CoefficientCell {
  std::string quantity;
  int index;
  std::string derived;
  std::optional<std::string> reference;
  std::optional<std::string> delta;
};

std::vector<CoefficientCell> coefficient_cells(const ScalingLadder& ladder) {
  std::vector<CoefficientCell> cells;
  const bool same_base = ladder.base_resolution == 224;
  for (int i = 0; i < ladder.max_index(); ++i) {
    const bool ref = i < 4;
    auto add_coeff = [&](const char* q, const Rational& value, const std::array<double, 4>& refs) {
      CoefficientCell c{q, i + 1, value.to_string(4), {}, {}};
      if (ref) {
        c.reference = fixed(refs[static_cast<std::size_t>(i)], 4);
        c.delta = fixed(value.to_double() - refs[static_cast<std::size_t>(i)], 4);
      }
      cells.push_back(std::move(c));
    };
    auto add_int = [&](const char* q, int value, std::optional<int> refv) {
      CoefficientCell c{q, i + 1, std::to_string(value), {}, {}};
      if (refv) {
        c.reference = std::to_string(*refv);
        c.delta = std::to_string(value - *refv);
      }
      cells.push_back(std::move(c));
    };
    const auto idx = static_cast<std::size_t>(i);
    add_coeff("depth_coeff", ladder.depth[idx], kRefDepth);
    add_int("operator_total", ladder.totals[idx], ref ? std::optional<int>(kRefTotals[idx]) : std::nullopt);
    add_coeff("width_coeff", ladder.width[idx], kRefWidth);
    add_coeff("resolution_coeff", ladder.resolution[idx], kRefResolution);
    add_int("input_resolution", ladder.resolutions[idx],
            ref && same_base ? std::optional<int>(kRefResolutions[idx]) : std::nullopt);
  }
  return cells;
}

template <typename T>
T json_get(const json& obj, const char* key, const T& fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw DomainError(std::string("config: field \"") + key + "\" has the wrong type");
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw DomainError(where + ": expected an object");
  for (const auto& item : obj.items()) {
    if (!allowed.contains(item.key())) throw DomainError(where + ": unknown field \"" + item.key() + "\"");
  }
}

std::string fmt_acc(double v) { return fixed(v, 4); }

}  // namespace

std::string config_hash(const json& inputs) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : inputs.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json provenance(const json& inputs) {
  return {{"engine_version", kEngineVersion}, {"config_hash", config_hash(inputs)}};
}

// ---------------------------------------------------------------------------

RunConfig run_config_from_json(const json& doc, const std::filesystem::path& base_dir) {
  check_keys(doc,
             {"epochs_per_round", "total_epochs", "elimination_cadence", "pool_file", "groups_file", "state_file",
              "n_groups", "max_index", "parallelism", "seed", "evaluator", "report_formats"},
             "config");
  RunConfig c;
  c.search.epochs_per_round = json_get(doc, "epochs_per_round", 10);
  c.search.total_epochs = json_get(doc, "total_epochs", 350);
  c.search.elimination_cadence = json_get(doc, "elimination_cadence", 1);
  c.search.rng_seed = json_get<std::uint64_t>(doc, "seed", 1);
  c.pool_file = resolve(base_dir, json_get<std::string>(doc, "pool_file", ""));
  c.groups_file = resolve(base_dir, json_get<std::string>(doc, "groups_file", ""));
  c.state_file = resolve(base_dir, json_get<std::string>(doc, "state_file", ""));
  c.n_groups = json_get(doc, "n_groups", 10);
  c.max_index = json_get(doc, "max_index", 4);
  const int parallelism = json_get(doc, "parallelism", 1);
  c.report_formats = json_get(doc, "report_formats", c.report_formats);

  for (auto [name, value] : {std::pair{"epochs_per_round", c.search.epochs_per_round},
                             {"total_epochs", c.search.total_epochs},
                             {"elimination_cadence", c.search.elimination_cadence},
                             {"n_groups", c.n_groups},
                             {"max_index", c.max_index},
                             {"parallelism", parallelism}}) {
    if (value < 1) throw DomainError(std::string("config: ") + name + " must be a positive integer");
  }
  c.parallelism = static_cast<unsigned>(parallelism);

  EvaluatorSettings& ev = c.evaluator;
  ev.seed = c.search.rng_seed;
  if (doc.contains("evaluator")) {
    const json& e = doc.at("evaluator");
    check_keys(e,
               {"kind", "trace_dir", "seed", "curve", "command", "timeout_s", "parallelism", "checkpoint_dir",
                "batch_size", "optimizer", "augmentation_policy_id"},
               "config.evaluator");
    ev.kind = evaluator_kind_from_string(json_get<std::string>(e, "kind", "synthetic"));
    ev.trace_dir = resolve(base_dir, json_get<std::string>(e, "trace_dir", ""));
    ev.seed = json_get<std::uint64_t>(e, "seed", ev.seed);
    if (e.contains("curve")) {
      const json& m = e.at("curve");
      check_keys(m, {"acc_at_1m_params", "acc_per_param_doubling", "tau_at_100m_macs", "tau_exponent", "noise"},
                 "config.evaluator.curve");
      auto& s = ev.synthetic;
      s.acc_at_1m_params = json_get(m, "acc_at_1m_params", s.acc_at_1m_params);
      s.acc_per_param_doubling = json_get(m, "acc_per_param_doubling", s.acc_per_param_doubling);
      s.tau_at_100m_macs = json_get(m, "tau_at_100m_macs", s.tau_at_100m_macs);
      s.tau_exponent = json_get(m, "tau_exponent", s.tau_exponent);
      s.noise = json_get(m, "noise", s.noise);
      if (s.noise < 0.0) throw DomainError("config.evaluator.curve: noise must be >= 0");
    }
    auto& x = ev.external;
    x.command = json_get(e, "command", x.command);
    x.timeout_s = json_get(e, "timeout_s", x.timeout_s);
    const int ext_parallelism = json_get(e, "parallelism", 1);
    if (ext_parallelism < 1) throw DomainError("config.evaluator: parallelism must be >= 1");
    if (!(x.timeout_s > 0.0)) throw DomainError("config.evaluator: timeout_s must be positive");
    x.parallelism = static_cast<unsigned>(ext_parallelism);
    x.checkpoint_dir = resolve(base_dir, json_get<std::string>(e, "checkpoint_dir", "")).string();
    x.hyperparams.batch_size = json_get(e, "batch_size", x.hyperparams.batch_size);
    x.hyperparams.optimizer = json_get(e, "optimizer", x.hyperparams.optimizer);
    x.hyperparams.augmentation_policy_id = json_get(e, "augmentation_policy_id", x.hyperparams.augmentation_policy_id);
  }
  validate(c.search);
  return c;
}

json to_json(const RunConfig& c) {
  const auto& ev = c.evaluator;
  return {{"epochs_per_round", c.search.epochs_per_round},
          {"total_epochs", c.search.total_epochs},
          {"elimination_cadence", c.search.elimination_cadence},
          {"seed", c.search.rng_seed},
          {"pool_file", c.pool_file.string()},
          {"groups_file", c.groups_file.string()},
          {"state_file", c.state_file.string()},
          {"n_groups", c.n_groups},
          {"max_index", c.max_index},
          {"parallelism", c.parallelism},
          {"report_formats", c.report_formats},
          {"evaluator",
           {{"kind", to_string(ev.kind)},
            {"trace_dir", ev.trace_dir.string()},
            {"seed", ev.seed},
            {"curve",
             {{"acc_at_1m_params", ev.synthetic.acc_at_1m_params},
              {"acc_per_param_doubling", ev.synthetic.acc_per_param_doubling},
              {"tau_at_100m_macs", ev.synthetic.tau_at_100m_macs},
              {"tau_exponent", ev.synthetic.tau_exponent},
              {"noise", ev.synthetic.noise}}},
            {"command", ev.external.command},
            {"timeout_s", ev.external.timeout_s},
            {"parallelism", ev.external.parallelism},
            {"checkpoint_dir", ev.external.checkpoint_dir},
            {"batch_size", ev.external.hyperparams.batch_size},
            {"optimizer", ev.external.hyperparams.optimizer},
            {"augmentation_policy_id", ev.external.hyperparams.augmentation_policy_id}}}};
}

std::unique_ptr<Evaluator> make_evaluator(const EvaluatorSettings& s) {
  switch (s.kind) {
    case EvaluatorKind::kTrace:
      if (s.trace_dir.empty()) throw DomainError("trace evaluator needs evaluator.trace_dir");
      return std::make_unique<TraceEvaluator>(TraceStore::load_dir(s.trace_dir));
    case EvaluatorKind::kSynthetic:
      return std::make_unique<SyntheticEvaluator>(s.seed, s.synthetic);
    case EvaluatorKind::kExternal:
      return std::make_unique<ExternalEvaluator>(s.external);
  }
  throw DomainError("unknown evaluator kind");
}

// ---------------------------------------------------------------------------

json coefficient_table_json(const ScalingLadder& ladder) {
  json cells = json::array();
  for (const auto& c : coefficient_cells(ladder)) {
    json cell = {{"quantity", c.quantity}, {"index", c.index}, {"derived", c.derived}};
    cell["reference"] = c.reference ? json(*c.reference) : json(nullptr);
    cell["delta"] = c.delta ? json(*c.delta) : json(nullptr);
    cells.push_back(std::move(cell));
  }
  return {{"ladder", to_json(ladder)}, {"comparison", std::move(cells)}};
}

std::string coefficient_table_markdown(const ScalingLadder& ladder) {
  std::ostringstream os;
  const int n = ladder.max_index();
  auto header = [&](const char* sym) {
    os << "| " << sym << " |";
    for (int i = 1; i <= n; ++i) os << ' ' << sym << "_" << i << " |";
    os << "\n|---|";
    for (int i = 0; i < n; ++i) os << "---|";
    os << '\n';
  };
  auto row = [&](const char* label, auto&& value) {
    os << "| " << label << " |";
    for (int i = 0; i < n; ++i) os << ' ' << value(static_cast<std::size_t>(i)) << " |";
    os << '\n';
  };
  os << "Scale-down coefficients (base resolution " << ladder.base_resolution << ")\n\n";
  header("d");
  row("Coefficient", [&](std::size_t i) { return ladder.depth[i].to_string(4); });
  row("Total operators", [&](std::size_t i) { return std::to_string(ladder.totals[i]); });
  os << '\n';
  header("w");
  row("Coefficient", [&](std::size_t i) { return ladder.width[i].to_string(4); });
  os << '\n';
  header("r");
  row("Coefficient", [&](std::size_t i) { return ladder.resolution[i].to_string(4); });
  row("Input resolution", [&](std::size_t i) { return std::to_string(ladder.resolutions[i]); });
  if (ladder.truncated) os << "\nLadder truncated: no further depth reduction is possible.\n";

  os << "\n| quantity | index | derived | reference | delta |\n|---|---|---|---|---|\n";
  for (const auto& c : coefficient_cells(ladder)) {
    os << "| " << c.quantity << " | " << c.index << " | " << c.derived << " | " << c.reference.value_or("-") << " | "
       << c.delta.value_or("-") << " |\n";
  }
  return os.str();
}

std::string coefficient_table_csv(const ScalingLadder& ladder) {
  std::ostringstream os;
  os << "quantity,index,derived,reference,delta\n";
  for (const auto& c : coefficient_cells(ladder)) {
    os << c.quantity << ',' << c.index << ',' << c.derived << ',' << c.reference.value_or("") << ','
       << c.delta.value_or("") << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------

ModelCard model_card(const ScalingLadder& ladder, int wi, int dj, int rk, std::optional<int> hf_resolution,
                     const BuildOptions& options) {
  const int n = ladder.max_index();
  for (auto [axis, idx] : {std::pair{"w", wi}, {"d", dj}, {"r", rk}}) {
    if (idx < 1 || idx > n) {
      throw DomainError(std::string(axis) + " index " + std::to_string(idx) + " outside ladder [1, " +
                        std::to_string(n) + "]");
    }
  }
  ModelCard card;
  card.wi = wi;
  card.dj = dj;
  card.rk = rk;
  const auto w = ladder.width[static_cast<std::size_t>(wi - 1)];
  const auto d = ladder.depth[static_cast<std::size_t>(dj - 1)];
  if (hf_resolution) {
    card.hf_resolution = *hf_resolution;
    card.arch = hf_transform(build_model(w, d, Rational(1), options), *hf_resolution);
    card.name = "HF-Model(w_" + std::to_string(wi) + ", d_" + std::to_string(dj) + ", " +
                std::to_string(*hf_resolution) + ")";
    card.arch.name = hf_candidate_id(wi, dj, *hf_resolution);
  } else {
    card.arch = build_model(w, d, ladder.resolution[static_cast<std::size_t>(rk - 1)], options);
    card.name = "Model(w_" + std::to_string(wi) + ", d_" + std::to_string(dj) + ", r_" + std::to_string(rk) + ")";
    card.arch.name = candidate_id(wi, dj, rk);
    for (const auto& p : kPublished) {
      if (p.wi == wi && p.dj == dj && p.rk == rk) {
        card.reference_params_m = p.params_m;
        card.reference_macs_m = p.macs_m;
      }
    }
  }
  card.cost = cost(card.arch);
  return card;
}

json to_json(const ModelCard& card) {
  json doc = {{"name", card.name},
              {"indices", {{"w", card.wi}, {"d", card.dj}, {"r", card.rk}}},
              {"hf_resolution", card.hf_resolution},
              {"arch", to_json(card.arch)},
              {"cost", to_json(card.cost)},
              {"params_m", static_cast<double>(card.cost.params_total) / 1e6},
              {"macs_m", static_cast<double>(card.cost.macs_total) / 1e6}};
  doc["reference_params_m"] = card.reference_params_m ? json(*card.reference_params_m) : json(nullptr);
  doc["reference_macs_m"] = card.reference_macs_m ? json(*card.reference_macs_m) : json(nullptr);
  return doc;
}

std::string to_markdown(const ModelCard& card) {
  std::ostringstream os;
  os << "## " << card.name << "\n\n";
  os << "- input resolution: " << card.arch.input_resolution << "x" << card.arch.input_resolution << "\n";
  os << "- coefficients: w=" << fixed(card.arch.width_coeff, 4) << " d=" << fixed(card.arch.depth_coeff, 4)
     << " r=" << fixed(card.arch.resolution_coeff, 4) << "\n";
  os << "- params: " << card.cost.params_total << " (" << fixed(card.cost.params_total / 1e6, 2) << "M)";
  if (card.reference_params_m) os << ", reference " << fixed(*card.reference_params_m, 2) << "M";
  os << "\n- MACs: " << card.cost.macs_total << " (" << fixed(card.cost.macs_total / 1e6, 2) << "M)";
  if (card.reference_macs_m) os << ", reference " << fixed(*card.reference_macs_m, 2) << "M";
  os << "\n- convention: " << card.cost.convention_note << "\n\n";
  os << "| stage | operator | kernel | expansion | stride | channels | repeats | out res | params | MACs |\n"
     << "|---|---|---|---|---|---|---|---|---|---|\n";
  for (std::size_t i = 0; i < card.arch.stages.size(); ++i) {
    const auto& s = card.arch.stages[i];
    const auto& c = card.cost.per_stage[i];
    os << "| " << s.index << " | " << to_string(s.kind) << " | " << s.kernel << " | " << s.expansion << " | "
       << s.stride << " | " << s.out_channels << " | " << s.repeats << " | " << c.out_resolution << " | " << c.params
       << " | " << c.macs << " |\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------

std::vector<ReportRow> report_rows(const TournamentState& state, std::span<const Candidate> pool) {
  std::unordered_map<std::string, const Candidate*> by_id;
  for (const auto& c : pool) by_id.emplace(c.id, &c);
  auto fill = [&](ReportRow& row) {
    const auto& h = state.history.at(row.candidate_id);
    row.epochs_trained = static_cast<int>(h.size());
    if (!h.empty()) {
      row.avg_accuracy = avg_accuracy({row.candidate_id, h}, static_cast<int>(h.size()));
      row.last_accuracy = h.back();
    }
    if (auto it = by_id.find(row.candidate_id); it != by_id.end()) {
      row.params = it->second->cost.params_total;
      row.macs = it->second->cost.macs_total;
    }
  };
  std::vector<ReportRow> rows;
  for (const auto& g : state.groups) {
    const std::string best = state.finished() ? champion(state, g) : std::string();
    for (const auto& id : g.survivors) {
      ReportRow row;
      row.group_id = g.group_id;
      row.candidate_id = id;
      row.status = !state.finished() ? "active" : (id == best ? "champion" : "survivor");
      fill(row);
      rows.push_back(std::move(row));
    }
    for (const auto& e : g.eliminated) {
      ReportRow row;
      row.group_id = g.group_id;
      row.candidate_id = e.candidate_id;
      row.status = "eliminated";
      row.eliminated_at_round = e.at_round;
      fill(row);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string report_csv(const TournamentState& state, std::span<const Candidate> pool) {
  std::ostringstream os;
  os << "group_id,candidate_id,status,eliminated_at_round,epochs_trained,avg_accuracy,last_accuracy,params,macs\n";
  for (const auto& r : report_rows(state, pool)) {
    os << r.group_id << ',' << r.candidate_id << ',' << r.status << ',' << r.eliminated_at_round << ','
       << r.epochs_trained << ',' << fmt_acc(r.avg_accuracy) << ',' << fmt_acc(r.last_accuracy) << ',';
    if (r.params >= 0) os << r.params;
    os << ',';
    if (r.macs >= 0) os << r.macs;
    os << '\n';
  }
  return os.str();
}

std::string report_markdown(const TournamentState& state, std::span<const Candidate> pool) {
  const auto rows = report_rows(state, pool);
  std::ostringstream os;
  os << "# Tournament report\n\n";
  os << "- rounds completed: " << state.round << " / " << state.total_rounds() << " (epoch " << state.current_epoch()
     << " of " << state.total_epochs << ")\n";
  os << "- status: " << (state.finished() ? "finished" : "in progress") << "\n";
  os << "- cost ledger: " << state.cost_ledger << " candidate-epochs\n\n";

  os << "## " << (state.finished() ? "Champions" : "Current leaders") << "\n\n| group | candidate | status | avg acc | last acc |\n|---|---|---|---|---|\n";
  for (const auto& g : state.groups) {
    const std::string best = champion(state, g);
    for (const auto& r : rows) {
      if (r.candidate_id == best) {
        os << "| " << g.group_id << " | " << best << " | " << r.status << " | " << fmt_acc(r.avg_accuracy) << " | "
           << fmt_acc(r.last_accuracy) << " |\n";
      }
    }
  }

  os << "\n## Elimination timeline\n\n| round | group | eliminated |\n|---|---|---|\n";
  std::map<int, std::vector<std::pair<int, std::string>>> timeline;
  for (const auto& g : state.groups) {
    for (const auto& e : g.eliminated) timeline[e.at_round].emplace_back(g.group_id, e.candidate_id);
  }
  for (const auto& [round, items] : timeline) {
    for (const auto& [gid, id] : items) os << "| " << round << " | " << gid << " | " << id << " |\n";
  }

  os << "\n## Candidates\n\n| group | candidate | status | epochs | avg acc | last acc | params | MACs |\n"
     << "|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    os << "| " << r.group_id << " | " << r.candidate_id << " | " << r.status << " | " << r.epochs_trained << " | "
       << fmt_acc(r.avg_accuracy) << " | " << fmt_acc(r.last_accuracy) << " | "
       << (r.params >= 0 ? std::to_string(r.params) : "-") << " | " << (r.macs >= 0 ? std::to_string(r.macs) : "-")
       << " |\n";
  }
  return os.str();
}

json report_json(const TournamentState& state, std::span<const Candidate> pool) {
  json rows = json::array();
  for (const auto& r : report_rows(state, pool)) {
    json row = {{"group_id", r.group_id},
                {"candidate_id", r.candidate_id},
                {"status", r.status},
                {"eliminated_at_round", r.eliminated_at_round},
                {"epochs_trained", r.epochs_trained},
                {"avg_accuracy", r.avg_accuracy},
                {"last_accuracy", r.last_accuracy}};
    row["params"] = r.params >= 0 ? json(r.params) : json(nullptr);
    row["macs"] = r.macs >= 0 ? json(r.macs) : json(nullptr);
    rows.push_back(std::move(row));
  }
  json champions = json::array();
  for (const auto& g : state.groups) champions.push_back({{"group_id", g.group_id}, {"candidate_id", champion(state, g)}});
  return {{"round", state.round},
          {"total_rounds", state.total_rounds()},
          {"finished", state.finished()},
          {"cost_ledger", state.cost_ledger},
          {"champions", std::move(champions)},
          {"candidates", std::move(rows)}};
}

}  // namespace ncs
