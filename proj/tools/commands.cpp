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

#include "commands.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "ncs/arch_model.hpp"
#include "ncs/candidate_pool.hpp"
#include "ncs/cost_model.hpp"
#include "ncs/errors.hpp"
#include "ncs/eval_gateway.hpp"
#include "ncs/reporting.hpp"
#include "ncs/scaling_rules.hpp"
#include "ncs/tournament.hpp"
#include "ncs/version.hpp"

namespace ncs::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format;
};

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("ncs");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("NCS_LOG_LEVEL")) {
    const std::string v = level;
    if (v == "error") spdlog::set_level(spdlog::level::err);
    else if (v == "warn") spdlog::set_level(spdlog::level::warn);
    else if (v == "info") spdlog::set_level(spdlog::level::info);
    else if (v == "debug") spdlog::set_level(spdlog::level::debug);
    else spdlog::warn("ignoring NCS_LOG_LEVEL={} (expected error|warn|info|debug)", v);
  }
}

json read_json_file(const fs::path& path, const char* what) {
  if (path.empty()) throw DomainError(std::string(what) + " path is required");
  std::ifstream in(path);
  if (!in) throw DomainError(std::string("cannot read ") + what + " file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw StructuralError(std::string(what) + " file " + path.string() + " is empty");
  }
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw StructuralError(std::string(what) + " file " + path.string() + " is not valid JSON");
  return doc;
}

std::string resolve_format(const GlobalOptions& g, const char* fallback, std::initializer_list<const char*> allowed) {
  const std::string f = g.format.empty() ? fallback : g.format;
  for (const char* a : allowed) {
    if (f == a) return f;
  }
  throw DomainError("--format " + f + " is not supported by this command");
}

// Writes `text` to --out or stdout.
void emit(const GlobalOptions& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  const fs::path path(g.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
  if (!out) throw DomainError("cannot write " + g.out);
}

std::string with_provenance(const json& inputs, json doc) {
  const json p = provenance(inputs);
  json out = p;
  for (auto& [k, v] : doc.items()) out[k] = v;
  return out.dump(2);
}

std::string md_header(const json& inputs) {
  return "<!-- ncs " + std::string(kEngineVersion) + " config " + config_hash(inputs) + " -->\n";
}

std::string csv_header(const json& inputs) {
  return "# ncs " + std::string(kEngineVersion) + " config " + config_hash(inputs) + "\n";
}

std::string render(const std::string& format, const json& inputs, const json& doc,
                   const std::string& md, const std::string& csv) {
  if (format == "json") return with_provenance(inputs, doc);
  if (format == "md") return md_header(inputs) + md;
  return csv_header(inputs) + csv;
}

ScalingLadder b0_ladder(int max_index, int base_resolution = 224) {
  const ArchDescriptor base = baseline_b0();
  std::vector<int> repeats;
  for (const auto& s : base.stages) repeats.push_back(s.repeats);
  return derive_ladder(repeats, max_index, base_resolution);
}

std::vector<int> parse_resolutions(const std::string& list) {
  std::vector<int> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw DomainError("invalid resolution \"" + item + "\"");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

struct DeriveArgs {
  int max_index = 4;
  int base_resolution = 224;
};

void cmd_derive_coeffs(const GlobalOptions& g, const DeriveArgs& a) {
  const std::string format = resolve_format(g, "json", {"json", "md", "csv"});
  const ScalingLadder ladder = b0_ladder(a.max_index, a.base_resolution);
  const json inputs = {{"command", "derive-coeffs"}, {"max_index", a.max_index}, {"base_resolution", a.base_resolution}};
  emit(g, render(format, inputs, coefficient_table_json(ladder), coefficient_table_markdown(ladder), coefficient_table_csv(ladder)));
}

struct BuildArgs {
  std::optional<double> w, d, r;
  std::optional<int> wi, dj, rk;
  int max_index = 4;
  std::optional<int> hf;
  int divisor = 8;
};

void cmd_build(const GlobalOptions& g, const BuildArgs& a) {
  resolve_format(g, "json", {"json"});
  const BuildOptions opts{a.divisor};
  Rational w(1), d(1), r(1);
  json inputs = {{"command", "build"}, {"divisor", a.divisor}};
  if (a.wi || a.dj || a.rk) {
    const ScalingLadder ladder = b0_ladder(a.max_index);
    auto pick = [&](const std::optional<int>& idx, const std::vector<Rational>& coeffs, const char* axis) {
      const int i = idx.value_or(1);
      if (i < 1 || i > ladder.max_index()) {
        throw DomainError(std::string(axis) + " index " + std::to_string(i) + " outside ladder");
      }
      return coeffs[static_cast<std::size_t>(i - 1)];
    };
    w = pick(a.wi, ladder.width, "w");
    d = pick(a.dj, ladder.depth, "d");
    r = pick(a.rk, ladder.resolution, "r");
    inputs["indices"] = {a.wi.value_or(1), a.dj.value_or(1), a.rk.value_or(1)};
  } else {
    if (a.w) w = Rational::from_double(*a.w);
    if (a.d) d = Rational::from_double(*a.d);
    if (a.r) r = Rational::from_double(*a.r);
    inputs["coeffs"] = {w.to_double(), d.to_double(), r.to_double()};
  }
  ArchDescriptor arch = build_model(w, d, r, opts);
  if (a.hf) {
    arch = hf_transform(arch, *a.hf);
    inputs["hf"] = *a.hf;
  }
  emit(g, to_json(arch).dump(2));
}

struct CostArgs {
  std::string arch;
  bool per_stage = false;
};

void cmd_cost(const GlobalOptions& g, const CostArgs& a) {
  const std::string format = resolve_format(g, "json", {"json", "csv"});
  const json arch_doc = read_json_file(a.arch, "architecture");
  const ArchDescriptor arch = arch_from_json(arch_doc);
  const CostReport report = cost(arch);
  const json inputs = {{"command", "cost"}, {"arch", arch_doc}};
  json doc = to_json(report, a.per_stage);
  doc["name"] = arch.name;
  emit(g, render(format, inputs, doc, "", to_csv(report)));
}

struct PoolArgs {
  int max_index = 4;
  bool hf = false;
  std::string resolutions = "128,256";
  int divisor = 8;
};

void cmd_pool(const GlobalOptions& g, const PoolArgs& a) {
  const std::string format = resolve_format(g, "json", {"json", "csv", "md"});
  const ScalingLadder ladder = b0_ladder(a.max_index);
  const std::vector<int> res = a.hf ? parse_resolutions(a.resolutions) : std::vector<int>{};
  std::vector<Candidate> pool = generate_pool(ladder, a.hf, res, BuildOptions{a.divisor});
  const PoolStats stats = standardize(pool);
  const json inputs = {{"command", "pool"},
                       {"max_index", a.max_index},
                       {"hf", a.hf},
                       {"resolutions", res},
                       {"divisor", a.divisor}};
  json doc = pool_to_json(pool, stats);
  doc["ladder"] = to_json(ladder);
  std::ostringstream csv, md;
  csv << "id,params,macs,z_para,z_flops,z_sum\n";
  md << "| id | params | MACs | z_para | z_flops | z_sum |\n|---|---|---|---|---|---|\n";
  for (const auto& c : pool) {
    csv << c.id << ',' << c.cost.params_total << ',' << c.cost.macs_total << ',' << c.z_para << ',' << c.z_flops << ','
        << c.z_sum << '\n';
    md << "| " << c.id << " | " << c.cost.params_total << " | " << c.cost.macs_total << " | " << c.z_para << " | "
       << c.z_flops << " | " << c.z_sum << " |\n";
  }
  md << "\nn=" << stats.n << " mean_params=" << stats.mean_params << " sd_params=" << stats.sd_params
     << " mean_macs=" << stats.mean_flops << " sd_macs=" << stats.sd_flops << '\n';
  emit(g, render(format, inputs, doc, md.str(), csv.str()));
}

struct GroupArgs {
  std::string pool;
  int groups = 10;
};

void cmd_group(const GlobalOptions& g, const GroupArgs& a) {
  const std::string format = resolve_format(g, "json", {"json", "csv", "md"});
  const json pool_doc = read_json_file(a.pool, "pool");
  std::vector<Candidate> pool = pool_from_json(pool_doc);
  // Recompute z-scores from the embedded costs so grouping never trusts stale fields.
  standardize(pool);
  const auto groups = group(pool, a.groups);
  const json inputs = {{"command", "group"}, {"groups", a.groups}, {"pool_hash", config_hash(pool_doc)}};
  std::ostringstream csv, md;
  csv << "group_id,candidate_id\n";
  md << "| group | members |\n|---|---|\n";
  for (const auto& grp : groups) {
    md << "| " << grp.group_id << " |";
    for (const auto& id : grp.member_ids) {
      csv << grp.group_id << ',' << id << '\n';
      md << ' ' << id;
    }
    md << " |\n";
  }
  emit(g, render(format, inputs, groups_to_json(groups), md.str(), csv.str()));
}

struct SearchArgs {
  std::string evaluator;
  std::string resume;
  std::string trace_dir;
  std::string record_traces;
  std::optional<int> stop_after_round;
  std::optional<unsigned> parallelism;
};

void cmd_search(const GlobalOptions& g, const SearchArgs& a) {
  const std::string format = resolve_format(g, "json", {"json", "md", "csv"});
  if (g.config.empty()) throw DomainError("search requires --config run.json");
  const fs::path config_path(g.config);
  const json config_doc = read_json_file(config_path, "config");
  RunConfig config = run_config_from_json(config_doc, config_path.parent_path());
  if (!a.evaluator.empty()) config.evaluator.kind = evaluator_kind_from_string(a.evaluator);
  if (!a.trace_dir.empty()) config.evaluator.trace_dir = a.trace_dir;
  if (g.seed) {
    config.evaluator.seed = *g.seed;
    config.search.rng_seed = *g.seed;
  }
  if (a.parallelism) config.parallelism = *a.parallelism;
  if (config.pool_file.empty() || !fs::exists(config.pool_file)) {
    throw DomainError("pool_file not found: " + config.pool_file.string());
  }
  if (config.groups_file.empty() || !fs::exists(config.groups_file)) {
    throw DomainError("groups_file not found: " + config.groups_file.string());
  }

  const std::vector<Candidate> pool = pool_from_json(read_json_file(config.pool_file, "pool"));
  const std::vector<GroupAssignment> groups = groups_from_json(read_json_file(config.groups_file, "groups"));
  const std::unique_ptr<Evaluator> base_evaluator = make_evaluator(config.evaluator);
  std::optional<RecordingEvaluator> recorder;
  const Evaluator* evaluator = base_evaluator.get();
  if (!a.record_traces.empty()) evaluator = &recorder.emplace(*base_evaluator);

  const json inputs = {{"command", "search"}, {"config", to_json(config)}};
  SearchOptions options;
  options.parallelism = config.parallelism;
  options.stop_after_round = a.stop_after_round;
  options.provenance = provenance(inputs);
  const fs::path checkpoint = !a.resume.empty() ? fs::path(a.resume) : config.state_file;
  if (!checkpoint.empty()) options.checkpoint = checkpoint;

  TournamentState state;
  if (!checkpoint.empty() && fs::exists(checkpoint) && fs::file_size(checkpoint) > 0) {
    state = load_checkpoint(checkpoint);
    if (state.epochs_per_round != config.search.epochs_per_round ||
        state.total_epochs != config.search.total_epochs ||
        state.elimination_cadence != config.search.elimination_cadence) {
      throw DomainError("checkpoint " + checkpoint.string() + " was produced with a different schedule");
    }
    spdlog::info("resuming from {} at round {}", checkpoint.string(), state.round);
    state = resume_search(std::move(state), pool, *evaluator, options);
  } else {
    state = run_search(config.search, pool, groups, *evaluator, options);
  }
  if (recorder) recorder->recorded().save_dir(a.record_traces);
  emit(g, render(format, inputs, to_json(state), report_markdown(state, pool), report_csv(state, pool)));
}

struct RankArgs {
  std::string traces;
  int round_epochs = 10;
  std::string criterion = "both";
};

void cmd_rank_metrics(const GlobalOptions& g, const RankArgs& a) {
  const std::string format = resolve_format(g, "json", {"json", "md", "csv"});
  const TraceStore store = TraceStore::load_dir(a.traces);
  const std::vector<AccuracyTrace> traces = store.traces();
  std::vector<Criterion> criteria;
  if (a.criterion == "both") {
    criteria = {Criterion::kSpecific, Criterion::kAverage};
  } else {
    criteria = {criterion_from_string(a.criterion)};
  }
  json inputs = {{"command", "rank-metrics"}, {"round_epochs", a.round_epochs}, {"criterion", a.criterion}};
  json traces_doc = json::array();
  for (const auto& t : traces) traces_doc.push_back(to_json(t));
  inputs["traces_hash"] = config_hash(traces_doc);

  json doc = {{"candidates", traces.size()}, {"final_ranking", rank(traces, static_cast<int>(traces.empty() ? 0 : traces.front().epoch_acc.size()), Criterion::kSpecific)}};
  std::ostringstream md, csv;
  md << "| criterion | matched | rounds | fraction |\n|---|---|---|---|\n";
  csv << "criterion,matched,rounds,fraction\n";
  for (Criterion c : criteria) {
    const MatchResult m = match_percentage(traces, a.round_epochs, c);
    const std::string key = c == Criterion::kSpecific ? "P_spe" : "P_avg";
    doc[key] = {{"matched", m.matched}, {"rounds", m.rounds}, {"fraction", m.fraction()}};
    md << "| " << to_string(c) << " | " << m.matched << " | " << m.rounds << " | " << m.fraction() << " |\n";
    csv << to_string(c) << ',' << m.matched << ',' << m.rounds << ',' << m.fraction() << '\n';
  }
  emit(g, render(format, inputs, doc, md.str(), csv.str()));
}

struct CardArgs {
  int wi = 1, dj = 1, rk = 1;
  int max_index = 4;
  std::optional<int> hf;
  int divisor = 8;
};

void cmd_model_card(const GlobalOptions& g, const CardArgs& a) {
  const std::string format = resolve_format(g, "json", {"json", "md"});
  const ScalingLadder ladder = b0_ladder(a.max_index);
  const ModelCard card = model_card(ladder, a.wi, a.dj, a.rk, a.hf, BuildOptions{a.divisor});
  json inputs = {{"command", "model-card"}, {"indices", {a.wi, a.dj, a.rk}}, {"max_index", a.max_index},
                 {"divisor", a.divisor}};
  if (a.hf) inputs["hf"] = *a.hf;
  emit(g, render(format, inputs, to_json(card), to_markdown(card), ""));
}

struct ReportArgs {
  std::string state;
  std::string pool;
};

void cmd_report(const GlobalOptions& g, const ReportArgs& a) {
  const std::string format = resolve_format(g, "md", {"json", "md", "csv"});
  const TournamentState state = load_checkpoint(a.state);
  std::vector<Candidate> pool;
  json inputs = {{"command", "report"}, {"state_hash", config_hash(to_json(state))}};
  if (!a.pool.empty()) {
    const json pool_doc = read_json_file(a.pool, "pool");
    pool = pool_from_json(pool_doc);
    inputs["pool_hash"] = config_hash(pool_doc);
  }
  emit(g, render(format, inputs, report_json(state, pool), report_markdown(state, pool), report_csv(state, pool)));
}

}  // namespace

int run(int argc, char** argv) {
  configure_logging();

  CLI::App app{"ncs: network candidate search over scaled-down EfficientNet-B0 variants"};
  app.set_version_flag("--version", std::string(kEngineVersion));
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config, "Run configuration JSON");
  app.add_option("--seed", g.seed, "Seed for the synthetic evaluator");
  app.add_option("--out", g.out, "Write output here instead of stdout");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "csv", "md"}));

  DeriveArgs derive;
  auto* derive_cmd = app.add_subcommand("derive-coeffs", "Derive the width/depth/resolution scale-down ladder");
  derive_cmd->add_option("--max-index", derive.max_index, "Ladder length")->check(CLI::PositiveNumber);
  derive_cmd->add_option("--base-resolution", derive.base_resolution, "Reference input resolution")
      ->check(CLI::PositiveNumber);

  BuildArgs build;
  auto* build_cmd = app.add_subcommand("build", "Emit the descriptor of a scaled-down model");
  build_cmd->add_option("--w", build.w, "Width coefficient in (0,1]");
  build_cmd->add_option("--d", build.d, "Depth coefficient in (0,1]");
  build_cmd->add_option("--r", build.r, "Resolution coefficient in (0,1]");
  build_cmd->add_option("--w-index", build.wi, "Width ladder index");
  build_cmd->add_option("--d-index", build.dj, "Depth ladder index");
  build_cmd->add_option("--r-index", build.rk, "Resolution ladder index");
  build_cmd->add_option("--max-index", build.max_index, "Ladder length for index lookups");
  build_cmd->add_option("--hf", build.hf, "Apply the power-of-two transform at 128 or 256");
  build_cmd->add_option("--divisor", build.divisor, "Channel rounding divisor")->check(CLI::PositiveNumber);

  CostArgs cost_args;
  auto* cost_cmd = app.add_subcommand("cost", "Count parameters and MACs of a descriptor");
  cost_cmd->add_option("--arch", cost_args.arch, "Descriptor JSON")->required();
  cost_cmd->add_flag("--per-stage", cost_args.per_stage, "Include the per-stage breakdown");

  PoolArgs pool_args;
  auto* pool_cmd = app.add_subcommand("pool", "Generate, cost and standardize the candidate pool");
  pool_cmd->add_option("--max-index", pool_args.max_index, "Ladder length")->check(CLI::PositiveNumber);
  pool_cmd->add_flag("--hf", pool_args.hf, "Build the hardware-friendly pool");
  pool_cmd->add_option("--resolutions", pool_args.resolutions, "HF resolutions, comma separated");
  pool_cmd->add_option("--divisor", pool_args.divisor, "Channel rounding divisor")->check(CLI::PositiveNumber);

  GroupArgs group_args;
  auto* group_cmd = app.add_subcommand("group", "Partition a pool into groups by z-sum");
  group_cmd->add_option("--pool", group_args.pool, "Pool JSON")->required();
  group_cmd->add_option("--groups", group_args.groups, "Number of groups");

  SearchArgs search;
  auto* search_cmd = app.add_subcommand("search", "Run or resume the elimination tournament");
  search_cmd->add_option("--evaluator", search.evaluator, "trace|synthetic|external")
      ->check(CLI::IsMember({"trace", "synthetic", "external"}));
  search_cmd->add_option("--resume", search.resume, "Checkpoint file (resumed when present)");
  search_cmd->add_option("--trace-dir", search.trace_dir, "Trace directory for the trace evaluator");
  search_cmd->add_option("--record-traces", search.record_traces, "Save every evaluated accuracy here");
  search_cmd->add_option("--stop-after-round", search.stop_after_round, "Pause after this many rounds");
  search_cmd->add_option("--parallelism", search.parallelism, "Concurrent evaluator calls");

  RankArgs rank_args;
  auto* rank_cmd = app.add_subcommand("rank-metrics", "Ranking-match percentages over accuracy traces");
  rank_cmd->add_option("--traces", rank_args.traces, "Trace directory")->required();
  rank_cmd->add_option("--round-epochs", rank_args.round_epochs, "Epochs per round")->check(CLI::PositiveNumber);
  rank_cmd->add_option("--criterion", rank_args.criterion, "specific|average|both")
      ->check(CLI::IsMember({"specific", "average", "both"}));

  CardArgs card;
  auto* card_cmd = app.add_subcommand("model-card", "Describe and cost one ladder candidate");
  card_cmd->add_option("--w-index", card.wi, "Width ladder index");
  card_cmd->add_option("--d-index", card.dj, "Depth ladder index");
  card_cmd->add_option("--r-index", card.rk, "Resolution ladder index");
  card_cmd->add_option("--max-index", card.max_index, "Ladder length")->check(CLI::PositiveNumber);
  card_cmd->add_option("--hf", card.hf, "Hardware-friendly variant at 128 or 256");
  card_cmd->add_option("--divisor", card.divisor, "Channel rounding divisor")->check(CLI::PositiveNumber);

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Summarize a tournament state");
  report_cmd->add_option("--state", report.state, "State JSON")->required();
  report_cmd->add_option("--pool", report.pool, "Pool JSON for cost columns");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidationError;
  }

  try {
    if (*derive_cmd) cmd_derive_coeffs(g, derive);
    else if (*build_cmd) cmd_build(g, build);
    else if (*cost_cmd) cmd_cost(g, cost_args);
    else if (*pool_cmd) cmd_pool(g, pool_args);
    else if (*group_cmd) cmd_group(g, group_args);
    else if (*search_cmd) cmd_search(g, search);
    else if (*rank_cmd) cmd_rank_metrics(g, rank_args);
    else if (*card_cmd) cmd_model_card(g, card);
    else if (*report_cmd) cmd_report(g, report);
  } catch (const EvaluatorError& e) {
    spdlog::error("{}", e.what());
    return kEvaluatorError;
  } catch (const DomainError& e) {
    spdlog::error("{}", e.what());
    return kValidationError;
  } catch (const InvariantError& e) {
    spdlog::error("internal invariant violated: {}", e.what());
    return kInternalError;
  } catch (const std::exception& e) {
    spdlog::error("internal error: {}", e.what());
    return kInternalError;
  }
  return kOk;
}

}  // namespace ncs::cli
