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

#include "ncs/tournament.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "ncs/errors.hpp"

namespace ncs {
namespace {

using nlohmann::json;

double criterion_value(const AccuracyTrace& trace, int upto_epoch, Criterion criterion) {
  if (criterion == Criterion::kAverage) return avg_accuracy(trace, upto_epoch);
  if (upto_epoch < 1 || upto_epoch > static_cast<int>(trace.epoch_acc.size())) {
    throw DomainError("candidate " + trace.candidate_id + ": epoch " + std::to_string(upto_epoch) +
                      " missing (trace has " + std::to_string(trace.epoch_acc.size()) + ")");
  }
  return trace.epoch_acc[static_cast<std::size_t>(upto_epoch - 1)];
}

std::vector<AccuracyTrace> survivor_traces(const TournamentState& state, const GroupState& group) {
  std::vector<AccuracyTrace> traces;
  traces.reserve(group.survivors.size());
  for (const auto& id : group.survivors) {
    auto it = state.history.find(id);
    traces.push_back({id, it == state.history.end() ? std::vector<double>{} : it->second});
  }
  return traces;
}

}  // namespace

void validate(const TournamentConfig& c) {
  if (c.epochs_per_round < 1) throw DomainError("epochs_per_round must be >= 1");
  if (c.total_epochs < c.epochs_per_round) throw DomainError("total_epochs must be >= epochs_per_round");
  if (c.total_epochs % c.epochs_per_round != 0) {
    throw DomainError("total_epochs (" + std::to_string(c.total_epochs) + ") must be a multiple of epochs_per_round (" +
                      std::to_string(c.epochs_per_round) + ")");
  }
  if (c.elimination_cadence < 1) throw DomainError("elimination_cadence must be >= 1");
}

std::string_view to_string(Criterion c) { return c == Criterion::kAverage ? "average" : "specific"; }

Criterion criterion_from_string(std::string_view name) {
  if (name == "specific") return Criterion::kSpecific;
  if (name == "average") return Criterion::kAverage;
  throw DomainError("unknown criterion \"" + std::string(name) + "\"");
}

double avg_accuracy(const AccuracyTrace& trace, int upto_epoch) {
  if (upto_epoch < 1 || upto_epoch > static_cast<int>(trace.epoch_acc.size())) {
    throw DomainError("candidate " + trace.candidate_id + ": cannot average up to epoch " +
                      std::to_string(upto_epoch) + " (trace has " + std::to_string(trace.epoch_acc.size()) + ")");
  }
  double sum = 0.0;
  for (int i = 0; i < upto_epoch; ++i) sum += trace.epoch_acc[static_cast<std::size_t>(i)];
  return sum / upto_epoch;
}

std::vector<std::string> rank(std::span<const AccuracyTrace> traces, int upto_epoch, Criterion criterion) {
  std::vector<std::pair<double, const std::string*>> scored;
  scored.reserve(traces.size());
  for (const auto& t : traces) scored.emplace_back(criterion_value(t, upto_epoch, criterion), &t.candidate_id);
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return *a.second < *b.second;
  });
  std::vector<std::string> ids;
  ids.reserve(scored.size());
  for (const auto& [value, id] : scored) ids.push_back(*id);
  return ids;
}

MatchResult match_percentage(std::span<const AccuracyTrace> traces, int epochs_per_round, Criterion criterion) {
  if (epochs_per_round < 1) throw DomainError("epochs_per_round must be >= 1");
  if (traces.empty()) throw DomainError("match_percentage needs at least one trace");
  const std::size_t length = traces.front().epoch_acc.size();
  for (const auto& t : traces) {
    if (t.epoch_acc.size() != length) {
      throw DomainError("candidate " + t.candidate_id + ": trace length " + std::to_string(t.epoch_acc.size()) +
                        " differs from " + std::to_string(length));
    }
  }
  if (length == 0 || length % static_cast<std::size_t>(epochs_per_round) != 0) {
    throw DomainError("trace length " + std::to_string(length) + " is not a positive multiple of " +
                      std::to_string(epochs_per_round));
  }
  const int final_epoch = static_cast<int>(length);
  const std::vector<std::string> target = rank(traces, final_epoch, Criterion::kSpecific);
  MatchResult result;
  result.rounds = final_epoch / epochs_per_round;
  for (int r = 1; r <= result.rounds; ++r) {
    if (rank(traces, r * epochs_per_round, criterion) == target) ++result.matched;
  }
  return result;
}

// ---------------------------------------------------------------------------

TournamentState init_state(const TournamentConfig& config, std::span<const GroupAssignment> groups) {
  validate(config);
  if (groups.empty()) throw DomainError("tournament needs at least one group");
  TournamentState state;
  state.epochs_per_round = config.epochs_per_round;
  state.total_epochs = config.total_epochs;
  state.elimination_cadence = config.elimination_cadence;
  state.rng_seed = config.rng_seed;
  std::set<std::string> seen;
  for (const auto& g : groups) {
    if (g.member_ids.empty()) throw DomainError("group " + std::to_string(g.group_id) + " is empty");
    for (const auto& id : g.member_ids) {
      if (!seen.insert(id).second) throw DomainError("candidate " + id + " appears in more than one group");
      state.history[id] = {};
    }
    state.groups.push_back(GroupState{g.group_id, g.member_ids, {}});
  }
  return state;
}

void check_invariants(const TournamentState& s) {
  auto fail = [](const std::string& what) { throw InvariantError("tournament state: " + what); };
  if (s.epochs_per_round < 1 || s.elimination_cadence < 1 || s.total_epochs % s.epochs_per_round != 0) {
    fail("invalid schedule");
  }
  if (s.round < 0 || s.current_epoch() > s.total_epochs) fail("round counter beyond total_epochs");
  std::set<std::string> seen;
  std::int64_t trained = 0;
  for (const auto& g : s.groups) {
    if (g.survivors.empty()) fail("group " + std::to_string(g.group_id) + " has no survivors");
    for (const auto& id : g.survivors) {
      if (!seen.insert(id).second) fail("candidate " + id + " listed twice");
      auto it = s.history.find(id);
      if (it == s.history.end() || static_cast<int>(it->second.size()) != s.current_epoch()) {
        fail("survivor " + id + " history does not reach epoch " + std::to_string(s.current_epoch()));
      }
      trained += static_cast<std::int64_t>(it->second.size());
    }
    for (const auto& e : g.eliminated) {
      if (!seen.insert(e.candidate_id).second) fail("candidate " + e.candidate_id + " listed twice");
      if (e.at_round < 1 || e.at_round > s.round) fail("candidate " + e.candidate_id + " eliminated at invalid round");
      auto it = s.history.find(e.candidate_id);
      if (it == s.history.end() || static_cast<int>(it->second.size()) != e.at_round * s.epochs_per_round) {
        fail("eliminated " + e.candidate_id + " history length mismatch");
      }
      trained += static_cast<std::int64_t>(it->second.size());
    }
  }
  if (seen.size() != s.history.size()) fail("history holds candidates outside the groups");
  if (trained != s.cost_ledger) {
    fail("cost ledger " + std::to_string(s.cost_ledger) + " != trained epochs " + std::to_string(trained));
  }
}

std::string champion(const TournamentState& state, const GroupState& group) {
  if (group.survivors.empty()) throw InvariantError("group " + std::to_string(group.group_id) + " has no survivors");
  if (group.survivors.size() == 1 || state.current_epoch() == 0) return group.survivors.front();
  const auto traces = survivor_traces(state, group);
  return rank(traces, state.current_epoch(), Criterion::kAverage).front();
}

TournamentState run_round(const TournamentState& state, std::span<const Candidate> pool, const Evaluator& evaluator,
                          unsigned parallelism) {
  check_invariants(state);
  if (state.finished()) throw DomainError("search already reached total_epochs");

  std::unordered_map<std::string, const Candidate*> by_id;
  for (const auto& c : pool) by_id.emplace(c.id, &c);
  std::vector<const Candidate*> jobs;
  for (const auto& g : state.groups) {
    for (const auto& id : g.survivors) {
      auto it = by_id.find(id);
      if (it == by_id.end()) throw DomainError("survivor " + id + " is not in the candidate pool");
      jobs.push_back(it->second);
    }
  }
  std::sort(jobs.begin(), jobs.end(), [](const Candidate* a, const Candidate* b) { return a->id < b->id; });

  const int from = state.current_epoch();
  const int n = state.epochs_per_round;
  std::vector<std::vector<double>> results(jobs.size());
  std::vector<std::exception_ptr> failures(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        results[i] = evaluator.evaluate(*jobs[i], from, n);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  unsigned workers = std::max(1u, parallelism);
  if (const unsigned cap = evaluator.info().max_concurrency; cap > 0) workers = std::min(workers, cap);
  workers = std::min<unsigned>(workers, static_cast<unsigned>(jobs.size()));
  {
    std::vector<std::jthread> threads;
    for (unsigned w = 1; w < workers; ++w) threads.emplace_back(worker);
    worker();
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  TournamentState next_state = state;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const std::string& id = jobs[i]->id;
    if (static_cast<int>(results[i].size()) != n) {
      throw EvaluatorError(id, "expected " + std::to_string(n) + " epochs (" + std::to_string(from + 1) + ".." +
                                   std::to_string(from + n) + "), got " + std::to_string(results[i].size()));
    }
    try {
      check_accuracies(id, results[i]);
    } catch (const DomainError& e) {
      throw EvaluatorError(id, e.what());
    }
    auto& h = next_state.history[id];
    h.insert(h.end(), results[i].begin(), results[i].end());
  }
  next_state.cost_ledger += static_cast<std::int64_t>(n) * static_cast<std::int64_t>(jobs.size());
  next_state.round += 1;
  return next_state;
}

TournamentState eliminate(const TournamentState& state) {
  TournamentState out = state;
  const int epoch = state.current_epoch();
  if (epoch == 0) return out;
  for (auto& g : out.groups) {
    const std::size_t n = g.survivors.size();
    if (n <= 1) continue;
    const auto traces = survivor_traces(state, g);
    const std::vector<std::string> ranked = rank(traces, epoch, Criterion::kAverage);
    const std::size_t keep = (n + 1) / 2;
    std::unordered_map<std::string, double> avg;
    for (const auto& t : traces) avg[t.candidate_id] = avg_accuracy(t, epoch);
    if (avg[ranked[keep - 1]] == avg[ranked[keep]]) {
      spdlog::info("group {} round {}: tie at the cut between {} and {} broken by id", g.group_id, state.round,
                   ranked[keep - 1], ranked[keep]);
    }
    g.survivors.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep));
    for (std::size_t i = keep; i < n; ++i) {
      g.eliminated.push_back({ranked[i], state.round});
      spdlog::debug("group {} round {}: eliminated {} (avg {:.4f})", g.group_id, state.round, ranked[i],
                    avg[ranked[i]]);
    }
  }
  return out;
}

TournamentState run_search(const TournamentConfig& config, std::span<const Candidate> pool,
                           std::span<const GroupAssignment> groups, const Evaluator& evaluator,
                           const SearchOptions& options) {
  return resume_search(init_state(config, groups), pool, evaluator, options);
}

TournamentState resume_search(TournamentState state, std::span<const Candidate> pool, const Evaluator& evaluator,
                              const SearchOptions& options) {
  check_invariants(state);
  while (!state.finished()) {
    if (options.stop_after_round && state.round >= *options.stop_after_round) break;
    state = run_round(state, pool, evaluator, options.parallelism);
    if (state.round % state.elimination_cadence == 0) state = eliminate(state);
    check_invariants(state);
    if (options.checkpoint) save_checkpoint(state, *options.checkpoint, options.provenance);
    spdlog::debug("round {}/{} done, cost ledger {} candidate-epochs", state.round, state.total_rounds(),
                 state.cost_ledger);
    if (options.on_round) options.on_round(state);
  }
  return state;
}

json to_json(const TournamentState& s) {
  json groups = json::array();
  for (const auto& g : s.groups) {
    json eliminated = json::array();
    for (const auto& e : g.eliminated) eliminated.push_back({{"candidate_id", e.candidate_id}, {"at_round", e.at_round}});
    groups.push_back({{"group_id", g.group_id}, {"survivors", g.survivors}, {"eliminated", std::move(eliminated)}});
  }
  json history = json::object();
  for (const auto& [id, acc] : s.history) history[id] = acc;
  return {{"round", s.round},
          {"epochs_per_round", s.epochs_per_round},
          {"total_epochs", s.total_epochs},
          {"elimination_cadence", s.elimination_cadence},
          {"groups", std::move(groups)},
          {"history", std::move(history)},
          {"cost_ledger", s.cost_ledger},
          {"rng_seed", s.rng_seed}};
}

TournamentState state_from_json(const json& doc) {
  TournamentState s;
  try {
    s.round = doc.at("round").get<int>();
    s.epochs_per_round = doc.at("epochs_per_round").get<int>();
    s.total_epochs = doc.at("total_epochs").get<int>();
    s.elimination_cadence = doc.at("elimination_cadence").get<int>();
    s.cost_ledger = doc.at("cost_ledger").get<std::int64_t>();
    s.rng_seed = doc.at("rng_seed").get<std::uint64_t>();
    for (const auto& g : doc.at("groups")) {
      GroupState gs;
      gs.group_id = g.at("group_id").get<int>();
      gs.survivors = g.at("survivors").get<std::vector<std::string>>();
      for (const auto& e : g.at("eliminated")) {
        gs.eliminated.push_back({e.at("candidate_id").get<std::string>(), e.at("at_round").get<int>()});
      }
      s.groups.push_back(std::move(gs));
    }
    for (const auto& [id, acc] : doc.at("history").items()) s.history[id] = acc.get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw StructuralError(std::string("tournament state: ") + e.what());
  }
  try {
    check_invariants(s);
  } catch (const InvariantError& e) {
    throw StructuralError(e.what());
  }
  return s;
}

void save_checkpoint(const TournamentState& state, const std::filesystem::path& path, const json& provenance) {
  json doc = to_json(state);
  for (const auto& [key, value] : provenance.items()) doc[key] = value;
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << doc.dump(1) << '\n';
    out.flush();
    if (!out) throw DomainError("cannot write checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

TournamentState load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot read state file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw StructuralError("state file " + path.string() + " is empty");
  }
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw StructuralError("state file " + path.string() + " is not valid JSON");
  return state_from_json(doc);
}

}  // namespace ncs
