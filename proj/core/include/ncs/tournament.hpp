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

#ifndef NCS_TOURNAMENT_HPP_
#define NCS_TOURNAMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ncs/accuracy_trace.hpp"
#include "ncs/candidate_pool.hpp"
#include "ncs/eval_gateway.hpp"

namespace ncs {

// ---------------------------------------------------------------------------
// Ranking criteria

enum class Criterion { kSpecific, kAverage };

std::string_view to_string(Criterion c);
Criterion criterion_from_string(std::string_view name);

// Mean of epochs 1..upto_epoch.
double avg_accuracy(const AccuracyTrace& trace, int upto_epoch);

// Candidate ids, best first; ties broken by id ascending.
std::vector<std::string> rank(std::span<const AccuracyTrace> traces, int upto_epoch, Criterion criterion);

struct MatchResult {
  int matched = 0;
  int rounds = 0;

  double fraction() const { return rounds == 0 ? 0.0 : static_cast<double>(matched) / rounds; }
};

// Share of rounds r whose ranking at epoch r*e (under `criterion`) equals the
// specific-accuracy ranking at the final epoch. The final round counts. All
// traces must have the same length, a positive multiple of epochs_per_round.
MatchResult match_percentage(std::span<const AccuracyTrace> traces, int epochs_per_round, Criterion criterion);

// ---------------------------------------------------------------------------
// Tournament state

struct TournamentConfig {
  int epochs_per_round = 10;
  int total_epochs = 350;
  int elimination_cadence = 1;  // eliminate after every Nth round
  std::uint64_t rng_seed = 1;
};

struct EliminationRecord {
  std::string candidate_id;
  int at_round = 0;

  friend bool operator==(const EliminationRecord&, const EliminationRecord&) = default;
};

struct GroupState {
  int group_id = 0;
  std::vector<std::string> survivors;  // ranked order after the latest elimination
  std::vector<EliminationRecord> eliminated;

  friend bool operator==(const GroupState&, const GroupState&) = default;
};

struct TournamentState {
  int round = 0;  // completed rounds
  int epochs_per_round = 10;
  int total_epochs = 350;
  int elimination_cadence = 1;
  std::vector<GroupState> groups;
  std::map<std::string, std::vector<double>> history;
  std::int64_t cost_ledger = 0;  // candidate-epochs trained
  std::uint64_t rng_seed = 1;

  int current_epoch() const { return round * epochs_per_round; }
  int total_rounds() const { return total_epochs / epochs_per_round; }
  bool finished() const { return current_epoch() >= total_epochs; }

  friend bool operator==(const TournamentState&, const TournamentState&) = default;
};

// Throws DomainError on a non-positive round length or cadence, or a total
// that is not a whole number of rounds.
void validate(const TournamentConfig& config);

TournamentState init_state(const TournamentConfig& config, std::span<const GroupAssignment> groups);

// Throws InvariantError on inconsistent state (overlapping survivor and
// eliminated sets, ledger mismatch, histories of the wrong length...).
void check_invariants(const TournamentState& state);

// Best survivor by average accuracy at the current epoch; the sole survivor
// once eliminations are complete.
std::string champion(const TournamentState& state, const GroupState& group);

// Trains every survivor for one round. Evaluator calls for distinct
// candidates run on up to `parallelism` threads; results are merged in
// canonical id order. Throws (leaving `state` untouched) if any call fails.
TournamentState run_round(const TournamentState& state, std::span<const Candidate> pool, const Evaluator& evaluator,
                          unsigned parallelism = 1);

// Per group with n > 1 survivors: keep the top ceiling(n/2) by average
// accuracy, eliminate the rest at the current round.
TournamentState eliminate(const TournamentState& state);

struct SearchOptions {
  std::optional<std::filesystem::path> checkpoint;  // written atomically after every round
  std::optional<int> stop_after_round;              // pause once this many rounds are complete
  unsigned parallelism = 1;
  nlohmann::json provenance = nlohmann::json::object();  // merged into each checkpoint
  std::function<void(const TournamentState&)> on_round;
};

// Alternates run_round / eliminate until total_epochs.
TournamentState run_search(const TournamentConfig& config, std::span<const Candidate> pool,
                           std::span<const GroupAssignment> groups, const Evaluator& evaluator,
                           const SearchOptions& options = {});

// Continues a checkpointed search.
TournamentState resume_search(TournamentState state, std::span<const Candidate> pool, const Evaluator& evaluator,
                              const SearchOptions& options = {});

nlohmann::json to_json(const TournamentState& state);
TournamentState state_from_json(const nlohmann::json& doc);

// Write to a temporary sibling, then rename over `path`.
void save_checkpoint(const TournamentState& state, const std::filesystem::path& path,
                     const nlohmann::json& provenance = nlohmann::json::object());
TournamentState load_checkpoint(const std::filesystem::path& path);

}  // namespace ncs

#endif  // NCS_TOURNAMENT_HPP_
