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

#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>

#include "ncs/errors.hpp"
#include "ncs/eval_gateway.hpp"
#include "ncs/tournament.hpp"

using ncs::AccuracyTrace;
using ncs::Criterion;
namespace fs = std::filesystem;

namespace {

std::vector<ncs::Candidate> ids_to_pool(const std::vector<std::string>& ids) {
  std::vector<ncs::Candidate> pool;
  for (const auto& id : ids) {
    ncs::Candidate c;
    c.id = id;
    pool.push_back(c);
  }
  return pool;
}

// Linear curves: candidate i improves at slope (i + 1) / 20 from a common start.
ncs::TraceStore linear_store(const std::vector<std::string>& ids, int epochs) {
  ncs::TraceStore store;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::vector<double> acc;
    for (int e = 1; e <= epochs; ++e) acc.push_back(10.0 + (i + 1) * 0.05 * e);
    store.put({ids[i], acc});
  }
  return store;
}

class CountingEvaluator final : public ncs::Evaluator {
 public:
  explicit CountingEvaluator(const ncs::Evaluator& inner) : inner_(inner) {}
  ncs::EvaluatorInfo info() const override { return inner_.info(); }
  std::vector<double> evaluate(const ncs::Candidate& c, int from, int n) const override {
    epochs += n;
    return inner_.evaluate(c, from, n);
  }
  mutable std::atomic<long> epochs{0};

 private:
  const ncs::Evaluator& inner_;
};

class ShortEvaluator final : public ncs::Evaluator {
 public:
  ncs::EvaluatorInfo info() const override { return {}; }
  std::vector<double> evaluate(const ncs::Candidate&, int, int n) const override {
    return std::vector<double>(static_cast<std::size_t>(n - 1), 50.0);
  }
};

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ncs_tournament_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("avg accuracy and ranking") {
  const AccuracyTrace a{"a", {50, 60, 70}};
  const AccuracyTrace b{"b", {40, 55, 72}};
  CHECK(ncs::avg_accuracy(a, 3) == doctest::Approx(60.0));
  CHECK(ncs::avg_accuracy(b, 2) == doctest::Approx(47.5));
  CHECK_THROWS_AS(ncs::avg_accuracy(a, 4), ncs::DomainError);
  const std::vector<AccuracyTrace> ts{a, b};
  CHECK(ncs::rank(ts, 3, Criterion::kSpecific) == std::vector<std::string>{"b", "a"});
  CHECK(ncs::rank(ts, 3, Criterion::kAverage) == std::vector<std::string>{"a", "b"});
  const std::vector<AccuracyTrace> tied{{"z", {1, 2}}, {"m", {1, 2}}};
  CHECK(ncs::rank(tied, 2, Criterion::kSpecific) == std::vector<std::string>{"m", "z"});
}

TEST_CASE("match percentage on the crossing fixture") {
  const std::vector<AccuracyTrace> ts{{"A", {50, 60, 70}}, {"B", {40, 55, 72}}};
  const auto spe = ncs::match_percentage(ts, 1, Criterion::kSpecific);
  const auto avg = ncs::match_percentage(ts, 1, Criterion::kAverage);
  CHECK(spe.matched == 1);
  CHECK(spe.rounds == 3);
  CHECK(avg.matched == 0);
  CHECK(avg.rounds == 3);
  CHECK(ncs::match_percentage(ts, 3, Criterion::kSpecific).fraction() == 1.0);
}

TEST_CASE("non-crossing curves always match") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    // A shared rising curve plus fixed positive gaps: ranks never change.
    std::vector<double> base;
    double v = 5.0;
    for (int e = 0; e < 40; ++e) base.push_back(v += u(rng));
    std::vector<AccuracyTrace> ts;
    double offset = 0.0;
    for (int c = 0; c < 5; ++c) {
      offset += 0.5 + 5.0 * u(rng);
      AccuracyTrace t{"c" + std::to_string(c), {}};
      for (double b : base) t.epoch_acc.push_back(b + offset);
      ts.push_back(t);
    }
    CHECK(ncs::match_percentage(ts, 10, Criterion::kSpecific).fraction() == 1.0);
    CHECK(ncs::match_percentage(ts, 10, Criterion::kAverage).fraction() == 1.0);
  }
}

TEST_CASE("match percentage input checks") {
  const std::vector<AccuracyTrace> uneven{{"a", {1, 2}}, {"b", {1, 2, 3, 4}}};
  CHECK_THROWS_AS(ncs::match_percentage(uneven, 2, Criterion::kSpecific), ncs::DomainError);
  const std::vector<AccuracyTrace> odd{{"a", {1, 2, 3}}};
  CHECK_THROWS_AS(ncs::match_percentage(odd, 2, Criterion::kSpecific), ncs::DomainError);
}

TEST_CASE("config validation") {
  const std::vector<ncs::GroupAssignment> groups{{0, {"a", "b"}}};
  CHECK_THROWS_WITH_AS(ncs::init_state({10, 355, 1, 1}, groups), doctest::Contains("multiple"), ncs::DomainError);
  CHECK_THROWS_AS(ncs::init_state({0, 350, 1, 1}, groups), ncs::DomainError);
  CHECK_THROWS_AS(ncs::init_state({10, 350, 0, 1}, groups), ncs::DomainError);
  const std::vector<ncs::GroupAssignment> overlap{{0, {"a"}}, {1, {"a"}}};
  CHECK_THROWS_AS(ncs::init_state({}, overlap), ncs::DomainError);
}

TEST_CASE("four-candidate group halves each round then trains the champion") {
  const std::vector<std::string> ids{"c0", "c1", "c2", "c3"};
  const auto pool = ids_to_pool(ids);
  const ncs::TraceEvaluator traces(linear_store(ids, 350));
  const CountingEvaluator counting(traces);
  const std::vector<ncs::GroupAssignment> groups{{0, ids}};

  std::vector<std::size_t> survivors;
  ncs::SearchOptions opts;
  opts.on_round = [&](const ncs::TournamentState& s) { survivors.push_back(s.groups[0].survivors.size()); };
  const auto final_state = ncs::run_search({10, 350, 1, 1}, pool, groups, counting, opts);

  CHECK(final_state.finished());
  CHECK(final_state.round == 35);
  CHECK(final_state.cost_ledger == 390);
  CHECK(counting.epochs == 390);
  REQUIRE(survivors.size() == 35);
  CHECK(survivors[0] == 2);
  CHECK(survivors[1] == 1);
  CHECK(survivors[34] == 1);
  CHECK(final_state.groups[0].survivors == std::vector<std::string>{"c3"});
  const std::vector<ncs::EliminationRecord> elim{{"c0", 1}, {"c1", 1}, {"c2", 2}};
  auto got = final_state.groups[0].eliminated;
  std::sort(got.begin(), got.end(), [](auto& a, auto& b) { return a.candidate_id < b.candidate_id; });
  CHECK(got == elim);
  CHECK(final_state.history.at("c3").size() == 350);
  CHECK(final_state.history.at("c0").size() == 10);
  CHECK(ncs::champion(final_state, final_state.groups[0]) == "c3");
  CHECK_NOTHROW(ncs::check_invariants(final_state));
}

TEST_CASE("elimination cadence") {
  const std::vector<std::string> ids{"a", "b", "c", "d", "e"};
  const ncs::TraceEvaluator traces(linear_store(ids, 60));
  const std::vector<ncs::GroupAssignment> groups{{0, ids}};
  const auto s = ncs::run_search({10, 60, 2, 1}, ids_to_pool(ids), groups, traces);
  // Rounds 1-2 with 5, 3-4 with 3, 5-6 with 2.
  CHECK(s.cost_ledger == 2 * 50 + 2 * 30 + 2 * 20);
  CHECK(s.groups[0].survivors.size() == 1);
}

TEST_CASE("parallel rounds equal serial rounds") {
  std::vector<std::string> ids;
  for (int i = 0; i < 12; ++i) ids.push_back("m" + std::to_string(i));
  const ncs::TraceEvaluator traces(linear_store(ids, 40));
  const std::vector<ncs::GroupAssignment> groups{{0, {ids.begin(), ids.begin() + 6}}, {1, {ids.begin() + 6, ids.end()}}};
  ncs::SearchOptions serial, parallel;
  parallel.parallelism = 4;
  CHECK(ncs::run_search({10, 40, 1, 1}, ids_to_pool(ids), groups, traces, serial) ==
        ncs::run_search({10, 40, 1, 1}, ids_to_pool(ids), groups, traces, parallel));
}

TEST_CASE("resume at every boundary is bit-identical") {
  const std::vector<std::string> ids{"c0", "c1", "c2", "c3", "c4", "c5"};
  const auto pool = ids_to_pool(ids);
  const ncs::SyntheticEvaluator synth(11);
  const std::vector<ncs::GroupAssignment> groups{{0, {"c0", "c1", "c2"}}, {1, {"c3", "c4", "c5"}}};
  const ncs::TournamentConfig cfg{10, 80, 1, 1};
  const auto straight = ncs::run_search(cfg, pool, groups, synth);
  const fs::path dir = scratch("resume");
  for (int stop = 1; stop < 8; ++stop) {
    CAPTURE(stop);
    ncs::SearchOptions first;
    first.checkpoint = dir / "state.json";
    first.stop_after_round = stop;
    const auto paused = ncs::run_search(cfg, pool, groups, synth, first);
    CHECK(paused.round == stop);
    const auto loaded = ncs::load_checkpoint(dir / "state.json");
    CHECK(loaded == paused);
    ncs::SearchOptions rest;
    rest.checkpoint = dir / "state.json";
    CHECK(ncs::resume_search(loaded, pool, synth, rest) == straight);
    CHECK(ncs::load_checkpoint(dir / "state.json") == straight);
  }
  CHECK(ncs::resume_search(straight, pool, synth) == straight);
  CHECK_THROWS_AS(ncs::run_round(straight, pool, synth), ncs::DomainError);
  fs::remove_all(dir);
}

TEST_CASE("evaluator failures") {
  const std::vector<std::string> ids{"a", "b"};
  const auto pool = ids_to_pool(ids);
  const std::vector<ncs::GroupAssignment> groups{{0, ids}};
  const auto state = ncs::init_state({10, 20, 1, 1}, groups);

  const ShortEvaluator short_eval;
  CHECK_THROWS_WITH_AS(ncs::run_round(state, pool, short_eval), doctest::Contains("candidate a"),
                       ncs::EvaluatorError);

  ncs::TraceStore partial;
  partial.put({"a", std::vector<double>(20, 1.0)});
  partial.put({"b", std::vector<double>(5, 1.0)});
  const ncs::TraceEvaluator te(partial);
  try {
    ncs::run_round(state, pool, te, 2);
    FAIL("expected an evaluator error");
  } catch (const ncs::EvaluatorError& e) {
    CHECK(e.candidate_id() == "b");
    CHECK(std::string(e.what()).find("epochs 6-10 missing") != std::string::npos);
  }

  CHECK_THROWS_AS(ncs::run_round(state, ids_to_pool({"a"}), te), ncs::DomainError);
}

TEST_CASE("invariant checks catch corrupted state") {
  const std::vector<std::string> ids{"a", "b"};
  const ncs::TraceEvaluator te(linear_store(ids, 20));
  auto s = ncs::run_search({10, 20, 1, 1}, ids_to_pool(ids), {{{0, ids}}}, te);
  CHECK_NOTHROW(ncs::check_invariants(s));
  auto bad_ledger = s;
  bad_ledger.cost_ledger += 1;
  CHECK_THROWS_AS(ncs::check_invariants(bad_ledger), ncs::InvariantError);
  auto overlap = s;
  overlap.groups[0].survivors.push_back(overlap.groups[0].eliminated[0].candidate_id);
  CHECK_THROWS_AS(ncs::check_invariants(overlap), ncs::InvariantError);
  auto short_history = s;
  short_history.history.begin()->second.pop_back();
  CHECK_THROWS_AS(ncs::check_invariants(short_history), ncs::InvariantError);
}

TEST_CASE("state files") {
  const fs::path dir = scratch("files");
  const std::vector<std::string> ids{"a", "b"};
  const ncs::TraceEvaluator te(linear_store(ids, 20));
  const auto s = ncs::run_search({10, 20, 1, 1}, ids_to_pool(ids), {{{0, ids}}}, te);

  ncs::save_checkpoint(s, dir / "s.json", {{"engine_version", "x"}, {"config_hash", "y"}});
  CHECK(ncs::load_checkpoint(dir / "s.json") == s);
  CHECK_FALSE(fs::exists(dir / "s.json.tmp"));

  std::ofstream(dir / "empty.json").close();
  CHECK_THROWS_WITH_AS(ncs::load_checkpoint(dir / "empty.json"), doctest::Contains("is empty"),
                       ncs::StructuralError);
  std::ofstream(dir / "junk.json") << "{ not json";
  CHECK_THROWS_AS(ncs::load_checkpoint(dir / "junk.json"), ncs::StructuralError);

  auto doc = ncs::to_json(s);
  doc["cost_ledger"] = 7;
  CHECK_THROWS_AS(ncs::state_from_json(doc), ncs::StructuralError);
  fs::remove_all(dir);
}
