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

#include <chrono>
#include <filesystem>
#include <fstream>

#include "ncs/arch_model.hpp"
#include "ncs/errors.hpp"
#include "ncs/eval_gateway.hpp"
#include "ncs/tournament.hpp"

namespace fs = std::filesystem;

namespace {

ncs::Candidate candidate(const std::string& id) {
  ncs::Candidate c;
  c.id = id;
  c.arch = ncs::baseline_b0();
  c.cost.params_total = 5'000'000;
  c.cost.macs_total = 400'000'000;
  return c;
}

ncs::ExternalConfig trainer(const std::string& mode, double timeout_s = 20.0) {
  ncs::ExternalConfig cfg;
  cfg.command = {NCS_FAKE_TRAINER, mode};
  cfg.timeout_s = timeout_s;
  return cfg;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ncs_gateway_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("trace store slicing") {
  ncs::TraceStore store;
  store.put({"a", {10, 20, 30, 40}});
  CHECK(store.slice("a", 1, 2) == std::vector<double>{20, 30});
  CHECK(store.slice("a", 0, 4).size() == 4);
  CHECK(store.slice("a", 3, 1) == std::vector<double>{40});
  CHECK_THROWS_WITH_AS(store.slice("a", 4, 1), doctest::Contains("epochs 5 missing"), ncs::EvaluatorError);
  CHECK_THROWS_WITH_AS(store.slice("a", 2, 5), doctest::Contains("candidate a: epochs 5-7 missing"),
                       ncs::EvaluatorError);
  CHECK_THROWS_AS(store.slice("nope", 0, 1), ncs::EvaluatorError);
  CHECK_THROWS_AS(store.put({"b", {101.0}}), ncs::DomainError);
}

TEST_CASE("trace store directory round trip") {
  const fs::path dir = scratch("traces");
  ncs::TraceStore store;
  store.put({"w1_d1_r1", {1.5, 2.5}});
  store.put({"w2_d1_r1", {3.0, 4.0}});
  store.save_dir(dir);
  CHECK(fs::exists(dir / "w1_d1_r1.json"));
  const auto back = ncs::TraceStore::load_dir(dir);
  CHECK(back.traces() == store.traces());

  std::ofstream(dir / "broken.json") << "[1,2";
  CHECK_THROWS_AS(ncs::TraceStore::load_dir(dir), ncs::StructuralError);
  CHECK_THROWS_AS(ncs::TraceStore::load_dir(dir / "missing"), ncs::DomainError);
  fs::remove_all(dir);
}

TEST_CASE("synthetic curves are deterministic and slice-consistent") {
  const ncs::SyntheticEvaluator ev(5);
  const auto c = candidate("x");
  const auto whole = ev.evaluate(c, 0, 30);
  auto pieces = ev.evaluate(c, 0, 10);
  const auto rest = ev.evaluate(c, 10, 20);
  pieces.insert(pieces.end(), rest.begin(), rest.end());
  CHECK(pieces == whole);
  CHECK(ncs::SyntheticEvaluator(5).evaluate(c, 0, 30) == whole);
  CHECK(ncs::SyntheticEvaluator(6).evaluate(c, 0, 30) != whole);
  for (double v : whole) {
    CHECK(v >= 0.0);
    CHECK(v <= 100.0);
  }
  // Bigger models saturate higher.
  ncs::SyntheticCurveModel m;
  ncs::CostReport small, big;
  small.params_total = 1'000'000;
  small.macs_total = 100'000'000;
  big.params_total = 4'000'000;
  big.macs_total = 400'000'000;
  CHECK(ncs::curve_shape(m, small).asymptote == doctest::Approx(62.0));
  CHECK(ncs::curve_shape(m, big).asymptote == doctest::Approx(70.0));
  CHECK(ncs::curve_shape(m, small).tau == doctest::Approx(12.0));
  CHECK(ncs::curve_shape(m, big).tau == doctest::Approx(24.0));
}

TEST_CASE("wire request round trip") {
  ncs::TrainRequest req;
  req.candidate_id = "w2_d3_r1";
  req.arch = ncs::baseline_b0();
  req.from_epoch = 10;
  req.n_epochs = 10;
  req.checkpoint_dir = "/tmp/ck";
  CHECK(ncs::train_request_from_json(ncs::to_json(req)) == req);
  auto doc = ncs::to_json(req);
  doc.erase("n_epochs");
  CHECK_THROWS_AS(ncs::train_request_from_json(doc), ncs::ProtocolError);
}

TEST_CASE("response validation") {
  ncs::TrainRequest req;
  req.candidate_id = "a";
  req.n_epochs = 2;
  const auto ok = ncs::parse_train_response(R"({"candidate_id":"a","epoch_acc":[1,2],"status":"ok"})", req);
  CHECK(ok.epoch_acc == std::vector<double>{1, 2});
  CHECK_THROWS_AS(ncs::parse_train_response("nope", req), ncs::ProtocolError);
  CHECK_THROWS_AS(ncs::parse_train_response(R"({"candidate_id":"b","epoch_acc":[1,2],"status":"ok"})", req),
                  ncs::ProtocolError);
  CHECK_THROWS_AS(ncs::parse_train_response(R"({"candidate_id":"a","epoch_acc":[1],"status":"ok"})", req),
                  ncs::ProtocolError);
  CHECK_THROWS_AS(ncs::parse_train_response(R"({"candidate_id":"a","epoch_acc":[1,200],"status":"ok"})", req),
                  ncs::ProtocolError);
  CHECK_THROWS_AS(ncs::parse_train_response(R"({"candidate_id":"a","epoch_acc":[1,2],"status":"meh"})", req),
                  ncs::ProtocolError);
  try {
    ncs::parse_train_response(R"({"candidate_id":"a","epoch_acc":[],"status":"error","message":"oom"})", req);
    FAIL("expected an evaluator error");
  } catch (const ncs::ProtocolError&) {
    FAIL("status=error is not a protocol error");
  } catch (const ncs::EvaluatorError& e) {
    CHECK(std::string(e.what()).find("trainer error: oom") != std::string::npos);
  }
}

TEST_CASE("external trainer modes") {
  const auto c = candidate("w1_d2_r3");
  const ncs::ExternalEvaluator ok(trainer("ok"));
  const auto acc = ok.evaluate(c, 10, 5);
  CHECK(acc.size() == 5);
  CHECK(ok.info().kind == ncs::EvaluatorKind::kExternal);

  CHECK_THROWS_AS(ncs::ExternalEvaluator(trainer("short")).evaluate(c, 0, 3), ncs::ProtocolError);
  CHECK_THROWS_AS(ncs::ExternalEvaluator(trainer("garbage")).evaluate(c, 0, 3), ncs::ProtocolError);
  CHECK_THROWS_AS(ncs::ExternalEvaluator(trainer("wrong_id")).evaluate(c, 0, 3), ncs::ProtocolError);
  CHECK_THROWS_WITH_AS(ncs::ExternalEvaluator(trainer("exit")).evaluate(c, 0, 3), doctest::Contains("exit"),
                       ncs::ProtocolError);
  CHECK_THROWS_WITH_AS(ncs::ExternalEvaluator(trainer("error")).evaluate(c, 0, 3),
                       doctest::Contains("CUDA out of memory"), ncs::EvaluatorError);

  const auto t0 = std::chrono::steady_clock::now();
  CHECK_THROWS_WITH_AS(ncs::ExternalEvaluator(trainer("sleep", 0.5)).evaluate(c, 0, 3),
                       doctest::Contains("timed out"), ncs::EvaluatorError);
  CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(10));

  ncs::ExternalConfig missing;
  missing.command = {"/nonexistent/trainer"};
  CHECK_THROWS_AS(ncs::ExternalEvaluator(missing).evaluate(c, 0, 1), ncs::EvaluatorError);
  CHECK_THROWS_AS(ncs::ExternalEvaluator(ncs::ExternalConfig{}), ncs::DomainError);
}

TEST_CASE("external requests carry hyperparameters and checkpoint dir") {
  const fs::path dir = scratch("dump");
  auto cfg = trainer("ok");
  cfg.command.push_back((dir / "requests.jsonl").string());
  cfg.hyperparams.batch_size = 64;
  cfg.checkpoint_dir = "/tmp/ck";
  ncs::ExternalEvaluator(cfg).evaluate(candidate("w1_d1_r1"), 20, 10);
  std::ifstream in(dir / "requests.jsonl");
  std::string line;
  REQUIRE(std::getline(in, line));
  const auto req = ncs::train_request_from_json(nlohmann::json::parse(line));
  CHECK(req.from_epoch == 20);
  CHECK(req.n_epochs == 10);
  CHECK(req.hyperparams.batch_size == 64);
  CHECK(req.hyperparams.optimizer == "rmsprop");
  CHECK(req.checkpoint_dir == "/tmp/ck");
  CHECK(req.arch == ncs::baseline_b0());
  fs::remove_all(dir);
}

TEST_CASE("recorded external runs replay identically through traces") {
  const std::vector<std::string> ids{"w1_d1_r1", "w2_d1_r1", "w3_d1_r1", "w4_d1_r1"};
  std::vector<ncs::Candidate> pool;
  for (const auto& id : ids) pool.push_back(candidate(id));
  const std::vector<ncs::GroupAssignment> groups{{0, ids}};
  const ncs::TournamentConfig cfg{5, 20, 1, 1};

  auto ext_cfg = trainer("ok");
  ext_cfg.parallelism = 2;
  const ncs::ExternalEvaluator external(ext_cfg);
  const ncs::RecordingEvaluator recorder(external);
  ncs::SearchOptions opts;
  opts.parallelism = 2;
  const auto live = ncs::run_search(cfg, pool, groups, recorder, opts);

  const ncs::TraceEvaluator replay(recorder.recorded());
  const auto replayed = ncs::run_search(cfg, pool, groups, replay);
  CHECK(replayed == live);
  CHECK(live.cost_ledger == 20 + 10 + 5 + 5);
}
