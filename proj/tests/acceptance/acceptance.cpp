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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ncs/arch_model.hpp"
#include "ncs/candidate_pool.hpp"
#include "ncs/cost_model.hpp"
#include "ncs/eval_gateway.hpp"
#include "ncs/scaling_rules.hpp"
#include "ncs/tournament.hpp"

namespace {

namespace fs = std::filesystem;
using ncs::Rational;

// Pinned tolerances.
constexpr double kCoeffTol = 0.002;
constexpr double kBaselineParamsTol = 0.02;
constexpr double kBaselineMacsTol = 0.03;
constexpr double kModelTol = 0.08;
constexpr double kPoolStatTol = 0.15;
constexpr double kZSumTol = 1e-9;
constexpr double kTableSeconds = 1.0;
constexpr double kCostSeconds = 5.0;
constexpr double kTournamentSeconds = 5.0;

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [" << what << "]";
    }
  }
};

int failures = 0;

void report(const std::string& name, const std::function<void(Check&)>& body) {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.ok = false;
    c.detail << " [exception: " << e.what() << "]";
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  if (!c.ok) ++failures;
  std::printf("%s  %-28s %8.1f ms %s\n", c.ok ? "PASS" : "FAIL", name.c_str(), ms, c.detail.str().c_str());
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool within(double got, double want, double rel) { return std::abs(got - want) <= rel * std::abs(want); }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::vector<int> b0_repeats() {
  std::vector<int> r;
  for (const auto& s : ncs::baseline_b0().stages) r.push_back(s.repeats);
  return r;
}

void coefficient_table(Check& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto repeats = b0_repeats();
  const auto depth = ncs::derive_depth_ladder(repeats, 4);
  const auto wr = ncs::derive_wr_ladder(depth.totals);
  const auto res = ncs::resolutions_from_ladder(wr.resolution, 224);
  const double secs = seconds_since(t0);

  const std::vector<Rational> d{Rational(1), Rational(7, 10), Rational(6, 10), Rational(5, 10)};
  const std::vector<int> t{18, 17, 15, 12};
  const double w[] = {1.0, 0.866, 0.701, 0.514};
  const double r[] = {1.0, 0.905, 0.766, 0.587};
  c.expect(depth.coeffs == d, "depth coefficients");
  c.expect(depth.totals == t, "operator totals");
  for (int u = 0; u < 4; ++u) {
    c.expect(std::abs(wr.width[u].to_double() - w[u]) <= kCoeffTol, "w" + std::to_string(u + 1) + "=" +
                                                                        fmt(wr.width[u].to_double()));
    c.expect(std::abs(wr.resolution[u].to_double() - r[u]) <= kCoeffTol,
             "r" + std::to_string(u + 1) + "=" + fmt(wr.resolution[u].to_double()));
  }
  c.expect(res == std::vector<int>{224, 203, 172, 132}, "resolutions");
  c.expect(secs < kTableSeconds, "runtime " + fmt(secs) + " s");
  c.detail << "w2=" << wr.width[1].to_string(4) << " r2=" << wr.resolution[1].to_string(4);
}

void cost_anchors(Check& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto ladder = ncs::derive_ladder(b0_repeats(), 4);
  const auto pool = ncs::generate_pool(ladder);
  const double secs = seconds_since(t0);

  const auto b0 = ncs::cost(ncs::baseline_b0());
  c.expect(within(b0.params_total, 5.3e6, kBaselineParamsTol), "B0 params " + fmt(b0.params_total));
  c.expect(within(b0.macs_total, 390e6, kBaselineMacsTol), "B0 MACs " + fmt(b0.macs_total));

  struct Anchor {
    int wi, dj, rk;
    double params, macs;
  };
  const Anchor anchors[] = {{1, 2, 1, 4.74e6, 362.62e6},
                            {1, 3, 1, 4.42e6, 313.86e6},
                            {2, 2, 1, 3.78e6, 296.88e6},
                            {4, 4, 1, 1.34e6, 74.56e6}};
  for (const auto& a : anchors) {
    const std::string id = ncs::candidate_id(a.wi, a.dj, a.rk);
    const auto it = std::find_if(pool.begin(), pool.end(), [&](const auto& p) { return p.id == id; });
    if (it == pool.end()) {
      c.expect(false, id + " missing from pool");
      continue;
    }
    c.expect(within(it->cost.params_total, a.params, kModelTol), id + " params " + fmt(it->cost.params_total));
    c.expect(within(it->cost.macs_total, a.macs, kModelTol), id + " MACs " + fmt(it->cost.macs_total));
  }
  c.expect(pool.size() == 64, "pool size");
  c.expect(secs < kCostSeconds, "runtime " + fmt(secs) + " s");
  c.detail << "B0 " << fmt(b0.params_total / 1e6) << "M params, " << fmt(b0.macs_total / 1e6) << "M MACs";
}

void pool_statistics(Check& c) {
  auto pool = ncs::generate_pool(ncs::derive_ladder(b0_repeats(), 4));
  const auto s = ncs::standardize(pool);
  c.expect(s.n == 64, "n");
  c.expect(within(s.mean_params, 3.1e6, kPoolStatTol), "mean params " + fmt(s.mean_params));
  c.expect(within(s.mean_flops, 153.4e6, kPoolStatTol), "mean MACs " + fmt(s.mean_flops));
  c.expect(within(s.sd_params, 1.2e6, kPoolStatTol), "sd params " + fmt(s.sd_params));
  c.expect(within(s.sd_flops, 90.8e6, kPoolStatTol), "sd MACs " + fmt(s.sd_flops));
  c.detail << "mean " << fmt(s.mean_params / 1e6) << "M / " << fmt(s.mean_flops / 1e6) << "M, sd "
           << fmt(s.sd_params / 1e6) << "M / " << fmt(s.sd_flops / 1e6) << "M";
}

void compound_rounding(Check& c) {
  const std::vector<int> in{32, 16, 24, 40, 80, 112, 192, 320, 1280};
  const std::vector<int> want{32, 16, 16, 32, 64, 128, 128, 256, 1024};
  std::vector<int> got;
  for (int ch : in) got.push_back(ncs::compound_round(ch));
  c.expect(got == want, "stage mapping");
  int bad = 0;
  for (int ch = 1; ch <= 4096; ++ch) {
    const int p = ncs::compound_round(ch);
    if (ncs::compound_round(p) != p || (p & (p - 1)) != 0) ++bad;
  }
  c.expect(bad == 0, std::to_string(bad) + " non-idempotent values");
  c.detail << "9 stages mapped, C in [1, 4096] idempotent";
}

void ranking_metrics(Check& c) {
  using ncs::AccuracyTrace;
  using ncs::Criterion;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int perfect = 0;
  for (int set = 0; set < 100; ++set) {
    const int n = 2 + static_cast<int>(u(rng) * 8);
    const int rounds = 3 + static_cast<int>(u(rng) * 10);
    const int e = 1 + static_cast<int>(u(rng) * 10);
    // Shared increasing base curve; each candidate sits at a fixed positive offset.
    std::vector<double> base;
    double v = 1.0;
    for (int t = 0; t < rounds * e; ++t) base.push_back(v += u(rng));
    std::vector<AccuracyTrace> traces;
    double offset = 0.0;
    for (int k = 0; k < n; ++k) {
      offset += 0.1 + u(rng);
      AccuracyTrace tr{"c" + std::to_string(k), {}};
      for (double b : base) tr.epoch_acc.push_back(std::min(100.0, b * 40.0 / v + offset));
      traces.push_back(tr);
    }
    if (ncs::match_percentage(traces, e, Criterion::kSpecific).fraction() == 1.0 &&
        ncs::match_percentage(traces, e, Criterion::kAverage).fraction() == 1.0) {
      ++perfect;
    }
  }
  c.expect(perfect == 100, std::to_string(perfect) + "/100 non-crossing sets at 1.0");

  const std::vector<AccuracyTrace> crossing{{"A", {50, 60, 70}}, {"B", {40, 55, 72}}};
  const auto spe = ncs::match_percentage(crossing, 1, Criterion::kSpecific);
  const auto avg = ncs::match_percentage(crossing, 1, Criterion::kAverage);
  c.expect(spe.matched == 1 && spe.rounds == 3, "P_spe " + std::to_string(spe.matched) + "/" + std::to_string(spe.rounds));
  c.expect(avg.matched == 0 && avg.rounds == 3, "P_avg " + std::to_string(avg.matched) + "/" + std::to_string(avg.rounds));
  c.detail << "crossing fixture P_spe=" << spe.matched << "/" << spe.rounds << " P_avg=" << avg.matched << "/"
           << avg.rounds;
}

void tournament(Check& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::string> ids{"g0", "g1", "g2", "g3"};
  std::vector<ncs::Candidate> pool;
  ncs::TraceStore store;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    ncs::Candidate cand;
    cand.id = ids[i];
    pool.push_back(cand);
    std::vector<double> acc;
    for (int e = 1; e <= 350; ++e) {
      acc.push_back(std::clamp((60.0 + 4.0 * i) * (1.0 - std::exp(-e / 20.0)) + u(rng), 0.0, 100.0));
    }
    store.put({ids[i], acc});
  }
  const ncs::TraceEvaluator evaluator(store);
  const std::vector<ncs::GroupAssignment> groups{{0, ids}};
  const ncs::TournamentConfig cfg{10, 350, 1, 1};

  std::vector<std::size_t> counts;
  ncs::SearchOptions opts;
  opts.on_round = [&](const ncs::TournamentState& s) { counts.push_back(s.groups[0].survivors.size()); };
  const auto straight = ncs::run_search(cfg, pool, groups, evaluator, opts);

  c.expect(counts.size() == 35 && counts[0] == 2 && counts[1] == 1, "survivor counts 4->2->1");
  int elim_r1 = 0, elim_r2 = 0;
  for (const auto& e : straight.groups[0].eliminated) {
    if (e.at_round == 1) ++elim_r1;
    if (e.at_round == 2) ++elim_r2;
  }
  c.expect(elim_r1 == 2 && elim_r2 == 1, "elimination rounds");
  c.expect(straight.cost_ledger == 390, "ledger " + std::to_string(straight.cost_ledger));

  const fs::path dir = fs::temp_directory_path() / ("ncs_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  int mismatches = 0;
  for (int stop = 1; stop < straight.total_rounds(); ++stop) {
    ncs::SearchOptions first;
    first.checkpoint = dir / "state.json";
    first.stop_after_round = stop;
    ncs::run_search(cfg, pool, groups, evaluator, first);
    const auto resumed = ncs::resume_search(ncs::load_checkpoint(dir / "state.json"), pool, evaluator);
    if (!(resumed == straight) || ncs::to_json(resumed).dump() != ncs::to_json(straight).dump()) ++mismatches;
  }
  fs::remove_all(dir);
  c.expect(mismatches == 0, std::to_string(mismatches) + " resume mismatches");
  const double secs = seconds_since(t0);
  c.expect(secs < kTournamentSeconds, "runtime " + fmt(secs) + " s");
  c.detail << "ledger " << straight.cost_ledger << ", " << straight.total_rounds() - 1 << " resume points";
}

void z_invariances(Check& c) {
  auto pool = ncs::generate_pool(ncs::derive_ladder(b0_repeats(), 4));
  ncs::standardize(pool);
  double sp = 0.0, sf = 0.0;
  for (const auto& p : pool) {
    sp += p.z_para;
    sf += p.z_flops;
  }
  c.expect(std::abs(sp) <= kZSumTol, "sum z_para " + fmt(sp));
  c.expect(std::abs(sf) <= kZSumTol, "sum z_flops " + fmt(sf));

  const auto base = ncs::group(pool, 10);
  for (double k : {3.0, 7.0, 1000.0}) {
    for (int axis = 0; axis < 2; ++axis) {
      auto scaled = pool;
      for (auto& p : scaled) {
        auto& v = axis == 0 ? p.cost.params_total : p.cost.macs_total;
        v = static_cast<std::int64_t>(std::llround(static_cast<double>(v) * k));
      }
      ncs::standardize(scaled);
      c.expect(ncs::group(scaled, 10) == base, "groups changed at scale " + fmt(k) + " axis " + std::to_string(axis));
    }
  }
  c.detail << "|sum z| = " << fmt(std::max(std::abs(sp), std::abs(sf)));
}

}  // namespace

int main() {
  report("coefficient-table", coefficient_table);
  report("cost-anchors", cost_anchors);
  report("pool-statistics", pool_statistics);
  report("compound-rounding", compound_rounding);
  report("ranking-metrics", ranking_metrics);
  report("tournament", tournament);
  report("z-invariances", z_invariances);
  std::printf("%d failed\n", failures);
  return failures == 0 ? 0 : 1;
}
