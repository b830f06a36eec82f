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

#include "ncs/candidate_pool.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ncs/errors.hpp"

namespace ncs {

using nlohmann::json;

std::string candidate_id(int wi, int dj, int rk) {
  return "w" + std::to_string(wi) + "_d" + std::to_string(dj) + "_r" + std::to_string(rk);
}

std::string hf_candidate_id(int wi, int dj, int resolution) {
  return "hf_w" + std::to_string(wi) + "_d" + std::to_string(dj) + "_r" + std::to_string(resolution);
}

std::vector<Candidate> generate_pool(const ScalingLadder& ladder, bool hf, std::span<const int> hf_resolutions,
                                     const BuildOptions& options) {
  const int n = ladder.max_index();
  if (n < 1) throw DomainError("ladder is empty");
  std::vector<Candidate> pool;
  if (!hf) {
    pool.reserve(static_cast<std::size_t>(n) * n * n);
    for (int i = 1; i <= n; ++i) {
      for (int j = 1; j <= n; ++j) {
        for (int k = 1; k <= n; ++k) {
          Candidate c;
          c.id = candidate_id(i, j, k);
          c.wi = i;
          c.dj = j;
          c.rk = k;
          c.arch = build_model(ladder.width[i - 1], ladder.depth[j - 1], ladder.resolution[k - 1], options);
          c.arch.name = c.id;
          pool.push_back(std::move(c));
        }
      }
    }
  } else {
    if (hf_resolutions.empty()) throw DomainError("hf pool requires at least one resolution");
    for (int res : hf_resolutions) {
      if (res != 128 && res != 256) throw DomainError("hf resolution must be 128 or 256, got " + std::to_string(res));
    }
    for (int i = 1; i <= n; ++i) {
      for (int j = 1; j <= n; ++j) {
        const ArchDescriptor scaled = build_model(ladder.width[i - 1], ladder.depth[j - 1], Rational(1), options);
        for (int res : hf_resolutions) {
          Candidate c;
          c.id = hf_candidate_id(i, j, res);
          c.wi = i;
          c.dj = j;
          c.rk = 0;
          c.hf_resolution = res;
          c.arch = hf_transform(scaled, res);
          c.arch.name = c.id;
          pool.push_back(std::move(c));
        }
      }
    }
  }
  std::vector<ArchDescriptor> archs;
  archs.reserve(pool.size());
  for (const auto& c : pool) archs.push_back(c.arch);
  std::vector<CostReport> reports = cost_batch(archs);
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i].cost = std::move(reports[i]);
  return pool;
}

AxisStats axis_stats(std::span<const double> values) {
  if (values.empty()) throw DomainError("axis statistics need at least one value");
  long double sum = 0;
  for (double v : values) sum += v;
  const long double mean = sum / static_cast<long double>(values.size());
  long double sq = 0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {static_cast<double>(mean), static_cast<double>(std::sqrt(sq / static_cast<long double>(values.size())))};
}

PoolStats standardize(std::vector<Candidate>& pool) {
  if (pool.size() < 2) throw DomainError("standardization needs a pool of at least 2 candidates");
  std::vector<double> params, flops;
  params.reserve(pool.size());
  flops.reserve(pool.size());
  for (const auto& c : pool) {
    params.push_back(static_cast<double>(c.cost.params_total));
    flops.push_back(static_cast<double>(c.cost.macs_total));
  }
  const AxisStats p = axis_stats(params);
  const AxisStats f = axis_stats(flops);
  if (!(p.sd > 0.0)) throw DomainError("degenerate pool axis: parameter count has zero variance");
  if (!(f.sd > 0.0)) throw DomainError("degenerate pool axis: MAC count has zero variance");
  for (std::size_t i = 0; i < pool.size(); ++i) {
    pool[i].z_para = (params[i] - p.mean) / p.sd;
    pool[i].z_flops = (flops[i] - f.mean) / f.sd;
    pool[i].z_sum = pool[i].z_para + pool[i].z_flops;
  }
  return PoolStats{static_cast<int>(pool.size()), p.mean, f.mean, p.sd, f.sd};
}

std::vector<GroupAssignment> group(std::span<const Candidate> pool, int n_groups) {
  if (n_groups < 1 || n_groups > static_cast<int>(pool.size())) {
    throw DomainError("n_groups " + std::to_string(n_groups) + " outside [1, " + std::to_string(pool.size()) + "]");
  }
  std::vector<const Candidate*> order;
  order.reserve(pool.size());
  std::set<std::string> seen;
  for (const auto& c : pool) {
    if (!seen.insert(c.id).second) throw DomainError("duplicate candidate id " + c.id);
    order.push_back(&c);
  }
  std::sort(order.begin(), order.end(), [](const Candidate* a, const Candidate* b) {
    if (a->z_sum != b->z_sum) return a->z_sum > b->z_sum;
    if (a->cost.params_total != b->cost.params_total) return a->cost.params_total > b->cost.params_total;
    return a->id < b->id;
  });
  const std::size_t base = pool.size() / static_cast<std::size_t>(n_groups);
  const std::size_t extra = pool.size() % static_cast<std::size_t>(n_groups);
  std::vector<GroupAssignment> groups;
  std::size_t pos = 0;
  for (int g = 0; g < n_groups; ++g) {
    const std::size_t size = base + (static_cast<std::size_t>(g) < extra ? 1 : 0);
    GroupAssignment ga;
    ga.group_id = g;
    for (std::size_t m = 0; m < size; ++m) ga.member_ids.push_back(order[pos++]->id);
    groups.push_back(std::move(ga));
  }
  return groups;
}

json to_json(const Candidate& c) {
  return {{"id", c.id},
          {"indices", {{"w", c.wi}, {"d", c.dj}, {"r", c.rk}}},
          {"hf_resolution", c.hf_resolution},
          {"arch", to_json(c.arch)},
          {"cost", to_json(c.cost)},
          {"z_para", c.z_para},
          {"z_flops", c.z_flops},
          {"z_sum", c.z_sum}};
}

Candidate candidate_from_json(const json& doc) {
  Candidate c;
  try {
    c.id = doc.at("id").get<std::string>();
    c.wi = doc.at("indices").at("w").get<int>();
    c.dj = doc.at("indices").at("d").get<int>();
    c.rk = doc.at("indices").at("r").get<int>();
    c.hf_resolution = doc.at("hf_resolution").get<int>();
    c.arch = arch_from_json(doc.at("arch"));
    c.cost = cost_from_json(doc.at("cost"));
    c.z_para = doc.at("z_para").get<double>();
    c.z_flops = doc.at("z_flops").get<double>();
    c.z_sum = doc.at("z_sum").get<double>();
  } catch (const json::exception& e) {
    throw StructuralError(std::string("candidate: ") + e.what());
  }
  return c;
}

json to_json(const PoolStats& s) {
  return {{"n", s.n},
          {"mean_params", s.mean_params},
          {"mean_flops", s.mean_flops},
          {"sd_params", s.sd_params},
          {"sd_flops", s.sd_flops}};
}

json pool_to_json(std::span<const Candidate> pool, const PoolStats& stats) {
  json candidates = json::array();
  for (const auto& c : pool) candidates.push_back(to_json(c));
  return {{"candidates", std::move(candidates)}, {"stats", to_json(stats)}};
}

std::vector<Candidate> pool_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("candidates") || !doc.at("candidates").is_array()) {
    throw StructuralError("pool: expected an object with a \"candidates\" array");
  }
  std::vector<Candidate> pool;
  std::set<std::string> seen;
  for (const auto& item : doc.at("candidates")) {
    Candidate c = candidate_from_json(item);
    if (!seen.insert(c.id).second) throw StructuralError("pool: duplicate candidate id " + c.id);
    pool.push_back(std::move(c));
  }
  return pool;
}

json groups_to_json(std::span<const GroupAssignment> groups) {
  json arr = json::array();
  for (const auto& g : groups) arr.push_back({{"group_id", g.group_id}, {"member_ids", g.member_ids}});
  return {{"n_groups", groups.size()}, {"groups", std::move(arr)}};
}

std::vector<GroupAssignment> groups_from_json(const json& doc) {
  std::vector<GroupAssignment> groups;
  try {
    for (const auto& g : doc.at("groups")) {
      groups.push_back(GroupAssignment{g.at("group_id").get<int>(), g.at("member_ids").get<std::vector<std::string>>()});
    }
  } catch (const json::exception& e) {
    throw StructuralError(std::string("groups: ") + e.what());
  }
  std::set<std::string> seen;
  for (const auto& g : groups) {
    for (const auto& id : g.member_ids) {
      if (!seen.insert(id).second) throw StructuralError("groups: candidate " + id + " appears twice");
    }
  }
  return groups;
}

}  // namespace ncs
