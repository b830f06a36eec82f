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

#ifndef NCS_CANDIDATE_POOL_HPP_
#define NCS_CANDIDATE_POOL_HPP_

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ncs/arch_model.hpp"
#include "ncs/cost_model.hpp"
#include "ncs/scaling_rules.hpp"

namespace ncs {

struct Candidate {
  std::string id;     // "w{i}_d{j}_r{k}" or "hf_w{i}_d{j}_r{res}"
  int wi = 1, dj = 1, rk = 1;  // 1-based ladder indices; rk is 0 for HF candidates
  int hf_resolution = 0;       // 128/256 for HF candidates, else 0
  ArchDescriptor arch;
  CostReport cost;
  double z_para = 0.0;
  double z_flops = 0.0;
  double z_sum = 0.0;

  bool is_hf() const { return hf_resolution != 0; }
};

struct PoolStats {
  int n = 0;
  double mean_params = 0.0;
  double mean_flops = 0.0;
  double sd_params = 0.0;  // population standard deviation
  double sd_flops = 0.0;
};

struct GroupAssignment {
  int group_id = 0;  // 0 = heaviest by z_sum
  std::vector<std::string> member_ids;

  friend bool operator==(const GroupAssignment&, const GroupAssignment&) = default;
};

std::string candidate_id(int wi, int dj, int rk);
std::string hf_candidate_id(int wi, int dj, int resolution);

// Standard pool: every (i, j, k) in [1, max_index]^3. HF pool: every (i, j)
// crossed with hf_resolutions, built at r = 1 then snapped to powers of two.
std::vector<Candidate> generate_pool(const ScalingLadder& ladder, bool hf = false,
                                     std::span<const int> hf_resolutions = {},
                                     const BuildOptions& options = {});

struct AxisStats {
  double mean = 0.0;
  double sd = 0.0;
};

// Population mean and standard deviation of one resource axis.
AxisStats axis_stats(std::span<const double> values);

// Fills z_para, z_flops and z_sum in place. Throws DomainError on pools of
// fewer than two candidates or a zero-variance axis.
PoolStats standardize(std::vector<Candidate>& pool);

// Contiguous near-equal bins over descending z_sum (ties: larger params
// first, then id). Earlier bins absorb the remainder.
std::vector<GroupAssignment> group(std::span<const Candidate> pool, int n_groups);

nlohmann::json to_json(const Candidate& c);
Candidate candidate_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const PoolStats& stats);

// Pool document: {"candidates": [...], "stats": {...}} plus provenance
// fields added by the caller.
nlohmann::json pool_to_json(std::span<const Candidate> pool, const PoolStats& stats);
std::vector<Candidate> pool_from_json(const nlohmann::json& doc);

nlohmann::json groups_to_json(std::span<const GroupAssignment> groups);
std::vector<GroupAssignment> groups_from_json(const nlohmann::json& doc);

}  // namespace ncs

#endif  // NCS_CANDIDATE_POOL_HPP_
