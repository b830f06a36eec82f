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

#ifndef NCS_SCALING_RULES_HPP_
#define NCS_SCALING_RULES_HPP_

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "ncs/rational.hpp"

namespace ncs {

struct DepthLadder {
  std::vector<Rational> coeffs;  // d_1 = 1, strictly decreasing
  std::vector<int> totals;       // sum_s ceiling(R_s * d_j)
  bool truncated = false;        // ran out of positive coefficients before max_index
};

struct WidthResolutionLadder {
  std::vector<Rational> width;
  std::vector<Rational> resolution;
};

// Scale-down coefficient tables for width (w_i), depth (d_j, t_u) and
// resolution (r_k), all of equal length.
struct ScalingLadder {
  std::vector<Rational> depth;
  std::vector<int> totals;
  std::vector<Rational> width;
  std::vector<Rational> resolution;
  std::vector<int> resolutions;
  int base_resolution = 224;
  bool truncated = false;

  int max_index() const { return static_cast<int>(depth.size()); }
};

// Sum over stages of ceiling(R_s * d).
int operator_total(std::span<const int> repeats, const Rational& depth);

// Each step takes the largest d_{j-1} - 0.1x (x >= 1) whose operator total is
// strictly below the previous one. Stops early (truncated) when no positive
// coefficient reduces the total.
DepthLadder derive_depth_ladder(std::span<const int> baseline_repeats, int max_index);

// Width and resolution step ratios locked to the depth step t_{u+1}/t_u by the
// 1.1 : 1.2 : 1.15 proportion.
WidthResolutionLadder derive_wr_ladder(std::span<const int> operator_totals);

// ceiling(base * r_k) per entry.
std::vector<int> resolutions_from_ladder(std::span<const Rational> resolution_coeffs, int base = 224);

ScalingLadder derive_ladder(std::span<const int> baseline_repeats, int max_index, int base_resolution = 224);

// Coefficients rendered at 4 decimals alongside the exact fractions.
nlohmann::json to_json(const ScalingLadder& ladder);
ScalingLadder ladder_from_json(const nlohmann::json& doc);

}  // namespace ncs

#endif  // NCS_SCALING_RULES_HPP_
