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

#include "ncs/scaling_rules.hpp"

#include <spdlog/spdlog.h>

#include "ncs/errors.hpp"

namespace ncs {
namespace {

using nlohmann::json;

const Rational kDepthStep(1, 10);
// Per-step ratio multipliers relative to the depth ratio: 1.1/1.2 and 1.15/1.2.
const Rational kWidthPerDepth(11, 12);
const Rational kResolutionPerDepth(23, 24);

json fraction_json(const Rational& r) {
  return {{"num", r.num()}, {"den", r.den()}, {"value", r.to_string(4)}};
}

Rational fraction_from_json(const json& j) {
  try {
    return Rational(j.at("num").get<std::int64_t>(), j.at("den").get<std::int64_t>());
  } catch (const json::exception&) {
    throw StructuralError("ladder: malformed fraction");
  }
}

}  // namespace

int operator_total(std::span<const int> repeats, const Rational& depth) {
  int total = 0;
  for (int r : repeats) total += static_cast<int>((Rational(r) * depth).ceil());
  return total;
}

DepthLadder derive_depth_ladder(std::span<const int> baseline_repeats, int max_index) {
  if (max_index < 1) throw DomainError("max_index must be >= 1");
  if (baseline_repeats.empty()) throw DomainError("baseline repeats must be non-empty");
  for (int r : baseline_repeats) {
    if (r < 1) throw DomainError("baseline repeats must all be >= 1");
  }
  DepthLadder ladder;
  ladder.coeffs.push_back(Rational(1));
  ladder.totals.push_back(operator_total(baseline_repeats, Rational(1)));
  while (static_cast<int>(ladder.coeffs.size()) < max_index) {
    const Rational prev = ladder.coeffs.back();
    const int prev_total = ladder.totals.back();
    bool found = false;
    for (Rational cand = prev - kDepthStep; cand > Rational(0); cand = cand - kDepthStep) {
      const int total = operator_total(baseline_repeats, cand);
      if (total < prev_total) {
        ladder.coeffs.push_back(cand);
        ladder.totals.push_back(total);
        found = true;
        break;
      }
    }
    if (!found) {
      ladder.truncated = true;
      spdlog::warn("depth ladder truncated at {} of {} entries: no positive coefficient reduces the "
                   "operator total below {}",
                   ladder.coeffs.size(), max_index, prev_total);
      break;
    }
  }
  return ladder;
}

WidthResolutionLadder derive_wr_ladder(std::span<const int> operator_totals) {
  if (operator_totals.empty()) throw DomainError("operator totals must be non-empty");
  for (std::size_t u = 0; u < operator_totals.size(); ++u) {
    if (operator_totals[u] < 1) throw DomainError("operator totals must be positive");
    if (u > 0 && operator_totals[u] >= operator_totals[u - 1]) {
      throw DomainError("operator totals must be strictly decreasing: t" + std::to_string(u + 1) +
                        " = " + std::to_string(operator_totals[u]) + " >= t" + std::to_string(u) +
                        " = " + std::to_string(operator_totals[u - 1]));
    }
  }
  WidthResolutionLadder out;
  out.width.push_back(Rational(1));
  out.resolution.push_back(Rational(1));
  for (std::size_t u = 1; u < operator_totals.size(); ++u) {
    const Rational depth_ratio(operator_totals[u], operator_totals[u - 1]);
    out.width.push_back(out.width.back() * kWidthPerDepth * depth_ratio);
    out.resolution.push_back(out.resolution.back() * kResolutionPerDepth * depth_ratio);
  }
  return out;
}

std::vector<int> resolutions_from_ladder(std::span<const Rational> resolution_coeffs, int base) {
  if (base < 1) throw DomainError("base resolution must be positive");
  std::vector<int> out;
  out.reserve(resolution_coeffs.size());
  for (const Rational& r : resolution_coeffs) {
    if (r <= Rational(0) || r > Rational(1)) {
      throw DomainError("coefficient out of (0,1]: r = " + r.to_string(6));
    }
    out.push_back(static_cast<int>((Rational(base) * r).ceil()));
  }
  return out;
}

ScalingLadder derive_ladder(std::span<const int> baseline_repeats, int max_index, int base_resolution) {
  DepthLadder depth = derive_depth_ladder(baseline_repeats, max_index);
  WidthResolutionLadder wr = derive_wr_ladder(depth.totals);
  ScalingLadder ladder;
  ladder.depth = std::move(depth.coeffs);
  ladder.totals = std::move(depth.totals);
  ladder.truncated = depth.truncated;
  ladder.width = std::move(wr.width);
  ladder.resolution = std::move(wr.resolution);
  ladder.base_resolution = base_resolution;
  ladder.resolutions = resolutions_from_ladder(ladder.resolution, base_resolution);
  return ladder;
}

json to_json(const ScalingLadder& ladder) {
  json depth = json::array(), width = json::array(), resolution = json::array();
  for (const auto& d : ladder.depth) depth.push_back(fraction_json(d));
  for (const auto& w : ladder.width) width.push_back(fraction_json(w));
  for (const auto& r : ladder.resolution) resolution.push_back(fraction_json(r));
  return {{"max_index", ladder.max_index()},
          {"truncated", ladder.truncated},
          {"base_resolution", ladder.base_resolution},
          {"depth_coeffs", std::move(depth)},
          {"operator_totals", ladder.totals},
          {"width_coeffs", std::move(width)},
          {"resolution_coeffs", std::move(resolution)},
          {"resolutions", ladder.resolutions}};
}

ScalingLadder ladder_from_json(const json& doc) {
  ScalingLadder ladder;
  try {
    ladder.truncated = doc.at("truncated").get<bool>();
    ladder.base_resolution = doc.at("base_resolution").get<int>();
    for (const auto& d : doc.at("depth_coeffs")) ladder.depth.push_back(fraction_from_json(d));
    ladder.totals = doc.at("operator_totals").get<std::vector<int>>();
    for (const auto& w : doc.at("width_coeffs")) ladder.width.push_back(fraction_from_json(w));
    for (const auto& r : doc.at("resolution_coeffs")) ladder.resolution.push_back(fraction_from_json(r));
    ladder.resolutions = doc.at("resolutions").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError(std::string("ladder: ") + e.what());
  }
  const std::size_t n = ladder.depth.size();
  if (n == 0 || ladder.totals.size() != n || ladder.width.size() != n || ladder.resolution.size() != n ||
      ladder.resolutions.size() != n) {
    throw StructuralError("ladder: coefficient lists must be non-empty and of equal length");
  }
  return ladder;
}

}  // namespace ncs
