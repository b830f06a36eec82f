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

#ifndef NCS_COST_MODEL_HPP_
#define NCS_COST_MODEL_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ncs/arch_model.hpp"

namespace ncs {

inline constexpr const char* kMacConvention = "1 FLOP = 1 multiply-accumulate";

struct StageCost {
  int stage_index = 0;
  std::int64_t params = 0;
  std::int64_t macs = 0;
  int out_resolution = 0;

  friend bool operator==(const StageCost&, const StageCost&) = default;
};

struct CostReport {
  std::int64_t params_total = 0;
  std::int64_t macs_total = 0;
  std::vector<StageCost> per_stage;
  std::string convention_note = kMacConvention;

  friend bool operator==(const CostReport&, const CostReport&) = default;
};

// Closed-form parameter and MAC count.
//
// Conventions: convolutions carry no bias and are followed by batch norm with
// two learnable parameters per channel; SE projections carry biases; global
// pooling costs H*W*C accumulates; batch norm, activations, the SE channel
// rescale and residual additions cost zero MACs.
CostReport cost(const ArchDescriptor& arch);

// Order-preserving; spreads work over up to `workers` threads (0 = hardware
// concurrency). The first failing descriptor aborts with its index.
std::vector<CostReport> cost_batch(std::span<const ArchDescriptor> archs, unsigned workers = 0);

nlohmann::json to_json(const CostReport& report, bool per_stage = true);
CostReport cost_from_json(const nlohmann::json& doc);

// Columns stage,params,macs,resolution.
std::string to_csv(const CostReport& report);

}  // namespace ncs

#endif  // NCS_COST_MODEL_HPP_
