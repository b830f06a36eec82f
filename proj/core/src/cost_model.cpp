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

#include "ncs/cost_model.hpp"

#include <algorithm>
#include <exception>
#include <future>
#include <sstream>
#include <thread>

#include "ncs/errors.hpp"

namespace ncs {
namespace {

using nlohmann::json;

struct LayerCost {
  std::int64_t params = 0;
  std::int64_t macs = 0;

  LayerCost& operator+=(const LayerCost& o) {
    params += o.params;
    macs += o.macs;
    return *this;
  }
};

std::int64_t area(int side) { return static_cast<std::int64_t>(side) * side; }

// Bias-free convolution followed by batch norm.
LayerCost conv_bn(int in_ch, int out_ch, int kernel, int groups, int out_side) {
  const std::int64_t k2 = static_cast<std::int64_t>(kernel) * kernel;
  const std::int64_t weights = k2 * (in_ch / groups) * out_ch;
  return {weights + 2LL * out_ch, area(out_side) * out_ch * k2 * (in_ch / groups)};
}

// Squeeze (global pool) plus two 1x1 projections with bias.
LayerCost squeeze_excite(int block_in_ch, int expanded_ch, double se_ratio, int side) {
  if (se_ratio <= 0.0) return {};
  const int squeezed = std::max(1, static_cast<int>(block_in_ch * se_ratio));
  const std::int64_t reduce = static_cast<std::int64_t>(expanded_ch) * squeezed;
  LayerCost c;
  c.params = reduce + squeezed + reduce + expanded_ch;
  c.macs = area(side) * expanded_ch + 2 * reduce;
  return c;
}

LayerCost mbconv_block(int in_ch, int out_ch, int expansion, int kernel, int stride, double se_ratio,
                       int in_side, int* out_side) {
  const int expanded = in_ch * expansion;
  const int side = reduce_side(in_side, stride);
  LayerCost c;
  if (expansion != 1) c += conv_bn(in_ch, expanded, 1, 1, in_side);
  c += conv_bn(expanded, expanded, kernel, expanded, side);
  c += squeeze_excite(in_ch, expanded, se_ratio, side);
  c += conv_bn(expanded, out_ch, 1, 1, side);
  *out_side = side;
  return c;
}

}  // namespace

CostReport cost(const ArchDescriptor& arch) {
  validate(arch);
  CostReport report;
  int side = arch.input_resolution;
  int channels = 3;
  for (const StageSpec& stage : arch.stages) {
    LayerCost sc;
    switch (stage.kind) {
      case OperatorKind::kStemConv: {
        side = reduce_side(side, stage.stride);
        sc += conv_bn(channels, stage.out_channels, stage.kernel, 1, side);
        break;
      }
      case OperatorKind::kMBConv: {
        for (int rep = 0; rep < stage.repeats; ++rep) {
          const int in_ch = rep == 0 ? channels : stage.out_channels;
          const int stride = rep == 0 ? stage.stride : 1;
          sc += mbconv_block(in_ch, stage.out_channels, stage.expansion, stage.kernel, stride,
                             stage.se_ratio, side, &side);
        }
        break;
      }
      case OperatorKind::kHead: {
        side = reduce_side(side, stage.stride);
        sc += conv_bn(channels, stage.out_channels, stage.kernel, 1, side);
        sc.macs += area(side) * stage.out_channels;  // global average pool
        const std::int64_t fc = static_cast<std::int64_t>(stage.out_channels) * arch.num_classes;
        sc.params += fc + arch.num_classes;
        sc.macs += fc;
        break;
      }
    }
    channels = stage.out_channels;
    report.per_stage.push_back(StageCost{stage.index, sc.params, sc.macs, side});
    report.params_total += sc.params;
    report.macs_total += sc.macs;
  }
  return report;
}

std::vector<CostReport> cost_batch(std::span<const ArchDescriptor> archs, unsigned workers) {
  std::vector<CostReport> out(archs.size());
  if (archs.empty()) return out;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(archs.size()));

  std::vector<std::exception_ptr> failures(archs.size());
  auto run_slice = [&](std::size_t begin, std::size_t step) {
    for (std::size_t i = begin; i < archs.size(); i += step) {
      try {
        out[i] = cost(archs[i]);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  std::vector<std::future<void>> tasks;
  for (unsigned w = 1; w < workers; ++w) tasks.push_back(std::async(std::launch::async, run_slice, w, workers));
  run_slice(0, workers);
  for (auto& t : tasks) t.get();

  for (std::size_t i = 0; i < failures.size(); ++i) {
    if (!failures[i]) continue;
    try {
      std::rethrow_exception(failures[i]);
    } catch (const StructuralError& e) {
      throw StructuralError("descriptor #" + std::to_string(i) + ": " + e.what());
    } catch (const DomainError& e) {
      throw DomainError("descriptor #" + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

json to_json(const CostReport& report, bool per_stage) {
  json doc = {{"params_total", report.params_total},
              {"macs_total", report.macs_total},
              {"convention_note", report.convention_note}};
  if (per_stage) {
    json stages = json::array();
    for (const auto& s : report.per_stage) {
      stages.push_back({{"stage_index", s.stage_index},
                        {"params", s.params},
                        {"macs", s.macs},
                        {"out_resolution", s.out_resolution}});
    }
    doc["per_stage"] = std::move(stages);
  }
  return doc;
}

CostReport cost_from_json(const json& doc) {
  CostReport report;
  try {
    report.params_total = doc.at("params_total").get<std::int64_t>();
    report.macs_total = doc.at("macs_total").get<std::int64_t>();
    report.convention_note = doc.value("convention_note", std::string(kMacConvention));
    if (doc.contains("per_stage")) {
      for (const auto& s : doc.at("per_stage")) {
        report.per_stage.push_back(StageCost{s.at("stage_index").get<int>(), s.at("params").get<std::int64_t>(),
                                             s.at("macs").get<std::int64_t>(), s.at("out_resolution").get<int>()});
      }
    }
  } catch (const json::exception& e) {
    throw StructuralError(std::string("cost report: ") + e.what());
  }
  return report;
}

std::string to_csv(const CostReport& report) {
  std::ostringstream os;
  os << "stage,params,macs,resolution\n";
  for (const auto& s : report.per_stage) {
    os << s.stage_index << ',' << s.params << ',' << s.macs << ',' << s.out_resolution << '\n';
  }
  return os.str();
}

}  // namespace ncs
