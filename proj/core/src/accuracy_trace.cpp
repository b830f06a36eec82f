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

#include "ncs/accuracy_trace.hpp"

#include <cmath>

#include "ncs/errors.hpp"

namespace ncs {

void check_accuracies(const std::string& candidate_id, const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (!std::isfinite(v) || v < 0.0 || v > 100.0) {
      throw DomainError("candidate " + candidate_id + ": accuracy at position " + std::to_string(i + 1) +
                        " outside [0, 100]");
    }
  }
}

nlohmann::json to_json(const AccuracyTrace& trace) {
  return {{"candidate_id", trace.candidate_id}, {"epoch_acc", trace.epoch_acc}};
}

AccuracyTrace trace_from_json(const nlohmann::json& doc) {
  AccuracyTrace trace;
  try {
    trace.candidate_id = doc.at("candidate_id").get<std::string>();
    trace.epoch_acc = doc.at("epoch_acc").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError(std::string("trace: ") + e.what());
  }
  check_accuracies(trace.candidate_id, trace.epoch_acc);
  return trace;
}

}  // namespace ncs
