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

#ifndef NCS_ACCURACY_TRACE_HPP_
#define NCS_ACCURACY_TRACE_HPP_

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ncs {

// Top-1 accuracy (%) per epoch; epoch_acc[0] is epoch 1.
struct AccuracyTrace {
  std::string candidate_id;
  std::vector<double> epoch_acc;

  friend bool operator==(const AccuracyTrace&, const AccuracyTrace&) = default;
};

// Throws DomainError unless every value is finite and within [0, 100].
void check_accuracies(const std::string& candidate_id, const std::vector<double>& values);

nlohmann::json to_json(const AccuracyTrace& trace);
AccuracyTrace trace_from_json(const nlohmann::json& doc);

}  // namespace ncs

#endif  // NCS_ACCURACY_TRACE_HPP_
