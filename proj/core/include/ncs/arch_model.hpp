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

#ifndef NCS_ARCH_MODEL_HPP_
#define NCS_ARCH_MODEL_HPP_

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ncs/rational.hpp"

namespace ncs {

enum class OperatorKind { kStemConv, kMBConv, kHead };

std::string_view to_string(OperatorKind kind);
OperatorKind operator_kind_from_string(std::string_view name);

// One row of the stage table. `stride` applies to the first repeat only.
struct StageSpec {
  int index = 0;
  OperatorKind kind = OperatorKind::kMBConv;
  int kernel = 3;
  int expansion = 0;  // 0 for stem/head
  int stride = 1;
  int out_channels = 0;
  int repeats = 1;
  double se_ratio = 0.0;

  friend bool operator==(const StageSpec&, const StageSpec&) = default;
};

// Stage-level CNN structure: stem conv, MBConv stages, 1x1 head + pool + FC.
struct ArchDescriptor {
  std::string name;
  int input_resolution = 224;
  int num_classes = 1000;
  double width_coeff = 1.0;
  double depth_coeff = 1.0;
  double resolution_coeff = 1.0;
  std::vector<StageSpec> stages;

  int total_repeats() const;
  friend bool operator==(const ArchDescriptor&, const ArchDescriptor&) = default;
};

// How fractional channel counts are realized.
struct BuildOptions {
  int channel_divisor = 8;
};

inline constexpr int kMinInputResolution = 32;

// Stride-reduced side length under same padding.
constexpr int reduce_side(int side, int stride) { return (side + stride - 1) / stride; }

// Input-side length seen by each stage, in stage order.
std::vector<int> stage_input_sides(const ArchDescriptor& arch);

// Throws StructuralError naming the offending stage.
void validate(const ArchDescriptor& arch);

// The nine-stage EfficientNet-B0 baseline at 224x224.
ArchDescriptor baseline_b0();

// Nearest multiple of `divisor` (at least `divisor`), bumped one step when the
// result lost more than 10% of `channels * width`. divisor == 1 rounds to the
// nearest integer.
int round_channels(int channels, const Rational& width, int divisor = 8);

// Scales any descriptor: channels by width, repeats by ceiling(R * depth),
// input resolution by ceiling(res * r). Coefficients must lie in (0, 1].
ArchDescriptor scale_model(const ArchDescriptor& base, const Rational& width,
                           const Rational& depth, const Rational& resolution,
                           const BuildOptions& options = {});

// scale_model applied to baseline_b0().
ArchDescriptor build_model(const Rational& width, const Rational& depth,
                           const Rational& resolution, const BuildOptions& options = {});

// Power-of-two channel snapping; ties round down.
int compound_round(int channels);
ArchDescriptor compound_round_channels(const ArchDescriptor& arch);

// Compound-rounded channels at a 128 or 256 input resolution.
ArchDescriptor hf_transform(const ArchDescriptor& arch, int resolution);

// Descriptor JSON. Parsing rejects unknown and missing fields.
nlohmann::json to_json(const ArchDescriptor& arch);
ArchDescriptor arch_from_json(const nlohmann::json& doc);

}  // namespace ncs

#endif  // NCS_ARCH_MODEL_HPP_
