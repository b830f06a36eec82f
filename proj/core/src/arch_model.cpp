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

#include "ncs/arch_model.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <set>

#include "ncs/errors.hpp"

namespace ncs {
namespace {

using nlohmann::json;

void check_coeff(const Rational& value, const char* axis) {
  if (value <= Rational(0) || value > Rational(1)) {
    throw DomainError(std::string("coefficient out of (0,1]: ") + axis + " = " +
                      value.to_string(6));
  }
}

[[noreturn]] void stage_error(const StageSpec& stage, const std::string& what) {
  throw StructuralError("stage " + std::to_string(stage.index) + ": " + what);
}

void require_keys(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  if (!obj.is_object()) throw StructuralError(where + ": expected an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& item : obj.items()) {
    if (!allowed.contains(item.key())) {
      throw StructuralError(where + ": unknown field \"" + item.key() + "\"");
    }
  }
  for (const char* key : keys) {
    if (!obj.contains(key)) throw StructuralError(where + ": missing field \"" + key + "\"");
  }
}

template <typename T>
T get_field(const json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw StructuralError(where + ": field \"" + key + "\" has the wrong type");
  }
}

}  // namespace

std::string_view to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::kStemConv: return "stem_conv";
    case OperatorKind::kMBConv: return "mbconv";
    case OperatorKind::kHead: return "head";
  }
  return "unknown";
}

OperatorKind operator_kind_from_string(std::string_view name) {
  if (name == "stem_conv") return OperatorKind::kStemConv;
  if (name == "mbconv") return OperatorKind::kMBConv;
  if (name == "head") return OperatorKind::kHead;
  throw StructuralError("unknown operator_kind \"" + std::string(name) + "\"");
}

int ArchDescriptor::total_repeats() const {
  int total = 0;
  for (const auto& s : stages) total += s.repeats;
  return total;
}

std::vector<int> stage_input_sides(const ArchDescriptor& arch) {
  std::vector<int> sides;
  sides.reserve(arch.stages.size());
  int side = arch.input_resolution;
  for (const auto& stage : arch.stages) {
    sides.push_back(side);
    side = reduce_side(side, stage.stride);
  }
  return sides;
}

void validate(const ArchDescriptor& arch) {
  if (arch.input_resolution < kMinInputResolution) {
    throw DomainError("input_resolution " + std::to_string(arch.input_resolution) +
                      " below minimum " + std::to_string(kMinInputResolution));
  }
  if (arch.num_classes < 1) throw DomainError("num_classes must be >= 1");
  if (arch.stages.size() < 2) throw StructuralError("descriptor needs at least a stem and a head");
  for (std::size_t i = 0; i < arch.stages.size(); ++i) {
    const StageSpec& s = arch.stages[i];
    if (s.index != static_cast<int>(i) + 1) stage_error(s, "indices must run 1..N in order");
    const bool first = i == 0;
    const bool last = i + 1 == arch.stages.size();
    if (first && s.kind != OperatorKind::kStemConv) stage_error(s, "first stage must be stem_conv");
    if (last && s.kind != OperatorKind::kHead) stage_error(s, "last stage must be head");
    if (!first && !last && s.kind != OperatorKind::kMBConv) stage_error(s, "inner stages must be mbconv");
    if (s.out_channels < 1) stage_error(s, "out_channels must be >= 1");
    if (s.repeats < 1) stage_error(s, "repeats must be >= 1");
    if (s.stride != 1 && s.stride != 2) stage_error(s, "stride must be 1 or 2");
    if (s.kernel < 1 || s.kernel % 2 == 0) stage_error(s, "kernel must be odd and positive");
    if (!(s.se_ratio >= 0.0 && s.se_ratio <= 1.0)) stage_error(s, "se_ratio must lie in [0,1]");
    if (s.kind == OperatorKind::kMBConv) {
      if (s.expansion < 1) stage_error(s, "mbconv expansion must be >= 1");
    } else {
      if (s.expansion != 0) stage_error(s, "expansion must be 0 outside mbconv");
      if (s.repeats != 1) stage_error(s, "stem/head repeats must be 1");
    }
    if (s.kind == OperatorKind::kHead && s.stride != 1) stage_error(s, "head stride must be 1");
  }
}

ArchDescriptor baseline_b0() {
  struct Row {
    OperatorKind kind;
    int kernel, expansion, stride, channels, repeats;
    double se;
  };
  // Stage table: stem, seven MBConv stages, head (1x1 conv, pool, FC).
  static constexpr std::array<Row, 9> kRows{{
      {OperatorKind::kStemConv, 3, 0, 2, 32, 1, 0.0},
      {OperatorKind::kMBConv, 3, 1, 1, 16, 1, 0.25},
      {OperatorKind::kMBConv, 3, 6, 2, 24, 2, 0.25},
      {OperatorKind::kMBConv, 5, 6, 2, 40, 2, 0.25},
      {OperatorKind::kMBConv, 3, 6, 2, 80, 3, 0.25},
      {OperatorKind::kMBConv, 5, 6, 1, 112, 3, 0.25},
      {OperatorKind::kMBConv, 5, 6, 2, 192, 4, 0.25},
      {OperatorKind::kMBConv, 3, 6, 1, 320, 1, 0.25},
      {OperatorKind::kHead, 1, 0, 1, 1280, 1, 0.0},
  }};
  ArchDescriptor arch;
  arch.name = "efficientnet_b0";
  arch.input_resolution = 224;
  arch.num_classes = 1000;
  int index = 1;
  for (const Row& row : kRows) {
    arch.stages.push_back(StageSpec{index++, row.kind, row.kernel, row.expansion, row.stride,
                                    row.channels, row.repeats, row.se});
  }
  return arch;
}

int round_channels(int channels, const Rational& width, int divisor) {
  if (divisor < 1) throw DomainError("channel divisor must be >= 1");
  const Rational scaled = Rational(channels) * width;
  if (divisor == 1) {
    // Round half up, never below one channel.
    const std::int64_t n = (scaled + Rational(1, 2)).floor();
    return static_cast<int>(std::max<std::int64_t>(1, n));
  }
  const Rational half(divisor, 2);
  std::int64_t rounded = ((scaled + half) / Rational(divisor)).floor() * divisor;
  rounded = std::max<std::int64_t>(divisor, rounded);
  if (Rational(rounded) < Rational(9, 10) * scaled) rounded += divisor;
  return static_cast<int>(rounded);
}

ArchDescriptor scale_model(const ArchDescriptor& base, const Rational& width, const Rational& depth,
                           const Rational& resolution, const BuildOptions& options) {
  check_coeff(width, "w");
  check_coeff(depth, "d");
  check_coeff(resolution, "r");
  ArchDescriptor out = base;
  for (auto& stage : out.stages) {
    stage.out_channels = round_channels(stage.out_channels, width, options.channel_divisor);
    stage.repeats = static_cast<int>((Rational(stage.repeats) * depth).ceil());
  }
  const std::int64_t res = (Rational(base.input_resolution) * resolution).ceil();
  if (res < kMinInputResolution) {
    throw DomainError("scaled input_resolution " + std::to_string(res) + " below minimum " +
                      std::to_string(kMinInputResolution));
  }
  out.input_resolution = static_cast<int>(res);
  out.width_coeff = base.width_coeff * width.to_double();
  out.depth_coeff = base.depth_coeff * depth.to_double();
  out.resolution_coeff = base.resolution_coeff * resolution.to_double();
  const bool identity = width == Rational(1) && depth == Rational(1) && resolution == Rational(1);
  if (!identity) {
    out.name = base.name + "_w" + width.to_string(4) + "_d" + depth.to_string(4) + "_r" +
               resolution.to_string(4);
  }
  validate(out);
  return out;
}

ArchDescriptor build_model(const Rational& width, const Rational& depth, const Rational& resolution,
                           const BuildOptions& options) {
  return scale_model(baseline_b0(), width, depth, resolution, options);
}

int compound_round(int channels) {
  if (channels < 1) throw DomainError("channels must be >= 1");
  const auto c = static_cast<unsigned>(channels);
  const auto down = static_cast<int>(std::bit_floor(c));
  const auto up = static_cast<int>(std::bit_ceil(c));
  return (up - channels < channels - down) ? up : down;
}

ArchDescriptor compound_round_channels(const ArchDescriptor& arch) {
  ArchDescriptor out = arch;
  for (auto& stage : out.stages) stage.out_channels = compound_round(stage.out_channels);
  return out;
}

ArchDescriptor hf_transform(const ArchDescriptor& arch, int resolution) {
  if (resolution != 128 && resolution != 256) {
    throw DomainError("hf resolution must be 128 or 256, got " + std::to_string(resolution));
  }
  ArchDescriptor out = compound_round_channels(arch);
  out.input_resolution = resolution;
  out.name = arch.name + "_hf" + std::to_string(resolution);
  validate(out);
  return out;
}

json to_json(const ArchDescriptor& arch) {
  json stages = json::array();
  for (const auto& s : arch.stages) {
    stages.push_back({{"index", s.index},
                      {"operator_kind", to_string(s.kind)},
                      {"kernel", s.kernel},
                      {"expansion", s.expansion},
                      {"stride", s.stride},
                      {"out_channels", s.out_channels},
                      {"repeats", s.repeats},
                      {"se_ratio", s.se_ratio}});
  }
  return {{"name", arch.name},
          {"input_resolution", arch.input_resolution},
          {"num_classes", arch.num_classes},
          {"coeffs", {{"w", arch.width_coeff}, {"d", arch.depth_coeff}, {"r", arch.resolution_coeff}}},
          {"stages", std::move(stages)}};
}

ArchDescriptor arch_from_json(const json& doc) {
  const std::string where = "descriptor";
  require_keys(doc, {"name", "input_resolution", "num_classes", "coeffs", "stages"}, where);
  ArchDescriptor arch;
  arch.name = get_field<std::string>(doc, "name", where);
  arch.input_resolution = get_field<int>(doc, "input_resolution", where);
  arch.num_classes = get_field<int>(doc, "num_classes", where);
  const json& coeffs = doc.at("coeffs");
  require_keys(coeffs, {"w", "d", "r"}, "coeffs");
  arch.width_coeff = get_field<double>(coeffs, "w", "coeffs");
  arch.depth_coeff = get_field<double>(coeffs, "d", "coeffs");
  arch.resolution_coeff = get_field<double>(coeffs, "r", "coeffs");
  const json& stages = doc.at("stages");
  if (!stages.is_array()) throw StructuralError("descriptor: \"stages\" must be an array");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const std::string at = "stages[" + std::to_string(i) + "]";
    const json& item = stages[i];
    require_keys(item,
                 {"index", "operator_kind", "kernel", "expansion", "stride", "out_channels", "repeats",
                  "se_ratio"},
                 at);
    StageSpec s;
    s.index = get_field<int>(item, "index", at);
    s.kind = operator_kind_from_string(get_field<std::string>(item, "operator_kind", at));
    s.kernel = get_field<int>(item, "kernel", at);
    s.expansion = get_field<int>(item, "expansion", at);
    s.stride = get_field<int>(item, "stride", at);
    s.out_channels = get_field<int>(item, "out_channels", at);
    s.repeats = get_field<int>(item, "repeats", at);
    s.se_ratio = get_field<double>(item, "se_ratio", at);
    arch.stages.push_back(s);
  }
  validate(arch);
  return arch;
}

}  // namespace ncs
