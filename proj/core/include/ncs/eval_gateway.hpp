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

#ifndef NCS_EVAL_GATEWAY_HPP_
#define NCS_EVAL_GATEWAY_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ncs/accuracy_trace.hpp"
#include "ncs/candidate_pool.hpp"

namespace ncs {

enum class EvaluatorKind { kTrace, kSynthetic, kExternal };

std::string_view to_string(EvaluatorKind kind);
EvaluatorKind evaluator_kind_from_string(std::string_view name);

struct EvaluatorInfo {
  EvaluatorKind kind = EvaluatorKind::kTrace;
  bool deterministic = true;
  unsigned max_concurrency = 0;  // 0 = unlimited
};

// Produces accuracies for epochs from_epoch+1 .. from_epoch+n_epochs of one
// candidate. Implementations must tolerate concurrent calls for distinct
// candidates.
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual EvaluatorInfo info() const = 0;
  virtual std::vector<double> evaluate(const Candidate& candidate, int from_epoch, int n_epochs) const = 0;
};

// ---------------------------------------------------------------------------
// Trace replay

// Directory of JSON files {candidate_id, epoch_acc}, indexed by candidate_id.
class TraceStore {
 public:
  TraceStore() = default;

  static TraceStore load_dir(const std::filesystem::path& dir);
  // One file per trace, named <candidate_id>.json.
  void save_dir(const std::filesystem::path& dir) const;

  void put(AccuracyTrace trace);
  bool contains(const std::string& candidate_id) const { return traces_.contains(candidate_id); }
  const std::vector<double>& at(const std::string& candidate_id) const;
  std::vector<AccuracyTrace> traces() const;

  // The stored slice [from_epoch+1, from_epoch+n_epochs], verbatim.
  std::vector<double> slice(const std::string& candidate_id, int from_epoch, int n_epochs) const;

 private:
  std::map<std::string, std::vector<double>> traces_;
};

class TraceEvaluator final : public Evaluator {
 public:
  explicit TraceEvaluator(TraceStore store) : store_(std::move(store)) {}

  EvaluatorInfo info() const override { return {EvaluatorKind::kTrace, true, 0}; }
  std::vector<double> evaluate(const Candidate& candidate, int from_epoch, int n_epochs) const override;

 private:
  TraceStore store_;
};

// ---------------------------------------------------------------------------
// Synthetic learning curves

// Maps a candidate's cost to a saturating curve asymptote * (1 - exp(-t / tau)).
// Heavier models saturate higher and (by MAC count) more slowly, so curves of
// differently sized candidates can cross.
struct SyntheticCurveModel {
  double acc_at_1m_params = 62.0;
  double acc_per_param_doubling = 4.0;
  double tau_at_100m_macs = 12.0;
  double tau_exponent = 0.5;
  double noise = 0.5;  // uniform amplitude, accuracy points
};

struct CurveShape {
  double asymptote = 0.0;
  double tau = 1.0;
};

CurveShape curve_shape(const SyntheticCurveModel& model, const CostReport& cost);

// Epochs from_epoch+1 .. from_epoch+n_epochs of a seeded noisy curve. Each
// epoch's noise depends only on (seed, candidate_id, epoch), so slicing is
// consistent regardless of how the epochs are requested.
std::vector<double> synthetic_curve(std::uint64_t seed, const std::string& candidate_id, const CurveShape& shape,
                                    double noise, int from_epoch, int n_epochs);

class SyntheticEvaluator final : public Evaluator {
 public:
  explicit SyntheticEvaluator(std::uint64_t seed, SyntheticCurveModel model = {}) : seed_(seed), model_(model) {}

  EvaluatorInfo info() const override { return {EvaluatorKind::kSynthetic, true, 0}; }
  std::vector<double> evaluate(const Candidate& candidate, int from_epoch, int n_epochs) const override;

 private:
  std::uint64_t seed_;
  SyntheticCurveModel model_;
};

// ---------------------------------------------------------------------------
// External trainer (newline-delimited JSON over a child process's stdio)

struct TrainHyperparams {
  int batch_size = 100;
  std::string optimizer = "rmsprop";
  std::string augmentation_policy_id = "flip_crop";

  friend bool operator==(const TrainHyperparams&, const TrainHyperparams&) = default;
};

struct TrainRequest {
  std::string candidate_id;
  ArchDescriptor arch;
  int from_epoch = 0;
  int n_epochs = 0;
  TrainHyperparams hyperparams;
  std::string checkpoint_dir;

  friend bool operator==(const TrainRequest&, const TrainRequest&) = default;
};

enum class TrainStatus { kOk, kError };

struct TrainResponse {
  std::string candidate_id;
  std::vector<double> epoch_acc;
  TrainStatus status = TrainStatus::kOk;
  std::string message;
};

nlohmann::json to_json(const TrainRequest& request);
TrainRequest train_request_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const TrainResponse& response);

// Validates one response line against its request. Throws ProtocolError for
// schema or length violations, EvaluatorError carrying the trainer message
// for status=error.
TrainResponse parse_train_response(std::string_view line, const TrainRequest& request);

struct ExternalConfig {
  std::vector<std::string> command;  // argv of the trainer process
  double timeout_s = 3600.0;
  unsigned parallelism = 1;
  TrainHyperparams hyperparams;
  std::string checkpoint_dir;
};

// Spawns the trainer, writes one request line, closes its stdin and reads one
// response line. The child is killed on timeout.
TrainResponse external_evaluate(const ExternalConfig& config, const TrainRequest& request);

class ExternalEvaluator final : public Evaluator {
 public:
  explicit ExternalEvaluator(ExternalConfig config);

  EvaluatorInfo info() const override {
    return {EvaluatorKind::kExternal, false, config_.parallelism};
  }
  std::vector<double> evaluate(const Candidate& candidate, int from_epoch, int n_epochs) const override;

 private:
  ExternalConfig config_;
};

// ---------------------------------------------------------------------------

// Forwards to another evaluator and keeps every returned slice, so a run
// against a live trainer can be replayed later through a TraceStore.
class RecordingEvaluator final : public Evaluator {
 public:
  explicit RecordingEvaluator(const Evaluator& inner) : inner_(inner) {}

  EvaluatorInfo info() const override { return inner_.info(); }
  std::vector<double> evaluate(const Candidate& candidate, int from_epoch, int n_epochs) const override;

  TraceStore recorded() const;

 private:
  const Evaluator& inner_;
  mutable std::mutex mu_;
  mutable std::map<std::string, std::vector<double>> recorded_;
};

}  // namespace ncs

#endif  // NCS_EVAL_GATEWAY_HPP_
