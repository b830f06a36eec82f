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

#include "ncs/eval_gateway.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <thread>

#include "ncs/errors.hpp"

extern char** environ;

namespace ncs {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void check_window(const std::string& id, int from_epoch, int n_epochs) {
  if (from_epoch < 0 || n_epochs < 1) {
    throw EvaluatorError(id, "invalid epoch window from=" + std::to_string(from_epoch) +
                                 " n=" + std::to_string(n_epochs));
  }
}

// RAII file descriptor.
class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept {
    reset();
    fd_ = std::exchange(o.fd_, -1);
    return *this;
  }
  ~Fd() { reset(); }

  int get() const { return fd_; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

struct Pipe {
  Fd read_end;
  Fd write_end;
};

Pipe make_pipe() {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) throw EvaluatorError("", std::string("pipe2 failed: ") + std::strerror(errno));
  return {Fd(fds[0]), Fd(fds[1])};
}

// Reaps the child, killing it if it has not exited by the deadline.
int reap(pid_t pid, Clock::time_point deadline) {
  int status = 0;
  while (true) {
    const pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid) return status;
    if (r < 0 && errno != EINTR) return -1;
    if (Clock::now() >= deadline) {
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      return status;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
}

std::string describe_exit(int status) {
  if (status < 0) return "unknown exit status";
  if (WIFEXITED(status)) return "exit code " + std::to_string(WEXITSTATUS(status));
  if (WIFSIGNALED(status)) return "signal " + std::to_string(WTERMSIG(status));
  return "status " + std::to_string(status);
}

}  // namespace

std::string_view to_string(EvaluatorKind kind) {
  switch (kind) {
    case EvaluatorKind::kTrace: return "trace";
    case EvaluatorKind::kSynthetic: return "synthetic";
    case EvaluatorKind::kExternal: return "external";
  }
  return "unknown";
}

EvaluatorKind evaluator_kind_from_string(std::string_view name) {
  if (name == "trace") return EvaluatorKind::kTrace;
  if (name == "synthetic") return EvaluatorKind::kSynthetic;
  if (name == "external") return EvaluatorKind::kExternal;
  throw DomainError("unknown evaluator kind \"" + std::string(name) + "\"");
}

// ---------------------------------------------------------------------------

TraceStore TraceStore::load_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DomainError("trace directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  TraceStore store;
  for (const auto& file : files) {
    std::ifstream in(file);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw StructuralError(file.string() + ": " + e.what());
    }
    AccuracyTrace trace = trace_from_json(doc);
    if (store.contains(trace.candidate_id)) {
      throw StructuralError(file.string() + ": duplicate trace for " + trace.candidate_id);
    }
    store.put(std::move(trace));
  }
  return store;
}

void TraceStore::save_dir(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  for (const auto& [id, acc] : traces_) {
    std::ofstream out(dir / (id + ".json"));
    out << to_json(AccuracyTrace{id, acc}).dump() << '\n';
    if (!out) throw DomainError("cannot write trace file for " + id);
  }
}

void TraceStore::put(AccuracyTrace trace) {
  check_accuracies(trace.candidate_id, trace.epoch_acc);
  traces_[trace.candidate_id] = std::move(trace.epoch_acc);
}

const std::vector<double>& TraceStore::at(const std::string& candidate_id) const {
  auto it = traces_.find(candidate_id);
  if (it == traces_.end()) throw EvaluatorError(candidate_id, "no trace stored");
  return it->second;
}

std::vector<AccuracyTrace> TraceStore::traces() const {
  std::vector<AccuracyTrace> out;
  for (const auto& [id, acc] : traces_) out.push_back({id, acc});
  return out;
}

std::vector<double> TraceStore::slice(const std::string& candidate_id, int from_epoch, int n_epochs) const {
  check_window(candidate_id, from_epoch, n_epochs);
  const auto& acc = at(candidate_id);
  const int have = static_cast<int>(acc.size());
  const int want = from_epoch + n_epochs;
  if (want > have) {
    const int first_missing = std::max(have, from_epoch) + 1;
    const std::string range =
        first_missing == want ? std::to_string(want) : std::to_string(first_missing) + "-" + std::to_string(want);
    throw EvaluatorError(candidate_id, "epochs " + range + " missing");
  }
  return {acc.begin() + from_epoch, acc.begin() + want};
}

std::vector<double> TraceEvaluator::evaluate(const Candidate& candidate, int from_epoch, int n_epochs) const {
  return store_.slice(candidate.id, from_epoch, n_epochs);
}

// ---------------------------------------------------------------------------

CurveShape curve_shape(const SyntheticCurveModel& model, const CostReport& cost) {
  const double params_m = std::max(1.0, static_cast<double>(cost.params_total)) / 1e6;
  const double macs_100m = std::max(1.0, static_cast<double>(cost.macs_total)) / 1e8;
  CurveShape shape;
  shape.asymptote = std::clamp(model.acc_at_1m_params + model.acc_per_param_doubling * std::log2(params_m), 1.0, 99.0);
  shape.tau = std::max(0.5, model.tau_at_100m_macs * std::pow(macs_100m, model.tau_exponent));
  return shape;
}

std::vector<double> synthetic_curve(std::uint64_t seed, const std::string& candidate_id, const CurveShape& shape,
                                    double noise, int from_epoch, int n_epochs) {
  check_window(candidate_id, from_epoch, n_epochs);
  const std::uint64_t stream = splitmix64(seed ^ fnv1a(candidate_id));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n_epochs));
  for (int e = from_epoch + 1; e <= from_epoch + n_epochs; ++e) {
    double value = shape.asymptote * (1.0 - std::exp(-static_cast<double>(e) / shape.tau));
    if (noise > 0.0) {
      const std::uint64_t bits = splitmix64(stream + static_cast<std::uint64_t>(e));
      const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
      value += noise * (2.0 * u - 1.0);
    }
    out.push_back(std::clamp(value, 0.0, 100.0));
  }
  return out;
}

std::vector<double> SyntheticEvaluator::evaluate(const Candidate& candidate, int from_epoch, int n_epochs) const {
  return synthetic_curve(seed_, candidate.id, curve_shape(model_, candidate.cost), model_.noise, from_epoch, n_epochs);
}

// ---------------------------------------------------------------------------

json to_json(const TrainRequest& r) {
  return {{"candidate_id", r.candidate_id},
          {"arch", to_json(r.arch)},
          {"from_epoch", r.from_epoch},
          {"n_epochs", r.n_epochs},
          {"hyperparams",
           {{"batch_size", r.hyperparams.batch_size},
            {"optimizer", r.hyperparams.optimizer},
            {"augmentation_policy_id", r.hyperparams.augmentation_policy_id}}},
          {"checkpoint_dir", r.checkpoint_dir}};
}

TrainRequest train_request_from_json(const json& doc) {
  TrainRequest r;
  try {
    r.candidate_id = doc.at("candidate_id").get<std::string>();
    r.arch = arch_from_json(doc.at("arch"));
    r.from_epoch = doc.at("from_epoch").get<int>();
    r.n_epochs = doc.at("n_epochs").get<int>();
    const json& hp = doc.at("hyperparams");
    r.hyperparams.batch_size = hp.at("batch_size").get<int>();
    r.hyperparams.optimizer = hp.at("optimizer").get<std::string>();
    r.hyperparams.augmentation_policy_id = hp.at("augmentation_policy_id").get<std::string>();
    r.checkpoint_dir = doc.at("checkpoint_dir").get<std::string>();
  } catch (const json::exception& e) {
    throw ProtocolError("", std::string("malformed train request: ") + e.what());
  }
  return r;
}

json to_json(const TrainResponse& r) {
  return {{"candidate_id", r.candidate_id},
          {"epoch_acc", r.epoch_acc},
          {"status", r.status == TrainStatus::kOk ? "ok" : "error"},
          {"message", r.message}};
}

TrainResponse parse_train_response(std::string_view line, const TrainRequest& request) {
  const std::string& id = request.candidate_id;
  json doc = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) throw ProtocolError(id, "response is not a JSON object");
  TrainResponse r;
  try {
    r.candidate_id = doc.at("candidate_id").get<std::string>();
    const std::string status = doc.at("status").get<std::string>();
    if (status == "ok") {
      r.status = TrainStatus::kOk;
    } else if (status == "error") {
      r.status = TrainStatus::kError;
    } else {
      throw ProtocolError(id, "unknown status \"" + status + "\"");
    }
    r.message = doc.value("message", std::string());
    if (r.status == TrainStatus::kOk) r.epoch_acc = doc.at("epoch_acc").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ProtocolError(id, std::string("malformed response: ") + e.what());
  }
  if (r.candidate_id != id) throw ProtocolError(id, "response names candidate " + r.candidate_id);
  if (r.status == TrainStatus::kError) throw EvaluatorError(id, "trainer error: " + r.message);
  if (static_cast<int>(r.epoch_acc.size()) != request.n_epochs) {
    throw ProtocolError(id, "expected " + std::to_string(request.n_epochs) + " epoch accuracies, got " +
                                std::to_string(r.epoch_acc.size()));
  }
  try {
    check_accuracies(id, r.epoch_acc);
  } catch (const DomainError& e) {
    throw ProtocolError(id, e.what());
  }
  return r;
}

TrainResponse external_evaluate(const ExternalConfig& config, const TrainRequest& request) {
  const std::string& id = request.candidate_id;
  if (config.command.empty()) throw EvaluatorError(id, "external evaluator has no trainer command");
  const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                           std::chrono::duration<double>(config.timeout_s));

  Pipe to_child = make_pipe();
  Pipe from_child = make_pipe();

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, to_child.read_end.get(), STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, from_child.write_end.get(), STDOUT_FILENO);

  std::vector<char*> argv;
  for (const auto& arg : config.command) argv.push_back(const_cast<char*>(arg.c_str()));
  argv.push_back(nullptr);

  pid_t pid = -1;
  const int rc = ::posix_spawnp(&pid, argv[0], &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) throw EvaluatorError(id, "cannot start trainer \"" + config.command[0] + "\": " + std::strerror(rc));
  to_child.read_end.reset();
  from_child.write_end.reset();

  const std::string payload = to_json(request).dump() + "\n";
  std::size_t written = 0;
  while (written < payload.size()) {
    const ssize_t n = ::write(to_child.write_end.get(), payload.data() + written, payload.size() - written);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      to_child.write_end.reset();
      const int status = reap(pid, Clock::now());
      throw EvaluatorError(id, "trainer closed its input (" + describe_exit(status) + ")");
    }
    written += static_cast<std::size_t>(n);
  }
  to_child.write_end.reset();

  std::string buffer;
  bool timed_out = false;
  while (buffer.find('\n') == std::string::npos) {
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    if (remaining <= 0) {
      timed_out = true;
      break;
    }
    pollfd pfd{from_child.read_end.get(), POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(remaining, 1000)));
    if (ready < 0 && errno == EINTR) continue;
    if (ready <= 0) continue;
    char chunk[4096];
    const ssize_t n = ::read(from_child.read_end.get(), chunk, sizeof(chunk));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;  // EOF
    buffer.append(chunk, static_cast<std::size_t>(n));
  }
  from_child.read_end.reset();

  if (timed_out) {
    ::kill(pid, SIGKILL);
    reap(pid, Clock::now());
    throw EvaluatorError(id, "trainer timed out after " + std::to_string(config.timeout_s) + " s");
  }
  const int status = reap(pid, Clock::now() + std::chrono::seconds(5));
  const auto newline = buffer.find('\n');
  if (newline == std::string::npos) {
    throw ProtocolError(id, "trainer exited without a response line (" + describe_exit(status) + ")");
  }
  return parse_train_response(std::string_view(buffer).substr(0, newline), request);
}

ExternalEvaluator::ExternalEvaluator(ExternalConfig config) : config_(std::move(config)) {
  if (config_.command.empty()) throw DomainError("external evaluator needs a trainer command");
  if (!(config_.timeout_s > 0.0)) throw DomainError("evaluator.timeout_s must be positive");
  if (config_.parallelism < 1) throw DomainError("evaluator.parallelism must be >= 1");
  // A trainer that dies before reading its request must surface as an error,
  // not terminate the engine.
  ::signal(SIGPIPE, SIG_IGN);
}

std::vector<double> ExternalEvaluator::evaluate(const Candidate& candidate, int from_epoch, int n_epochs) const {
  TrainRequest request;
  request.candidate_id = candidate.id;
  request.arch = candidate.arch;
  request.from_epoch = from_epoch;
  request.n_epochs = n_epochs;
  request.hyperparams = config_.hyperparams;
  request.checkpoint_dir = config_.checkpoint_dir;
  return external_evaluate(config_, request).epoch_acc;
}

// ---------------------------------------------------------------------------

std::vector<double> RecordingEvaluator::evaluate(const Candidate& candidate, int from_epoch, int n_epochs) const {
  std::vector<double> values = inner_.evaluate(candidate, from_epoch, n_epochs);
  std::lock_guard lock(mu_);
  auto& trace = recorded_[candidate.id];
  const auto needed = static_cast<std::size_t>(from_epoch) + values.size();
  if (trace.size() < needed) trace.resize(needed, 0.0);
  std::copy(values.begin(), values.end(), trace.begin() + from_epoch);
  return values;
}

TraceStore RecordingEvaluator::recorded() const {
  std::lock_guard lock(mu_);
  TraceStore store;
  for (const auto& [id, acc] : recorded_) store.put({id, acc});
  return store;
}

}  // namespace ncs
