// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// The AL / ED loop: select, label, train, evaluate, record, stop.

#ifndef TEXTAL_ORCHESTRATOR_H_
#define TEXTAL_ORCHESTRATOR_H_

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "textal/dataset.h"
#include "textal/evaluator.h"
#include "textal/fine_tune.h"
#include "textal/gateway.h"
#include "textal/labeling.h"
#include "textal/pool_state.h"
#include "textal/run_config.h"
#include "textal/run_store.h"
#include "textal/strategy.h"
#include "textal/task_queue.h"

namespace textal {

struct StopInputs {
  int64_t labeled_count = 0;
  int64_t unlabeled_count = 0;
  // Query rounds completed after the initial one (AL) or rounds (ED).
  int64_t iterations_done = 0;
  const CostLedger* ledger = nullptr;
  const MetricReport* latest = nullptr;
  // Projected cost of the next round, when the labeller is paid.
  std::optional<Money> next_round_cost;
};

struct StopDecision {
  bool stop = false;
  std::string reason;  // budget | labeled_count | metric | iteration_limit |
                       // exhausted
};

// First satisfied criterion in the order budget, labeled_count,
// metric_threshold, iteration_limit; then `exhausted` for an empty pool.
StopDecision CheckStopping(const std::vector<StoppingCriterion>& criteria,
                           const StopInputs& in);

// Strategy inputs cached across rounds. Embeddings are keyed by (embedding
// model, id); generations by (model_ref, decode kind, id), so a new model
// version refreshes them.
class ContextCache {
 public:
  absl::StatusOr<StrategyContext> Prepare(
      const Dataset& dataset, const PoolState& state,
      const StrategyRequirements& needs, const DecodeParams& decode,
      const std::map<std::string, double>& params, uint64_t seed,
      ModelGateway* model, ModelGateway* embedder);

 private:
  std::map<std::pair<std::string, std::string>, std::vector<double>>
      embeddings_;
  std::map<std::tuple<std::string, std::string, std::string>,
           std::vector<GenerationResult>>
      generations_;
};

// Everything a run talks to. Built from the config by MakeRunDeps, or by
// hand in tests and benchmarks.
struct RunDeps {
  std::shared_ptr<ModelGateway> model;
  std::shared_ptr<ModelGateway> embedder;
  std::shared_ptr<ModelGateway> labeller;  // api_llm and local_llm
  std::shared_ptr<FineTuneAdapter> adapter;
  std::shared_ptr<Evaluator> evaluator;
  std::shared_ptr<HumanTaskQueue> queue;  // human labeller
};

absl::StatusOr<RunDeps> MakeRunDeps(const RunConfig& config);

struct RunData {
  Dataset dataset;
  // Set when a separate test file was supplied.
  std::optional<std::vector<std::string>> test_ids;
};

// Loads data.path and, when given, data.test_path (ids prefixed "test-").
absl::StatusOr<RunData> LoadRunData(const RunConfig& config);

struct RunResult {
  std::vector<IterationRecord> curve;
  std::string model_ref;
  std::string stop_reason;
};

// Read-only view for status endpoints.
struct RunSnapshot {
  std::string status;  // running | waiting_for_annotations | stopped | failed
  std::string stop_reason;
  std::string error;
  int round = 0;
  std::string phase;
  int iteration = 0;
  int64_t labeled = 0;
  int64_t unlabeled = 0;
  int64_t test = 0;
  std::string model_ref;
  nlohmann::json ledger;
  std::vector<IterationRecord> records;
};

nlohmann::json RunSnapshotToJson(const RunSnapshot& s);

class Orchestrator {
 public:
  // Called after each phase is checkpointed; returning true aborts the run
  // there with kAborted, as if the process died.
  using CrashHook = std::function<bool(int round, Phase phase)>;

  Orchestrator(RunConfig config, RunData data, RunDeps deps,
               std::filesystem::path run_dir);

  void set_crash_hook(CrashHook hook) { crash_hook_ = std::move(hook); }

  // Starts a new run; kFailedPrecondition if run_dir already has one.
  absl::StatusOr<RunResult> Run();
  // Continues from the last checkpoint in run_dir.
  absl::StatusOr<RunResult> Resume();

  // Makes a blocked human-labeling phase return kCancelled.
  void RequestStop() { stop_requested_ = true; }

  RunSnapshot Snapshot() const;
  const RunConfig& config() const { return config_; }
  const Dataset& dataset() const { return data_.dataset; }
  RunStore& store() { return store_; }

 private:
  absl::StatusOr<RunResult> Drive(Checkpoint ck);
  absl::Status Save(const Checkpoint& ck);
  absl::Status SelectPhase(Checkpoint& ck, bool& stopped);
  absl::Status LabelPhase(Checkpoint& ck);
  absl::Status TrainPhase(Checkpoint& ck);
  absl::Status EvaluatePhase(Checkpoint& ck);

  absl::StatusOr<std::vector<LabelOutcome>> Annotate(
      const Checkpoint& ck, const std::vector<LabelTask>& tasks,
      CostLedger& ledger);
  absl::StatusOr<std::vector<LabelOutcome>> AnnotateHuman(
      int round, const std::vector<LabelTask>& tasks, CostLedger& ledger);
  std::optional<Money> NextRoundCost(const Checkpoint& ck, size_t size) const;
  size_t RoundSize(const Checkpoint& ck) const;
  bool InEvalSplit(const std::string& id) const;
  std::vector<std::string> EvalIds(const PoolState& pool) const;

  RunConfig config_;
  RunData data_;
  RunDeps deps_;
  RunStore store_;
  ContextCache cache_;
  CrashHook crash_hook_;
  std::atomic<bool> stop_requested_{false};
  size_t reference_pool_size_ = 0;

  mutable std::mutex snapshot_mu_;
  RunSnapshot snapshot_;
};

}  // namespace textal

#endif  // TEXTAL_ORCHESTRATOR_H_
