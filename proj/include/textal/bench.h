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

// Multi-strategy, multi-seed simulated runs with averaged learning curves.

#ifndef TEXTAL_BENCH_H_
#define TEXTAL_BENCH_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "textal/dataset.h"
#include "textal/orchestrator.h"
#include "textal/run_config.h"

namespace textal {

inline constexpr int kReportSchemaVersion = 1;

struct CurvePoint {
  int64_t labeled_count = 0;
  std::map<std::string, double> metrics;

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct LearningCurve {
  std::string strategy;
  uint64_t seed = 0;
  std::vector<CurvePoint> points;

  friend bool operator==(const LearningCurve&, const LearningCurve&) = default;
};

// Points of the records that carry a metric report, in order.
LearningCurve CurveFromRecords(const std::string& strategy, uint64_t seed,
                               const std::vector<IterationRecord>& records);

// Pointwise mean per metric. kInvalidArgument for an empty list, differing
// labeled_count grids, or a metric missing from some curve.
absl::StatusOr<LearningCurve> AverageCurves(
    const std::vector<LearningCurve>& curves);

// Clusters of near-orthogonal embeddings. Instance `cNN-mMM` belongs to
// cluster NN (meta "cluster"); its embedding is the cluster center plus a
// small seeded perturbation, renormalized.
struct SyntheticTask {
  int clusters = 0;
  int per_cluster = 0;
  uint64_t seed = 0;
  Dataset dataset;
  // Raw embedding by input text, for MockBackendOptions::embedding_overrides.
  std::map<std::string, std::vector<double>> embeddings;
};

// kInvalidArgument unless clusters >= 2 and per_cluster >= 1.
absl::StatusOr<SyntheticTask> MakeSyntheticTask(int clusters, int per_cluster,
                                                uint64_t seed, int dim = 128);

// Mock model and embedder (the latter serving the task embeddings), no-op
// trainer, and the cluster coverage evaluator.
absl::StatusOr<RunDeps> MakeSyntheticDeps(const SyntheticTask& task,
                                          const RunConfig& config);

using DepsFactory = std::function<absl::StatusOr<RunDeps>(const RunConfig&)>;

struct BenchmarkSpec {
  std::vector<std::string> strategies;
  std::vector<uint64_t> seeds;
  // Full config tree; al.strategy and al.seed are set per run.
  nlohmann::json base_tree;
  RunData data;
  // Defaults to MakeRunDeps.
  DepsFactory make_deps;
  std::filesystem::path out_dir;
  int max_parallel = 1;
};

struct BenchmarkResult {
  // By strategy, in seed order.
  std::map<std::string, std::vector<LearningCurve>> curves;
  bool complete = true;
  std::vector<std::string> errors;
};

// Runs every (strategy, seed) pair under out_dir/runs/<strategy>/seed-<seed>.
// A run directory that already holds a checkpoint is resumed. After the first
// failure no new runs start; finished curves are kept and the result is
// marked incomplete. kInvalidArgument for an empty strategy or seed list or a
// config that fails validation.
absl::StatusOr<BenchmarkResult> RunBenchmark(const BenchmarkSpec& spec);

// Writes <strategy>.csv (strategy,seed,labeled_count,metric,value) per
// strategy and summary.json with mean, min and max per point.
absl::Status EmitReport(const BenchmarkResult& result,
                        const std::filesystem::path& out_dir);

nlohmann::json SummaryJson(const BenchmarkResult& result);

}  // namespace textal

#endif  // TEXTAL_BENCH_H_
