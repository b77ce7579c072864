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

#include "textal/bench.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <random>
#include <thread>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "textal/evaluator.h"
#include "textal/fine_tune.h"
#include "textal/logging.h"
#include "textal/run_store.h"
#include "textal/status_macros.h"

namespace textal {
namespace {

using nlohmann::json;

std::vector<double> Normalized(std::vector<double> v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

std::string FormatValue(double v) { return absl::StrFormat("%.17g", v); }

}  // namespace

LearningCurve CurveFromRecords(const std::string& strategy, uint64_t seed,
                               const std::vector<IterationRecord>& records) {
  LearningCurve curve{strategy, seed, {}};
  for (const IterationRecord& r : records) {
    if (!r.report) continue;
    curve.points.push_back({r.labeled_count, r.report->values});
  }
  return curve;
}

absl::StatusOr<LearningCurve> AverageCurves(
    const std::vector<LearningCurve>& curves) {
  if (curves.empty()) {
    return absl::InvalidArgumentError("no curves to average");
  }
  LearningCurve mean = curves.front();
  mean.seed = 0;
  for (size_t c = 1; c < curves.size(); ++c) {
    const LearningCurve& other = curves[c];
    if (other.points.size() != mean.points.size()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "curve for seed ", other.seed, " has ", other.points.size(),
          " points, expected ", mean.points.size()));
    }
    for (size_t i = 0; i < mean.points.size(); ++i) {
      if (other.points[i].labeled_count != mean.points[i].labeled_count) {
        return absl::InvalidArgumentError(absl::StrCat(
            "labeled_count grids differ at point ", i, ": ",
            other.points[i].labeled_count, " vs ",
            mean.points[i].labeled_count));
      }
      for (auto& [metric, value] : mean.points[i].metrics) {
        auto it = other.points[i].metrics.find(metric);
        if (it == other.points[i].metrics.end()) {
          return absl::InvalidArgumentError(
              absl::StrCat("metric ", metric, " missing for seed ", other.seed));
        }
        value += it->second;
      }
    }
  }
  const double n = static_cast<double>(curves.size());
  for (CurvePoint& p : mean.points) {
    for (auto& [metric, value] : p.metrics) value /= n;
  }
  return mean;
}

absl::StatusOr<SyntheticTask> MakeSyntheticTask(int clusters, int per_cluster,
                                                uint64_t seed, int dim) {
  if (clusters < 2) {
    return absl::InvalidArgumentError("synthetic task needs >= 2 clusters");
  }
  if (per_cluster < 1) {
    return absl::InvalidArgumentError(
        "synthetic task needs >= 1 instance per cluster");
  }
  if (dim < 2) return absl::InvalidArgumentError("dim must be >= 2");
  SyntheticTask task;
  task.clusters = clusters;
  task.per_cluster = per_cluster;
  task.seed = seed;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double spread = 0.3 / std::sqrt(static_cast<double>(dim));
  std::vector<Instance> instances;
  for (int c = 0; c < clusters; ++c) {
    std::vector<double> center(dim);
    for (double& x : center) x = normal(rng);
    center = Normalized(std::move(center));
    for (int m = 0; m < per_cluster; ++m) {
      std::vector<double> v = center;
      for (double& x : v) x += spread * normal(rng);
      Instance inst;
      inst.id = absl::StrFormat("c%02d-m%02d", c, m);
      inst.input = absl::StrFormat("cluster %d member %d", c, m);
      inst.references = {absl::StrFormat("cluster %d", c)};
      inst.meta["cluster"] = absl::StrCat(c);
      task.embeddings[inst.input] = Normalized(std::move(v));
      instances.push_back(std::move(inst));
    }
  }
  ASSIGN_OR_RETURN(task.dataset, Dataset::Create(std::move(instances)));
  return task;
}

absl::StatusOr<RunDeps> MakeSyntheticDeps(const SyntheticTask& task,
                                          const RunConfig& config) {
  RunDeps deps;
  MockBackendOptions model_options;
  model_options.seed = config.model_backend.mock_seed;
  deps.model = std::make_shared<ModelGateway>(
      std::make_shared<MockBackend>(model_options));
  MockBackendOptions embed_options;
  embed_options.seed = task.seed;
  embed_options.embedding_dim =
      static_cast<int>(task.embeddings.begin()->second.size());
  embed_options.embedding_overrides = task.embeddings;
  deps.embedder = std::make_shared<ModelGateway>(
      std::make_shared<MockBackend>(embed_options));
  if (config.labeller == LabellerType::kApiLlm ||
      config.labeller == LabellerType::kLocalLlm) {
    deps.labeller = deps.model;
  }
  deps.adapter = std::make_shared<NoOpFineTuneAdapter>();
  deps.evaluator = std::make_shared<CoverageEvaluator>();
  if (config.labeller == LabellerType::kHuman) {
    return absl::InvalidArgumentError(
        "benchmarks simulate annotation; labeller.type must not be human");
  }
  return deps;
}

absl::StatusOr<BenchmarkResult> RunBenchmark(const BenchmarkSpec& spec) {
  if (spec.strategies.empty()) {
    return absl::InvalidArgumentError("benchmark needs at least one strategy");
  }
  if (spec.seeds.empty()) {
    return absl::InvalidArgumentError("benchmark needs at least one seed");
  }
  struct Job {
    std::string strategy;
    uint64_t seed;
    RunConfig config;
  };
  std::vector<Job> jobs;
  for (const std::string& strategy : spec.strategies) {
    for (uint64_t seed : spec.seeds) {
      json tree = spec.base_tree;
      tree["al"]["strategy"] = strategy;
      tree["al"]["seed"] = seed;
      std::vector<FieldError> errors;
      absl::StatusOr<RunConfig> config = ResolveRunConfig(tree, errors);
      if (!config.ok()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "strategy ", strategy, ": ", FieldErrorsToString(errors)));
      }
      jobs.push_back({strategy, seed, *std::move(config)});
    }
  }
  const DepsFactory make_deps = spec.make_deps ? spec.make_deps : MakeRunDeps;

  BenchmarkResult result;
  std::map<std::pair<std::string, uint64_t>, LearningCurve> done;
  std::mutex mu;
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};

  auto worker = [&]() {
    while (!failed) {
      const size_t i = next++;
      if (i >= jobs.size()) return;
      const Job& job = jobs[i];
      const std::filesystem::path dir = spec.out_dir / "runs" / job.strategy /
                                        absl::StrCat("seed-", job.seed);
      absl::StatusOr<RunResult> run = [&]() -> absl::StatusOr<RunResult> {
        ASSIGN_OR_RETURN(RunDeps deps, make_deps(job.config));
        Orchestrator orch(job.config, spec.data, std::move(deps), dir);
        RunStore probe(dir);
        if (probe.HasCheckpoint()) return orch.Resume();
        return orch.Run();
      }();
      std::lock_guard lock(mu);
      if (!run.ok()) {
        failed = true;
        result.errors.push_back(absl::StrCat(job.strategy, " seed ", job.seed,
                                             ": ", run.status().ToString()));
        continue;
      }
      done[{job.strategy, job.seed}] =
          CurveFromRecords(job.strategy, job.seed, run->curve);
    }
  };
  const int threads = std::clamp<int>(spec.max_parallel, 1,
                                      static_cast<int>(jobs.size()));
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  for (const Job& job : jobs) {
    auto it = done.find({job.strategy, job.seed});
    if (it != done.end()) result.curves[job.strategy].push_back(it->second);
  }
  result.complete = !failed && done.size() == jobs.size();
  if (!result.complete) {
    LogWarning(absl::StrCat("benchmark incomplete: ", done.size(), " of ",
                            jobs.size(), " runs finished"));
  }
  return result;
}

json SummaryJson(const BenchmarkResult& result) {
  json strategies = json::object();
  for (const auto& [strategy, curves] : result.curves) {
    json entry;
    json seeds = json::array();
    for (const LearningCurve& c : curves) seeds.push_back(c.seed);
    entry["seeds"] = seeds;
    absl::StatusOr<LearningCurve> mean = AverageCurves(curves);
    if (!mean.ok()) {
      entry["error"] = std::string(mean.status().message());
      strategies[strategy] = entry;
      continue;
    }
    json points = json::array();
    for (size_t i = 0; i < mean->points.size(); ++i) {
      json lo = json::object(), hi = json::object(), avg = json::object();
      for (const auto& [metric, value] : mean->points[i].metrics) {
        double mn = curves.front().points[i].metrics.at(metric);
        double mx = mn;
        for (const LearningCurve& c : curves) {
          mn = std::min(mn, c.points[i].metrics.at(metric));
          mx = std::max(mx, c.points[i].metrics.at(metric));
        }
        avg[metric] = value;
        lo[metric] = mn;
        hi[metric] = mx;
      }
      points.push_back({{"labeled_count", mean->points[i].labeled_count},
                        {"mean", avg},
                        {"min", lo},
                        {"max", hi}});
    }
    entry["points"] = points;
    strategies[strategy] = entry;
  }
  return {{"schema_version", kReportSchemaVersion},
          {"complete", result.complete},
          {"errors", result.errors},
          {"strategies", strategies}};
}

absl::Status EmitReport(const BenchmarkResult& result,
                        const std::filesystem::path& out_dir) {
  size_t total = 0;
  for (const auto& [strategy, curves] : result.curves) total += curves.size();
  if (total == 0 && result.errors.empty()) {
    return absl::InvalidArgumentError("no curves to report");
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    return absl::InternalError(absl::StrCat("cannot create ", out_dir.string(),
                                            ": ", ec.message()));
  }
  for (const auto& [strategy, curves] : result.curves) {
    std::string csv = "strategy,seed,labeled_count,metric,value\n";
    for (const LearningCurve& c : curves) {
      for (const CurvePoint& p : c.points) {
        for (const auto& [metric, value] : p.metrics) {
          absl::StrAppend(&csv, strategy, ",", c.seed, ",", p.labeled_count,
                          ",", metric, ",", FormatValue(value), "\n");
        }
      }
    }
    RETURN_IF_ERROR(WriteFileAtomic(out_dir / (strategy + ".csv"), csv));
  }
  return WriteFileAtomic(out_dir / "summary.json",
                         SummaryJson(result).dump(2) + "\n");
}

}  // namespace textal
