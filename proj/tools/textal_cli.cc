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

// Command-line entry point: run-al, benchmark, validate, serve.

#include <chrono>
#include <csignal>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "textal/bench.h"
#include "textal/control_api.h"
#include "textal/dry_run.h"
#include "textal/orchestrator.h"
#include "textal/run_config.h"

namespace {

using nlohmann::json;
using textal::FieldError;

int Fail(const absl::Status& status) {
  std::cerr << "error: " << status << "\n";
  return 1;
}

int FailFields(const std::vector<FieldError>& errors,
               const absl::Status& status) {
  if (errors.empty()) return Fail(status);
  std::cerr << "invalid configuration:\n";
  for (const FieldError& e : errors) {
    std::cerr << "  " << (e.field.empty() ? "<root>" : e.field) << ": "
              << e.message << "\n";
  }
  return 2;
}

// Defaults, then `preset` keys, then the file, then overrides.
absl::StatusOr<json> BuildTree(const std::string& config_file,
                               const json& preset,
                               const std::vector<std::string>& overrides,
                               std::vector<FieldError>& errors) {
  json tree = textal::DefaultConfigTree();
  if (!preset.is_null()) textal::MergeConfig(tree, preset, errors);
  if (!config_file.empty()) {
    absl::StatusOr<json> doc = textal::LoadConfigFile(config_file);
    if (!doc.ok()) return doc.status();
    textal::MergeConfig(tree, *doc, errors);
  }
  textal::ApplyOverrides(tree, overrides, errors).IgnoreError();
  if (!errors.empty()) {
    return absl::InvalidArgumentError(textal::FieldErrorsToString(errors));
  }
  return tree;
}

void PrintCurve(const std::vector<textal::IterationRecord>& curve) {
  for (const textal::IterationRecord& r : curve) {
    std::string metrics;
    if (r.report) {
      for (const auto& [name, value] : r.report->values) {
        absl::StrAppend(&metrics, " ", name, "=", absl::StrFormat("%.4f", value));
      }
    } else {
      metrics = " (evaluation skipped)";
    }
    std::cout << absl::StrFormat("round %d labeled %d strategy %s%s%s\n",
                                 r.round, r.labeled_count, r.strategy,
                                 r.fallback ? " (fallback)" : "", metrics);
  }
}

volatile std::sig_atomic_t g_stop = 0;

void HandleSignal(int) { g_stop = 1; }

std::vector<uint64_t> ParseSeeds(const std::vector<std::string>& raw) {
  std::vector<uint64_t> seeds;
  for (const std::string& s : raw) seeds.push_back(std::stoull(s));
  return seeds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active learning orchestration for text generation"};
  app.require_subcommand(1);

  // run-al
  std::string run_config_file;
  std::string run_dir = "runs/cli";
  bool resume = false;
  std::vector<std::string> run_overrides;
  CLI::App* run = app.add_subcommand("run-al", "Run an AL or ED loop");
  run->add_option("-c,--config", run_config_file, "YAML or JSON config file");
  run->add_option("-d,--run-dir", run_dir, "Checkpoint directory");
  run->add_flag("--resume", resume, "Continue the run in --run-dir");
  run->add_option("overrides", run_overrides, "key=value overrides");

  // validate
  std::string validate_file;
  std::string validate_dir;
  bool dry_run = false;
  std::vector<std::string> validate_overrides;
  CLI::App* validate =
      app.add_subcommand("validate", "Validate a configuration");
  validate->add_option("-c,--config", validate_file, "YAML or JSON config file");
  validate->add_flag("--dry-run", dry_run,
                     "Also run it offline on mock backends");
  validate->add_option("-d,--run-dir", validate_dir,
                       "Directory for the dry run (default: temporary)");
  validate->add_option("overrides", validate_overrides, "key=value overrides");

  // benchmark
  std::string bench_file;
  std::string bench_out = "bench-out";
  std::vector<std::string> strategies;
  std::vector<std::string> seed_strings = {"1", "2", "3", "4", "5"};
  std::string synthetic;
  int parallel = 1;
  std::vector<std::string> bench_overrides;
  CLI::App* bench = app.add_subcommand("benchmark", "Multi-seed comparison");
  bench->add_option("-c,--config", bench_file, "Base config file");
  bench->add_option("-s,--strategies", strategies, "Strategy ids")
      ->required()
      ->delimiter(',');
  bench->add_option("--seeds", seed_strings, "Seed list")->delimiter(',');
  bench->add_option("-o,--out", bench_out, "Output directory");
  bench->add_option("--synthetic", synthetic,
                    "Synthetic task CLUSTERSxPER_CLUSTER, e.g. 20x10");
  bench->add_option("-j,--parallel", parallel, "Concurrent runs");
  bench->add_option("overrides", bench_overrides, "key=value overrides");

  // serve
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string runs_root = "runs";
  CLI::App* serve = app.add_subcommand("serve", "Serve the control API");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("-p,--port", port, "Port");
  serve->add_option("-r,--runs", runs_root, "Directory for run state");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    std::vector<FieldError> errors;
    absl::StatusOr<json> tree =
        BuildTree(run_config_file, nullptr, run_overrides, errors);
    if (!tree.ok()) return FailFields(errors, tree.status());
    absl::StatusOr<textal::RunConfig> config =
        textal::ResolveRunConfig(*tree, errors);
    if (!config.ok()) return FailFields(errors, config.status());
    if (config->labeller == textal::LabellerType::kHuman) {
      std::cerr << "error: human labelling needs the control API; start "
                   "`serve` and create the run there\n";
      return 2;
    }
    absl::StatusOr<textal::RunData> data = textal::LoadRunData(*config);
    if (!data.ok()) return Fail(data.status());
    absl::StatusOr<textal::RunDeps> deps = textal::MakeRunDeps(*config);
    if (!deps.ok()) return Fail(deps.status());
    textal::Orchestrator orch(*config, *std::move(data), *std::move(deps),
                              run_dir);
    absl::StatusOr<textal::RunResult> result =
        resume ? orch.Resume() : orch.Run();
    if (!result.ok()) return Fail(result.status());
    PrintCurve(result->curve);
    std::cout << "stopped: " << result->stop_reason
              << "\nmodel: " << result->model_ref << "\n";
    return 0;
  }

  if (validate->parsed()) {
    std::vector<FieldError> errors;
    absl::StatusOr<json> tree =
        BuildTree(validate_file, nullptr, validate_overrides, errors);
    if (!tree.ok()) return FailFields(errors, tree.status());
    if (!dry_run) {
      absl::StatusOr<textal::RunConfig> config =
          textal::ResolveRunConfig(*tree, errors);
      if (!config.ok()) return FailFields(errors, config.status());
      std::cout << config->tree.dump(2) << "\n";
      return 0;
    }
    std::filesystem::path dir = validate_dir;
    if (dir.empty()) {
      dir = std::filesystem::temp_directory_path() /
            absl::StrCat("textal-dry-run-", getpid());
    }
    std::filesystem::remove_all(dir);
    const auto start = std::chrono::steady_clock::now();
    absl::StatusOr<textal::DryRunReport> report =
        textal::DryRun(*tree, dir, errors);
    if (!report.ok()) return FailFields(errors, report.status());
    const double seconds = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - start)
                               .count();
    PrintCurve(report->result.curve);
    std::cout << absl::StrFormat("dry run ok: %d rounds, stopped: %s, %.2fs\n",
                                 report->result.curve.size(),
                                 report->result.stop_reason, seconds);
    return 0;
  }

  if (bench->parsed()) {
    json preset;
    std::optional<textal::SyntheticTask> task;
    if (!synthetic.empty()) {
      int clusters = 0;
      int per = 0;
      if (std::sscanf(synthetic.c_str(), "%dx%d", &clusters, &per) != 2) {
        std::cerr << "error: --synthetic expects CLUSTERSxPER_CLUSTER\n";
        return 2;
      }
      absl::StatusOr<textal::SyntheticTask> made =
          textal::MakeSyntheticTask(clusters, per, /*seed=*/0);
      if (!made.ok()) return Fail(made.status());
      task = *std::move(made);
      preset = {{"al",
                 {{"init_query_size", 1},
                  {"query_size", 1},
                  {"num_iterations", 9}}}};
    }
    std::vector<FieldError> errors;
    absl::StatusOr<json> tree =
        BuildTree(bench_file, preset, bench_overrides, errors);
    if (!tree.ok()) return FailFields(errors, tree.status());
    textal::BenchmarkSpec spec;
    spec.strategies = strategies;
    spec.seeds = ParseSeeds(seed_strings);
    spec.base_tree = *tree;
    spec.out_dir = bench_out;
    spec.max_parallel = parallel;
    if (task) {
      spec.data.dataset = task->dataset;
      const textal::SyntheticTask& t = *task;
      spec.make_deps = [&t](const textal::RunConfig& c) {
        return textal::MakeSyntheticDeps(t, c);
      };
    } else {
      absl::StatusOr<textal::RunConfig> config =
          textal::ResolveRunConfig(*tree, errors);
      if (!config.ok()) return FailFields(errors, config.status());
      absl::StatusOr<textal::RunData> data = textal::LoadRunData(*config);
      if (!data.ok()) return Fail(data.status());
      spec.data = *std::move(data);
    }
    absl::StatusOr<textal::BenchmarkResult> result = textal::RunBenchmark(spec);
    if (!result.ok()) return Fail(result.status());
    if (absl::Status s = textal::EmitReport(*result, bench_out); !s.ok()) {
      return Fail(s);
    }
    for (const auto& [strategy, curves] : result->curves) {
      absl::StatusOr<textal::LearningCurve> mean =
          textal::AverageCurves(curves);
      if (!mean.ok() || mean->points.empty()) continue;
      std::string last;
      for (const auto& [name, value] : mean->points.back().metrics) {
        absl::StrAppend(&last, " ", name, "=", absl::StrFormat("%.4f", value));
      }
      std::cout << absl::StrFormat("%s: %d seeds, final labeled %d,%s\n",
                                   strategy, curves.size(),
                                   mean->points.back().labeled_count, last);
    }
    std::cout << "report: " << bench_out << "\n";
    if (!result->complete) {
      for (const std::string& e : result->errors) std::cerr << e << "\n";
      return 1;
    }
    return 0;
  }

  if (serve->parsed()) {
    textal::ControlServer server({runs_root, nullptr, nullptr});
    absl::StatusOr<int> bound = server.Bind(host, port);
    if (!bound.ok()) return Fail(bound.status());
    std::signal(SIGINT, HandleSignal);
    std::signal(SIGTERM, HandleSignal);
    std::thread watcher([&server] {
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.Shutdown();
    });
    std::cout << "listening on http://" << host << ":" << *bound << "\n"
              << std::flush;
    server.Serve();
    g_stop = 1;
    watcher.join();
    return 0;
  }
  return 0;
}
