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

// Run configuration: a key-value tree with defaults, presets and dotted
// overrides, validated into a typed RunConfig.

#ifndef TEXTAL_RUN_CONFIG_H_
#define TEXTAL_RUN_CONFIG_H_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "textal/backend.h"
#include "textal/dataset.h"
#include "textal/gateway.h"
#include "textal/labeling.h"
#include "textal/money.h"
#include "textal/pool_state.h"

namespace textal {

inline constexpr int kConfigSchemaVersion = 1;

// A validation problem attached to a dotted config key such as
// "al.query_size" or "al.stopping[0].metric".
struct FieldError {
  std::string field;
  std::string message;
  friend bool operator==(const FieldError&, const FieldError&) = default;
};

nlohmann::json FieldErrorsToJson(const std::vector<FieldError>& errors);
std::string FieldErrorsToString(const std::vector<FieldError>& errors);

enum class RunMode { kAl, kEd };
enum class LabellerType { kHuman, kApiLlm, kLocalLlm, kOracle, kNoisyOracle };
enum class StopKind { kBudget, kLabeledCount, kMetricThreshold, kIterationLimit };
enum class AdapterKind { kNoop, kMock, kCommand, kHttp };

std::string_view StopKindName(StopKind kind);

struct StoppingCriterion {
  StopKind kind = StopKind::kIterationLimit;
  double threshold = 0.0;
  std::string metric;  // kMetricThreshold only
};

struct RunConfig {
  // al
  std::string strategy = "random";
  RunMode mode = RunMode::kAl;
  BatchSizeSpec init_query_size;
  BatchSizeSpec query_size;
  int num_iterations = 10;
  std::optional<Money> budget;
  uint64_t seed = 42;
  std::map<std::string, double> strategy_params;
  // Always contains iteration_limit, and budget when a budget is set.
  std::vector<StoppingCriterion> stopping;

  // data
  std::string data_preset;
  std::string data_path;
  std::string test_path;
  DatasetSchema schema;
  double test_fraction = 0.0;

  // acquisition model and embeddings
  BackendDescriptor model_backend;
  std::string base_model = "base";
  BackendDescriptor embedding_backend;
  DecodeParams generation;

  // labeller
  LabellerType labeller = LabellerType::kOracle;
  std::string labeller_model;
  DecodeParams labeller_decode;
  PriceSheet prices;
  bool batch = false;
  BackendDescriptor labeller_backend;
  std::string prompt_template = "{input}";
  double noise = 0.0;
  std::chrono::seconds lease{1800};

  // training
  AdapterKind adapter = AdapterKind::kNoop;
  std::vector<std::string> train_command;
  std::string train_url;
  std::chrono::seconds train_timeout{3600};
  nlohmann::json hyperparameters = nlohmann::json::object();

  // evaluation
  std::vector<std::string> metrics;
  double eval_split_size = 0.2;
  int min_eval_size = 5;

  // The resolved tree this config was built from.
  nlohmann::json tree;

  const StoppingCriterion* FindStop(StopKind kind) const;
};

// The full default tree.
nlohmann::json DefaultConfigTree();

// Names accepted by `data=<name>`.
std::vector<std::string> DataPresetNames();

// Applies `key=value` overrides. Group selections (`al=huds`,
// `labeller=api_llm`, `data=triviaqa`, `training=command`) are applied
// first, then dotted keys, each group in argument order. Values parse as
// JSON when possible, else as strings. Unknown keys are field errors, except
// under the free-form subtrees al.params, training.hyperparameters and
// inference.
absl::Status ApplyOverrides(nlohmann::json& tree,
                            const std::vector<std::string>& overrides,
                            std::vector<FieldError>& errors);

// Deep-merges `patch` into the tree with the same key rules.
void MergeConfig(nlohmann::json& tree, const nlohmann::json& patch,
                 std::vector<FieldError>& errors);

// Parses YAML or JSON.
absl::StatusOr<nlohmann::json> LoadConfigFile(const std::filesystem::path& p);
absl::StatusOr<nlohmann::json> ParseConfigText(std::string_view text);

// Validates the tree. On failure returns kInvalidArgument and fills
// `errors`; on success the returned config echoes the normalized tree.
absl::StatusOr<RunConfig> ResolveRunConfig(const nlohmann::json& tree,
                                           std::vector<FieldError>& errors);

// Defaults + file + overrides + validation in one step.
absl::StatusOr<RunConfig> BuildRunConfig(
    const std::optional<std::filesystem::path>& file,
    const std::vector<std::string>& overrides,
    std::vector<FieldError>& errors);

}  // namespace textal

#endif  // TEXTAL_RUN_CONFIG_H_
