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

// Fine-tune triggering. Training itself happens outside this process; an
// adapter hands the labeled data to a trainer and reports the new model
// reference.

#ifndef TEXTAL_FINE_TUNE_H_
#define TEXTAL_FINE_TUNE_H_

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"

namespace textal {

struct TrainingExample {
  std::string id;
  std::string input;
  std::string output;
};

struct FineTuneRequest {
  // The checkpoint to continue from.
  std::string model_ref;
  // Cumulative labeled training set.
  std::vector<TrainingExample> examples;
  nlohmann::json hyperparameters = nlohmann::json::object();
  // Scratch directory for data and hyperparameter files.
  std::filesystem::path work_dir;
  int iteration = 0;
};

class FineTuneAdapter {
 public:
  virtual ~FineTuneAdapter() = default;
  virtual std::string name() const = 0;
  // Returns the new model reference. Errors carry captured diagnostics.
  virtual absl::StatusOr<std::string> FineTune(
      const FineTuneRequest& request) = 0;
};

// Returns model_ref unchanged. Used with surrogate quality models.
class NoOpFineTuneAdapter : public FineTuneAdapter {
 public:
  std::string name() const override { return "noop"; }
  absl::StatusOr<std::string> FineTune(const FineTuneRequest& r) override {
    if (r.examples.empty()) {
      return absl::InvalidArgumentError("fine-tune requires labeled data");
    }
    return r.model_ref;
  }
};

// Deterministic stand-in trainer for the mock backend: the new reference is
// "<base>@<count>" where base is model_ref up to the first '@' and count is
// the number of training examples.
class MockFineTuneAdapter : public FineTuneAdapter {
 public:
  std::string name() const override { return "mock"; }
  absl::StatusOr<std::string> FineTune(const FineTuneRequest& r) override;
};

// Runs `command data_path hyperparams_path` without a shell. data_path is a
// JSON-lines file of {"id","input","output"}; hyperparams_path a JSON object
// that also carries "model_ref" and "iteration". The last non-empty stdout
// line is the new model reference.
class CommandFineTuneAdapter : public FineTuneAdapter {
 public:
  CommandFineTuneAdapter(std::vector<std::string> command,
                         std::chrono::seconds timeout);
  std::string name() const override { return "command"; }
  absl::StatusOr<std::string> FineTune(const FineTuneRequest& r) override;

 private:
  std::vector<std::string> command_;
  std::chrono::seconds timeout_;
};

// POSTs {"model_ref","iteration","data_path","hyperparameters",
// "num_examples"} to `url`; expects {"model": "<new ref>"}.
class HttpFineTuneAdapter : public FineTuneAdapter {
 public:
  HttpFineTuneAdapter(std::string url, std::chrono::seconds timeout);
  std::string name() const override { return "http"; }
  absl::StatusOr<std::string> FineTune(const FineTuneRequest& r) override;

 private:
  std::string url_;
  std::chrono::seconds timeout_;
};

// Writes the request's data and hyperparameter files into work_dir.
struct TrainingFiles {
  std::filesystem::path data_path;
  std::filesystem::path hyperparams_path;
};
absl::StatusOr<TrainingFiles> WriteTrainingFiles(const FineTuneRequest& r);

struct ProcessResult {
  int exit_code = -1;
  std::string stdout_text;
  std::string stderr_text;
  bool timed_out = false;
};

// fork/exec with captured output. argv[0] is resolved through PATH.
absl::StatusOr<ProcessResult> RunProcess(const std::vector<std::string>& argv,
                                         std::chrono::seconds timeout);

}  // namespace textal

#endif  // TEXTAL_FINE_TUNE_H_
