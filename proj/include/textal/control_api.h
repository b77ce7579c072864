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

// HTTP control API for runs and the human annotation queue.
//
// Every response body is a JSON object carrying "schema_version". Errors are
// {"schema_version", "error": {"code", "message", "fields": [{field,
// message}]}} with an HTTP status derived from the error kind.
//
//   GET  /v1/health
//   GET  /v1/config/defaults               default tree, strategies, presets
//   POST /v1/config/validate               body: config document
//   POST /v1/runs[?dry_run=true]           body: config document
//   GET  /v1/runs
//   GET  /v1/runs/{run}                    status snapshot
//   GET  /v1/runs/{run}/curve
//   POST /v1/runs/{run}/stop
//   GET  /v1/runs/{run}/tasks[?status=pending|claimed|done|skipped]
//   POST /v1/runs/{run}/tasks/claim        body: {"annotator"}
//   POST /v1/runs/{run}/tasks/{task}/submit
//        body: {"annotator", "annotation", "skip"}
//   GET  /v1/runs/{run}/annotations[?format=jsonl]

#ifndef TEXTAL_CONTROL_API_H_
#define TEXTAL_CONTROL_API_H_

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "textal/bench.h"
#include "textal/orchestrator.h"

namespace httplib {
class Server;
}  // namespace httplib

namespace textal {

inline constexpr int kApiSchemaVersion = 1;

// HTTP status for an absl status code.
int HttpStatusFor(absl::StatusCode code);

// {"schema_version", "error": {...}} for a status and optional field errors.
nlohmann::json ErrorDocument(const absl::Status& status,
                             const std::vector<FieldError>& fields = {});

class ControlServer {
 public:
  using DataLoader = std::function<absl::StatusOr<RunData>(const RunConfig&)>;

  struct Options {
    std::filesystem::path runs_root;
    // Default MakeRunDeps.
    DepsFactory make_deps;
    // Default LoadRunData.
    DataLoader load_data;
  };

  explicit ControlServer(Options options);
  ~ControlServer();

  ControlServer(const ControlServer&) = delete;
  ControlServer& operator=(const ControlServer&) = delete;

  // Binds host:port (port 0 picks a free one) and returns the bound port.
  absl::StatusOr<int> Bind(const std::string& host, int port);
  // Serves until Shutdown; call after Bind.
  void Serve();
  // Stops serving and every run, and joins their threads.
  void Shutdown();

  // Blocks until the run's thread has returned.
  void WaitForRun(const std::string& run_id);

 private:
  struct RunEntry {
    std::string id;
    std::unique_ptr<Orchestrator> orchestrator;
    std::shared_ptr<HumanTaskQueue> queue;
    std::thread thread;
    std::atomic<bool> finished{false};
    std::mutex mu;
    std::string error;
  };

  void Routes();
  absl::StatusOr<std::string> CreateRun(const nlohmann::json& doc,
                                        bool dry_run,
                                        std::vector<FieldError>& errors);
  std::shared_ptr<RunEntry> FindRun(const std::string& id);

  Options options_;
  std::unique_ptr<httplib::Server> server_;
  std::mutex runs_mu_;
  std::map<std::string, std::shared_ptr<RunEntry>> runs_;
  int next_run_ = 1;
  std::atomic<bool> shut_down_{false};
};

}  // namespace textal

#endif  // TEXTAL_CONTROL_API_H_
