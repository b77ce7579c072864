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

#include "textal/control_api.h"

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "httplib.h"
#include "textal/dry_run.h"
#include "textal/logging.h"
#include "textal/metrics.h"
#include "textal/run_store.h"
#include "textal/status_macros.h"

namespace textal {
namespace {

using nlohmann::json;

std::string CodeName(absl::StatusCode code) {
  switch (code) {
    case absl::StatusCode::kInvalidArgument:
      return "invalid_argument";
    case absl::StatusCode::kNotFound:
      return "not_found";
    case absl::StatusCode::kAlreadyExists:
      return "already_exists";
    case absl::StatusCode::kPermissionDenied:
      return "permission_denied";
    case absl::StatusCode::kFailedPrecondition:
      return "failed_precondition";
    case absl::StatusCode::kUnavailable:
      return "unavailable";
    case absl::StatusCode::kUnimplemented:
      return "unimplemented";
    default:
      return "internal";
  }
}

void Reply(httplib::Response& res, int status, json body) {
  body["schema_version"] = kApiSchemaVersion;
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void ReplyError(httplib::Response& res, const absl::Status& status,
                const std::vector<FieldError>& fields = {}) {
  Reply(res, HttpStatusFor(status.code()), ErrorDocument(status, fields));
}

absl::StatusOr<json> JsonBody(const httplib::Request& req) {
  json body = json::parse(req.body, nullptr, /*allow_exceptions=*/false);
  if (body.is_discarded() || !body.is_object()) {
    return absl::InvalidArgumentError("request body must be a JSON object");
  }
  return body;
}

std::optional<TaskStatus> ParseTaskStatus(const std::string& s) {
  for (TaskStatus t : {TaskStatus::kPending, TaskStatus::kClaimed,
                       TaskStatus::kDone, TaskStatus::kSkipped}) {
    if (TaskStatusName(t) == s) return t;
  }
  return std::nullopt;
}

json QueueCountsToJson(const QueueCounts& c) {
  return {{"pending", c.pending},
          {"claimed", c.claimed},
          {"done", c.done},
          {"skipped", c.skipped},
          {"total", c.total}};
}

}  // namespace

int HttpStatusFor(absl::StatusCode code) {
  switch (code) {
    case absl::StatusCode::kOk:
      return 200;
    case absl::StatusCode::kInvalidArgument:
      return 400;
    case absl::StatusCode::kPermissionDenied:
      return 403;
    case absl::StatusCode::kNotFound:
      return 404;
    case absl::StatusCode::kAlreadyExists:
    case absl::StatusCode::kFailedPrecondition:
      return 409;
    case absl::StatusCode::kUnavailable:
      return 503;
    case absl::StatusCode::kUnimplemented:
      return 501;
    default:
      return 500;
  }
}

json ErrorDocument(const absl::Status& status,
                   const std::vector<FieldError>& fields) {
  return {{"schema_version", kApiSchemaVersion},
          {"error",
           {{"code", CodeName(status.code())},
            {"message", std::string(status.message())},
            {"fields", FieldErrorsToJson(fields)}}}};
}

ControlServer::ControlServer(Options options)
    : options_(std::move(options)),
      server_(std::make_unique<httplib::Server>()) {
  if (!options_.make_deps) options_.make_deps = MakeRunDeps;
  if (!options_.load_data) options_.load_data = LoadRunData;
  Routes();
}

ControlServer::~ControlServer() { Shutdown(); }

absl::StatusOr<int> ControlServer::Bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    if (bound < 0) {
      return absl::UnavailableError(absl::StrCat("cannot bind ", host));
    }
    return bound;
  }
  if (!server_->bind_to_port(host, port)) {
    return absl::UnavailableError(absl::StrCat("cannot bind ", host, ":", port));
  }
  return port;
}

void ControlServer::Serve() { server_->listen_after_bind(); }

void ControlServer::Shutdown() {
  if (shut_down_.exchange(true)) return;
  server_->stop();
  std::map<std::string, std::shared_ptr<RunEntry>> runs;
  {
    std::lock_guard lock(runs_mu_);
    runs = runs_;
  }
  for (auto& [id, entry] : runs) {
    entry->orchestrator->RequestStop();
    if (entry->thread.joinable()) entry->thread.join();
  }
}

void ControlServer::WaitForRun(const std::string& run_id) {
  std::shared_ptr<RunEntry> entry = FindRun(run_id);
  if (entry && entry->thread.joinable()) entry->thread.join();
}

std::shared_ptr<ControlServer::RunEntry> ControlServer::FindRun(
    const std::string& id) {
  std::lock_guard lock(runs_mu_);
  auto it = runs_.find(id);
  return it == runs_.end() ? nullptr : it->second;
}

absl::StatusOr<std::string> ControlServer::CreateRun(
    const json& doc, bool dry_run, std::vector<FieldError>& errors) {
  json tree = DefaultConfigTree();
  MergeConfig(tree, doc, errors);
  if (!errors.empty()) {
    return absl::InvalidArgumentError(FieldErrorsToString(errors));
  }
  ASSIGN_OR_RETURN(RunConfig config, ResolveRunConfig(tree, errors));
  RunData data;
  if (dry_run) {
    ASSIGN_OR_RETURN(config, ResolveRunConfig(DryRunTree(config.tree), errors));
    ASSIGN_OR_RETURN(data, SyntheticRunData(200, config.seed));
  } else {
    ASSIGN_OR_RETURN(data, options_.load_data(config));
  }
  ASSIGN_OR_RETURN(RunDeps deps, options_.make_deps(config));

  auto entry = std::make_shared<RunEntry>();
  {
    std::lock_guard lock(runs_mu_);
    std::error_code ec;
    do {
      entry->id = absl::StrFormat("run-%04d", next_run_++);
    } while (std::filesystem::exists(options_.runs_root / entry->id, ec));
    runs_[entry->id] = entry;
  }
  entry->queue = deps.queue;
  entry->orchestrator = std::make_unique<Orchestrator>(
      std::move(config), std::move(data), std::move(deps),
      options_.runs_root / entry->id);
  RunEntry* raw = entry.get();
  entry->thread = std::thread([raw] {
    absl::StatusOr<RunResult> result = raw->orchestrator->Run();
    if (!result.ok()) {
      std::lock_guard lock(raw->mu);
      raw->error = result.status().ToString();
      LogWarning(absl::StrCat(raw->id, " ended: ", raw->error));
    }
    raw->finished = true;
  });
  return entry->id;
}

void ControlServer::Routes() {
  httplib::Server& s = *server_;

  s.Get("/v1/health", [](const httplib::Request&, httplib::Response& res) {
    Reply(res, 200, {{"status", "ok"}});
  });

  s.Get("/v1/config/defaults",
        [](const httplib::Request&, httplib::Response& res) {
          Reply(res, 200,
                {{"config", DefaultConfigTree()},
                 {"strategies", StrategyRegistry::Global().Names()},
                 {"presets", DataPresetNames()},
                 {"metrics", KnownMetrics()}});
        });

  s.Post("/v1/config/validate",
         [](const httplib::Request& req, httplib::Response& res) {
           absl::StatusOr<json> doc = ParseConfigText(req.body);
           if (!doc.ok()) return ReplyError(res, doc.status());
           std::vector<FieldError> errors;
           json tree = DefaultConfigTree();
           MergeConfig(tree, *doc, errors);
           absl::StatusOr<RunConfig> config =
               errors.empty() ? ResolveRunConfig(tree, errors)
                              : absl::InvalidArgumentError("invalid config");
           if (!config.ok()) return ReplyError(res, config.status(), errors);
           Reply(res, 200, {{"valid", true}, {"config", config->tree}});
         });

  s.Post("/v1/runs", [this](const httplib::Request& req,
                            httplib::Response& res) {
    absl::StatusOr<json> doc = ParseConfigText(req.body);
    if (!doc.ok()) return ReplyError(res, doc.status());
    const bool dry_run = req.get_param_value("dry_run") == "true";
    std::vector<FieldError> errors;
    absl::StatusOr<std::string> id = CreateRun(*doc, dry_run, errors);
    if (!id.ok()) return ReplyError(res, id.status(), errors);
    std::shared_ptr<RunEntry> entry = FindRun(*id);
    Reply(res, 201,
          {{"run_id", *id}, {"config", entry->orchestrator->config().tree}});
  });

  s.Get("/v1/runs", [this](const httplib::Request&, httplib::Response& res) {
    json runs = json::array();
    std::lock_guard lock(runs_mu_);
    for (const auto& [id, entry] : runs_) {
      const RunSnapshot snap = entry->orchestrator->Snapshot();
      runs.push_back({{"run_id", id},
                      {"status", snap.status},
                      {"stop_reason", snap.stop_reason}});
    }
    Reply(res, 200, {{"runs", runs}});
  });

  s.Get(R"(/v1/runs/([^/]+))", [this](const httplib::Request& req,
                                      httplib::Response& res) {
    std::shared_ptr<RunEntry> entry = FindRun(req.matches[1]);
    if (!entry) {
      return ReplyError(res, absl::NotFoundError("no such run"));
    }
    const RunSnapshot snap = entry->orchestrator->Snapshot();
    json body = RunSnapshotToJson(snap);
    body.erase("records");
    body["num_records"] = snap.records.size();
    body["run_id"] = entry->id;
    body["finished"] = entry->finished.load();
    {
      std::lock_guard lock(entry->mu);
      if (!entry->error.empty()) body["error"] = entry->error;
    }
    if (entry->queue) body["queue"] = QueueCountsToJson(entry->queue->Counts());
    Reply(res, 200, body);
  });

  s.Get(R"(/v1/runs/([^/]+)/curve)", [this](const httplib::Request& req,
                                            httplib::Response& res) {
    std::shared_ptr<RunEntry> entry = FindRun(req.matches[1]);
    if (!entry) return ReplyError(res, absl::NotFoundError("no such run"));
    const RunSnapshot snap = entry->orchestrator->Snapshot();
    json points = json::array();
    for (const IterationRecord& r : snap.records) {
      points.push_back(IterationRecordToJson(r, /*include_timing=*/true));
    }
    Reply(res, 200,
          {{"run_id", entry->id},
           {"status", snap.status},
           {"stop_reason", snap.stop_reason},
           {"points", points}});
  });

  s.Post(R"(/v1/runs/([^/]+)/stop)", [this](const httplib::Request& req,
                                            httplib::Response& res) {
    std::shared_ptr<RunEntry> entry = FindRun(req.matches[1]);
    if (!entry) return ReplyError(res, absl::NotFoundError("no such run"));
    entry->orchestrator->RequestStop();
    Reply(res, 202, {{"run_id", entry->id}, {"stop_requested", true}});
  });

  s.Get(R"(/v1/runs/([^/]+)/tasks)", [this](const httplib::Request& req,
                                            httplib::Response& res) {
    std::shared_ptr<RunEntry> entry = FindRun(req.matches[1]);
    if (!entry) return ReplyError(res, absl::NotFoundError("no such run"));
    std::optional<TaskStatus> filter;
    if (req.has_param("status")) {
      filter = ParseTaskStatus(req.get_param_value("status"));
      if (!filter) {
        return ReplyError(
            res, absl::InvalidArgumentError("unknown task status"),
            {{"status", "must be pending, claimed, done or skipped"}});
      }
    }
    json tasks = json::array();
    json counts = QueueCountsToJson({});
    if (entry->queue) {
      for (const AnnotationTask& t : entry->queue->List(filter)) {
        tasks.push_back(TaskToJson(t));
      }
      counts = QueueCountsToJson(entry->queue->Counts());
    }
    Reply(res, 200,
          {{"run_id", entry->id},
           {"human", entry->queue != nullptr},
           {"counts", counts},
           {"tasks", tasks}});
  });

  s.Post(R"(/v1/runs/([^/]+)/tasks/claim)", [this](const httplib::Request& req,
                                                   httplib::Response& res) {
    std::shared_ptr<RunEntry> entry = FindRun(req.matches[1]);
    if (!entry) return ReplyError(res, absl::NotFoundError("no such run"));
    if (!entry->queue) {
      return ReplyError(res, absl::FailedPreconditionError(
                                 "run does not use a human labeller"));
    }
    absl::StatusOr<json> body = JsonBody(req);
    if (!body.ok()) return ReplyError(res, body.status());
    const std::string annotator = body->value("annotator", "");
    if (annotator.empty()) {
      return ReplyError(res, absl::InvalidArgumentError("annotator required"),
                        {{"annotator", "is required"}});
    }
    std::optional<AnnotationTask> task = entry->queue->Next(annotator);
    Reply(res, 200,
          {{"run_id", entry->id},
           {"task", task ? TaskToJson(*task) : json(nullptr)},
           {"counts", QueueCountsToJson(entry->queue->Counts())}});
  });

  s.Post(R"(/v1/runs/([^/]+)/tasks/([^/]+)/submit)",
         [this](const httplib::Request& req, httplib::Response& res) {
           std::shared_ptr<RunEntry> entry = FindRun(req.matches[1]);
           if (!entry) {
             return ReplyError(res, absl::NotFoundError("no such run"));
           }
           if (!entry->queue) {
             return ReplyError(res, absl::FailedPreconditionError(
                                        "run does not use a human labeller"));
           }
           absl::StatusOr<json> body = JsonBody(req);
           if (!body.ok()) return ReplyError(res, body.status());
           const std::string annotator = body->value("annotator", "");
           if (annotator.empty()) {
             return ReplyError(res,
                               absl::InvalidArgumentError("annotator required"),
                               {{"annotator", "is required"}});
           }
           const json& text = (*body)["annotation"];
           if (!text.is_null() && !text.is_string()) {
             return ReplyError(
                 res, absl::InvalidArgumentError("annotation must be text"),
                 {{"annotation", "must be a string"}});
           }
           const bool skip = body->value("skip", false);
           absl::StatusOr<AnnotationTask> task = entry->queue->Submit(
               req.matches[2], annotator,
               text.is_string() ? text.get<std::string>() : "", skip);
           if (!task.ok()) {
             std::vector<FieldError> fields;
             if (task.status().code() == absl::StatusCode::kInvalidArgument) {
               fields.push_back(
                   {"annotation", std::string(task.status().message())});
             }
             return ReplyError(res, task.status(), fields);
           }
           Reply(res, 200, {{"run_id", entry->id}, {"task", TaskToJson(*task)}});
         });

  s.Get(R"(/v1/runs/([^/]+)/annotations)", [this](const httplib::Request& req,
                                                  httplib::Response& res) {
    std::shared_ptr<RunEntry> entry = FindRun(req.matches[1]);
    if (!entry) return ReplyError(res, absl::NotFoundError("no such run"));
    absl::StatusOr<std::vector<AnnotationRecord>> records =
        entry->orchestrator->store().ReadAnnotations();
    if (!records.ok()) return ReplyError(res, records.status());
    if (req.get_param_value("format") == "jsonl") {
      std::string out;
      for (const AnnotationRecord& r : *records) {
        absl::StrAppend(&out, AnnotationRecordToJson(r).dump(), "\n");
      }
      res.set_header("Content-Disposition",
                     absl::StrCat("attachment; filename=\"", entry->id,
                                  "-annotations.jsonl\""));
      res.set_header("X-Schema-Version", absl::StrCat(kApiSchemaVersion));
      res.set_content(out, "application/x-ndjson");
      return;
    }
    json list = json::array();
    for (const AnnotationRecord& r : *records) {
      list.push_back(AnnotationRecordToJson(r));
    }
    Reply(res, 200, {{"run_id", entry->id}, {"annotations", list}});
  });
}

}  // namespace textal
