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

#include "textal/task_queue.h"

#include <ctime>

#include "absl/strings/str_cat.h"

namespace textal {

std::string_view TaskStatusName(TaskStatus status) {
  switch (status) {
    case TaskStatus::kPending:
      return "pending";
    case TaskStatus::kClaimed:
      return "claimed";
    case TaskStatus::kDone:
      return "done";
    case TaskStatus::kSkipped:
      return "skipped";
  }
  return "unknown";
}

std::string FormatUtc(std::chrono::system_clock::time_point t) {
  const std::time_t secs = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json TaskToJson(const AnnotationTask& task) {
  nlohmann::json doc = {
      {"task_id", task.task_id},
      {"instance_id", task.instance_id},
      {"input", task.input},
      {"status", std::string(TaskStatusName(task.status))},
      {"created_iteration", task.created_iteration},
  };
  if (!task.claimant.empty()) doc["claimant"] = task.claimant;
  if (task.status == TaskStatus::kClaimed) {
    doc["lease_expires_at"] = FormatUtc(task.lease_expiry);
  }
  if (task.status == TaskStatus::kDone) doc["annotation"] = task.annotation;
  if (!task.annotated_at.empty()) doc["annotated_at"] = task.annotated_at;
  return doc;
}

HumanTaskQueue::HumanTaskQueue(std::chrono::seconds lease, Clock clock)
    : lease_(lease), clock_(std::move(clock)) {}

void HumanTaskQueue::set_sink(Sink sink) {
  std::lock_guard lock(mu_);
  sink_ = std::move(sink);
}

absl::StatusOr<std::vector<std::string>> HumanTaskQueue::Enqueue(
    const std::vector<NewTask>& tasks, int iteration) {
  std::lock_guard lock(mu_);
  std::vector<std::string> ids;
  std::map<std::string, bool> seen;
  for (const NewTask& t : tasks) {
    std::string task_id = absl::StrCat(iteration, ":", t.instance_id);
    if (open_by_instance_.count(t.instance_id) || seen[t.instance_id] ||
        tasks_.count(task_id)) {
      return absl::AlreadyExistsError(
          absl::StrCat("task already exists for instance ", t.instance_id));
    }
    seen[t.instance_id] = true;
    ids.push_back(std::move(task_id));
  }
  for (size_t i = 0; i < tasks.size(); ++i) {
    AnnotationTask task;
    task.task_id = ids[i];
    task.instance_id = tasks[i].instance_id;
    task.input = tasks[i].input;
    task.created_iteration = iteration;
    tasks_.emplace(ids[i], std::move(task));
    order_.push_back(ids[i]);
    open_by_instance_[tasks[i].instance_id] = ids[i];
  }
  return ids;
}

void HumanTaskQueue::ExpireLeasesLocked() {
  const auto now = clock_();
  for (auto& [id, task] : tasks_) {
    if (task.status == TaskStatus::kClaimed && task.lease_expiry <= now) {
      task.status = TaskStatus::kPending;
      task.claimant.clear();
    }
  }
}

std::optional<AnnotationTask> HumanTaskQueue::Next(
    const std::string& annotator_id) {
  std::lock_guard lock(mu_);
  ExpireLeasesLocked();
  for (const std::string& id : order_) {
    const AnnotationTask& task = tasks_.at(id);
    if (task.status == TaskStatus::kClaimed && task.claimant == annotator_id) {
      return task;
    }
  }
  for (const std::string& id : order_) {
    AnnotationTask& task = tasks_.at(id);
    if (task.status != TaskStatus::kPending) continue;
    task.status = TaskStatus::kClaimed;
    task.claimant = annotator_id;
    task.lease_expiry = clock_() + lease_;
    return task;
  }
  return std::nullopt;
}

absl::StatusOr<AnnotationTask> HumanTaskQueue::Submit(
    const std::string& task_id, const std::string& annotator_id,
    const std::string& text, bool skip) {
  std::unique_lock lock(mu_);
  ExpireLeasesLocked();
  auto it = tasks_.find(task_id);
  if (it == tasks_.end()) {
    return absl::NotFoundError(absl::StrCat("no task ", task_id));
  }
  AnnotationTask& task = it->second;
  if (task.status == TaskStatus::kDone || task.status == TaskStatus::kSkipped) {
    const bool same = task.claimant == annotator_id &&
                      (skip ? task.status == TaskStatus::kSkipped
                            : task.status == TaskStatus::kDone &&
                                  task.annotation == text);
    if (same) return task;
    if (task.claimant != annotator_id) {
      return absl::PermissionDeniedError(
          absl::StrCat("task ", task_id, " was completed by another annotator"));
    }
    return absl::FailedPreconditionError(
        absl::StrCat("task ", task_id, " already has a different outcome"));
  }
  if (task.status != TaskStatus::kClaimed || task.claimant != annotator_id) {
    return absl::PermissionDeniedError(absl::StrCat(
        "task ", task_id, " is not claimed by ", annotator_id));
  }
  if (!skip && text.empty()) {
    return absl::InvalidArgumentError("annotation text must be non-empty");
  }
  AnnotationTask updated = task;
  updated.status = skip ? TaskStatus::kSkipped : TaskStatus::kDone;
  updated.annotation = skip ? "" : text;
  updated.annotated_at = FormatUtc(clock_());
  if (sink_) {
    absl::Status s = sink_(updated);
    if (!s.ok()) return s;
  }
  task = std::move(updated);
  open_by_instance_.erase(task.instance_id);
  resolved_cv_.notify_all();
  return task;
}

std::optional<AnnotationTask> HumanTaskQueue::Get(
    const std::string& task_id) const {
  std::lock_guard lock(mu_);
  auto it = tasks_.find(task_id);
  if (it == tasks_.end()) return std::nullopt;
  return it->second;
}

std::vector<AnnotationTask> HumanTaskQueue::List(
    std::optional<TaskStatus> status) const {
  std::lock_guard lock(mu_);
  const auto now = clock_();
  std::vector<AnnotationTask> out;
  for (const std::string& id : order_) {
    AnnotationTask task = tasks_.at(id);
    if (task.status == TaskStatus::kClaimed && task.lease_expiry <= now) {
      task.status = TaskStatus::kPending;
      task.claimant.clear();
    }
    if (!status || task.status == *status) out.push_back(std::move(task));
  }
  return out;
}

QueueCounts HumanTaskQueue::Counts() const {
  QueueCounts c;
  for (const AnnotationTask& t : List()) {
    switch (t.status) {
      case TaskStatus::kPending:
        ++c.pending;
        break;
      case TaskStatus::kClaimed:
        ++c.claimed;
        break;
      case TaskStatus::kDone:
        ++c.done;
        break;
      case TaskStatus::kSkipped:
        ++c.skipped;
        break;
    }
    ++c.total;
  }
  return c;
}

bool HumanTaskQueue::ResolvedLocked(
    const std::vector<std::string>& task_ids) const {
  for (const std::string& id : task_ids) {
    auto it = tasks_.find(id);
    if (it == tasks_.end()) continue;
    if (it->second.status != TaskStatus::kDone &&
        it->second.status != TaskStatus::kSkipped) {
      return false;
    }
  }
  return true;
}

bool HumanTaskQueue::WaitResolved(const std::vector<std::string>& task_ids,
                                  std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  return resolved_cv_.wait_for(lock, timeout,
                               [&] { return ResolvedLocked(task_ids); });
}

}  // namespace textal
