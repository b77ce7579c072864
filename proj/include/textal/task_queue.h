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

// Human annotation queue with leased claims.

#ifndef TEXTAL_TASK_QUEUE_H_
#define TEXTAL_TASK_QUEUE_H_

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"

namespace textal {

enum class TaskStatus { kPending, kClaimed, kDone, kSkipped };
std::string_view TaskStatusName(TaskStatus status);

struct AnnotationTask {
  std::string task_id;
  std::string instance_id;
  std::string input;
  TaskStatus status = TaskStatus::kPending;
  std::string claimant;
  std::chrono::system_clock::time_point lease_expiry;
  int created_iteration = 0;
  std::string annotation;
  std::string annotated_at;  // ISO-8601 UTC, set on done/skipped
};

nlohmann::json TaskToJson(const AnnotationTask& task);

struct QueueCounts {
  int64_t pending = 0;
  int64_t claimed = 0;
  int64_t done = 0;
  int64_t skipped = 0;
  int64_t total = 0;
};

// FIFO of annotation tasks in selection order. Claims are leased; an expired
// lease returns the task to pending. All methods are linearizable.
class HumanTaskQueue {
 public:
  using Clock = std::function<std::chrono::system_clock::time_point()>;
  // Called once per task when it first reaches done or skipped, under the
  // queue lock. A failing sink rejects the submission.
  using Sink = std::function<absl::Status(const AnnotationTask&)>;

  explicit HumanTaskQueue(
      std::chrono::seconds lease = std::chrono::minutes(30),
      Clock clock = [] { return std::chrono::system_clock::now(); });

  void set_sink(Sink sink);

  struct NewTask {
    std::string instance_id;
    std::string input;
  };
  // Task ids are "<iteration>:<instance id>". kAlreadyExists (no change)
  // when an instance already has an open task or a task id repeats.
  absl::StatusOr<std::vector<std::string>> Enqueue(
      const std::vector<NewTask>& tasks, int iteration);

  // Claims the oldest pending task; nullopt when none is pending. An
  // annotator holds at most one claim: while it is live, Next returns it
  // again, so a retried claim request does not strand a second task.
  std::optional<AnnotationTask> Next(const std::string& annotator_id);

  // kPermissionDenied unless the task is currently claimed by annotator_id;
  // kInvalidArgument for empty text without skip. Resubmitting the same
  // outcome acks without a second sink call.
  absl::StatusOr<AnnotationTask> Submit(const std::string& task_id,
                                        const std::string& annotator_id,
                                        const std::string& text, bool skip);

  std::optional<AnnotationTask> Get(const std::string& task_id) const;
  std::vector<AnnotationTask> List(std::optional<TaskStatus> status = {}) const;
  QueueCounts Counts() const;

  // Blocks until every listed task is done or skipped, or the timeout
  // passes. Returns whether all are resolved.
  bool WaitResolved(const std::vector<std::string>& task_ids,
                    std::chrono::milliseconds timeout) const;

 private:
  void ExpireLeasesLocked();
  bool ResolvedLocked(const std::vector<std::string>& task_ids) const;

  const std::chrono::seconds lease_;
  const Clock clock_;
  Sink sink_;
  mutable std::mutex mu_;
  mutable std::condition_variable resolved_cv_;
  std::map<std::string, AnnotationTask> tasks_;
  std::vector<std::string> order_;
  std::map<std::string, std::string> open_by_instance_;
};

std::string FormatUtc(std::chrono::system_clock::time_point t);

}  // namespace textal

#endif  // TEXTAL_TASK_QUEUE_H_
