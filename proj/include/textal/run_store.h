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

// Durable run directory: resolved config, checkpoint, curve and the
// append-only annotation log.
//
//   <run_dir>/config.json        resolved run configuration
//   <run_dir>/state.json         checkpoint (checksummed, atomically replaced)
//   <run_dir>/curve.jsonl        one line per iteration record
//   <run_dir>/annotations.jsonl  one line per annotation outcome

#ifndef TEXTAL_RUN_STORE_H_
#define TEXTAL_RUN_STORE_H_

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "textal/backend.h"
#include "textal/evaluator.h"
#include "textal/labeling.h"
#include "textal/money.h"
#include "textal/pool_state.h"

namespace textal {

inline constexpr int kStateSchemaVersion = 1;

// Last completed phase of the round in progress.
enum class Phase { kNone, kSelect, kLabel, kTrain, kEvaluate };
std::string_view PhaseName(Phase phase);

struct RoundProgress {
  int round = 0;
  Phase phase = Phase::kNone;
  std::vector<std::string> selected;
  std::string strategy_used;
  bool fallback = false;
  std::vector<std::string> moved;
  std::vector<std::string> skipped;
  std::vector<std::string> withheld;  // not labeled for lack of budget
  bool skipped_train = false;
  std::map<std::string, double> wall_ms;

  friend bool operator==(const RoundProgress&, const RoundProgress&) = default;
};

struct IterationRecord {
  int round = 0;
  // PoolState::iteration after the round.
  int iteration = 0;
  int64_t labeled_count = 0;
  std::optional<MetricReport> report;
  bool skipped_eval = false;
  int64_t eval_size = 0;
  std::vector<std::string> selected;
  std::vector<std::string> skipped;
  std::string strategy;
  bool fallback = false;
  bool skipped_train = false;
  std::string model_ref;
  nlohmann::json ledger;
  std::map<std::string, double> wall_ms;
};

// Without wall times: the deterministic part of a record.
nlohmann::json IterationRecordToJson(const IterationRecord& r,
                                     bool include_timing);
absl::StatusOr<IterationRecord> IterationRecordFromJson(
    const nlohmann::json& doc);

struct Checkpoint {
  PoolState pool;
  CostLedger ledger;
  RoundProgress progress;
  std::vector<IterationRecord> records;
  std::string status = "running";  // running | stopped | failed
  std::string stop_reason;
  std::string error;
};

nlohmann::json CheckpointToJson(const Checkpoint& ck);
absl::StatusOr<Checkpoint> CheckpointFromJson(const nlohmann::json& doc);

struct AnnotationRecord {
  std::string id;
  std::string annotation;
  std::string annotator;
  std::string timestamp;
  Usage usage;
  Money cost;
  int iteration = 0;
  std::string status;  // done | skipped
  std::string reason;
};

nlohmann::json AnnotationRecordToJson(const AnnotationRecord& r);
absl::StatusOr<AnnotationRecord> AnnotationRecordFromJson(
    const nlohmann::json& doc);

// Replaces `path` with `content` via a synced temporary file and rename.
absl::Status WriteFileAtomic(const std::filesystem::path& path,
                             const std::string& content);
absl::StatusOr<std::string> ReadFile(const std::filesystem::path& path);

// Curve file content: one sorted-key JSON line per record, no timings.
std::string CurveJsonl(const std::vector<IterationRecord>& records);

class RunStore {
 public:
  explicit RunStore(std::filesystem::path dir);

  // Creates the directory and drops an unterminated trailing log line left
  // by an interrupted append.
  absl::Status Open();

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path config_path() const { return dir_ / "config.json"; }
  std::filesystem::path state_path() const { return dir_ / "state.json"; }
  std::filesystem::path curve_path() const { return dir_ / "curve.jsonl"; }
  std::filesystem::path annotations_path() const {
    return dir_ / "annotations.jsonl";
  }
  std::filesystem::path work_dir() const { return dir_ / "work"; }

  bool HasCheckpoint() const;
  absl::Status WriteConfig(const nlohmann::json& tree);
  absl::StatusOr<nlohmann::json> ReadConfig() const;

  // Writes state.json (checksummed) then the curve file.
  absl::Status SaveCheckpoint(const Checkpoint& ck);
  // kNotFound when there is none; kDataLoss when corrupt.
  absl::StatusOr<Checkpoint> LoadCheckpoint() const;

  absl::Status AppendAnnotation(const AnnotationRecord& r);
  absl::StatusOr<std::vector<AnnotationRecord>> ReadAnnotations() const;

 private:
  std::filesystem::path dir_;
  std::mutex log_mu_;
};

}  // namespace textal

#endif  // TEXTAL_RUN_STORE_H_
