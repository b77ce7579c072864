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

#include "textal/run_store.h"

#include <fcntl.h>
#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "textal/hash.h"
#include "textal/status_macros.h"

namespace textal {
namespace {

using nlohmann::json;

constexpr Phase kPhases[] = {Phase::kNone, Phase::kSelect, Phase::kLabel,
                             Phase::kTrain, Phase::kEvaluate};

absl::StatusOr<Phase> PhaseFromName(const std::string& name) {
  for (Phase p : kPhases) {
    if (PhaseName(p) == name) return p;
  }
  return absl::DataLossError(absl::StrCat("unknown phase ", name));
}

std::string Checksum(const std::string& body) {
  return absl::StrFormat("%016x", Fnv1a64(body));
}

absl::Status SyncFd(int fd, const std::filesystem::path& path) {
  if (::fsync(fd) != 0) {
    return absl::InternalError(absl::StrCat("fsync failed for ", path.string()));
  }
  return absl::OkStatus();
}

json ProgressToJson(const RoundProgress& p) {
  return {{"round", p.round},
          {"phase", std::string(PhaseName(p.phase))},
          {"selected", p.selected},
          {"strategy_used", p.strategy_used},
          {"fallback", p.fallback},
          {"moved", p.moved},
          {"skipped", p.skipped},
          {"withheld", p.withheld},
          {"skipped_train", p.skipped_train},
          {"wall_ms", p.wall_ms}};
}

absl::StatusOr<RoundProgress> ProgressFromJson(const json& doc) {
  RoundProgress p;
  p.round = doc.at("round").get<int>();
  ASSIGN_OR_RETURN(p.phase, PhaseFromName(doc.at("phase").get<std::string>()));
  p.selected = doc.at("selected").get<std::vector<std::string>>();
  p.strategy_used = doc.at("strategy_used").get<std::string>();
  p.fallback = doc.at("fallback").get<bool>();
  p.moved = doc.at("moved").get<std::vector<std::string>>();
  p.skipped = doc.at("skipped").get<std::vector<std::string>>();
  p.withheld = doc.at("withheld").get<std::vector<std::string>>();
  p.skipped_train = doc.at("skipped_train").get<bool>();
  p.wall_ms = doc.at("wall_ms").get<std::map<std::string, double>>();
  return p;
}

}  // namespace

std::string_view PhaseName(Phase phase) {
  switch (phase) {
    case Phase::kNone:
      return "none";
    case Phase::kSelect:
      return "select";
    case Phase::kLabel:
      return "label";
    case Phase::kTrain:
      return "train";
    case Phase::kEvaluate:
      return "evaluate";
  }
  return "unknown";
}

json IterationRecordToJson(const IterationRecord& r, bool include_timing) {
  json doc = {{"round", r.round},
              {"iteration", r.iteration},
              {"labeled_count", r.labeled_count},
              {"skipped_eval", r.skipped_eval},
              {"eval_size", r.eval_size},
              {"selected", r.selected},
              {"skipped", r.skipped},
              {"strategy", r.strategy},
              {"fallback", r.fallback},
              {"skipped_train", r.skipped_train},
              {"model_ref", r.model_ref},
              {"ledger", r.ledger}};
  doc["metrics"] = r.report ? json(r.report->values) : json(nullptr);
  if (include_timing) doc["wall_ms"] = r.wall_ms;
  return doc;
}

absl::StatusOr<IterationRecord> IterationRecordFromJson(const json& doc) {
  try {
    IterationRecord r;
    r.round = doc.at("round").get<int>();
    r.iteration = doc.at("iteration").get<int>();
    r.labeled_count = doc.at("labeled_count").get<int64_t>();
    r.skipped_eval = doc.at("skipped_eval").get<bool>();
    r.eval_size = doc.at("eval_size").get<int64_t>();
    r.selected = doc.at("selected").get<std::vector<std::string>>();
    r.skipped = doc.at("skipped").get<std::vector<std::string>>();
    r.strategy = doc.at("strategy").get<std::string>();
    r.fallback = doc.at("fallback").get<bool>();
    r.skipped_train = doc.at("skipped_train").get<bool>();
    r.model_ref = doc.at("model_ref").get<std::string>();
    r.ledger = doc.at("ledger");
    if (!doc.at("metrics").is_null()) {
      MetricReport report;
      report.values = doc.at("metrics").get<std::map<std::string, double>>();
      report.count = r.eval_size;
      r.report = report;
    }
    if (doc.contains("wall_ms")) {
      r.wall_ms = doc.at("wall_ms").get<std::map<std::string, double>>();
    }
    return r;
  } catch (const json::exception& e) {
    return absl::DataLossError(absl::StrCat("bad iteration record: ", e.what()));
  }
}

json CheckpointToJson(const Checkpoint& ck) {
  json records = json::array();
  for (const IterationRecord& r : ck.records) {
    records.push_back(IterationRecordToJson(r, /*include_timing=*/true));
  }
  return {{"schema_version", kStateSchemaVersion},
          {"pool", PoolStateToJson(ck.pool)},
          {"ledger", ck.ledger.ToJson()},
          {"progress", ProgressToJson(ck.progress)},
          {"records", records},
          {"status", ck.status},
          {"stop_reason", ck.stop_reason},
          {"error", ck.error}};
}

absl::StatusOr<Checkpoint> CheckpointFromJson(const json& doc) {
  try {
    if (doc.at("schema_version").get<int>() != kStateSchemaVersion) {
      return absl::DataLossError("unsupported checkpoint schema version");
    }
    Checkpoint ck;
    ASSIGN_OR_RETURN(ck.pool, PoolStateFromJson(doc.at("pool")));
    ASSIGN_OR_RETURN(ck.ledger, CostLedger::FromJson(doc.at("ledger")));
    ASSIGN_OR_RETURN(ck.progress, ProgressFromJson(doc.at("progress")));
    for (const json& r : doc.at("records")) {
      ASSIGN_OR_RETURN(IterationRecord rec, IterationRecordFromJson(r));
      ck.records.push_back(std::move(rec));
    }
    ck.status = doc.at("status").get<std::string>();
    ck.stop_reason = doc.at("stop_reason").get<std::string>();
    ck.error = doc.at("error").get<std::string>();
    return ck;
  } catch (const json::exception& e) {
    return absl::DataLossError(absl::StrCat("bad checkpoint: ", e.what()));
  }
}

json AnnotationRecordToJson(const AnnotationRecord& r) {
  json doc = {{"id", r.id},
              {"annotation", r.annotation},
              {"annotator", r.annotator},
              {"timestamp", r.timestamp},
              {"input_tokens", r.usage.input_tokens},
              {"output_tokens", r.usage.output_tokens},
              {"cost_units", r.cost.units()},
              {"iteration", r.iteration},
              {"status", r.status}};
  if (!r.reason.empty()) doc["reason"] = r.reason;
  return doc;
}

absl::StatusOr<AnnotationRecord> AnnotationRecordFromJson(const json& doc) {
  try {
    AnnotationRecord r;
    r.id = doc.at("id").get<std::string>();
    r.annotation = doc.at("annotation").get<std::string>();
    r.annotator = doc.at("annotator").get<std::string>();
    r.timestamp = doc.at("timestamp").get<std::string>();
    r.usage.input_tokens = doc.at("input_tokens").get<int64_t>();
    r.usage.output_tokens = doc.at("output_tokens").get<int64_t>();
    r.cost = Money::FromUnits(doc.at("cost_units").get<int64_t>());
    r.iteration = doc.at("iteration").get<int>();
    r.status = doc.at("status").get<std::string>();
    r.reason = doc.value("reason", "");
    return r;
  } catch (const json::exception& e) {
    return absl::DataLossError(
        absl::StrCat("bad annotation record: ", e.what()));
  }
}

absl::Status WriteFileAtomic(const std::filesystem::path& path,
                             const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) {
    return absl::InternalError(absl::StrCat("cannot write ", tmp.string()));
  }
  size_t off = 0;
  while (off < content.size()) {
    const ssize_t n = ::write(fd, content.data() + off, content.size() - off);
    if (n <= 0) {
      ::close(fd);
      return absl::InternalError(absl::StrCat("write failed: ", tmp.string()));
    }
    off += static_cast<size_t>(n);
  }
  absl::Status synced = SyncFd(fd, tmp);
  ::close(fd);
  RETURN_IF_ERROR(synced);
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    return absl::InternalError(
        absl::StrCat("rename ", tmp.string(), " -> ", path.string()));
  }
  const int dir_fd = ::open(path.parent_path().c_str(), O_RDONLY | O_DIRECTORY);
  if (dir_fd >= 0) {
    ::fsync(dir_fd);
    ::close(dir_fd);
  }
  return absl::OkStatus();
}

absl::StatusOr<std::string> ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot read ", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string CurveJsonl(const std::vector<IterationRecord>& records) {
  std::string out;
  for (const IterationRecord& r : records) {
    out += IterationRecordToJson(r, /*include_timing=*/false).dump();
    out += '\n';
  }
  return out;
}

RunStore::RunStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

absl::Status RunStore::Open() {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) {
    return absl::InternalError(
        absl::StrCat("cannot create ", dir_.string(), ": ", ec.message()));
  }
  const auto log = annotations_path();
  if (!std::filesystem::exists(log)) return absl::OkStatus();
  ASSIGN_OR_RETURN(std::string text, ReadFile(log));
  if (text.empty() || text.back() == '\n') return absl::OkStatus();
  const size_t keep = text.rfind('\n') == std::string::npos
                          ? 0
                          : text.rfind('\n') + 1;
  std::filesystem::resize_file(log, keep, ec);
  if (ec) {
    return absl::InternalError(
        absl::StrCat("cannot repair ", log.string(), ": ", ec.message()));
  }
  return absl::OkStatus();
}

bool RunStore::HasCheckpoint() const {
  return std::filesystem::exists(state_path());
}

absl::Status RunStore::WriteConfig(const json& tree) {
  return WriteFileAtomic(config_path(), tree.dump(2) + "\n");
}

absl::StatusOr<json> RunStore::ReadConfig() const {
  ASSIGN_OR_RETURN(std::string text, ReadFile(config_path()));
  json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) {
    return absl::DataLossError(
        absl::StrCat("corrupt config ", config_path().string()));
  }
  return doc;
}

absl::Status RunStore::SaveCheckpoint(const Checkpoint& ck) {
  const std::string body = CheckpointToJson(ck).dump();
  const json envelope = {{"checksum", Checksum(body)}, {"body", body}};
  RETURN_IF_ERROR(WriteFileAtomic(state_path(), envelope.dump() + "\n"));
  return WriteFileAtomic(curve_path(), CurveJsonl(ck.records));
}

absl::StatusOr<Checkpoint> RunStore::LoadCheckpoint() const {
  if (!std::filesystem::exists(state_path())) {
    return absl::NotFoundError(
        absl::StrCat("no checkpoint in ", dir_.string()));
  }
  ASSIGN_OR_RETURN(std::string text, ReadFile(state_path()));
  const json envelope = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (envelope.is_discarded() || !envelope.is_object() ||
      !envelope.contains("checksum") || !envelope.contains("body") ||
      !envelope["body"].is_string()) {
    return absl::DataLossError(
        absl::StrCat("corrupt checkpoint ", state_path().string()));
  }
  const std::string body = envelope["body"].get<std::string>();
  if (envelope["checksum"] != Checksum(body)) {
    return absl::DataLossError(
        absl::StrCat("checkpoint checksum mismatch in ", state_path().string()));
  }
  const json doc = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) {
    return absl::DataLossError(
        absl::StrCat("corrupt checkpoint ", state_path().string()));
  }
  return CheckpointFromJson(doc);
}

absl::Status RunStore::AppendAnnotation(const AnnotationRecord& r) {
  std::lock_guard lock(log_mu_);
  const std::string line = AnnotationRecordToJson(r).dump() + "\n";
  const auto path = annotations_path();
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (fd < 0) {
    return absl::InternalError(absl::StrCat("cannot open ", path.string()));
  }
  const ssize_t n = ::write(fd, line.data(), line.size());
  absl::Status synced = SyncFd(fd, path);
  ::close(fd);
  if (n != static_cast<ssize_t>(line.size())) {
    return absl::InternalError(absl::StrCat("append failed: ", path.string()));
  }
  return synced;
}

absl::StatusOr<std::vector<AnnotationRecord>> RunStore::ReadAnnotations()
    const {
  std::vector<AnnotationRecord> out;
  const auto path = annotations_path();
  if (!std::filesystem::exists(path)) return out;
  std::ifstream in(path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json doc = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded()) {
      return absl::DataLossError(
          absl::StrCat(path.string(), ":", line_no, ": corrupt record"));
    }
    ASSIGN_OR_RETURN(AnnotationRecord r, AnnotationRecordFromJson(doc));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace textal
