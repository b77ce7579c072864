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

// Per-iteration evaluation producing learning-curve points.

#ifndef TEXTAL_EVALUATOR_H_
#define TEXTAL_EVALUATOR_H_

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "textal/backend.h"
#include "textal/dataset.h"
#include "textal/gateway.h"

namespace textal {

struct MetricReport {
  std::map<std::string, double> values;
  int64_t count = 0;

  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

nlohmann::json MetricReportToJson(const MetricReport& report);
absl::StatusOr<MetricReport> MetricReportFromJson(const nlohmann::json& doc);

// Averages per-instance metrics over the corpus; "bleu" is corpus BLEU and
// ROUGE takes the best reference. kInvalidArgument on empty input, unknown
// metric ids, or an instance without references.
absl::StatusOr<MetricReport> ScorePredictions(
    const std::vector<std::string>& predictions,
    const std::vector<std::vector<std::string>>& references,
    const std::vector<std::string>& metrics);

struct EvalRequest {
  const Dataset* dataset = nullptr;
  std::string model_ref;
  std::vector<std::string> eval_ids;
  // Current labeled set, for evaluators that score the selection itself.
  std::vector<std::string> labeled_ids;
};

class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual std::vector<std::string> metrics() const = 0;
  // Whether Evaluate needs a held-out eval set.
  virtual bool needs_eval_set() const { return true; }
  virtual absl::StatusOr<MetricReport> Evaluate(const EvalRequest& request) = 0;
};

// Greedy generation of every eval input through the gateway, then
// ScorePredictions. All-or-nothing: any backend failure fails the report.
class ModelEvaluator : public Evaluator {
 public:
  ModelEvaluator(std::shared_ptr<ModelGateway> gateway,
                 std::vector<std::string> metrics, DecodeParams decode);

  std::vector<std::string> metrics() const override { return metrics_; }
  absl::StatusOr<MetricReport> Evaluate(const EvalRequest& request) override;

 private:
  std::shared_ptr<ModelGateway> gateway_;
  std::vector<std::string> metrics_;
  DecodeParams decode_;
};

// Fraction of clusters with at least one labeled member. The cluster of an
// instance is read from meta[cluster_key].
class CoverageEvaluator : public Evaluator {
 public:
  explicit CoverageEvaluator(std::string cluster_key = "cluster");

  std::vector<std::string> metrics() const override;
  bool needs_eval_set() const override { return false; }
  absl::StatusOr<MetricReport> Evaluate(const EvalRequest& request) override;

 private:
  std::string cluster_key_;
};

inline constexpr char kMetricClusterCoverage[] = "cluster_coverage";

}  // namespace textal

#endif  // TEXTAL_EVALUATOR_H_
