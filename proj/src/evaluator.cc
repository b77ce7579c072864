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

#include "textal/evaluator.h"

#include <algorithm>
#include <set>

#include "absl/strings/str_cat.h"
#include "textal/metrics.h"
#include "textal/status_macros.h"

namespace textal {

nlohmann::json MetricReportToJson(const MetricReport& report) {
  return {{"values", report.values}, {"count", report.count}};
}

absl::StatusOr<MetricReport> MetricReportFromJson(const nlohmann::json& doc) {
  try {
    MetricReport r;
    r.values = doc.at("values").get<std::map<std::string, double>>();
    r.count = doc.at("count").get<int64_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    return absl::DataLossError(absl::StrCat("bad metric report: ", e.what()));
  }
}

absl::StatusOr<MetricReport> ScorePredictions(
    const std::vector<std::string>& predictions,
    const std::vector<std::vector<std::string>>& references,
    const std::vector<std::string>& metrics) {
  if (predictions.empty()) {
    return absl::InvalidArgumentError("evaluation set is empty");
  }
  if (predictions.size() != references.size()) {
    return absl::InvalidArgumentError(
        "one reference list per prediction required");
  }
  for (size_t i = 0; i < references.size(); ++i) {
    if (references[i].empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("evaluation instance ", i, " has no reference"));
    }
  }
  MetricReport report;
  report.count = static_cast<int64_t>(predictions.size());
  const double n = static_cast<double>(predictions.size());
  for (const std::string& m : metrics) {
    if (m == kMetricBleu) {
      ASSIGN_OR_RETURN(report.values[m], CorpusBleu(predictions, references));
      continue;
    }
    double sum = 0.0;
    for (size_t i = 0; i < predictions.size(); ++i) {
      const std::string& p = predictions[i];
      const std::vector<std::string>& refs = references[i];
      if (m == kMetricExactMatch) {
        sum += ExactMatch(p, refs);
      } else if (m == kMetricRelaxedExactMatch) {
        sum += RelaxedExactMatch(p, refs);
      } else if (m == kMetricRouge1 || m == kMetricRouge2 ||
                 m == kMetricRougeL) {
        double best = 0.0;
        for (const std::string& r : refs) {
          const double v = m == kMetricRougeL
                               ? RougeL(p, r)
                               : RougeN(p, r, m == kMetricRouge1 ? 1 : 2);
          best = std::max(best, v);
        }
        sum += best;
      } else {
        return absl::InvalidArgumentError(absl::StrCat("unknown metric ", m));
      }
    }
    report.values[m] = sum / n;
  }
  return report;
}

ModelEvaluator::ModelEvaluator(std::shared_ptr<ModelGateway> gateway,
                               std::vector<std::string> metrics,
                               DecodeParams decode)
    : gateway_(std::move(gateway)), metrics_(std::move(metrics)),
      decode_(decode) {
  decode_.temperature = 0.0;
  decode_.num_samples = 1;
  decode_.logprobs_k = 0;
}

absl::StatusOr<MetricReport> ModelEvaluator::Evaluate(
    const EvalRequest& request) {
  if (request.eval_ids.empty()) {
    return absl::InvalidArgumentError("evaluation set is empty");
  }
  std::vector<std::string> prompts;
  std::vector<std::vector<std::string>> references;
  for (const std::string& id : request.eval_ids) {
    const Instance& inst = request.dataset->Get(id);
    prompts.push_back(inst.input);
    references.push_back(inst.references);
  }
  ASSIGN_OR_RETURN(auto generations,
                   gateway_->GenerateBatch(request.model_ref, prompts, decode_));
  std::vector<std::string> predictions;
  predictions.reserve(generations.size());
  for (const auto& g : generations) predictions.push_back(g.front().text);
  return ScorePredictions(predictions, references, metrics_);
}

CoverageEvaluator::CoverageEvaluator(std::string cluster_key)
    : cluster_key_(std::move(cluster_key)) {}

std::vector<std::string> CoverageEvaluator::metrics() const {
  return {kMetricClusterCoverage};
}

absl::StatusOr<MetricReport> CoverageEvaluator::Evaluate(
    const EvalRequest& request) {
  std::set<std::string> clusters;
  for (const Instance& inst : request.dataset->instances()) {
    auto it = inst.meta.find(cluster_key_);
    if (it == inst.meta.end()) {
      return absl::InvalidArgumentError(
          absl::StrCat("instance ", inst.id, " has no ", cluster_key_));
    }
    clusters.insert(it->second);
  }
  std::set<std::string> covered;
  for (const std::string& id : request.labeled_ids) {
    covered.insert(request.dataset->Get(id).meta.at(cluster_key_));
  }
  MetricReport report;
  report.count = static_cast<int64_t>(request.labeled_ids.size());
  report.values[kMetricClusterCoverage] =
      clusters.empty() ? 0.0
                       : static_cast<double>(covered.size()) /
                             static_cast<double>(clusters.size());
  return report;
}

}  // namespace textal
