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

// Annotation sources other than the human queue: priced LLM agents, the
// ground-truth oracle and its noisy variant.

#ifndef TEXTAL_LABELING_H_
#define TEXTAL_LABELING_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "textal/backend.h"
#include "textal/dataset.h"
#include "textal/gateway.h"
#include "textal/money.h"

namespace textal {

// Prices are held in micro-currency per 1M tokens, so a token count times a
// price is an exact Money unit count (1 unit = 1e-12).
class PriceSheet {
 public:
  // Prices >= 0 with at most six decimals honoured; discount in (0, 1].
  static absl::StatusOr<PriceSheet> Create(double input_per_1m,
                                           double output_per_1m,
                                           double batch_discount = 0.5,
                                           std::optional<double> per_label = {});

  int64_t input_micro_per_1m() const { return input_micro_; }
  int64_t output_micro_per_1m() const { return output_micro_; }
  int64_t discount_ppm() const { return discount_ppm_; }
  std::optional<Money> per_label() const { return per_label_; }

 private:
  int64_t input_micro_ = 0;
  int64_t output_micro_ = 0;
  int64_t discount_ppm_ = 1'000'000;
  std::optional<Money> per_label_;
};

// (in * input_per_1m + out * output_per_1m) / 1e6, times the discount in
// batch mode. Exact except for discounts finer than 1 ppm of a unit.
Money ComputeCost(int64_t in_tokens, int64_t out_tokens,
                  const PriceSheet& prices, bool batch);

class CostLedger {
 public:
  CostLedger() = default;
  explicit CostLedger(std::optional<Money> budget) : budget_(budget) {}

  // Adds one paid call. Returns its cost.
  Money Charge(const Usage& usage, const PriceSheet& prices, bool batch);
  // Adds a flat per-label charge (human annotation with a price).
  void ChargeFlat(Money amount);
  // Marks one annotated task, for the observed mean cost.
  void CountCompletedTask() { ++completed_tasks_; }

  int64_t input_tokens() const { return input_tokens_; }
  int64_t output_tokens() const { return output_tokens_; }
  Money spent() const { return spent_; }
  int64_t calls() const { return calls_; }
  int64_t completed_tasks() const { return completed_tasks_; }
  const std::optional<Money>& budget() const { return budget_; }
  // Set once a paid call was withheld because of the projection.
  bool projection_tripped() const { return projection_tripped_; }
  void set_projection_tripped() { projection_tripped_ = true; }

  // Mean spend per completed task; nullopt before the first one.
  std::optional<Money> ObservedMeanTaskCost() const;
  // spent + amount <= budget (always true without a budget).
  bool Affords(Money amount) const;
  bool Exhausted() const { return budget_ && spent_ >= *budget_; }

  friend bool operator==(const CostLedger&, const CostLedger&) = default;

  nlohmann::json ToJson() const;
  static absl::StatusOr<CostLedger> FromJson(const nlohmann::json& doc);

 private:
  std::optional<Money> budget_;
  int64_t input_tokens_ = 0;
  int64_t output_tokens_ = 0;
  Money spent_;
  int64_t calls_ = 0;
  int64_t completed_tasks_ = 0;
  bool projection_tripped_ = false;
};

// Conservative input-token estimate for a prompt before the call:
// max(whitespace words, ceil(bytes / 3)).
int64_t EstimateInputTokens(std::string_view prompt);

// Upper bound on one task's cost: estimated input plus max_tokens output.
Money TaskCostBound(int64_t est_input_tokens, int max_tokens,
                    const PriceSheet& prices, bool batch);

// Projected cost of the next task: the larger of the observed mean cost
// and the bound.
Money ProjectTaskCost(const CostLedger& ledger, Money bound);

// Renders `{input}` in the template. kInvalidArgument when the placeholder
// is missing.
absl::StatusOr<std::string> RenderPrompt(const std::string& prompt_template,
                                         const std::string& input);
absl::Status ValidatePromptTemplate(const std::string& prompt_template);

struct LabelTask {
  std::string id;
  std::string input;
};

enum class LabelStatus { kDone, kSkipped, kBudget };
std::string_view LabelStatusName(LabelStatus status);

struct LabelOutcome {
  std::string id;
  LabelStatus status = LabelStatus::kDone;
  std::string annotation;
  std::string annotator;
  std::string reason;
  Usage usage;
  Money cost;
};

struct LlmAnnotatorOptions {
  std::string model;
  std::string prompt_template = "{input}";
  DecodeParams decode;
  PriceSheet prices;
  bool batch = false;
  // Calls per wave. Results are committed in task order.
  int max_concurrent = 4;
};

// Annotates `tasks` in order. Before each call the projected spend
// (spent + reserved + projected task cost) must fit the budget; the first
// task that does not fit and every later one come back with kBudget and the
// ledger's projection flag is set. Backend failures after retries skip the
// task with the error as reason. Costs are charged to `ledger` exactly.
absl::StatusOr<std::vector<LabelOutcome>> AnnotateBatchLlm(
    const std::vector<LabelTask>& tasks, ModelGateway& gateway,
    const LlmAnnotatorOptions& options, CostLedger& ledger);

// Annotation = first reference, verbatim. kFailedPrecondition naming the id
// when an instance has no reference.
absl::StatusOr<std::vector<LabelOutcome>> OracleAnnotate(
    const std::vector<LabelTask>& tasks, const Dataset& dataset);

// Like OracleAnnotate, but with probability p (decided by a hash of seed
// and id) the label is the first reference of a different instance.
absl::StatusOr<std::vector<LabelOutcome>> NoisyOracleAnnotate(
    const std::vector<LabelTask>& tasks, const Dataset& dataset, double p,
    uint64_t seed);

inline constexpr char kOracleAnnotator[] = "oracle";
inline constexpr char kNoisyOracleAnnotator[] = "noisy_oracle";

}  // namespace textal

#endif  // TEXTAL_LABELING_H_
