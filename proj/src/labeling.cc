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

#include "textal/labeling.h"

#include <algorithm>
#include <cmath>
#include <future>

#include "absl/strings/str_cat.h"
#include "textal/hash.h"
#include "textal/status_macros.h"

namespace textal {
namespace {

constexpr int64_t kPpm = 1'000'000;
constexpr std::string_view kPlaceholder = "{input}";

int64_t RoundDiv(__int128 num, int64_t den) {
  return static_cast<int64_t>((num + den / 2) / den);
}

}  // namespace

absl::StatusOr<PriceSheet> PriceSheet::Create(double input_per_1m,
                                              double output_per_1m,
                                              double batch_discount,
                                              std::optional<double> per_label) {
  if (!(input_per_1m >= 0.0) || !(output_per_1m >= 0.0)) {
    return absl::InvalidArgumentError("prices must be >= 0");
  }
  if (!(batch_discount > 0.0 && batch_discount <= 1.0)) {
    return absl::InvalidArgumentError("batch discount must be in (0, 1]");
  }
  if (per_label && !(*per_label >= 0.0)) {
    return absl::InvalidArgumentError("per-label price must be >= 0");
  }
  PriceSheet p;
  p.input_micro_ = std::llround(input_per_1m * 1e6);
  p.output_micro_ = std::llround(output_per_1m * 1e6);
  p.discount_ppm_ = std::llround(batch_discount * 1e6);
  if (per_label) p.per_label_ = Money::FromDouble(*per_label);
  return p;
}

Money ComputeCost(int64_t in_tokens, int64_t out_tokens,
                  const PriceSheet& prices, bool batch) {
  __int128 units = static_cast<__int128>(in_tokens) *
                       prices.input_micro_per_1m() +
                   static_cast<__int128>(out_tokens) *
                       prices.output_micro_per_1m();
  if (batch && prices.discount_ppm() != kPpm) {
    return Money::FromUnits(RoundDiv(units * prices.discount_ppm(), kPpm));
  }
  return Money::FromUnits(static_cast<int64_t>(units));
}

Money CostLedger::Charge(const Usage& usage, const PriceSheet& prices,
                         bool batch) {
  const Money cost =
      ComputeCost(usage.input_tokens, usage.output_tokens, prices, batch);
  input_tokens_ += usage.input_tokens;
  output_tokens_ += usage.output_tokens;
  spent_ += cost;
  ++calls_;
  return cost;
}

void CostLedger::ChargeFlat(Money amount) {
  spent_ += amount;
  ++calls_;
}

std::optional<Money> CostLedger::ObservedMeanTaskCost() const {
  if (completed_tasks_ == 0) return std::nullopt;
  return Money::FromUnits(
      (spent_.units() + completed_tasks_ - 1) / completed_tasks_);
}

bool CostLedger::Affords(Money amount) const {
  return !budget_ || spent_ + amount <= *budget_;
}

nlohmann::json CostLedger::ToJson() const {
  nlohmann::json doc = {
      {"input_tokens", input_tokens_},
      {"output_tokens", output_tokens_},
      {"spent_units", spent_.units()},
      {"spent", spent_.ToString()},
      {"calls", calls_},
      {"completed_tasks", completed_tasks_},
      {"projection_tripped", projection_tripped_},
  };
  doc["budget_units"] =
      budget_ ? nlohmann::json(budget_->units()) : nlohmann::json(nullptr);
  return doc;
}

absl::StatusOr<CostLedger> CostLedger::FromJson(const nlohmann::json& doc) {
  try {
    CostLedger l;
    const auto& b = doc.at("budget_units");
    if (!b.is_null()) l.budget_ = Money::FromUnits(b.get<int64_t>());
    l.input_tokens_ = doc.at("input_tokens").get<int64_t>();
    l.output_tokens_ = doc.at("output_tokens").get<int64_t>();
    l.spent_ = Money::FromUnits(doc.at("spent_units").get<int64_t>());
    l.calls_ = doc.at("calls").get<int64_t>();
    l.completed_tasks_ = doc.at("completed_tasks").get<int64_t>();
    l.projection_tripped_ = doc.at("projection_tripped").get<bool>();
    return l;
  } catch (const nlohmann::json::exception& e) {
    return absl::DataLossError(absl::StrCat("bad ledger record: ", e.what()));
  }
}

int64_t EstimateInputTokens(std::string_view prompt) {
  const int64_t by_bytes = (static_cast<int64_t>(prompt.size()) + 2) / 3;
  return std::max(CountWhitespaceTokens(prompt), by_bytes);
}

Money TaskCostBound(int64_t est_input_tokens, int max_tokens,
                    const PriceSheet& prices, bool batch) {
  return ComputeCost(est_input_tokens, std::max(max_tokens, 0), prices, batch);
}

Money ProjectTaskCost(const CostLedger& ledger, Money bound) {
  const std::optional<Money> mean = ledger.ObservedMeanTaskCost();
  return mean && *mean > bound ? *mean : bound;
}

absl::Status ValidatePromptTemplate(const std::string& prompt_template) {
  if (prompt_template.find(kPlaceholder) == std::string::npos) {
    return absl::InvalidArgumentError(
        "prompt template lacks the {input} placeholder");
  }
  return absl::OkStatus();
}

absl::StatusOr<std::string> RenderPrompt(const std::string& prompt_template,
                                         const std::string& input) {
  RETURN_IF_ERROR(ValidatePromptTemplate(prompt_template));
  std::string out;
  size_t pos = 0;
  while (true) {
    const size_t hit = prompt_template.find(kPlaceholder, pos);
    if (hit == std::string::npos) break;
    out.append(prompt_template, pos, hit - pos);
    out.append(input);
    pos = hit + kPlaceholder.size();
  }
  out.append(prompt_template, pos, std::string::npos);
  return out;
}

std::string_view LabelStatusName(LabelStatus status) {
  switch (status) {
    case LabelStatus::kDone:
      return "done";
    case LabelStatus::kSkipped:
      return "skipped";
    case LabelStatus::kBudget:
      return "budget";
  }
  return "unknown";
}

absl::StatusOr<std::vector<LabelOutcome>> AnnotateBatchLlm(
    const std::vector<LabelTask>& tasks, ModelGateway& gateway,
    const LlmAnnotatorOptions& options, CostLedger& ledger) {
  RETURN_IF_ERROR(ValidatePromptTemplate(options.prompt_template));
  if (options.max_concurrent < 1) {
    return absl::InvalidArgumentError("max_concurrent must be >= 1");
  }
  DecodeParams decode = options.decode;
  decode.num_samples = 1;

  std::vector<LabelOutcome> out(tasks.size());
  std::vector<std::string> prompts(tasks.size());
  for (size_t i = 0; i < tasks.size(); ++i) {
    out[i].id = tasks[i].id;
    out[i].annotator = options.model;
    ASSIGN_OR_RETURN(prompts[i],
                     RenderPrompt(options.prompt_template, tasks[i].input));
  }

  size_t next = 0;
  bool out_of_budget = ledger.Exhausted();
  while (next < tasks.size() && !out_of_budget) {
    std::vector<size_t> wave;
    Money reserved;
    for (size_t i = next; i < tasks.size() &&
                          wave.size() < static_cast<size_t>(options.max_concurrent);
         ++i) {
      const Money bound =
          TaskCostBound(EstimateInputTokens(prompts[i]), decode.max_tokens,
                        options.prices, options.batch);
      const Money projected = ProjectTaskCost(ledger, bound);
      if (!ledger.Affords(reserved + projected)) {
        out_of_budget = true;
        break;
      }
      reserved += projected;
      wave.push_back(i);
    }

    std::vector<std::future<absl::StatusOr<std::vector<GenerationResult>>>>
        calls;
    for (size_t i : wave) {
      calls.push_back(std::async(std::launch::async, [&, i] {
        return gateway.Generate(options.model, prompts[i], decode);
      }));
    }
    for (size_t w = 0; w < wave.size(); ++w) {
      LabelOutcome& o = out[wave[w]];
      absl::StatusOr<std::vector<GenerationResult>> r = calls[w].get();
      if (!r.ok()) {
        o.status = LabelStatus::kSkipped;
        o.reason = std::string(r.status().message());
        continue;
      }
      const GenerationResult& g = r->front();
      o.usage = g.usage;
      o.cost = ledger.Charge(g.usage, options.prices, options.batch);
      if (g.text.empty()) {
        o.status = LabelStatus::kSkipped;
        o.reason = "empty annotation";
        continue;
      }
      o.status = LabelStatus::kDone;
      o.annotation = g.text;
      ledger.CountCompletedTask();
    }
    next = wave.empty() ? next : wave.back() + 1;
  }
  if (next < tasks.size()) {
    ledger.set_projection_tripped();
    for (size_t i = next; i < tasks.size(); ++i) {
      out[i].status = LabelStatus::kBudget;
      out[i].reason = "budget";
    }
  }
  return out;
}

absl::StatusOr<std::vector<LabelOutcome>> OracleAnnotate(
    const std::vector<LabelTask>& tasks, const Dataset& dataset) {
  std::vector<LabelOutcome> out;
  out.reserve(tasks.size());
  for (const LabelTask& t : tasks) {
    const Instance* inst = dataset.Find(t.id);
    if (inst == nullptr || inst->references.empty()) {
      return absl::FailedPreconditionError(
          absl::StrCat("simulation error: no reference for ", t.id));
    }
    LabelOutcome o;
    o.id = t.id;
    o.annotation = inst->references.front();
    o.annotator = kOracleAnnotator;
    out.push_back(std::move(o));
  }
  return out;
}

absl::StatusOr<std::vector<LabelOutcome>> NoisyOracleAnnotate(
    const std::vector<LabelTask>& tasks, const Dataset& dataset, double p,
    uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) {
    return absl::InvalidArgumentError("noise probability must be in [0, 1]");
  }
  ASSIGN_OR_RETURN(std::vector<LabelOutcome> out,
                   OracleAnnotate(tasks, dataset));
  const std::vector<Instance>& all = dataset.instances();
  for (LabelOutcome& o : out) {
    o.annotator = kNoisyOracleAnnotator;
    const uint64_t h = HashWithSeed(o.id, seed);
    if (UnitInterval(Mix64(h)) >= p) continue;
    // Walk from a hashed start to the first instance with a different label.
    const size_t start = static_cast<size_t>(h % all.size());
    for (size_t step = 0; step < all.size(); ++step) {
      const Instance& other = all[(start + step) % all.size()];
      if (other.id != o.id && !other.references.empty() &&
          other.references.front() != o.annotation) {
        o.annotation = other.references.front();
        break;
      }
    }
  }
  return out;
}

}  // namespace textal
