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

#include <set>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "textal/labeling.h"

namespace textal {
namespace {

using ::testing::Each;
using ::testing::Field;

Money Whole(int64_t n) { return Money::FromUnits(n * Money::kUnitsPerWhole); }

PriceSheet Prices(double in = 2.0, double out = 8.0) {
  return *PriceSheet::Create(in, out, 0.5);
}

TEST(ComputeCostTest, Examples) {
  EXPECT_EQ(ComputeCost(1'000'000, 0, Prices(), false), Whole(2));
  EXPECT_EQ(ComputeCost(500'000, 125'000, Prices(), false), Whole(2));
  EXPECT_EQ(ComputeCost(500'000, 125'000, Prices(), true), Whole(1));
  EXPECT_EQ(ComputeCost(0, 0, Prices(), false), Money());
  EXPECT_EQ(ComputeCost(1, 1, Prices(), false), Money::FromUnits(10'000'000));
}

TEST(PriceSheetTest, Validation) {
  EXPECT_FALSE(PriceSheet::Create(-1.0, 1.0).ok());
  EXPECT_FALSE(PriceSheet::Create(1.0, 1.0, 0.0).ok());
  EXPECT_FALSE(PriceSheet::Create(1.0, 1.0, 1.5).ok());
  EXPECT_TRUE(PriceSheet::Create(0.0, 0.0, 1.0).ok());
  auto p = PriceSheet::Create(0.15, 0.6, 0.5, 0.25);
  ASSERT_TRUE(p.ok());
  EXPECT_EQ(p->input_micro_per_1m(), 150'000);
  EXPECT_EQ(p->output_micro_per_1m(), 600'000);
  EXPECT_EQ(p->per_label(), Money::FromUnits(250'000'000'000));
}

TEST(CostLedgerTest, ChargeAccumulatesExactly) {
  CostLedger l(Whole(100));
  const PriceSheet p = Prices();
  Money sum;
  for (int i = 0; i < 1000; ++i) {
    sum += l.Charge({137 + i, 41 + i % 13}, p, i % 2 == 0);
  }
  EXPECT_EQ(l.spent(), sum);
  EXPECT_EQ(l.calls(), 1000);
  int64_t in = 0;
  for (int i = 0; i < 1000; ++i) in += 137 + i;
  EXPECT_EQ(l.input_tokens(), in);
}

TEST(CostLedgerTest, AffordsAndExhausted) {
  CostLedger l(Whole(2));
  EXPECT_TRUE(l.Affords(Whole(2)));
  EXPECT_FALSE(l.Affords(Whole(2) + Money::FromUnits(1)));
  l.ChargeFlat(Whole(2));
  EXPECT_TRUE(l.Exhausted());
  CostLedger unbounded;
  EXPECT_TRUE(unbounded.Affords(Whole(1'000'000)));
  EXPECT_FALSE(unbounded.Exhausted());
}

TEST(CostLedgerTest, ObservedMean) {
  CostLedger l;
  EXPECT_FALSE(l.ObservedMeanTaskCost().has_value());
  l.ChargeFlat(Whole(3));
  l.CountCompletedTask();
  l.ChargeFlat(Whole(1));
  l.CountCompletedTask();
  EXPECT_EQ(l.ObservedMeanTaskCost(), Whole(2));
}

TEST(CostLedgerTest, JsonRoundTrip) {
  CostLedger l(Whole(7));
  l.Charge({10, 20}, Prices(), true);
  l.CountCompletedTask();
  l.set_projection_tripped();
  auto back = CostLedger::FromJson(l.ToJson());
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(*back, l);
  EXPECT_EQ(CostLedger::FromJson({{"calls", 1}}).status().code(),
            absl::StatusCode::kDataLoss);
}

TEST(ProjectionTest, EstimateAndBound) {
  EXPECT_EQ(EstimateInputTokens("a b c"), 3);
  EXPECT_EQ(EstimateInputTokens("abcdefghij"), 4);
  EXPECT_EQ(EstimateInputTokens(""), 0);
  const Money bound = TaskCostBound(100, 50, Prices(), false);
  EXPECT_EQ(bound, ComputeCost(100, 50, Prices(), false));
  CostLedger l;
  EXPECT_EQ(ProjectTaskCost(l, bound), bound);
  l.ChargeFlat(bound + bound);
  l.CountCompletedTask();
  EXPECT_EQ(ProjectTaskCost(l, bound), bound + bound);
}

TEST(RenderPromptTest, Placeholder) {
  EXPECT_EQ(*RenderPrompt("Q: {input}\nA:", "why"), "Q: why\nA:");
  EXPECT_EQ(*RenderPrompt("{input}/{input}", "x"), "x/x");
  EXPECT_EQ(RenderPrompt("no slot", "x").status().code(),
            absl::StatusCode::kInvalidArgument);
}

class LlmAnnotateTest : public ::testing::Test {
 protected:
  LlmAnnotateTest() {
    MockBackendOptions o;
    o.canned_responses = {{"w1 w2 w3", "answer one"},
                          {"w4 w5 w6", "answer two"},
                          {"w7 w8 w9", "answer three"}};
    backend_ = std::make_shared<MockBackend>(o);
    gateway_ = std::make_unique<ModelGateway>(backend_, 4);
    options_.model = "annotator";
    options_.prices = Prices();
    options_.decode.max_tokens = 8;
    tasks_ = {{"a", "w1 w2 w3"}, {"b", "w4 w5 w6"}, {"c", "w7 w8 w9"}};
  }

  Money Bound() const {
    return TaskCostBound(3, options_.decode.max_tokens, options_.prices, false);
  }

  std::shared_ptr<MockBackend> backend_;
  std::unique_ptr<ModelGateway> gateway_;
  LlmAnnotatorOptions options_;
  std::vector<LabelTask> tasks_;
};

TEST_F(LlmAnnotateTest, AnnotatesAllInOrder) {
  CostLedger ledger;
  auto out = AnnotateBatchLlm(tasks_, *gateway_, options_, ledger);
  ASSERT_TRUE(out.ok()) << out.status();
  ASSERT_EQ(out->size(), 3u);
  EXPECT_EQ((*out)[0].id, "a");
  EXPECT_EQ((*out)[0].annotation, "answer one");
  EXPECT_EQ((*out)[2].annotation, "answer three");
  EXPECT_THAT(*out, Each(Field(&LabelOutcome::status, LabelStatus::kDone)));
  EXPECT_THAT(*out, Each(Field(&LabelOutcome::annotator, "annotator")));
  Money sum;
  for (const auto& o : *out) {
    EXPECT_EQ(o.usage, (Usage{3, 2}));
    EXPECT_EQ(o.cost, ComputeCost(3, 2, options_.prices, false));
    sum += o.cost;
  }
  EXPECT_EQ(ledger.spent(), sum);
  EXPECT_EQ(ledger.completed_tasks(), 3);
  EXPECT_FALSE(ledger.projection_tripped());
}

TEST_F(LlmAnnotateTest, ExhaustedBudgetMakesNoCalls) {
  CostLedger ledger(Money{});
  auto out = AnnotateBatchLlm(tasks_, *gateway_, options_, ledger);
  ASSERT_TRUE(out.ok());
  EXPECT_THAT(*out, Each(Field(&LabelOutcome::status, LabelStatus::kBudget)));
  EXPECT_EQ(backend_->generate_calls(), 0);
  EXPECT_TRUE(ledger.projection_tripped());
}

TEST_F(LlmAnnotateTest, BudgetForTwoOfThree) {
  const Money b = Bound();
  CostLedger ledger(b + b + Money::FromUnits(b.units() / 2));
  auto out = AnnotateBatchLlm(tasks_, *gateway_, options_, ledger);
  ASSERT_TRUE(out.ok());
  EXPECT_EQ((*out)[0].status, LabelStatus::kDone);
  EXPECT_EQ((*out)[1].status, LabelStatus::kDone);
  EXPECT_EQ((*out)[2].status, LabelStatus::kBudget);
  EXPECT_EQ(backend_->generate_calls(), 2);
  EXPECT_LE(ledger.spent(), *ledger.budget());
  EXPECT_TRUE(ledger.projection_tripped());
}

TEST_F(LlmAnnotateTest, WavesOfOneGiveSameResult) {
  CostLedger wide;
  auto a = AnnotateBatchLlm(tasks_, *gateway_, options_, wide);
  options_.max_concurrent = 1;
  CostLedger narrow;
  auto b = AnnotateBatchLlm(tasks_, *gateway_, options_, narrow);
  ASSERT_TRUE(a.ok() && b.ok());
  for (size_t i = 0; i < a->size(); ++i) {
    EXPECT_EQ((*a)[i].annotation, (*b)[i].annotation);
  }
  EXPECT_EQ(wide, narrow);
}

TEST_F(LlmAnnotateTest, BackendFailureSkipsTask) {
  MockBackendOptions o;
  o.fail_first_calls = 100;
  ModelGateway g(std::make_shared<MockBackend>(o), 1,
                 {2, std::chrono::milliseconds(1), 2.0});
  CostLedger ledger;
  auto out = AnnotateBatchLlm(tasks_, g, options_, ledger);
  ASSERT_TRUE(out.ok());
  EXPECT_THAT(*out,
              Each(Field(&LabelOutcome::status, LabelStatus::kSkipped)));
  EXPECT_FALSE((*out)[0].reason.empty());
  EXPECT_EQ(ledger.spent(), Money());
}

TEST_F(LlmAnnotateTest, BadTemplate) {
  options_.prompt_template = "no placeholder";
  CostLedger ledger;
  EXPECT_EQ(AnnotateBatchLlm(tasks_, *gateway_, options_, ledger).status().code(),
            absl::StatusCode::kInvalidArgument);
}

Dataset QaDataset(int n) {
  std::vector<Instance> v;
  for (int i = 0; i < n; ++i) {
    v.push_back({"q" + std::to_string(i), "question " + std::to_string(i),
                 {"ref" + std::to_string(i), "alias"},
                 {}});
  }
  return *Dataset::Create(std::move(v));
}

std::vector<LabelTask> AllTasks(const Dataset& d) {
  std::vector<LabelTask> t;
  for (const Instance& i : d.instances()) t.push_back({i.id, i.input});
  return t;
}

TEST(OracleTest, FirstReference) {
  const Dataset d = QaDataset(3);
  auto out = OracleAnnotate(AllTasks(d), d);
  ASSERT_TRUE(out.ok());
  EXPECT_EQ((*out)[1].annotation, "ref1");
  EXPECT_EQ((*out)[1].annotator, kOracleAnnotator);
  EXPECT_EQ((*out)[1].cost, Money());
}

TEST(OracleTest, MissingReference) {
  const Dataset d = *Dataset::Create({{"x", "in", {}, {}}});
  auto out = OracleAnnotate({{"x", "in"}}, d);
  EXPECT_EQ(out.status().code(), absl::StatusCode::kFailedPrecondition);
  EXPECT_THAT(out.status().message(), ::testing::HasSubstr("x"));
}

TEST(NoisyOracleTest, ZeroAndOne) {
  const Dataset d = QaDataset(20);
  auto clean = NoisyOracleAnnotate(AllTasks(d), d, 0.0, 3);
  ASSERT_TRUE(clean.ok());
  for (const auto& o : *clean) EXPECT_EQ(o.annotation, d.Get(o.id).references[0]);
  auto noisy = NoisyOracleAnnotate(AllTasks(d), d, 1.0, 3);
  ASSERT_TRUE(noisy.ok());
  for (const auto& o : *noisy) {
    EXPECT_NE(o.annotation, d.Get(o.id).references[0]);
    EXPECT_EQ(o.annotator, kNoisyOracleAnnotator);
  }
}

TEST(NoisyOracleTest, RateAndDeterminism) {
  const Dataset d = QaDataset(4000);
  auto a = NoisyOracleAnnotate(AllTasks(d), d, 0.3, 11);
  auto b = NoisyOracleAnnotate(AllTasks(d), d, 0.3, 11);
  ASSERT_TRUE(a.ok() && b.ok());
  int flipped = 0;
  for (size_t i = 0; i < a->size(); ++i) {
    EXPECT_EQ((*a)[i].annotation, (*b)[i].annotation);
    if ((*a)[i].annotation != d.instances()[i].references[0]) ++flipped;
  }
  EXPECT_NEAR(flipped / 4000.0, 0.3, 0.03);
  EXPECT_FALSE(NoisyOracleAnnotate(AllTasks(d), d, 1.5, 1).ok());
}

}  // namespace
}  // namespace textal
