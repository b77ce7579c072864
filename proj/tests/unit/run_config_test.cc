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

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.h"
#include "textal/run_config.h"

namespace textal {
namespace {

using ::testing::Contains;
using ::testing::Field;
using ::testing::IsEmpty;
using nlohmann::json;

absl::StatusOr<RunConfig> Build(const std::vector<std::string>& overrides,
                                std::vector<FieldError>& errors) {
  return BuildRunConfig(std::nullopt, overrides, errors);
}

std::vector<std::string> ErrorFields(const std::vector<FieldError>& errors) {
  std::vector<std::string> fields;
  for (const auto& e : errors) fields.push_back(e.field);
  return fields;
}

TEST(RunConfigTest, DefaultsResolve) {
  std::vector<FieldError> errors;
  auto c = Build({}, errors);
  ASSERT_TRUE(c.ok()) << c.status();
  EXPECT_THAT(errors, IsEmpty());
  EXPECT_EQ(c->strategy, "random");
  EXPECT_EQ(c->mode, RunMode::kAl);
  EXPECT_EQ(c->labeller, LabellerType::kOracle);
  EXPECT_EQ(c->query_size.value, 0.01);
  ASSERT_NE(c->FindStop(StopKind::kIterationLimit), nullptr);
  EXPECT_EQ(c->FindStop(StopKind::kBudget), nullptr);
  EXPECT_EQ(c->tree["al"]["strategy"], "random");
}

TEST(RunConfigTest, CommandLineStyleOverrides) {
  std::vector<FieldError> errors;
  auto c = Build({"al=huds", "al.query_size=0.01", "labeller=api_llm",
                  "labeller.parameters.model=gpt-4o-mini", "al.budget=100"},
                 errors);
  ASSERT_TRUE(c.ok()) << FieldErrorsToString(errors);
  EXPECT_EQ(c->strategy, "huds");
  EXPECT_EQ(c->labeller, LabellerType::kApiLlm);
  EXPECT_EQ(c->labeller_model, "gpt-4o-mini");
  EXPECT_EQ(c->budget, Money::FromUnits(100 * Money::kUnitsPerWhole));
  const StoppingCriterion* b = c->FindStop(StopKind::kBudget);
  ASSERT_NE(b, nullptr);
  EXPECT_EQ(b->threshold, 100.0);
}

TEST(RunConfigTest, GroupsApplyBeforeDottedKeys) {
  std::vector<FieldError> errors;
  auto c = Build({"al.query_size=5", "data=race"}, errors);
  ASSERT_TRUE(c.ok()) << FieldErrorsToString(errors);
  EXPECT_EQ(c->query_size.value, 5.0);
  EXPECT_EQ(c->init_query_size.value, 10.0);
}

TEST(RunConfigTest, Presets) {
  EXPECT_THAT(DataPresetNames(),
              ::testing::UnorderedElementsAre("triviaqa", "gsm8k", "race",
                                              "aeslc"));
  for (const std::string& name : DataPresetNames()) {
    std::vector<FieldError> errors;
    auto c = Build({"data=" + name}, errors);
    ASSERT_TRUE(c.ok()) << name << ": " << FieldErrorsToString(errors);
    EXPECT_EQ(c->data_preset, name);
    EXPECT_EQ(c->metrics.front(), c->tree["evaluation"]["metrics"][0]);
  }
  std::vector<FieldError> errors;
  auto triviaqa = Build({"data=triviaqa"}, errors);
  EXPECT_EQ(triviaqa->metrics.front(), "relaxed_exact_match");
  EXPECT_EQ(triviaqa->schema.input_field, "question");
  EXPECT_FALSE(Build({"data=imagenet"}, errors).ok());
  EXPECT_THAT(ErrorFields(errors), Contains("data"));
}

TEST(RunConfigTest, FractionalQuerySizeAboveOne) {
  std::vector<FieldError> errors;
  auto c = Build({"al.query_size=1.5"}, errors);
  EXPECT_EQ(c.status().code(), absl::StatusCode::kInvalidArgument);
  EXPECT_THAT(ErrorFields(errors), Contains("al.query_size"));
  errors.clear();
  EXPECT_FALSE(Build({"al.init_query_size=0"}, errors).ok());
  EXPECT_THAT(ErrorFields(errors), Contains("al.init_query_size"));
  errors.clear();
  EXPECT_TRUE(Build({"al.query_size=1"}, errors).ok());
}

TEST(RunConfigTest, UnknownKeysAndFreeFormSubtrees) {
  std::vector<FieldError> errors;
  EXPECT_FALSE(Build({"al.qery_size=3"}, errors).ok());
  EXPECT_THAT(ErrorFields(errors), Contains("al.qery_size"));
  errors.clear();
  auto c = Build({"training.hyperparameters.custom_flag=7",
                  "inference.anything=x", "al.params.huds_beta=0.25"},
                 errors);
  ASSERT_TRUE(c.ok()) << FieldErrorsToString(errors);
  EXPECT_EQ(c->hyperparameters["custom_flag"], 7);
  EXPECT_EQ(c->strategy_params.at("huds_beta"), 0.25);
  errors.clear();
  EXPECT_FALSE(Build({"al.params.huds_beta=2"}, errors).ok());
  errors.clear();
  EXPECT_FALSE(Build({"novalue"}, errors).ok());
}

TEST(RunConfigTest, EdModeForcesOneIterationAndModelFreeStrategy) {
  std::vector<FieldError> errors;
  auto c = Build({"al=idds", "al.mode=ed", "al.num_iterations=7"}, errors);
  ASSERT_TRUE(c.ok()) << FieldErrorsToString(errors);
  EXPECT_EQ(c->num_iterations, 1);
  EXPECT_EQ(c->tree["al"]["num_iterations"], 1);
  errors.clear();
  EXPECT_FALSE(Build({"al=huds", "al.mode=ed"}, errors).ok());
  EXPECT_THAT(ErrorFields(errors), Contains("al.strategy"));
}

TEST(RunConfigTest, StoppingCriteria) {
  json tree = DefaultConfigTree();
  tree["al"]["stopping"] = json::array(
      {{{"kind", "labeled_count"}, {"value", 40}},
       {{"kind", "metric_threshold"}, {"metric", "rouge1"}, {"value", 0.5}}});
  tree["evaluation"]["metrics"] = json::array({"rouge1"});
  tree["evaluation"]["additional_metrics"] = json::array();
  std::vector<FieldError> errors;
  auto c = ResolveRunConfig(tree, errors);
  ASSERT_TRUE(c.ok()) << FieldErrorsToString(errors);
  ASSERT_NE(c->FindStop(StopKind::kLabeledCount), nullptr);
  EXPECT_EQ(c->FindStop(StopKind::kLabeledCount)->threshold, 40);
  EXPECT_EQ(c->FindStop(StopKind::kMetricThreshold)->metric, "rouge1");

  tree["al"]["stopping"][1]["metric"] = "bleu";
  errors.clear();
  EXPECT_FALSE(ResolveRunConfig(tree, errors).ok());
  EXPECT_THAT(ErrorFields(errors), Contains("al.stopping[1].metric"));

  tree["al"]["stopping"] = json::array({{{"kind", "labeled_count"},
                                         {"value", 2.5}},
                                        {{"kind", "budget"}},
                                        {{"kind", "forever"}}});
  errors.clear();
  EXPECT_FALSE(ResolveRunConfig(tree, errors).ok());
  EXPECT_THAT(ErrorFields(errors),
              ::testing::IsSupersetOf({"al.stopping[0].value", "al.budget",
                                       "al.stopping[2].kind"}));
}

TEST(RunConfigTest, ApiLabellerNeedsModel) {
  std::vector<FieldError> errors;
  EXPECT_FALSE(Build({"labeller=api_llm"}, errors).ok());
  EXPECT_THAT(ErrorFields(errors), Contains("labeller.parameters.model"));
  errors.clear();
  EXPECT_FALSE(Build({"labeller=psychic"}, errors).ok());
  EXPECT_THAT(ErrorFields(errors), Contains("labeller.type"));
}

TEST(RunConfigTest, ValuesAreRangeChecked) {
  const std::vector<std::pair<std::string, std::string>> bad = {
      {"generation.top_p=0", "generation.top_p"},
      {"generation.temperature=-1", "generation.temperature"},
      {"labeller.batch_discount=0", "labeller.batch_discount"},
      {"labeller.noise=2", "labeller.noise"},
      {"labeller.price.input_per_1m=-3", "labeller.price.input_per_1m"},
      {"labeller.prompt_template=hello", "labeller.prompt_template"},
      {"evaluation.metrics=[\"meteor\"]", "evaluation.metrics"},
      {"evaluation.split_size=1", "evaluation.split_size"},
      {"data.test_fraction=1", "data.test_fraction"},
      {"training=command", "training.command"},
      {"al.budget=-1", "al.budget"},
      {"al=nonexistent", "al.strategy"},
  };
  for (const auto& [override, field] : bad) {
    std::vector<FieldError> errors;
    EXPECT_FALSE(Build({override}, errors).ok()) << override;
    EXPECT_THAT(ErrorFields(errors), Contains(field)) << override;
  }
}

TEST(RunConfigTest, YamlFileWithOverrides) {
  testing::TempDir dir;
  testing::WriteText(dir / "run.yaml", R"(al:
  strategy: coreset
  query_size: 8
  stopping:
    - kind: labeled_count
      value: 16
labeller:
  type: noisy_oracle
  noise: 0.1
)");
  std::vector<FieldError> errors;
  auto c = BuildRunConfig(dir / "run.yaml", {"al.seed=9"}, errors);
  ASSERT_TRUE(c.ok()) << FieldErrorsToString(errors);
  EXPECT_EQ(c->strategy, "coreset");
  EXPECT_EQ(c->seed, 9u);
  EXPECT_EQ(c->labeller, LabellerType::kNoisyOracle);
  EXPECT_DOUBLE_EQ(c->noise, 0.1);
  EXPECT_EQ(c->FindStop(StopKind::kLabeledCount)->threshold, 16);
  EXPECT_EQ(BuildRunConfig(dir / "missing.yaml", {}, errors).status().code(),
            absl::StatusCode::kNotFound);
}

TEST(RunConfigTest, ResolvedTreeRoundTrips) {
  std::vector<FieldError> errors;
  auto c = Build({"al=te_delfy", "data=aeslc"}, errors);
  ASSERT_TRUE(c.ok());
  auto again = ResolveRunConfig(c->tree, errors);
  ASSERT_TRUE(again.ok());
  EXPECT_EQ(again->tree, c->tree);
  auto parsed = ParseConfigText(c->tree.dump());
  ASSERT_TRUE(parsed.ok());
  EXPECT_EQ(*parsed, c->tree);
}

TEST(FieldErrorTest, JsonShape) {
  const json doc = FieldErrorsToJson({{"al.query_size", "bad"}});
  ASSERT_TRUE(doc.is_array());
  EXPECT_EQ(doc[0]["field"], "al.query_size");
  EXPECT_EQ(doc[0]["message"], "bad");
}

}  // namespace
}  // namespace textal
