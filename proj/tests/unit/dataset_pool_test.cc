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

#include <algorithm>
#include <random>
#include <set>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.h"
#include "textal/dataset.h"
#include "textal/pool_state.h"

namespace textal {
namespace {

using ::testing::ElementsAre;
using ::testing::HasSubstr;

Dataset MakeDataset(int n) {
  std::vector<Instance> v;
  for (int i = 0; i < n; ++i) {
    v.push_back({"id" + std::to_string(i), "text " + std::to_string(i),
                 {"ref " + std::to_string(i)}, {}});
  }
  return *Dataset::Create(std::move(v));
}

TEST(LoadDatasetTest, CsvWithMappedColumns) {
  DatasetSchema schema;
  schema.input_field = "question";
  schema.references_field = "answer";
  auto rows = ParseDataset("question,answer\nWhat is 2+2?,4\n\"Capital, France?\",Paris\n",
                           DatasetFormat::kCsv, schema);
  ASSERT_TRUE(rows.ok()) << rows.status();
  ASSERT_EQ(rows->size(), 2u);
  EXPECT_EQ((*rows)[0].input, "What is 2+2?");
  EXPECT_THAT((*rows)[0].references, ElementsAre("4"));
  EXPECT_EQ((*rows)[1].input, "Capital, France?");
  EXPECT_NE((*rows)[0].id, (*rows)[1].id);
}

TEST(LoadDatasetTest, JsonListReferencesAreAliases) {
  DatasetSchema schema;
  schema.input_field = "question";
  schema.references_field = "answers";
  auto rows = ParseDataset(
      R"([{"question": "q", "answers": ["a", "b"]}, {"question": "r", "answers": "c"}])",
      DatasetFormat::kJson, schema);
  ASSERT_TRUE(rows.ok()) << rows.status();
  EXPECT_THAT((*rows)[0].references, ElementsAre("a", "b"));
  EXPECT_THAT((*rows)[1].references, ElementsAre("c"));
}

TEST(LoadDatasetTest, MissingInputColumnNamesField) {
  DatasetSchema schema;
  schema.input_field = "question";
  auto rows = ParseDataset("text,answer\nx,y\n", DatasetFormat::kCsv, schema);
  ASSERT_FALSE(rows.ok());
  EXPECT_EQ(rows.status().code(), absl::StatusCode::kInvalidArgument);
  EXPECT_THAT(rows.status().message(), HasSubstr("question"));
}

TEST(LoadDatasetTest, DuplicateIdsAreIntegrityErrors) {
  DatasetSchema schema;
  schema.id_field = "id";
  auto rows = ParseDataset("id,input\na,x\nb,y\na,z\n", DatasetFormat::kCsv,
                           schema);
  ASSERT_FALSE(rows.ok());
  EXPECT_EQ(rows.status().code(), absl::StatusCode::kAlreadyExists);
  EXPECT_THAT(rows.status().message(), HasSubstr("a"));
}

TEST(LoadDatasetTest, MalformedRowReportsRowNumber) {
  auto rows = ParseDataset("input,references\nok,1\n\"unterminated,2\n",
                           DatasetFormat::kCsv, DatasetSchema{});
  ASSERT_FALSE(rows.ok());
  EXPECT_EQ(rows.status().code(), absl::StatusCode::kInvalidArgument);
}

TEST(LoadDatasetTest, MissingFileIsNotFound) {
  auto rows = LoadDataset("/nonexistent/file.csv", DatasetSchema{});
  EXPECT_EQ(rows.status().code(), absl::StatusCode::kNotFound);
}

TEST(LoadDatasetTest, LoadsFromFileByExtension) {
  testing::TempDir dir;
  testing::WriteText(dir / "d.json", R"([{"input": "x"}, {"input": "y"}])");
  auto rows = LoadDataset(dir / "d.json", DatasetSchema{});
  ASSERT_TRUE(rows.ok()) << rows.status();
  EXPECT_EQ(rows->size(), 2u);
}

TEST(InitSplitTest, FractionArithmetic) {
  auto s = InitSplit(MakeDataset(10), 0.2, 7);
  ASSERT_TRUE(s.ok());
  EXPECT_EQ(s->test_ids.size(), 2u);
  EXPECT_EQ(s->unlabeled_ids.size(), 8u);
  EXPECT_TRUE(s->labeled_ids.empty());
  EXPECT_EQ(s->iteration, 0);
}

TEST(InitSplitTest, ZeroFractionLeavesEmptyTestSet) {
  auto s = InitSplit(MakeDataset(10), 0.0, 7);
  ASSERT_TRUE(s.ok());
  EXPECT_TRUE(s->test_ids.empty());
  EXPECT_EQ(s->unlabeled_ids.size(), 10u);
}

TEST(InitSplitTest, DeterministicPerSeed) {
  const Dataset d = MakeDataset(30);
  EXPECT_EQ(*InitSplit(d, 0.3, 5), *InitSplit(d, 0.3, 5));
  EXPECT_NE(InitSplit(d, 0.3, 5)->test_ids, InitSplit(d, 0.3, 6)->test_ids);
}

TEST(InitSplitTest, RejectsFractionOfOne) {
  EXPECT_EQ(InitSplit(MakeDataset(3), 1.0, 1).status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(InitSplitTest, ExplicitTestIds) {
  const Dataset d = MakeDataset(5);
  auto s = InitSplitWithTestIds(d, {"id1", "id3"}, 1);
  ASSERT_TRUE(s.ok());
  EXPECT_THAT(s->test_ids, ElementsAre("id1", "id3"));
  EXPECT_EQ(s->unlabeled_ids.size(), 3u);
  EXPECT_TRUE(CheckPartition(*s, d).ok());
}

TEST(ResolveBatchSizeTest, Examples) {
  EXPECT_EQ(*ResolveBatchSize({0.01}, 1000, 1000), 10u);
  EXPECT_EQ(*ResolveBatchSize({10}, 1'000'000, 1'000'000), 10u);
  EXPECT_EQ(*ResolveBatchSize({0.5}, 3, 3), 2u);
  EXPECT_EQ(*ResolveBatchSize({10}, 100, 4), 4u);
  EXPECT_EQ(ResolveBatchSize({0.0}, 10, 10).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(ResolveBatchSize({-1}, 10, 10).status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(ResolveBatchSizeTest, MonotoneAndClamped) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const size_t pool = rng() % 5000;
    const size_t unlabeled = rng() % (pool + 1);
    const double a = std::uniform_real_distribution<double>(0.001, 0.99)(rng);
    const double b = std::uniform_real_distribution<double>(a, 0.999)(rng);
    const size_t ra = *ResolveBatchSize({a}, pool, unlabeled);
    const size_t rb = *ResolveBatchSize({b}, pool, unlabeled);
    EXPECT_LE(ra, rb);
    EXPECT_LE(rb, unlabeled);
    EXPECT_LE(*ResolveBatchSize({a}, pool, unlabeled),
              *ResolveBatchSize({a}, pool + 100, unlabeled + 100));
    if (pool > 0 && unlabeled > 0) EXPECT_GE(ra, 1u);
  }
}

TEST(MoveToLabeledTest, MovesInSelectionOrder) {
  const Dataset d = MakeDataset(8);
  PoolState s = *InitSplit(d, 0.0, 1);
  const auto ids = s.unlabeled_ids;
  auto r = MoveToLabeled(s, {{ids[4], "x", "o"}, {ids[1], "y", "o"},
                             {ids[6], "z", "o"}});
  ASSERT_TRUE(r.ok());
  EXPECT_THAT(s.labeled_ids, ElementsAre(ids[4], ids[1], ids[6]));
  EXPECT_EQ(s.unlabeled_ids.size(), 5u);
  EXPECT_EQ(s.annotations.at(ids[1]).text, "y");
  EXPECT_TRUE(CheckPartition(s, d).ok());
}

TEST(MoveToLabeledTest, AlreadyLabeledLeavesStateUnchanged) {
  const Dataset d = MakeDataset(4);
  PoolState s = *InitSplit(d, 0.0, 1);
  const std::string first = s.unlabeled_ids[0];
  ASSERT_TRUE(MoveToLabeled(s, {{first, "x", "o"}}).ok());
  const PoolState before = s;
  auto r = MoveToLabeled(s, {{s.unlabeled_ids[0], "y", "o"}, {first, "z", "o"}});
  EXPECT_EQ(r.status().code(), absl::StatusCode::kFailedPrecondition);
  EXPECT_EQ(s, before);
}

// Reference model: a plain set implementation of the move.
TEST(MoveToLabeledTest, EmptyAnnotationSkippedMatchesReference) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const Dataset d = MakeDataset(12);
    PoolState s = *InitSplit(d, 0.25, trial);
    std::vector<std::string> pick = s.unlabeled_ids;
    std::shuffle(pick.begin(), pick.end(), rng);
    pick.resize(rng() % pick.size() + 1);
    std::vector<AnnotatedId> batch;
    std::set<std::string> expect_moved;
    std::vector<std::string> expect_order;
    for (const std::string& id : pick) {
      const bool empty = rng() % 3 == 0;
      batch.push_back({id, empty ? "" : "ann", "o"});
      if (!empty) {
        expect_moved.insert(id);
        expect_order.push_back(id);
      }
    }
    std::set<std::string> unl(s.unlabeled_ids.begin(), s.unlabeled_ids.end());
    auto r = MoveToLabeled(s, batch);
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(r->moved, expect_order);
    EXPECT_EQ(r->moved.size() + r->skipped.size(), pick.size());
    for (const std::string& id : expect_moved) unl.erase(id);
    EXPECT_EQ(std::set<std::string>(s.unlabeled_ids.begin(),
                                    s.unlabeled_ids.end()),
              unl);
    EXPECT_TRUE(CheckPartition(s, d).ok());
  }
}

TEST(PoolStateJsonTest, RoundTripIsIdempotent) {
  const Dataset d = MakeDataset(6);
  PoolState s = *InitSplit(d, 0.3, 2, "m0");
  ASSERT_TRUE(MoveToLabeled(s, {{s.unlabeled_ids[0], "a", "o"}}).ok());
  s.iteration = 3;
  const auto j = PoolStateToJson(s);
  auto back = PoolStateFromJson(j);
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(*back, s);
  EXPECT_EQ(PoolStateToJson(*back).dump(), j.dump());
}

}  // namespace
}  // namespace textal
