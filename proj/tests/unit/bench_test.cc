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
#include <cmath>
#include <set>

#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.h"
#include "textal/bench.h"
#include "textal/strategy.h"

namespace textal {
namespace {

using ::testing::ElementsAre;
using nlohmann::json;

LearningCurve Curve(std::vector<std::pair<int64_t, double>> pts,
                    uint64_t seed = 1) {
  LearningCurve c{"s", seed, {}};
  for (const auto& [n, v] : pts) c.points.push_back({n, {{"m", v}}});
  return c;
}

TEST(AverageCurvesTest, Examples) {
  auto avg = AverageCurves({Curve({{1, 0.2}, {2, 0.4}}), Curve({{1, 0.4}, {2, 0.6}})});
  ASSERT_TRUE(avg.ok());
  ASSERT_EQ(avg->points.size(), 2u);
  EXPECT_NEAR(avg->points[0].metrics.at("m"), 0.3, 1e-15);
  EXPECT_NEAR(avg->points[1].metrics.at("m"), 0.5, 1e-15);

  const LearningCurve one = Curve({{1, 0.7}});
  EXPECT_EQ(AverageCurves({one})->points, one.points);

  EXPECT_FALSE(AverageCurves({}).ok());
  EXPECT_EQ(AverageCurves({Curve({{1, 0.2}}), Curve({{2, 0.2}})}).status().code(),
            absl::StatusCode::kInvalidArgument);
  LearningCurve other = Curve({{1, 0.2}});
  other.points[0].metrics = {{"n", 0.1}};
  EXPECT_FALSE(AverageCurves({Curve({{1, 0.2}}), other}).ok());
}

TEST(CurveFromRecordsTest, KeepsEvaluatedRecords) {
  std::vector<IterationRecord> records(3);
  records[0].labeled_count = 1;
  records[0].report = MetricReport{{{"m", 0.5}}, 1};
  records[1].labeled_count = 2;
  records[1].skipped_eval = true;
  records[2].labeled_count = 3;
  records[2].report = MetricReport{{{"m", 0.75}}, 1};
  const LearningCurve c = CurveFromRecords("x", 4, records);
  EXPECT_EQ(c.strategy, "x");
  EXPECT_EQ(c.seed, 4u);
  ASSERT_EQ(c.points.size(), 2u);
  EXPECT_EQ(c.points[1], (CurvePoint{3, {{"m", 0.75}}}));
}

Dataset ClusterDataset(int clusters, int per) {
  std::vector<Instance> v;
  for (int c = 0; c < clusters; ++c) {
    for (int m = 0; m < per; ++m) {
      v.push_back({"c" + std::to_string(c) + "-m" + std::to_string(m), "x", {},
                   {{"cluster", std::to_string(c)}}});
    }
  }
  return *Dataset::Create(std::move(v));
}

double Coverage(const Dataset& d, std::vector<std::string> labeled) {
  CoverageEvaluator e;
  EvalRequest req;
  req.dataset = &d;
  req.labeled_ids = std::move(labeled);
  auto r = e.Evaluate(req);
  EXPECT_TRUE(r.ok());
  return r->values.at(kMetricClusterCoverage);
}

TEST(CoverageEvaluatorTest, Examples) {
  const Dataset four = ClusterDataset(4, 3);
  EXPECT_EQ(Coverage(four, {"c0-m0", "c1-m2", "c2-m1", "c3-m0"}), 1.0);
  EXPECT_EQ(Coverage(four, {}), 0.0);
  const Dataset ten = ClusterDataset(10, 2);
  EXPECT_NEAR(Coverage(ten, {"c0-m0", "c0-m1", "c4-m0", "c9-m1"}), 0.3, 1e-15);
  EXPECT_FALSE(CoverageEvaluator().needs_eval_set());
}

double Cos(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

TEST(SyntheticTaskTest, ShapeAndDeterminism) {
  EXPECT_FALSE(MakeSyntheticTask(1, 5, 0).ok());
  EXPECT_FALSE(MakeSyntheticTask(3, 0, 0).ok());
  auto t = MakeSyntheticTask(6, 4, 3);
  ASSERT_TRUE(t.ok());
  EXPECT_EQ(t->dataset.size(), 24u);
  const Instance& inst = t->dataset.Get("c02-m03");
  EXPECT_EQ(inst.meta.at("cluster"), "2");
  auto again = MakeSyntheticTask(6, 4, 3);
  EXPECT_EQ(again->embeddings, t->embeddings);
  EXPECT_NE(MakeSyntheticTask(6, 4, 4)->embeddings, t->embeddings);

  const auto& e = t->embeddings;
  const auto emb = [&](int c, int m) {
    return e.at(t->dataset.Get(absl::StrFormat("c%02d-m%02d", c, m)).input);
  };
  for (int c = 0; c < 6; ++c) {
    EXPECT_GT(Cos(emb(c, 0), emb(c, 1)), 0.8);
    for (int d = c + 1; d < 6; ++d) EXPECT_LT(std::abs(Cos(emb(c, 0), emb(d, 0))), 0.5);
  }
}

TEST(SyntheticTaskTest, FacilityLocationPicksDistinctClusters) {
  auto t = MakeSyntheticTask(8, 5, 11);
  ASSERT_TRUE(t.ok());
  StrategyContext ctx;
  for (const Instance& inst : t->dataset.instances()) {
    ctx.unlabeled.push_back({inst.id, inst.input});
    ctx.embeddings[inst.id] = t->embeddings.at(inst.input);
  }
  for (size_t k = 1; k <= 8; ++k) {
    auto picks = SelectFacilityLocation(ctx, k);
    ASSERT_TRUE(picks.ok());
    std::set<std::string> clusters;
    for (const auto& id : *picks) clusters.insert(t->dataset.Get(id).meta.at("cluster"));
    EXPECT_EQ(clusters.size(), k);
  }
}

class BenchmarkTest : public ::testing::Test {
 protected:
  BenchmarkTest() : task_(*MakeSyntheticTask(5, 4, 0)) {}

  BenchmarkSpec Spec(std::vector<std::string> strategies,
                     std::vector<uint64_t> seeds, const std::string& sub) {
    BenchmarkSpec spec;
    spec.strategies = std::move(strategies);
    spec.seeds = std::move(seeds);
    spec.base_tree = DefaultConfigTree();
    spec.base_tree["al"]["init_query_size"] = 1;
    spec.base_tree["al"]["query_size"] = 1;
    spec.base_tree["al"]["num_iterations"] = 2;
    spec.base_tree["data"]["test_fraction"] = 0.2;
    spec.data.dataset = task_.dataset;
    const SyntheticTask* t = &task_;
    spec.make_deps = [t](const RunConfig& c) { return MakeSyntheticDeps(*t, c); };
    spec.out_dir = dir_ / sub;
    return spec;
  }

  SyntheticTask task_;
  testing::TempDir dir_;
};

TEST_F(BenchmarkTest, PairedSplitsAcrossStrategies) {
  BenchmarkSpec spec = Spec({"random", "coreset"}, {1, 2}, "paired");
  spec.max_parallel = 2;
  auto r = RunBenchmark(spec);
  ASSERT_TRUE(r.ok()) << r.status();
  EXPECT_TRUE(r->complete);
  ASSERT_EQ(r->curves.size(), 2u);
  for (const auto& [name, curves] : r->curves) {
    ASSERT_EQ(curves.size(), 2u);
    EXPECT_EQ(curves[0].seed, 1u);
    for (const auto& c : curves) {
      EXPECT_THAT(c.points, ::testing::SizeIs(3));
    }
  }
  for (uint64_t seed : {1, 2}) {
    std::vector<PoolState> pools;
    for (const char* s : {"random", "coreset"}) {
      RunStore store(spec.out_dir / "runs" / s / ("seed-" + std::to_string(seed)));
      auto ck = store.LoadCheckpoint();
      ASSERT_TRUE(ck.ok()) << ck.status();
      pools.push_back(ck->pool);
    }
    EXPECT_FALSE(pools[0].test_ids.empty());
    EXPECT_EQ(pools[0].test_ids, pools[1].test_ids);
    EXPECT_EQ(pools[0].rng_seed, pools[1].rng_seed);
  }
}

TEST_F(BenchmarkTest, SingleRunMatchesOrchestrator) {
  BenchmarkSpec spec = Spec({"idds"}, {7}, "single");
  auto r = RunBenchmark(spec);
  ASSERT_TRUE(r.ok()) << r.status();
  json tree = spec.base_tree;
  tree["al"]["strategy"] = "idds";
  tree["al"]["seed"] = 7;
  std::vector<FieldError> errors;
  auto config = ResolveRunConfig(tree, errors);
  ASSERT_TRUE(config.ok());
  Orchestrator o(*config, spec.data, *MakeSyntheticDeps(task_, *config),
                 dir_ / "direct");
  auto direct = o.Run();
  ASSERT_TRUE(direct.ok());
  EXPECT_EQ(r->curves.at("idds").front(),
            CurveFromRecords("idds", 7, direct->curve));
}

TEST_F(BenchmarkTest, SeedOrderDoesNotMatter) {
  auto a = RunBenchmark(Spec({"random"}, {1, 2}, "a"));
  auto b = RunBenchmark(Spec({"random"}, {2, 1}, "b"));
  ASSERT_TRUE(a.ok() && b.ok());
  auto ca = a->curves.at("random");
  auto cb = b->curves.at("random");
  const auto by_seed = [](const LearningCurve& x, const LearningCurve& y) {
    return x.seed < y.seed;
  };
  std::sort(ca.begin(), ca.end(), by_seed);
  std::sort(cb.begin(), cb.end(), by_seed);
  EXPECT_EQ(ca, cb);
}

TEST_F(BenchmarkTest, FailureMarksIncomplete) {
  BenchmarkSpec spec = Spec({"random", "coreset"}, {1}, "fail");
  const SyntheticTask* t = &task_;
  spec.make_deps = [t](const RunConfig& c) -> absl::StatusOr<RunDeps> {
    if (c.strategy == "coreset") return absl::UnavailableError("no gpu");
    return MakeSyntheticDeps(*t, c);
  };
  auto r = RunBenchmark(spec);
  ASSERT_TRUE(r.ok()) << r.status();
  EXPECT_FALSE(r->complete);
  ASSERT_EQ(r->errors.size(), 1u);
  EXPECT_THAT(r->errors[0], ::testing::HasSubstr("no gpu"));
  EXPECT_EQ(r->curves.at("random").size(), 1u);
  ASSERT_TRUE(EmitReport(*r, spec.out_dir).ok());
  EXPECT_EQ(SummaryJson(*r)["complete"], false);
}

TEST_F(BenchmarkTest, RejectsBadSpecs) {
  EXPECT_FALSE(RunBenchmark(Spec({}, {1}, "x")).ok());
  EXPECT_FALSE(RunBenchmark(Spec({"random"}, {}, "x")).ok());
  EXPECT_FALSE(RunBenchmark(Spec({"nonexistent"}, {1}, "x")).ok());
}

TEST_F(BenchmarkTest, ResumesExistingRunDirectory) {
  BenchmarkSpec spec = Spec({"random"}, {3}, "resume");
  auto first = RunBenchmark(spec);
  auto second = RunBenchmark(spec);
  ASSERT_TRUE(first.ok() && second.ok());
  EXPECT_EQ(first->curves, second->curves);
}

TEST(EmitReportTest, RowsAndSummary) {
  BenchmarkResult r;
  r.curves["random"] = {Curve({{1, 0.2}, {2, 0.4}, {3, 0.5}}, 1),
                        Curve({{1, 0.4}, {2, 0.6}, {3, 0.7}}, 2)};
  r.curves["random"][0].strategy = r.curves["random"][1].strategy = "random";
  testing::TempDir dir;
  ASSERT_TRUE(EmitReport(r, dir.path()).ok());
  const std::string csv = testing::ReadText(dir / "random.csv");
  std::vector<std::string> lines = absl::StrSplit(csv, '\n', absl::SkipEmpty());
  ASSERT_EQ(lines.size(), 7u);
  EXPECT_EQ(lines[0], "strategy,seed,labeled_count,metric,value");
  EXPECT_EQ(lines[1], "random,1,1,m,0.20000000000000001");

  const json summary = json::parse(testing::ReadText(dir / "summary.json"));
  EXPECT_EQ(summary["schema_version"], kReportSchemaVersion);
  const auto avg = AverageCurves(r.curves["random"]);
  const json& pts = summary["strategies"]["random"]["points"];
  ASSERT_EQ(pts.size(), 3u);
  for (size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(pts[i]["labeled_count"], avg->points[i].labeled_count);
    EXPECT_EQ(pts[i]["mean"]["m"].get<double>(), avg->points[i].metrics.at("m"));
  }
  EXPECT_EQ(pts[0]["min"]["m"], 0.2);
  EXPECT_EQ(pts[0]["max"]["m"], 0.4);
  EXPECT_THAT(summary["strategies"]["random"]["seeds"].get<std::vector<int>>(),
              ElementsAre(1, 2));

  EXPECT_FALSE(EmitReport(BenchmarkResult{}, dir.path()).ok());
}

}  // namespace
}  // namespace textal
