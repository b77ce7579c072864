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
#include <numeric>
#include <random>

#include "brute_force.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.h"
#include "textal/strategy.h"

namespace textal {
namespace {

using ::testing::ElementsAre;
using nlohmann::json;

constexpr double kTol = 1e-9;

GenerationResult FromLogprobs(const std::vector<double>& lps) {
  GenerationResult g;
  for (size_t i = 0; i < lps.size(); ++i) {
    g.tokens.push_back("t" + std::to_string(i));
    g.token_logprobs.push_back(lps[i]);
  }
  g.text = "";
  for (const auto& t : g.tokens) g.text += (g.text.empty() ? "" : " ") + t;
  return g;
}

GenerationResult FromAlternatives(const json& positions) {
  GenerationResult g;
  for (const json& pos : positions) {
    std::vector<TokenAlternative> alts;
    for (size_t k = 0; k < pos.size(); ++k) {
      alts.push_back({"a" + std::to_string(k), pos[k].get<double>()});
    }
    g.tokens.push_back(alts.front().token);
    g.token_logprobs.push_back(alts.front().logprob);
    g.top_alternatives.push_back(std::move(alts));
  }
  return g;
}

GenerationResult FromText(const std::string& text) {
  GenerationResult g;
  g.text = text;
  std::istringstream in(text);
  for (std::string t; in >> t;) {
    g.tokens.push_back(t);
    g.token_logprobs.push_back(-0.5);
  }
  return g;
}

double ScoreOf(const ScoreVector& s, const std::string& id) {
  for (const auto& [i, v] : s) {
    if (i == id) return v;
  }
  ADD_FAILURE() << "no score for " << id;
  return NAN;
}

std::vector<std::string> ArgsortDesc(const ScoreVector& s) {
  return SelectTopK(s, s.size());
}

class OracleTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { cases_ = new json(testing::LoadOracleCases()); }
  static const json& strategies() { return (*cases_)["strategies"]; }
  static json* cases_;
};
json* OracleTest::cases_ = nullptr;

TEST_F(OracleTest, Nsp) {
  for (const json& c : strategies()["nsp"]) {
    StrategyContext ctx;
    ctx.unlabeled = {{"x", "in"}};
    ctx.generations["x"] = {FromLogprobs(c["logprobs"])};
    auto s = ScoreNsp(ctx);
    ASSERT_TRUE(s.ok());
    EXPECT_NEAR(ScoreOf(*s, "x"), c["expected"].get<double>(), kTol);
  }
}

TEST_F(OracleTest, MeanTokenEntropy) {
  for (const json& c : strategies()["mte"]) {
    StrategyContext ctx;
    ctx.unlabeled = {{"x", "in"}};
    ctx.generations["x"] = {FromAlternatives(c["alternatives"])};
    if (c["alternatives"].empty()) ctx.generations["x"][0].top_alternatives = {};
    auto s = ScoreMeanTokenEntropy(ctx);
    ASSERT_TRUE(s.ok()) << s.status();
    EXPECT_NEAR(ScoreOf(*s, "x"), c["expected"].get<double>(), kTol);
  }
}

TEST_F(OracleTest, DelfyWeight) {
  for (const json& c : strategies()["delfy_weight"]) {
    EXPECT_NEAR(DelfyWeight(c["cu"], c["cl"], c["lambda"]),
                c["expected"].get<double>(), kTol);
  }
}

TEST_F(OracleTest, TeDelfy) {
  for (const json& c : strategies()["te_delfy"]) {
    StrategyContext ctx;
    for (const json& u : c["unlabeled"]) {
      ctx.unlabeled.push_back({u["id"], u["input"]});
      ctx.generations[u["id"]] = {FromAlternatives(u["alternatives"])};
    }
    int i = 0;
    for (const json& l : c["labeled_inputs"]) {
      ctx.labeled.push_back({"l" + std::to_string(i++), l, "ann"});
    }
    auto s = ScoreTeDelfy(ctx, c["alpha"], c["lambda"]);
    ASSERT_TRUE(s.ok()) << s.status();
    for (size_t k = 0; k < ctx.unlabeled.size(); ++k) {
      EXPECT_NEAR(ScoreOf(*s, ctx.unlabeled[k].id),
                  c["expected"][k].get<double>(), kTol);
    }
  }
}

TEST_F(OracleTest, BleuVar) {
  for (const json& c : strategies()["bleuvar"]) {
    StrategyContext ctx;
    ctx.unlabeled = {{"x", "in"}};
    for (const json& s : c["samples"]) ctx.generations["x"].push_back(FromText(s));
    auto s = ScoreBleuVar(ctx, static_cast<int>(c["samples"].size()));
    ASSERT_TRUE(s.ok()) << s.status();
    EXPECT_NEAR(ScoreOf(*s, "x"), c["expected"].get<double>(), kTol);
  }
}

TEST_F(OracleTest, Idds) {
  for (const json& c : strategies()["idds"]) {
    StrategyContext ctx;
    for (size_t i = 0; i < c["unlabeled"].size(); ++i) {
      const std::string id = "u" + std::to_string(i);
      ctx.unlabeled.push_back({id, id});
      ctx.embeddings[id] = c["unlabeled"][i].get<std::vector<double>>();
    }
    for (size_t i = 0; i < c["labeled"].size(); ++i) {
      const std::string id = "l" + std::to_string(i);
      ctx.labeled.push_back({id, id, "a"});
      ctx.embeddings[id] = c["labeled"][i].get<std::vector<double>>();
    }
    auto s = ScoreIdds(ctx, c["lambda"]);
    ASSERT_TRUE(s.ok());
    for (size_t i = 0; i < ctx.unlabeled.size(); ++i) {
      EXPECT_NEAR(ScoreOf(*s, ctx.unlabeled[i].id),
                  c["expected"][i].get<double>(), kTol);
    }
  }
}

TEST_F(OracleTest, Huds) {
  for (const json& c : strategies()["huds"]) {
    StrategyContext ctx;
    for (size_t i = 0; i < c["ids"].size(); ++i) {
      const std::string id = c["ids"][i];
      ctx.unlabeled.push_back({id, id});
      ctx.generations[id] = {FromLogprobs(c["logprobs"][i])};
      ctx.embeddings[id] = c["embeddings"][i].get<std::vector<double>>();
    }
    auto s = ScoreHuds(ctx, c["beta"], c["strata"]);
    ASSERT_TRUE(s.ok()) << s.status();
    for (size_t i = 0; i < ctx.unlabeled.size(); ++i) {
      EXPECT_NEAR(ScoreOf(*s, ctx.unlabeled[i].id),
                  c["expected"][i].get<double>(), kTol);
    }
  }
}

TEST_F(OracleTest, CoresetOneDimensional) {
  const json& c = strategies()["coreset_first"];
  StrategyContext ctx;
  ctx.labeled = {{"l", "l", "a"}};
  ctx.embeddings["l"] = c["labeled"][0].get<std::vector<double>>();
  ctx.unlabeled = {{"a", "a"}, {"b", "b"}};
  ctx.embeddings["a"] = c["unlabeled"][0].get<std::vector<double>>();
  ctx.embeddings["b"] = c["unlabeled"][1].get<std::vector<double>>();
  auto s = SelectCoreset(ctx, 1);
  ASSERT_TRUE(s.ok());
  EXPECT_THAT(*s, ElementsAre(ctx.unlabeled[c["expected_index"].get<int>()].id));
}

TEST_F(OracleTest, FacilityLocationTwoClusters) {
  const json& c = strategies()["facility_pair"];
  StrategyContext ctx;
  const std::vector<std::string> ids = {"a", "b", "c", "d"};
  for (size_t i = 0; i < ids.size(); ++i) {
    ctx.unlabeled.push_back({ids[i], ids[i]});
    ctx.embeddings[ids[i]] = c["embeddings"][i].get<std::vector<double>>();
  }
  auto s = SelectFacilityLocation(ctx, 2);
  ASSERT_TRUE(s.ok());
  ASSERT_EQ(s->size(), 2u);
  // Near-tied optima; greedy must take one point from each cluster.
  const auto cluster = [](const std::string& id) { return id < "c" ? 0 : 1; };
  EXPECT_NE(cluster((*s)[0]), cluster((*s)[1]));
  testing::Points pts;
  for (const json& e : c["embeddings"]) pts.push_back(e);
  std::vector<size_t> chosen;
  for (const auto& id : *s) chosen.push_back(id[0] - 'a');
  EXPECT_NEAR(testing::FacilityValue(pts, chosen), c["value"].get<double>(),
              1e-3);
}

// Spec examples.

TEST(NspTest, Examples) {
  StrategyContext ctx;
  ctx.unlabeled = {{"a", ""}, {"b", ""}, {"c", ""}};
  ctx.generations["a"] = {FromLogprobs({0.0, 0.0})};
  ctx.generations["b"] = {FromLogprobs({std::log(0.5)})};
  ctx.generations["c"] = {FromLogprobs({})};
  auto s = ScoreNsp(ctx);
  ASSERT_TRUE(s.ok());
  EXPECT_NEAR(ScoreOf(*s, "a"), 0.0, kTol);
  EXPECT_NEAR(ScoreOf(*s, "b"), 0.5, kTol);
  EXPECT_EQ(ScoreOf(*s, "c"), 0.0);
}

TEST(NspTest, MissingGenerationIsContextError) {
  StrategyContext ctx;
  ctx.unlabeled = {{"a", ""}};
  EXPECT_FALSE(ScoreNsp(ctx).ok());
}

TEST(MteTest, UniformOverFour) {
  StrategyContext ctx;
  ctx.unlabeled = {{"a", ""}};
  const double l = std::log(0.25);
  ctx.generations["a"] = {FromAlternatives(json{{l, l, l, l}, {l, l, l, l}})};
  EXPECT_NEAR(ScoreOf(*ScoreMeanTokenEntropy(ctx), "a"), std::log(4.0), kTol);
}

TEST(MteTest, MissingAlternativesIsCapabilityError) {
  StrategyContext ctx;
  ctx.unlabeled = {{"a", ""}};
  ctx.generations["a"] = {FromLogprobs({-0.1, -0.2})};
  EXPECT_EQ(ScoreMeanTokenEntropy(ctx).status().code(),
            absl::StatusCode::kUnimplemented);
}

TEST(TeDelfyTest, LargeDecayKillsLabeledTokens) {
  EXPECT_LT(DelfyWeight(5, 1, 50.0), 1e-10);
}

StrategyContext RandomGenerationContext(std::mt19937_64& rng, int n) {
  StrategyContext ctx;
  const std::vector<std::string> words = {"a", "b", "c", "d", "e", "f"};
  std::uniform_real_distribution<double> unif(0.01, 1.0);
  for (int i = 0; i < n; ++i) {
    const std::string id = "id" + std::to_string(i);
    std::string input;
    for (int w = 0; w < 1 + static_cast<int>(rng() % 5); ++w) {
      input += words[rng() % words.size()] + " ";
    }
    ctx.unlabeled.push_back({id, input});
    json positions = json::array();
    const int len = 1 + static_cast<int>(rng() % 5);
    for (int p = 0; p < len; ++p) {
      std::vector<double> w(4);
      double total = 0;
      for (double& x : w) total += (x = unif(rng));
      const double keep = 0.5 + 0.5 * unif(rng);
      json pos = json::array();
      for (double x : w) pos.push_back(std::log(x / total * keep));
      std::sort(pos.begin(), pos.end(), std::greater<>());
      positions.push_back(pos);
    }
    ctx.generations[id] = {FromAlternatives(positions)};
    std::vector<double> e(4);
    for (double& x : e) x = unif(rng);
    ctx.embeddings[id] = e;
  }
  for (int i = 0; i < 3; ++i) {
    const std::string id = "lab" + std::to_string(i);
    ctx.labeled.push_back({id, words[rng() % words.size()], "x"});
    std::vector<double> e(4);
    for (double& x : e) x = unif(rng);
    ctx.embeddings[id] = e;
  }
  return ctx;
}

TEST(TeDelfyTest, AlphaOneMatchesMteRanking) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    StrategyContext ctx = RandomGenerationContext(rng, 8);
    EXPECT_EQ(ArgsortDesc(*ScoreTeDelfy(ctx, 1.0, 1.0)),
              ArgsortDesc(*ScoreMeanTokenEntropy(ctx)));
  }
}

TEST(BleuVarTest, FewerSamplesThanKIsContextError) {
  StrategyContext ctx;
  ctx.unlabeled = {{"a", ""}};
  ctx.generations["a"] = {FromText("x"), FromText("y")};
  EXPECT_FALSE(ScoreBleuVar(ctx, 3).ok());
}

TEST(RandomTest, Determinism) {
  StrategyContext ctx;
  for (int i = 0; i < 100; ++i) {
    ctx.unlabeled.push_back({"id" + std::to_string(i), ""});
  }
  ctx.seed = 1;
  auto a = ArgsortDesc(*ScoreRandom(ctx));
  auto b = ArgsortDesc(*ScoreRandom(ctx));
  EXPECT_EQ(a, b);
  ctx.seed = 2;
  EXPECT_NE(a, ArgsortDesc(*ScoreRandom(ctx)));
}

TEST(RandomTest, SingletonRankedFirst) {
  StrategyContext ctx;
  ctx.unlabeled = {{"only", ""}};
  EXPECT_THAT(SelectTopK(*ScoreRandom(ctx), 1), ElementsAre("only"));
}

TEST(RandomTest, TopKIsPermutationPrefix) {
  StrategyContext ctx;
  std::vector<std::string> ids;
  for (int i = 0; i < 40; ++i) {
    ids.push_back("x" + std::to_string(i));
    ctx.unlabeled.push_back({ids.back(), ""});
  }
  for (uint64_t seed : {1ULL, 9ULL, 12345ULL}) {
    ctx.seed = seed;
    const auto perm = SeededPermutation(ids, seed);
    EXPECT_EQ(SelectTopK(*ScoreRandom(ctx), 7),
              std::vector<std::string>(perm.begin(), perm.begin() + 7));
  }
}

TEST(SelectTopKTest, Examples) {
  ScoreVector s = {{"a", 0.9}, {"b", 0.1}, {"c", 0.9}};
  EXPECT_THAT(SelectTopK(s, 2), ElementsAre("a", "c"));
  EXPECT_TRUE(SelectTopK(s, 0).empty());
  EXPECT_THAT(SelectTopK(s, 10), ElementsAre("a", "c", "b"));
}

TEST(CoresetTest, KZeroAndDuplicateLast) {
  StrategyContext ctx;
  ctx.labeled = {{"l", "", "a"}};
  ctx.embeddings["l"] = {0.0, 0.0};
  ctx.unlabeled = {{"dup", ""}, {"p", ""}, {"q", ""}};
  ctx.embeddings["dup"] = {0.0, 0.0};
  ctx.embeddings["p"] = {1.0, 0.0};
  ctx.embeddings["q"] = {0.0, 3.0};
  EXPECT_TRUE(SelectCoreset(ctx, 0)->empty());
  auto all = SelectCoreset(ctx, 3);
  ASSERT_TRUE(all.ok());
  EXPECT_EQ(all->back(), "dup");
  EXPECT_EQ(SelectCoreset(ctx, 10)->size(), 3u);
}

TEST(CoresetTest, EmptyLabeledStartsAtSmallestId) {
  StrategyContext ctx;
  ctx.unlabeled = {{"z", ""}, {"m", ""}, {"b", ""}};
  ctx.embeddings["z"] = {5.0};
  ctx.embeddings["m"] = {1.0};
  ctx.embeddings["b"] = {2.0};
  EXPECT_THAT(*SelectCoreset(ctx, 2), ElementsAre("b", "z"));
}

TEST(IddsTest, Examples) {
  StrategyContext ctx;
  ctx.unlabeled = {{"a", ""}, {"b", ""}};
  ctx.embeddings["a"] = {1.0, 0.0};
  ctx.embeddings["b"] = {2.0, 0.0};
  EXPECT_NEAR(ScoreOf(*ScoreIdds(ctx, 1.0), "a"), 1.0, kTol);
  ctx.labeled = {{"l", "", "x"}};
  ctx.embeddings["l"] = {0.0, 1.0};
  EXPECT_NEAR(ScoreOf(*ScoreIdds(ctx, 1.0), "a"), 1.0, kTol);
}

TEST(FacilityLocationTest, ExhaustionAndSymmetry) {
  StrategyContext ctx;
  for (const char* id : {"c", "a", "b"}) {
    ctx.unlabeled.push_back({id, ""});
    ctx.embeddings[id] = {1.0, 1.0};
  }
  auto s = SelectFacilityLocation(ctx, 3);
  ASSERT_TRUE(s.ok());
  EXPECT_EQ(s->size(), 3u);
  EXPECT_EQ(s->front(), "a");
  const testing::Points pts = {{1, 1}, {1, 1}, {1, 1}};
  EXPECT_DOUBLE_EQ(FacilityLocationValue(pts, {0}),
                   FacilityLocationValue(pts, {0, 1}));
}

TEST(FacilityLocationTest, LabeledClusterIsAlreadyCovered) {
  StrategyContext ctx;
  ctx.labeled = {{"l", "", "ann"}};
  ctx.embeddings["l"] = {1.0, 0.0};
  const std::vector<std::pair<std::string, std::vector<double>>> pool = {
      {"a", {1.0, 0.01}}, {"b", {1.0, 0.02}}, {"c", {1.0, 0.03}},
      {"d", {0.01, 1.0}}};
  for (const auto& [id, v] : pool) {
    ctx.unlabeled.push_back({id, ""});
    ctx.embeddings[id] = v;
  }
  auto s = SelectFacilityLocation(ctx, 1);
  ASSERT_TRUE(s.ok());
  EXPECT_THAT(*s, ElementsAre("d"));
  ctx.labeled.clear();
  EXPECT_NE(SelectFacilityLocation(ctx, 1)->front(), "d");
}

TEST(HudsTest, BetaOneIsUncertaintyRanking) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 20; ++t) {
    StrategyContext ctx = RandomGenerationContext(rng, 9);
    ScoreVector u;
    for (const PoolItem& item : ctx.unlabeled) {
      const auto& lp = ctx.generations[item.id][0].token_logprobs;
      u.push_back({item.id, -std::accumulate(lp.begin(), lp.end(), 0.0) /
                                static_cast<double>(lp.size())});
    }
    EXPECT_EQ(ArgsortDesc(*ScoreHuds(ctx, 1.0, 3)), ArgsortDesc(u));
  }
}

TEST(HudsTest, CentroidAlignedInstanceScoresZero) {
  StrategyContext ctx;
  for (const char* id : {"a", "b", "c"}) {
    ctx.unlabeled.push_back({id, ""});
    ctx.generations[id] = {FromLogprobs({-0.3})};
  }
  ctx.embeddings["a"] = {1.0, 0.0};
  ctx.embeddings["b"] = {0.8, 0.6};
  ctx.embeddings["c"] = {0.8, -0.6};
  auto s = ScoreHuds(ctx, 0.0, 1);
  ASSERT_TRUE(s.ok());
  EXPECT_NEAR(ScoreOf(*s, "a"), 0.0, kTol);
}

// Properties.

StrategyContext Permuted(const StrategyContext& ctx, std::mt19937_64& rng) {
  StrategyContext p = ctx;
  std::shuffle(p.unlabeled.begin(), p.unlabeled.end(), rng);
  return p;
}

void ExpectSameScores(const ScoreVector& a, const ScoreVector& b) {
  ASSERT_EQ(a.size(), b.size());
  for (const auto& [id, v] : a) EXPECT_NEAR(ScoreOf(b, id), v, 1e-12) << id;
}

TEST(StrategyPropertyTest, PermutationInvariance) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 30; ++t) {
    StrategyContext ctx = RandomGenerationContext(rng, 10);
    ctx.seed = t;
    for (auto& [id, gens] : ctx.generations) {
      gens.push_back(FromText("x y z"));
      gens.push_back(FromText("x q z w"));
    }
    StrategyContext p = Permuted(ctx, rng);
    ExpectSameScores(*ScoreRandom(ctx), *ScoreRandom(p));
    ExpectSameScores(*ScoreNsp(ctx), *ScoreNsp(p));
    ExpectSameScores(*ScoreMeanTokenEntropy(ctx), *ScoreMeanTokenEntropy(p));
    ExpectSameScores(*ScoreTeDelfy(ctx, 0.5, 1.0), *ScoreTeDelfy(p, 0.5, 1.0));
    ExpectSameScores(*ScoreBleuVar(ctx, 3), *ScoreBleuVar(p, 3));
    ExpectSameScores(*ScoreIdds(ctx, 1.0), *ScoreIdds(p, 1.0));
    ExpectSameScores(*ScoreHuds(ctx, 0.5, 3), *ScoreHuds(p, 0.5, 3));
    EXPECT_EQ(*SelectCoreset(ctx, 4), *SelectCoreset(p, 4));
    EXPECT_EQ(*SelectFacilityLocation(ctx, 4), *SelectFacilityLocation(p, 4));
  }
}

TEST(StrategyPropertyTest, Ranges) {
  std::mt19937_64 rng(29);
  for (int t = 0; t < 50; ++t) {
    StrategyContext ctx = RandomGenerationContext(rng, 8);
    for (const auto& [id, v] : *ScoreNsp(ctx)) {
      EXPECT_GE(v, 0.0);
      EXPECT_LT(v, 1.0);
    }
    for (const auto& [id, v] : *ScoreMeanTokenEntropy(ctx)) EXPECT_GE(v, 0.0);
    // Embeddings here have non-negative entries, so d = 1 - cos stays in
    // [0, 1].
    for (const auto& [id, v] : *ScoreHuds(ctx, 0.5, 3)) {
      EXPECT_GE(v, -kTol);
      EXPECT_LE(v, 1.0 + kTol);
    }
    for (auto& [id, gens] : ctx.generations) {
      gens = {FromText("a b"), FromText("c"), FromText("a b c d"),
              FromText("b a")};
    }
    for (const auto& [id, v] : *ScoreBleuVar(ctx, 4)) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 12.0);
    }
  }
}

TEST(StrategyPropertyTest, CosineScaleInvariance) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 30; ++t) {
    StrategyContext ctx = RandomGenerationContext(rng, 9);
    StrategyContext scaled = ctx;
    const double c = 0.1 + static_cast<double>(rng() % 100);
    for (auto& [id, e] : scaled.embeddings) {
      for (double& x : e) x *= c;
    }
    EXPECT_EQ(ArgsortDesc(*ScoreIdds(ctx, 1.0)),
              ArgsortDesc(*ScoreIdds(scaled, 1.0)));
    EXPECT_EQ(ArgsortDesc(*ScoreHuds(ctx, 0.5, 3)),
              ArgsortDesc(*ScoreHuds(scaled, 0.5, 3)));
  }
}

testing::Points RandomPoints(std::mt19937_64& rng, size_t n, size_t dim) {
  std::normal_distribution<double> normal;
  testing::Points pts(n, std::vector<double>(dim));
  for (auto& p : pts) {
    for (double& x : p) x = normal(rng);
  }
  return pts;
}

StrategyContext EmbeddingContext(const testing::Points& pts) {
  StrategyContext ctx;
  for (size_t i = 0; i < pts.size(); ++i) {
    const std::string id = "p" + std::to_string(i);
    ctx.unlabeled.push_back({id, ""});
    ctx.embeddings[id] = pts[i];
  }
  return ctx;
}

std::vector<size_t> Indices(const std::vector<std::string>& ids) {
  std::vector<size_t> out;
  for (const auto& id : ids) out.push_back(std::stoul(id.substr(1)));
  return out;
}

TEST(StrategyPropertyTest, FacilityLocationGreedyTrace) {
  std::mt19937_64 rng(37);
  for (int t = 0; t < 40; ++t) {
    const testing::Points pts = RandomPoints(rng, 3 + rng() % 6, 3);
    const auto order = Indices(*SelectFacilityLocation(EmbeddingContext(pts),
                                                       pts.size()));
    testing::Points unit = pts;
    for (auto& p : unit) {
      double norm = 0.0;
      for (double x : p) norm += x * x;
      for (double& x : p) x /= std::sqrt(norm);
    }
    double prev_value = 0.0;
    double prev_gain = std::numeric_limits<double>::infinity();
    for (size_t k = 1; k <= order.size(); ++k) {
      const double v = testing::FacilityValue(
          pts, std::vector<size_t>(order.begin(), order.begin() + k));
      EXPECT_NEAR(v, FacilityLocationValue(unit, std::vector<size_t>(
                                                     order.begin(),
                                                     order.begin() + k)),
                  1e-12);
      EXPECT_GE(v, prev_value - 1e-12);
      EXPECT_LE(v - prev_value, prev_gain + 1e-12);
      prev_gain = v - prev_value;
      prev_value = v;
    }
  }
}

TEST(StrategyPropertyTest, GreedyApproximationBounds) {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 50; ++t) {
    const size_t n = 2 + rng() % 7;
    const size_t k = 1 + rng() % (n - 1);
    const testing::Points pts = RandomPoints(rng, n, 2 + rng() % 3);
    const auto fl = Indices(*SelectFacilityLocation(EmbeddingContext(pts), k));
    EXPECT_GE(testing::FacilityValue(pts, fl) + 1e-12,
              (1.0 - 1.0 / std::exp(1.0)) * testing::FacilityOpt(pts, k));
    const auto cs = Indices(*SelectCoreset(EmbeddingContext(pts), k));
    EXPECT_LE(testing::CoveringRadius(pts, {}, cs),
              2.0 * testing::CoresetOpt(pts, {}, k) + 1e-12);
  }
}

TEST(RegistryTest, BuiltinsAndRegistration) {
  auto& r = StrategyRegistry::Global();
  EXPECT_THAT(r.Names(), ::testing::IsSupersetOf(
                             {"random", "nsp", "mean_token_entropy", "te_delfy",
                              "bleuvar", "coreset", "idds", "facility_location",
                              "huds"}));
  for (const char* name : {"random", "coreset", "idds", "facility_location"}) {
    EXPECT_TRUE(r.Find(name)->model_free) << name;
    EXPECT_FALSE(r.Find(name)->needs.generations) << name;
  }
  EXPECT_TRUE(r.Find("bleuvar")->needs.sampled_generations);
  EXPECT_TRUE(r.Find("huds")->needs.embeddings);
  EXPECT_EQ(r.Register({"random", {}, r.Find("random")->select, true}).code(),
            absl::StatusCode::kAlreadyExists);
  StrategyInfo custom{"first_id_test", {}, nullptr, true};
  custom.select = [](const StrategyContext& ctx, size_t k)
      -> absl::StatusOr<std::vector<std::string>> {
    std::vector<std::string> ids;
    for (const auto& u : ctx.unlabeled) ids.push_back(u.id);
    std::sort(ids.begin(), ids.end());
    ids.resize(std::min(k, ids.size()));
    return ids;
  };
  ASSERT_TRUE(r.Register(custom).ok());
  EXPECT_NE(r.Find("first_id_test"), nullptr);
}

}  // namespace
}  // namespace textal
