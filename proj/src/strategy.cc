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

#include "textal/strategy.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "absl/strings/str_cat.h"
#include "textal/hash.h"
#include "textal/logging.h"
#include "textal/metrics.h"
#include "textal/status_macros.h"

namespace textal {
namespace {

using Vec = std::vector<double>;

double Dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Vec Normalized(const Vec& v) {
  const double n = std::sqrt(Dot(v, v));
  Vec out = v;
  if (n > 0.0) {
    for (double& x : out) x /= n;
  }
  return out;
}

double SquaredDistance(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

absl::StatusOr<const Vec*> EmbeddingOf(const StrategyContext& ctx,
                                       const std::string& id) {
  auto it = ctx.embeddings.find(id);
  if (it == ctx.embeddings.end()) {
    return absl::FailedPreconditionError(
        absl::StrCat("context error: missing embedding for ", id));
  }
  return &it->second;
}

// Unit vectors for the unlabeled pool (in pool order) and the labeled pool.
struct UnitEmbeddings {
  std::vector<Vec> unlabeled;
  std::vector<Vec> labeled;
};

absl::StatusOr<UnitEmbeddings> CollectUnitEmbeddings(
    const StrategyContext& ctx, bool with_labeled) {
  UnitEmbeddings out;
  for (const PoolItem& item : ctx.unlabeled) {
    ASSIGN_OR_RETURN(const Vec* v, EmbeddingOf(ctx, item.id));
    out.unlabeled.push_back(Normalized(*v));
  }
  if (with_labeled) {
    for (const LabeledItem& item : ctx.labeled) {
      ASSIGN_OR_RETURN(const Vec* v, EmbeddingOf(ctx, item.id));
      out.labeled.push_back(Normalized(*v));
    }
  }
  return out;
}

absl::StatusOr<const GenerationResult*> GreedyGeneration(
    const StrategyContext& ctx, const std::string& id) {
  auto it = ctx.generations.find(id);
  if (it == ctx.generations.end() || it->second.empty()) {
    return absl::FailedPreconditionError(
        absl::StrCat("context error: missing generation for ", id));
  }
  return &it->second.front();
}

double MeanNegativeLogLikelihood(const GenerationResult& g) {
  if (g.token_logprobs.empty()) return 0.0;
  double sum = 0.0;
  for (double lp : g.token_logprobs) sum += lp;
  return -sum / static_cast<double>(g.token_logprobs.size());
}

absl::StatusOr<double> MeanTokenEntropy(const GenerationResult& g,
                                        const std::string& id) {
  if (g.tokens.empty()) return 0.0;
  if (g.top_alternatives.size() != g.tokens.size()) {
    return absl::UnimplementedError(absl::StrCat(
        "capability error: no top alternatives cached for ", id));
  }
  double total = 0.0;
  for (const auto& position : g.top_alternatives) {
    if (position.empty()) {
      return absl::UnimplementedError(absl::StrCat(
          "capability error: no top alternatives cached for ", id));
    }
    double mass = 0.0;
    double h = 0.0;
    for (const TokenAlternative& alt : position) {
      const double p = std::exp(alt.logprob);
      mass += p;
      if (p > 0.0) h -= p * alt.logprob;
    }
    const double residual = 1.0 - mass;
    if (residual > 0.0) h -= residual * std::log(residual);
    total += h;
  }
  return total / static_cast<double>(g.top_alternatives.size());
}

// Maps values to [0, 1] by rank: the largest value gets 1, the smallest 0;
// equal values are ordered by ascending id.
std::vector<double> NormRank(const std::vector<PoolItem>& items,
                             const std::vector<double>& values) {
  const size_t n = items.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (values[a] != values[b]) return values[a] > values[b];
    return items[a].id < items[b].id;
  });
  std::vector<double> ranks(n, 1.0);
  if (n <= 1) return ranks;
  for (size_t pos = 0; pos < n; ++pos) {
    ranks[order[pos]] =
        1.0 - static_cast<double>(pos) / static_cast<double>(n - 1);
  }
  return ranks;
}

ScoreVector Zip(const std::vector<PoolItem>& items,
                const std::vector<double>& values) {
  ScoreVector out;
  out.reserve(items.size());
  for (size_t i = 0; i < items.size(); ++i) {
    out.emplace_back(items[i].id, values[i]);
  }
  return out;
}

size_t ClampK(size_t k, size_t available, const char* strategy) {
  if (k > available) {
    LogWarning(absl::StrCat(strategy, ": k=", k, " exceeds ", available,
                            " unlabeled instances; clamped"));
    return available;
  }
  return k;
}

}  // namespace

double StrategyContext::Param(const std::string& key, double fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

std::vector<std::string> SelectTopK(const ScoreVector& scores, size_t k) {
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (scores[a].second != scores[b].second) {
      return scores[a].second > scores[b].second;
    }
    return scores[a].first < scores[b].first;
  });
  k = std::min(k, scores.size());
  std::vector<std::string> out;
  out.reserve(k);
  for (size_t i = 0; i < k; ++i) out.push_back(scores[order[i]].first);
  return out;
}

std::vector<std::string> SeededPermutation(std::vector<std::string> ids,
                                           uint64_t seed) {
  std::sort(ids.begin(), ids.end());
  SeededShuffle(ids, seed);
  return ids;
}

absl::StatusOr<ScoreVector> ScoreRandom(const StrategyContext& ctx) {
  std::vector<std::string> ids;
  for (const PoolItem& item : ctx.unlabeled) ids.push_back(item.id);
  const std::vector<std::string> perm = SeededPermutation(ids, ctx.seed);
  const double n = static_cast<double>(perm.size());
  std::unordered_map<std::string, double> score;
  for (size_t pos = 0; pos < perm.size(); ++pos) {
    score[perm[pos]] = (n - static_cast<double>(pos)) / n;
  }
  ScoreVector out;
  for (const PoolItem& item : ctx.unlabeled) {
    out.emplace_back(item.id, score[item.id]);
  }
  return out;
}

absl::StatusOr<ScoreVector> ScoreNsp(const StrategyContext& ctx) {
  ScoreVector out;
  for (const PoolItem& item : ctx.unlabeled) {
    ASSIGN_OR_RETURN(const GenerationResult* g, GreedyGeneration(ctx, item.id));
    if (!g->tokens.empty() && g->token_logprobs.empty()) {
      return absl::UnimplementedError(absl::StrCat(
          "capability error: no token log-probabilities for ", item.id));
    }
    const double score =
        g->token_logprobs.empty()
            ? 0.0
            : 1.0 - std::exp(-MeanNegativeLogLikelihood(*g));
    out.emplace_back(item.id, score);
  }
  return out;
}

absl::StatusOr<ScoreVector> ScoreMeanTokenEntropy(const StrategyContext& ctx) {
  ScoreVector out;
  for (const PoolItem& item : ctx.unlabeled) {
    ASSIGN_OR_RETURN(const GenerationResult* g, GreedyGeneration(ctx, item.id));
    ASSIGN_OR_RETURN(double h, MeanTokenEntropy(*g, item.id));
    out.emplace_back(item.id, h);
  }
  return out;
}

double DelfyWeight(int64_t count_unlabeled, int64_t count_labeled,
                   double decay) {
  return std::log1p(static_cast<double>(count_unlabeled)) *
         std::exp(-decay * static_cast<double>(count_labeled));
}

absl::StatusOr<ScoreVector> ScoreTeDelfy(const StrategyContext& ctx,
                                         double alpha, double decay) {
  std::vector<double> te;
  for (const PoolItem& item : ctx.unlabeled) {
    ASSIGN_OR_RETURN(const GenerationResult* g, GreedyGeneration(ctx, item.id));
    ASSIGN_OR_RETURN(double h, MeanTokenEntropy(*g, item.id));
    te.push_back(h);
  }
  std::unordered_map<std::string, int64_t> count_u;
  std::unordered_map<std::string, int64_t> count_l;
  std::vector<std::vector<std::string>> tokens;
  for (const PoolItem& item : ctx.unlabeled) {
    tokens.push_back(MetricTokens(item.input));
    for (const std::string& t : tokens.back()) ++count_u[t];
  }
  for (const LabeledItem& item : ctx.labeled) {
    for (const std::string& t : MetricTokens(item.input)) ++count_l[t];
  }
  std::vector<double> delfy;
  for (const auto& toks : tokens) {
    double sum = 0.0;
    for (const std::string& t : toks) {
      auto l = count_l.find(t);
      sum += DelfyWeight(count_u[t], l == count_l.end() ? 0 : l->second, decay);
    }
    delfy.push_back(toks.empty() ? 0.0 : sum / static_cast<double>(toks.size()));
  }
  const std::vector<double> te_rank = NormRank(ctx.unlabeled, te);
  const std::vector<double> delfy_rank = NormRank(ctx.unlabeled, delfy);
  std::vector<double> combined(te.size());
  for (size_t i = 0; i < te.size(); ++i) {
    combined[i] = alpha * te_rank[i] + (1.0 - alpha) * delfy_rank[i];
  }
  return Zip(ctx.unlabeled, combined);
}

absl::StatusOr<ScoreVector> ScoreBleuVar(const StrategyContext& ctx,
                                         int k_samples) {
  if (k_samples < 1) {
    return absl::InvalidArgumentError("bleuvar needs k_samples >= 1");
  }
  ScoreVector out;
  for (const PoolItem& item : ctx.unlabeled) {
    auto it = ctx.generations.find(item.id);
    if (it == ctx.generations.end() ||
        it->second.size() < static_cast<size_t>(k_samples)) {
      return absl::FailedPreconditionError(absl::StrCat(
          "context error: fewer than ", k_samples, " samples cached for ",
          item.id));
    }
    std::vector<std::vector<std::string>> samples;
    for (int i = 0; i < k_samples; ++i) {
      samples.push_back(MetricTokens(it->second[i].text));
    }
    double var = 0.0;
    for (int i = 0; i < k_samples; ++i) {
      for (int j = 0; j < k_samples; ++j) {
        if (i == j) continue;
        const double d = 1.0 - SentenceBleu(samples[i], samples[j]);
        var += d * d;
      }
    }
    out.emplace_back(item.id, var);
  }
  return out;
}

absl::StatusOr<std::vector<std::string>> SelectCoreset(
    const StrategyContext& ctx, size_t k) {
  k = ClampK(k, ctx.unlabeled.size(), "coreset");
  std::vector<const Vec*> pool;
  for (const PoolItem& item : ctx.unlabeled) {
    ASSIGN_OR_RETURN(const Vec* v, EmbeddingOf(ctx, item.id));
    pool.push_back(v);
  }
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> min_dist(pool.size(), inf);
  for (const LabeledItem& item : ctx.labeled) {
    ASSIGN_OR_RETURN(const Vec* c, EmbeddingOf(ctx, item.id));
    for (size_t i = 0; i < pool.size(); ++i) {
      min_dist[i] = std::min(min_dist[i], SquaredDistance(*pool[i], *c));
    }
  }
  std::vector<bool> taken(pool.size(), false);
  std::vector<std::string> selected;
  while (selected.size() < k) {
    size_t best = pool.size();
    for (size_t i = 0; i < pool.size(); ++i) {
      if (taken[i]) continue;
      if (best == pool.size() || min_dist[i] > min_dist[best] ||
          (min_dist[i] == min_dist[best] &&
           ctx.unlabeled[i].id < ctx.unlabeled[best].id)) {
        best = i;
      }
    }
    taken[best] = true;
    selected.push_back(ctx.unlabeled[best].id);
    for (size_t i = 0; i < pool.size(); ++i) {
      min_dist[i] = std::min(min_dist[i], SquaredDistance(*pool[i], *pool[best]));
    }
  }
  return selected;
}

absl::StatusOr<ScoreVector> ScoreIdds(const StrategyContext& ctx,
                                      double lambda) {
  ASSIGN_OR_RETURN(UnitEmbeddings e, CollectUnitEmbeddings(ctx, true));
  if (e.unlabeled.empty()) return ScoreVector{};
  const size_t dim = e.unlabeled.front().size();
  // mean_u cos(x, u) = x . (sum_u u) / |U| for unit vectors.
  Vec sum_u(dim, 0.0);
  Vec sum_l(dim, 0.0);
  for (const Vec& v : e.unlabeled) {
    for (size_t d = 0; d < dim; ++d) sum_u[d] += v[d];
  }
  for (const Vec& v : e.labeled) {
    for (size_t d = 0; d < dim; ++d) sum_l[d] += v[d];
  }
  std::vector<double> scores;
  for (const Vec& x : e.unlabeled) {
    double s = Dot(x, sum_u) / static_cast<double>(e.unlabeled.size());
    if (!e.labeled.empty()) {
      s -= lambda * Dot(x, sum_l) / static_cast<double>(e.labeled.size());
    }
    scores.push_back(s);
  }
  return Zip(ctx.unlabeled, scores);
}

double FacilityLocationValue(const std::vector<std::vector<double>>& points,
                             const std::vector<size_t>& selected) {
  double total = 0.0;
  for (const Vec& p : points) {
    double best = 0.0;
    for (size_t j : selected) best = std::max(best, Dot(p, points[j]));
    total += best;
  }
  return total;
}

absl::StatusOr<std::vector<std::string>> SelectFacilityLocation(
    const StrategyContext& ctx, size_t k) {
  k = ClampK(k, ctx.unlabeled.size(), "facility_location");
  ASSIGN_OR_RETURN(UnitEmbeddings e, CollectUnitEmbeddings(ctx, true));
  const size_t n = e.unlabeled.size();
  std::vector<double> sim(n * n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i; j < n; ++j) {
      const double s = std::max(Dot(e.unlabeled[i], e.unlabeled[j]), 0.0);
      sim[i * n + j] = s;
      sim[j * n + i] = s;
    }
  }
  // Labeled instances count as already selected.
  std::vector<double> coverage(n, 0.0);
  for (const Vec& l : e.labeled) {
    for (size_t i = 0; i < n; ++i) {
      coverage[i] = std::max(coverage[i], Dot(e.unlabeled[i], l));
    }
  }
  std::vector<bool> taken(n, false);
  std::vector<std::string> selected;
  while (selected.size() < k) {
    size_t best = n;
    double best_gain = -1.0;
    for (size_t c = 0; c < n; ++c) {
      if (taken[c]) continue;
      double gain = 0.0;
      const double* row = &sim[c * n];
      for (size_t i = 0; i < n; ++i) {
        if (row[i] > coverage[i]) gain += row[i] - coverage[i];
      }
      if (gain > best_gain ||
          (gain == best_gain && ctx.unlabeled[c].id < ctx.unlabeled[best].id)) {
        best = c;
        best_gain = gain;
      }
    }
    taken[best] = true;
    selected.push_back(ctx.unlabeled[best].id);
    const double* row = &sim[best * n];
    for (size_t i = 0; i < n; ++i) coverage[i] = std::max(coverage[i], row[i]);
  }
  return selected;
}

absl::StatusOr<ScoreVector> ScoreHuds(const StrategyContext& ctx, double beta,
                                      int num_strata) {
  if (num_strata < 1) {
    return absl::InvalidArgumentError("huds needs num_strata >= 1");
  }
  const size_t n = ctx.unlabeled.size();
  std::vector<double> u(n);
  for (size_t i = 0; i < n; ++i) {
    ASSIGN_OR_RETURN(const GenerationResult* g,
                     GreedyGeneration(ctx, ctx.unlabeled[i].id));
    u[i] = MeanNegativeLogLikelihood(*g);
  }
  ASSIGN_OR_RETURN(UnitEmbeddings e, CollectUnitEmbeddings(ctx, false));
  if (n == 0) return ScoreVector{};

  const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
  const double min_u = *lo;
  const double range = *hi - *lo;
  for (double& x : u) x = range > 0.0 ? (x - min_u) / range : 0.5;

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (u[a] != u[b]) return u[a] > u[b];
    return ctx.unlabeled[a].id < ctx.unlabeled[b].id;
  });
  // Contiguous strata; the first n % strata strata get one extra member.
  const size_t strata = static_cast<size_t>(num_strata);
  const size_t base = n / strata;
  const size_t extra = n % strata;
  std::vector<size_t> stratum_of(n);
  size_t pos = 0;
  const size_t dim = e.unlabeled.front().size();
  std::vector<Vec> centroid(strata, Vec(dim, 0.0));
  for (size_t s = 0; s < strata; ++s) {
    const size_t size = base + (s < extra ? 1 : 0);
    for (size_t m = 0; m < size; ++m, ++pos) {
      const size_t i = order[pos];
      stratum_of[i] = s;
      for (size_t d = 0; d < dim; ++d) centroid[s][d] += e.unlabeled[i][d];
    }
    if (size > 0) {
      for (double& x : centroid[s]) x /= static_cast<double>(size);
    }
  }
  std::vector<double> scores(n);
  for (size_t i = 0; i < n; ++i) {
    const Vec& c = centroid[stratum_of[i]];
    const double norm = std::sqrt(Dot(c, c));
    const double cos = norm > 0.0 ? Dot(e.unlabeled[i], c) / norm : 0.0;
    scores[i] = beta * u[i] + (1.0 - beta) * (1.0 - cos);
  }
  return Zip(ctx.unlabeled, scores);
}

namespace {

SelectFn TopKOf(std::function<absl::StatusOr<ScoreVector>(
                    const StrategyContext&)> score) {
  return [score = std::move(score)](const StrategyContext& ctx,
                                    size_t k) -> absl::StatusOr<std::vector<std::string>> {
    ASSIGN_OR_RETURN(ScoreVector scores, score(ctx));
    return SelectTopK(scores, k);
  };
}

}  // namespace

StrategyRegistry::StrategyRegistry() {
  auto add = [this](std::string name, StrategyRequirements needs, SelectFn fn,
                    bool model_free) {
    strategies_.emplace(name, StrategyInfo{name, needs, std::move(fn),
                                           model_free});
  };
  add("random", {}, TopKOf(ScoreRandom), true);
  add("nsp", {.generations = true}, TopKOf(ScoreNsp), false);
  add("mean_token_entropy", {.generations = true},
      TopKOf(ScoreMeanTokenEntropy), false);
  add("te_delfy", {.generations = true},
      TopKOf([](const StrategyContext& ctx) {
        return ScoreTeDelfy(ctx, ctx.Param(kParamTeDelfyAlpha, 0.5),
                            ctx.Param(kParamTeDelfyDecay, 1.0));
      }),
      false);
  add("bleuvar", {.sampled_generations = true},
      TopKOf([](const StrategyContext& ctx) {
        return ScoreBleuVar(
            ctx, static_cast<int>(ctx.Param(kParamBleuVarSamples, 5)));
      }),
      false);
  add("coreset", {.embeddings = true}, SelectCoreset, true);
  add("idds", {.embeddings = true},
      TopKOf([](const StrategyContext& ctx) {
        return ScoreIdds(ctx, ctx.Param(kParamIddsLambda, 1.0));
      }),
      true);
  add("facility_location", {.embeddings = true}, SelectFacilityLocation, true);
  add("huds", {.embeddings = true, .generations = true},
      TopKOf([](const StrategyContext& ctx) {
        return ScoreHuds(ctx, ctx.Param(kParamHudsBeta, 0.5),
                         static_cast<int>(ctx.Param(kParamHudsStrata, 5)));
      }),
      false);
}

StrategyRegistry& StrategyRegistry::Global() {
  static auto* registry = new StrategyRegistry();
  return *registry;
}

absl::Status StrategyRegistry::Register(StrategyInfo info) {
  if (info.name.empty() || !info.select) {
    return absl::InvalidArgumentError("strategy needs a name and a selector");
  }
  std::unique_lock lock(mu_);
  if (strategies_.count(info.name)) {
    return absl::AlreadyExistsError(
        absl::StrCat("strategy already registered: ", info.name));
  }
  std::string name = info.name;
  strategies_.emplace(std::move(name), std::move(info));
  return absl::OkStatus();
}

const StrategyInfo* StrategyRegistry::Find(const std::string& name) const {
  std::shared_lock lock(mu_);
  auto it = strategies_.find(name);
  return it == strategies_.end() ? nullptr : &it->second;
}

std::vector<std::string> StrategyRegistry::Names() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> names;
  for (const auto& [name, info] : strategies_) names.push_back(name);
  return names;
}

}  // namespace textal
