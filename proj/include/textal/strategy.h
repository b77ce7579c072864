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

// Query strategies.
//
// A scoring strategy maps every unlabeled instance to a finite score (higher
// means more informative) and the batch is the top-k by score. Greedy
// selection strategies (coreset, facility location) build the batch
// directly. All ties are broken by ascending id, and every strategy treats
// the unlabeled pool as a set: permuting it permutes the output.

#ifndef TEXTAL_STRATEGY_H_
#define TEXTAL_STRATEGY_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "textal/backend.h"

namespace textal {

struct PoolItem {
  std::string id;
  std::string input;
};

struct LabeledItem {
  std::string id;
  std::string input;
  std::string annotation;
};

// Everything a strategy may look at for one query round.
struct StrategyContext {
  std::vector<PoolItem> unlabeled;
  std::vector<LabeledItem> labeled;
  // Keyed by id. Covers labeled and unlabeled ids when the strategy needs
  // embeddings.
  std::unordered_map<std::string, std::vector<double>> embeddings;
  // Keyed by unlabeled id. One greedy sample, or k stochastic samples for
  // BLEUVar.
  std::unordered_map<std::string, std::vector<GenerationResult>> generations;
  std::map<std::string, double> params;
  uint64_t seed = 0;

  double Param(const std::string& key, double fallback) const;
};

// (id, score) pairs in unlabeled-pool order.
using ScoreVector = std::vector<std::pair<std::string, double>>;

// Ids of the k largest scores; ties by ascending id; k clamped to the size.
std::vector<std::string> SelectTopK(const ScoreVector& scores, size_t k);

// The seeded permutation underlying score_random: ids sorted ascending, then
// shuffled with mt19937_64(seed).
std::vector<std::string> SeededPermutation(std::vector<std::string> ids,
                                           uint64_t seed);

// Score (n - position) / n for the permutation position, so the first element
// of the permutation scores highest.
absl::StatusOr<ScoreVector> ScoreRandom(const StrategyContext& ctx);

// 1 - exp(mean token logprob) of the greedy generation; 0 for an empty one.
absl::StatusOr<ScoreVector> ScoreNsp(const StrategyContext& ctx);

// Mean over positions of the entropy (nats) of the reported alternatives
// plus a residual bucket holding the unreported mass.
absl::StatusOr<ScoreVector> ScoreMeanTokenEntropy(const StrategyContext& ctx);

// Per-token delfy weight ln(1 + count_unlabeled) * exp(-decay *
// count_labeled).
double DelfyWeight(int64_t count_unlabeled, int64_t count_labeled,
                   double decay);

// alpha * normrank(TE) + (1 - alpha) * normrank(delfy).
absl::StatusOr<ScoreVector> ScoreTeDelfy(const StrategyContext& ctx,
                                         double alpha, double decay);

// Sum over ordered pairs i != j of (1 - BLEU(y_i, y_j))^2 across the first
// k_samples cached samples.
absl::StatusOr<ScoreVector> ScoreBleuVar(const StrategyContext& ctx,
                                         int k_samples);

// Greedy k-center over Euclidean distances, with labeled points as fixed
// centers. With no labeled points the first pick is the smallest id.
absl::StatusOr<std::vector<std::string>> SelectCoreset(
    const StrategyContext& ctx, size_t k);

// mean cos(x, U) - lambda * mean cos(x, L); the second term is 0 for an empty
// labeled pool. U includes x itself.
absl::StatusOr<ScoreVector> ScoreIdds(const StrategyContext& ctx,
                                      double lambda);

// Greedy maximization of sum_{i in U} max_{j in S} max(cos(e_i, e_j), 0).
// Labeled instances are treated as part of S from the start.
absl::StatusOr<std::vector<std::string>> SelectFacilityLocation(
    const StrategyContext& ctx, size_t k);

// Hybrid uncertainty-diversity: beta * u + (1 - beta) * (1 - cos(e_x, c_s))
// where u is the min-max normalized mean negative log-likelihood and c_s the
// centroid of x's uncertainty stratum.
absl::StatusOr<ScoreVector> ScoreHuds(const StrategyContext& ctx, double beta,
                                      int num_strata);

// Facility-location objective f(S) over the given unit vectors; exposed for
// tests and diagnostics.
double FacilityLocationValue(const std::vector<std::vector<double>>& points,
                             const std::vector<size_t>& selected);

struct StrategyRequirements {
  bool embeddings = false;
  // One greedy generation per unlabeled instance.
  bool generations = false;
  // bleuvar_k_samples stochastic samples per unlabeled instance.
  bool sampled_generations = false;
};

using SelectFn = std::function<absl::StatusOr<std::vector<std::string>>(
    const StrategyContext&, size_t)>;

struct StrategyInfo {
  std::string name;
  StrategyRequirements needs;
  SelectFn select;
  // Experimental-design strategies never need the acquisition model.
  bool model_free = false;
};

// Strategy lookup by config id. Built-in ids: random, nsp,
// mean_token_entropy, te_delfy, bleuvar, coreset, idds, facility_location,
// huds. New strategies register a name, requirements and a selection entry.
class StrategyRegistry {
 public:
  static StrategyRegistry& Global();

  // kAlreadyExists when the name is taken.
  absl::Status Register(StrategyInfo info);
  const StrategyInfo* Find(const std::string& name) const;
  std::vector<std::string> Names() const;

 private:
  StrategyRegistry();
  mutable std::shared_mutex mu_;
  std::map<std::string, StrategyInfo> strategies_;
};

// Parameter keys read from StrategyContext::params.
inline constexpr char kParamTeDelfyAlpha[] = "te_delfy_alpha";
inline constexpr char kParamTeDelfyDecay[] = "te_delfy_lambda";
inline constexpr char kParamIddsLambda[] = "idds_lambda";
inline constexpr char kParamHudsBeta[] = "huds_beta";
inline constexpr char kParamHudsStrata[] = "huds_num_strata";
inline constexpr char kParamBleuVarSamples[] = "bleuvar_k_samples";
inline constexpr char kParamBleuVarTemperature[] = "bleuvar_temperature";

}  // namespace textal

#endif  // TEXTAL_STRATEGY_H_
