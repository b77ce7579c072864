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

#ifndef TEXTAL_POOL_STATE_H_
#define TEXTAL_POOL_STATE_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "textal/dataset.h"

namespace textal {

struct Annotation {
  std::string text;
  // Human annotator id, model name, or "oracle".
  std::string annotator;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

// Partition of a dataset into labeled / unlabeled / test ids.
//
// Invariants: the three id lists are pairwise disjoint and together cover the
// dataset; `annotations` has exactly the labeled ids as keys; `iteration`
// counts completed query-label-train rounds.
struct PoolState {
  std::vector<std::string> labeled_ids;  // selection order
  std::vector<std::string> unlabeled_ids;
  std::vector<std::string> test_ids;
  std::map<std::string, Annotation> annotations;
  int iteration = 0;
  std::string model_ref;
  uint64_t rng_seed = 0;

  friend bool operator==(const PoolState&, const PoolState&) = default;
};

// Returns kInternal describing the first violated invariant.
absl::Status CheckPartition(const PoolState& state, const Dataset& dataset);

// Seeded shuffle of the dataset; the first ceil(test_fraction * N) ids become
// test ids, the rest unlabeled.
absl::StatusOr<PoolState> InitSplit(const Dataset& dataset,
                                    double test_fraction, uint64_t seed,
                                    std::string model_ref = "base");

// Variant for a separately supplied test file: every instance of `dataset`
// goes to the unlabeled pool, `test_ids` must name instances of `dataset`
// that were loaded from the test file.
absl::StatusOr<PoolState> InitSplitWithTestIds(
    const Dataset& dataset, const std::vector<std::string>& test_ids,
    uint64_t seed, std::string model_ref = "base");

// A batch size given either as a fraction in (0, 1) of a reference pool or
// as an absolute count >= 1.
struct BatchSizeSpec {
  double value = 0.01;
};

// Fraction: ceil(value * reference_pool_size). Absolute: round(value).
// The result is clamped to `unlabeled_size`.
absl::StatusOr<size_t> ResolveBatchSize(BatchSizeSpec spec,
                                        size_t reference_pool_size,
                                        size_t unlabeled_size);

struct AnnotatedId {
  std::string id;
  std::string annotation;
  std::string annotator;
};

struct MoveResult {
  std::vector<std::string> moved;
  // Ids whose annotation was empty. They stay unlabeled.
  std::vector<std::string> skipped;
};

// Moves annotated ids from unlabeled to labeled, preserving the given order.
// On kFailedPrecondition (an id not currently unlabeled, or repeated) the
// state is left untouched.
absl::StatusOr<MoveResult> MoveToLabeled(PoolState& state,
                                         const std::vector<AnnotatedId>& batch);

nlohmann::json PoolStateToJson(const PoolState& state);
absl::StatusOr<PoolState> PoolStateFromJson(const nlohmann::json& doc);

}  // namespace textal

#endif  // TEXTAL_POOL_STATE_H_
