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

#include "textal/pool_state.h"

#include <cmath>
#include <set>
#include <unordered_set>

#include "absl/strings/str_cat.h"
#include "textal/hash.h"

namespace textal {

using nlohmann::json;

absl::Status CheckPartition(const PoolState& state, const Dataset& dataset) {
  std::unordered_set<std::string> seen;
  size_t total = 0;
  for (const auto* ids :
       {&state.labeled_ids, &state.unlabeled_ids, &state.test_ids}) {
    for (const std::string& id : *ids) {
      if (!dataset.Contains(id)) {
        return absl::InternalError(absl::StrCat("unknown id in pool: ", id));
      }
      if (!seen.insert(id).second) {
        return absl::InternalError(absl::StrCat("id in two sets: ", id));
      }
      ++total;
    }
  }
  if (total != dataset.size()) {
    return absl::InternalError(absl::StrCat("partition covers ", total,
                                            " of ", dataset.size(), " ids"));
  }
  if (state.annotations.size() != state.labeled_ids.size()) {
    return absl::InternalError("annotation count differs from labeled count");
  }
  for (const std::string& id : state.labeled_ids) {
    if (!state.annotations.count(id)) {
      return absl::InternalError(
          absl::StrCat("labeled id without annotation: ", id));
    }
  }
  if (state.iteration < 0) return absl::InternalError("negative iteration");
  return absl::OkStatus();
}

absl::StatusOr<PoolState> InitSplit(const Dataset& dataset,
                                    double test_fraction, uint64_t seed,
                                    std::string model_ref) {
  if (dataset.empty()) {
    return absl::InvalidArgumentError("cannot split an empty dataset");
  }
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("config error: test fraction must be in [0, 1), got ",
                     test_fraction));
  }
  std::vector<std::string> ids = dataset.Ids();
  SeededShuffle(ids, seed);
  const size_t n_test = static_cast<size_t>(
      std::ceil(test_fraction * static_cast<double>(ids.size())));
  PoolState state;
  state.test_ids.assign(ids.begin(), ids.begin() + n_test);
  state.unlabeled_ids.assign(ids.begin() + n_test, ids.end());
  state.rng_seed = seed;
  state.model_ref = std::move(model_ref);
  return state;
}

absl::StatusOr<PoolState> InitSplitWithTestIds(
    const Dataset& dataset, const std::vector<std::string>& test_ids,
    uint64_t seed, std::string model_ref) {
  std::set<std::string> test(test_ids.begin(), test_ids.end());
  for (const std::string& id : test) {
    if (!dataset.Contains(id)) {
      return absl::InvalidArgumentError(
          absl::StrCat("test id not in dataset: ", id));
    }
  }
  std::vector<std::string> pool;
  for (const Instance& inst : dataset.instances()) {
    if (!test.count(inst.id)) pool.push_back(inst.id);
  }
  if (pool.empty()) {
    return absl::InvalidArgumentError("no training instances to pool");
  }
  SeededShuffle(pool, seed);
  PoolState state;
  state.test_ids = test_ids;
  state.unlabeled_ids = std::move(pool);
  state.rng_seed = seed;
  state.model_ref = std::move(model_ref);
  return state;
}

absl::StatusOr<size_t> ResolveBatchSize(BatchSizeSpec spec,
                                        size_t reference_pool_size,
                                        size_t unlabeled_size) {
  if (!(spec.value > 0.0) || !std::isfinite(spec.value)) {
    return absl::InvalidArgumentError(
        absl::StrCat("config error: batch size must be positive, got ",
                     spec.value));
  }
  size_t count;
  if (spec.value < 1.0) {
    count = static_cast<size_t>(
        std::ceil(spec.value * static_cast<double>(reference_pool_size)));
  } else {
    count = static_cast<size_t>(std::llround(spec.value));
  }
  return std::min(count, unlabeled_size);
}

absl::StatusOr<MoveResult> MoveToLabeled(
    PoolState& state, const std::vector<AnnotatedId>& batch) {
  std::unordered_set<std::string> unlabeled(state.unlabeled_ids.begin(),
                                            state.unlabeled_ids.end());
  std::unordered_set<std::string> in_batch;
  for (const AnnotatedId& item : batch) {
    if (!unlabeled.count(item.id)) {
      return absl::FailedPreconditionError(
          absl::StrCat("state error: id is not unlabeled: ", item.id));
    }
    if (!in_batch.insert(item.id).second) {
      return absl::FailedPreconditionError(
          absl::StrCat("state error: id repeated in batch: ", item.id));
    }
  }
  MoveResult result;
  std::unordered_set<std::string> moving;
  for (const AnnotatedId& item : batch) {
    if (item.annotation.empty()) {
      result.skipped.push_back(item.id);
      continue;
    }
    moving.insert(item.id);
    result.moved.push_back(item.id);
    state.labeled_ids.push_back(item.id);
    state.annotations[item.id] = Annotation{item.annotation, item.annotator};
  }
  std::erase_if(state.unlabeled_ids,
                [&](const std::string& id) { return moving.count(id) > 0; });
  return result;
}

json PoolStateToJson(const PoolState& state) {
  json annotations = json::object();
  for (const auto& [id, a] : state.annotations) {
    annotations[id] = {{"text", a.text}, {"annotator", a.annotator}};
  }
  return json{{"labeled_ids", state.labeled_ids},
              {"unlabeled_ids", state.unlabeled_ids},
              {"test_ids", state.test_ids},
              {"annotations", annotations},
              {"iteration", state.iteration},
              {"model_ref", state.model_ref},
              {"rng_seed", state.rng_seed}};
}

absl::StatusOr<PoolState> PoolStateFromJson(const json& doc) {
  try {
    PoolState state;
    state.labeled_ids = doc.at("labeled_ids").get<std::vector<std::string>>();
    state.unlabeled_ids =
        doc.at("unlabeled_ids").get<std::vector<std::string>>();
    state.test_ids = doc.at("test_ids").get<std::vector<std::string>>();
    for (const auto& [id, a] : doc.at("annotations").items()) {
      state.annotations[id] = Annotation{a.at("text").get<std::string>(),
                                         a.at("annotator").get<std::string>()};
    }
    state.iteration = doc.at("iteration").get<int>();
    state.model_ref = doc.at("model_ref").get<std::string>();
    state.rng_seed = doc.at("rng_seed").get<uint64_t>();
    return state;
  } catch (const json::exception& e) {
    return absl::DataLossError(
        absl::StrCat("integrity error: bad pool state: ", e.what()));
  }
}

}  // namespace textal
