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

// Offline rehearsal of a configured run: same loop and sizes, but every
// backend is the mock, training is the no-op adapter and the data is
// generated.

#ifndef TEXTAL_DRY_RUN_H_
#define TEXTAL_DRY_RUN_H_

#include <cstddef>
#include <filesystem>

#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "textal/orchestrator.h"
#include "textal/run_config.h"

namespace textal {

// The tree with mock backends, the no-op adapter, and an oracle in place of
// a human labeller. Everything else is kept.
nlohmann::json DryRunTree(const nlohmann::json& tree);

// `size` question/answer instances plus a separate test set of `test_size`,
// deterministic in `seed`.
absl::StatusOr<RunData> SyntheticRunData(size_t size, uint64_t seed,
                                         size_t test_size = 50);

struct DryRunReport {
  RunConfig config;
  RunResult result;
};

// Validates `tree`, rewrites it with DryRunTree and runs it to completion in
// run_dir. kInvalidArgument with `errors` filled when validation fails.
absl::StatusOr<DryRunReport> DryRun(const nlohmann::json& tree,
                                    const std::filesystem::path& run_dir,
                                    std::vector<FieldError>& errors,
                                    size_t size = 200);

}  // namespace textal

#endif  // TEXTAL_DRY_RUN_H_
