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

#include "textal/dry_run.h"

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "textal/hash.h"
#include "textal/status_macros.h"

namespace textal {

using nlohmann::json;

json DryRunTree(const json& tree) {
  json out = tree;
  out["model"]["backend"]["kind"] = "mock";
  out["embedding"]["backend"]["kind"] = "mock";
  out["labeller"]["backend"] = "mock";
  out["training"]["adapter"] = "noop";
  if (out["labeller"]["type"] == "human") out["labeller"]["type"] = "oracle";
  out["data"]["path"] = "";
  out["data"]["test_path"] = "";
  return out;
}

absl::StatusOr<RunData> SyntheticRunData(size_t size, uint64_t seed,
                                         size_t test_size) {
  std::vector<Instance> instances;
  std::vector<std::string> test_ids;
  for (size_t i = 0; i < size + test_size; ++i) {
    const uint64_t h = HashWithSeed(absl::StrCat(i), seed);
    Instance inst;
    inst.id = i < size ? absl::StrFormat("%06d", i)
                       : absl::StrFormat("test-%06d", i - size);
    if (i >= size) test_ids.push_back(inst.id);
    inst.input = absl::StrFormat("question %d about topic %d", i, h % 17);
    inst.references = {absl::StrFormat("answer %d", h % 101)};
    instances.push_back(std::move(inst));
  }
  RunData data;
  ASSIGN_OR_RETURN(data.dataset, Dataset::Create(std::move(instances)));
  if (test_size > 0) data.test_ids = std::move(test_ids);
  return data;
}

absl::StatusOr<DryRunReport> DryRun(const json& tree,
                                    const std::filesystem::path& run_dir,
                                    std::vector<FieldError>& errors,
                                    size_t size) {
  ASSIGN_OR_RETURN(RunConfig original, ResolveRunConfig(tree, errors));
  ASSIGN_OR_RETURN(RunConfig config,
                   ResolveRunConfig(DryRunTree(original.tree), errors));
  ASSIGN_OR_RETURN(RunData data, SyntheticRunData(size, config.seed));
  ASSIGN_OR_RETURN(RunDeps deps, MakeRunDeps(config));
  Orchestrator orch(config, std::move(data), std::move(deps), run_dir);
  ASSIGN_OR_RETURN(RunResult result, orch.Run());
  return DryRunReport{std::move(original), std::move(result)};
}

}  // namespace textal
