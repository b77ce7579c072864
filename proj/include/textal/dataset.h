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

#ifndef TEXTAL_DATASET_H_
#define TEXTAL_DATASET_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "absl/status/statusor.h"

namespace textal {

// One annotatable record. Immutable after load; the annotation produced
// during a run lives in PoolState, not here.
struct Instance {
  std::string id;
  std::string input;
  // Acceptable gold outputs. Several entries encode answer aliases.
  std::vector<std::string> references;
  std::map<std::string, std::string> meta;
};

// Instances plus an id index. Ids are unique.
class Dataset {
 public:
  Dataset() = default;
  // Fails with kAlreadyExists listing every duplicated id.
  static absl::StatusOr<Dataset> Create(std::vector<Instance> instances);

  const std::vector<Instance>& instances() const { return instances_; }
  size_t size() const { return instances_.size(); }
  bool empty() const { return instances_.empty(); }
  bool Contains(const std::string& id) const { return index_.count(id) > 0; }
  // Requires Contains(id).
  const Instance& Get(const std::string& id) const;
  const Instance* Find(const std::string& id) const;
  std::vector<std::string> Ids() const;

 private:
  std::vector<Instance> instances_;
  std::unordered_map<std::string, size_t> index_;
};

enum class DatasetFormat { kAuto, kCsv, kJson };

// Maps file columns/keys onto Instance fields.
struct DatasetSchema {
  std::string input_field = "input";
  // Empty: instances carry no references.
  std::string references_field;
  // Empty: ids are zero-padded row ordinals.
  std::string id_field;
  // Prepended to ordinal ids, e.g. "test-" for a separate test file.
  std::string id_prefix;
  DatasetFormat format = DatasetFormat::kAuto;
};

// Loads a CSV (UTF-8, header row) or JSON (top-level array of objects) file.
//
// Errors: kNotFound when the file is missing; kInvalidArgument naming the
// field when the input column is absent; kInvalidArgument with the row number
// for a malformed row; kAlreadyExists listing duplicate ids.
absl::StatusOr<std::vector<Instance>> LoadDataset(
    const std::filesystem::path& source, const DatasetSchema& schema);

// Same as LoadDataset but parses in-memory text of the given format.
absl::StatusOr<std::vector<Instance>> ParseDataset(std::string_view text,
                                                   DatasetFormat format,
                                                   const DatasetSchema& schema);

// RFC 4180 records. Exposed for tests.
absl::StatusOr<std::vector<std::vector<std::string>>> ParseCsv(
    std::string_view text);

}  // namespace textal

#endif  // TEXTAL_DATASET_H_
