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

#include "textal/dataset.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "nlohmann/json.hpp"
#include "textal/status_macros.h"

namespace textal {
namespace {

using nlohmann::json;

std::string OrdinalId(size_t row, size_t total, const std::string& prefix) {
  const size_t width = std::max<size_t>(6, std::to_string(total).size());
  std::string digits = std::to_string(row);
  return prefix + std::string(width - std::min(width, digits.size()), '0') +
         digits;
}

// A scalar JSON value rendered the way a CSV cell would hold it.
std::string ScalarToString(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_null()) return "";
  return value.dump();
}

absl::StatusOr<std::vector<std::string>> ReferencesFromJson(const json& value,
                                                            size_t row) {
  std::vector<std::string> refs;
  if (value.is_array()) {
    for (const json& item : value) {
      if (!item.is_string() && !item.is_number()) {
        return absl::InvalidArgumentError(
            absl::StrCat("row ", row, ": references must be strings"));
      }
      refs.push_back(ScalarToString(item));
    }
  } else if (!value.is_null()) {
    refs.push_back(ScalarToString(value));
  }
  return refs;
}

// A CSV cell holding a JSON array of strings is a list of aliases.
std::vector<std::string> ReferencesFromCell(const std::string& cell) {
  const std::string trimmed(absl::StripAsciiWhitespace(cell));
  if (!trimmed.empty() && trimmed.front() == '[') {
    json parsed = json::parse(trimmed, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_array() &&
        std::all_of(parsed.begin(), parsed.end(),
                    [](const json& v) { return v.is_string(); })) {
      return parsed.get<std::vector<std::string>>();
    }
  }
  if (cell.empty()) return {};
  return {cell};
}

absl::Status CheckUniqueIds(const std::vector<Instance>& instances) {
  std::set<std::string> seen;
  std::set<std::string> dups;
  for (const Instance& inst : instances) {
    if (!seen.insert(inst.id).second) dups.insert(inst.id);
  }
  if (!dups.empty()) {
    return absl::AlreadyExistsError(
        absl::StrCat("duplicate ids: ", absl::StrJoin(dups, ", ")));
  }
  return absl::OkStatus();
}

absl::StatusOr<std::vector<Instance>> FromCsv(std::string_view text,
                                              const DatasetSchema& schema) {
  ASSIGN_OR_RETURN(auto records, ParseCsv(text));
  if (records.empty()) {
    return absl::InvalidArgumentError("CSV has no header row");
  }
  const std::vector<std::string>& header = records.front();
  auto column = [&](const std::string& name) -> int {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  const int input_col = column(schema.input_field);
  if (input_col < 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("schema error: input field '", schema.input_field,
                     "' not found in CSV header"));
  }
  int refs_col = -1;
  if (!schema.references_field.empty()) {
    refs_col = column(schema.references_field);
    if (refs_col < 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("schema error: references field '",
                       schema.references_field, "' not found in CSV header"));
    }
  }
  int id_col = -1;
  if (!schema.id_field.empty()) {
    id_col = column(schema.id_field);
    if (id_col < 0) {
      return absl::InvalidArgumentError(absl::StrCat(
          "schema error: id field '", schema.id_field, "' not found"));
    }
  }

  const size_t rows = records.size() - 1;
  std::vector<Instance> out;
  out.reserve(rows);
  for (size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != header.size()) {
      return absl::InvalidArgumentError(
          absl::StrCat("malformed row ", r, ": expected ", header.size(),
                       " fields, got ", rec.size()));
    }
    Instance inst;
    inst.id = id_col >= 0 ? rec[id_col] : OrdinalId(r - 1, rows,
                                                     schema.id_prefix);
    if (inst.id.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("malformed row ", r, ": empty id"));
    }
    inst.input = rec[input_col];
    if (refs_col >= 0) inst.references = ReferencesFromCell(rec[refs_col]);
    for (size_t c = 0; c < header.size(); ++c) {
      const int ci = static_cast<int>(c);
      if (ci == input_col || ci == refs_col || ci == id_col) continue;
      inst.meta[header[c]] = rec[c];
    }
    out.push_back(std::move(inst));
  }
  return out;
}

absl::StatusOr<std::vector<Instance>> FromJson(std::string_view text,
                                               const DatasetSchema& schema) {
  json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) {
    return absl::InvalidArgumentError("JSON dataset is not valid JSON");
  }
  if (!doc.is_array()) {
    return absl::InvalidArgumentError(
        "JSON dataset must be a top-level array of objects");
  }
  std::vector<Instance> out;
  out.reserve(doc.size());
  for (size_t r = 0; r < doc.size(); ++r) {
    const json& obj = doc[r];
    if (!obj.is_object()) {
      return absl::InvalidArgumentError(
          absl::StrCat("malformed row ", r + 1, ": not an object"));
    }
    auto input_it = obj.find(schema.input_field);
    if (input_it == obj.end()) {
      return absl::InvalidArgumentError(
          absl::StrCat("schema error: input field '", schema.input_field,
                       "' missing in row ", r + 1));
    }
    if (!input_it->is_string()) {
      return absl::InvalidArgumentError(
          absl::StrCat("malformed row ", r + 1, ": input must be a string"));
    }
    Instance inst;
    inst.input = input_it->get<std::string>();
    if (!schema.id_field.empty()) {
      auto id_it = obj.find(schema.id_field);
      if (id_it == obj.end() || ScalarToString(*id_it).empty()) {
        return absl::InvalidArgumentError(
            absl::StrCat("malformed row ", r + 1, ": missing id"));
      }
      inst.id = ScalarToString(*id_it);
    } else {
      inst.id = OrdinalId(r, doc.size(), schema.id_prefix);
    }
    if (!schema.references_field.empty()) {
      auto ref_it = obj.find(schema.references_field);
      if (ref_it != obj.end()) {
        ASSIGN_OR_RETURN(inst.references, ReferencesFromJson(*ref_it, r + 1));
      }
    }
    for (const auto& [key, value] : obj.items()) {
      if (key == schema.input_field || key == schema.references_field ||
          key == schema.id_field) {
        continue;
      }
      if (value.is_primitive()) inst.meta[key] = ScalarToString(value);
    }
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace

absl::StatusOr<Dataset> Dataset::Create(std::vector<Instance> instances) {
  RETURN_IF_ERROR(CheckUniqueIds(instances));
  Dataset ds;
  ds.instances_ = std::move(instances);
  for (size_t i = 0; i < ds.instances_.size(); ++i) {
    ds.index_.emplace(ds.instances_[i].id, i);
  }
  return ds;
}

const Instance& Dataset::Get(const std::string& id) const {
  return instances_[index_.at(id)];
}

const Instance* Dataset::Find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &instances_[it->second];
}

std::vector<std::string> Dataset::Ids() const {
  std::vector<std::string> ids;
  ids.reserve(instances_.size());
  for (const Instance& inst : instances_) ids.push_back(inst.id);
  return ids;
}

absl::StatusOr<std::vector<std::vector<std::string>>> ParseCsv(
    std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  size_t line = 1;
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") {
    text.remove_prefix(3);
  }
  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    // Skip blank lines.
    if (!(record.size() == 1 && record.front().empty())) {
      records.push_back(std::move(record));
    }
    record.clear();
    field_started = false;
  };
  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started && !field.empty()) {
          return absl::InvalidArgumentError(
              absl::StrCat("malformed row at line ", line,
                           ": quote inside unquoted field"));
        }
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed row at line ", line, ": unterminated quote"));
  }
  if (!field.empty() || !record.empty()) end_record();
  return records;
}

absl::StatusOr<std::vector<Instance>> ParseDataset(
    std::string_view text, DatasetFormat format, const DatasetSchema& schema) {
  if (schema.input_field.empty()) {
    return absl::InvalidArgumentError("schema error: no input field mapped");
  }
  std::vector<Instance> instances;
  switch (format) {
    case DatasetFormat::kCsv: {
      ASSIGN_OR_RETURN(instances, FromCsv(text, schema));
      break;
    }
    case DatasetFormat::kJson: {
      ASSIGN_OR_RETURN(instances, FromJson(text, schema));
      break;
    }
    case DatasetFormat::kAuto: {
      const size_t first = text.find_first_not_of(" \t\r\n");
      const bool looks_json = first != std::string_view::npos &&
                              (text[first] == '[' || text[first] == '{');
      return ParseDataset(
          text, looks_json ? DatasetFormat::kJson : DatasetFormat::kCsv,
          schema);
    }
  }
  RETURN_IF_ERROR(CheckUniqueIds(instances));
  return instances;
}

absl::StatusOr<std::vector<Instance>> LoadDataset(
    const std::filesystem::path& source, const DatasetSchema& schema) {
  std::ifstream in(source, std::ios::binary);
  if (!in) {
    return absl::NotFoundError(
        absl::StrCat("dataset not found: ", source.string()));
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  DatasetFormat format = schema.format;
  if (format == DatasetFormat::kAuto) {
    const std::string ext = absl::AsciiStrToLower(source.extension().string());
    if (ext == ".csv") format = DatasetFormat::kCsv;
    if (ext == ".json") format = DatasetFormat::kJson;
  }
  return ParseDataset(buffer.str(), format, schema);
}

}  // namespace textal
