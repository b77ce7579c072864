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

#include "textal/run_config.h"

#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include "absl/strings/match.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "textal/metrics.h"
#include "textal/strategy.h"
#include "yaml-cpp/yaml.h"

namespace textal {
namespace {

using nlohmann::json;

json DefaultBackend() {
  return {{"kind", "mock"},
          {"base_url", ""},
          {"api_key_env", ""},
          {"model", ""},
          {"max_concurrent", 4},
          {"timeout_s", 120},
          {"retry",
           {{"max_attempts", 4},
            {"initial_backoff_ms", 200},
            {"backoff_multiplier", 2.0}}},
          {"mock_seed", 0},
          {"mock_embedding_dim", 64}};
}

struct Preset {
  const char* name;
  const char* input_field;
  const char* references_field;
  const char* metric;
  double query_size;
};

constexpr Preset kPresets[] = {
    {"triviaqa", "question", "answers", "relaxed_exact_match", 0.01},
    {"gsm8k", "question", "answer", "exact_match", 0.01},
    {"race", "question", "answer", "exact_match", 10},
    {"aeslc", "email_body", "subject_line", "rouge2", 10},
};

const Preset* FindPreset(std::string_view name) {
  for (const Preset& p : kPresets) {
    if (name == p.name) return &p;
  }
  return nullptr;
}

bool IsFreeForm(const std::string& dotted) {
  for (const std::string prefix :
       {"al.params", "training.hyperparameters", "inference"}) {
    if (dotted == prefix || absl::StartsWith(dotted, prefix + ".")) {
      return true;
    }
  }
  return false;
}

json ParseValue(const std::string& text) {
  json v = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (v.is_discarded()) return json(text);
  return v;
}

void MergeAt(json& node, const json& patch, const std::string& path,
             std::vector<FieldError>& errors) {
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!node.contains(it.key())) {
      if (!IsFreeForm(key)) {
        errors.push_back({key, "unknown configuration key"});
        continue;
      }
      node[it.key()] = it.value();
      continue;
    }
    json& target = node[it.key()];
    if (target.is_object() && it.value().is_object() && !IsFreeForm(key)) {
      MergeAt(target, it.value(), key, errors);
    } else {
      target = it.value();
    }
  }
}

void SetDotted(json& tree, const std::string& dotted, json value,
               std::vector<FieldError>& errors) {
  std::vector<std::string> parts = absl::StrSplit(dotted, '.');
  json* node = &tree;
  std::string path;
  for (size_t i = 0; i < parts.size(); ++i) {
    path = path.empty() ? parts[i] : path + "." + parts[i];
    if (parts[i].empty()) {
      errors.push_back({dotted, "empty key segment"});
      return;
    }
    const bool last = i + 1 == parts.size();
    if (!node->is_object()) {
      errors.push_back({path, "not a section"});
      return;
    }
    if (!node->contains(parts[i])) {
      if (!IsFreeForm(path)) {
        errors.push_back({path, "unknown configuration key"});
        return;
      }
      (*node)[parts[i]] = last ? json() : json::object();
    }
    node = &(*node)[parts[i]];
  }
  *node = std::move(value);
}

void ApplyPreset(json& tree, const Preset& p) {
  tree["data"]["preset"] = p.name;
  tree["data"]["input_field"] = p.input_field;
  tree["data"]["references_field"] = p.references_field;
  tree["evaluation"]["metrics"] = json::array({p.metric});
  tree["al"]["init_query_size"] = p.query_size;
  tree["al"]["query_size"] = p.query_size;
}

json YamlToJson(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      for (const auto& item : node) arr.push_back(YamlToJson(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto& kv : node) {
        obj[kv.first.as<std::string>()] = YamlToJson(kv.second);
      }
      return obj;
    }
    case YAML::NodeType::Scalar: {
      const std::string s = node.Scalar();
      if (node.Tag() == "!") return s;  // quoted
      if (s == "true" || s == "True") return true;
      if (s == "false" || s == "False") return false;
      if (s == "null" || s == "~") return nullptr;
      static const std::regex kInt("[-+]?[0-9]+");
      static const std::regex kFloat(
          "[-+]?([0-9]+\\.?[0-9]*|\\.[0-9]+)([eE][-+]?[0-9]+)?");
      if (std::regex_match(s, kInt)) return std::stoll(s);
      if (std::regex_match(s, kFloat)) return std::stod(s);
      return s;
    }
  }
  return nullptr;
}

// Typed reads from the tree that record field errors instead of failing.
class Reader {
 public:
  Reader(const json& tree, std::vector<FieldError>& errors)
      : tree_(tree), errors_(errors) {}

  const json* Find(const std::string& dotted) const {
    const json* node = &tree_;
    for (absl::string_view part : absl::StrSplit(dotted, '.')) {
      if (!node->is_object()) return nullptr;
      auto it = node->find(std::string(part));
      if (it == node->end()) return nullptr;
      node = &*it;
    }
    return node;
  }

  void Error(std::string field, std::string message) {
    errors_.push_back({std::move(field), std::move(message)});
  }

  std::optional<double> OptNumber(const std::string& key) {
    const json* v = Find(key);
    if (v == nullptr || v->is_null()) return std::nullopt;
    if (!v->is_number()) {
      Error(key, "must be a number");
      return std::nullopt;
    }
    const double d = v->get<double>();
    if (!std::isfinite(d)) {
      Error(key, "must be finite");
      return std::nullopt;
    }
    return d;
  }

  double Number(const std::string& key, double fallback) {
    const json* v = Find(key);
    if (v == nullptr || v->is_null()) {
      Error(key, "is required");
      return fallback;
    }
    return OptNumber(key).value_or(fallback);
  }

  int64_t Integer(const std::string& key, int64_t fallback) {
    const json* v = Find(key);
    if (v != nullptr && v->is_number() && !v->is_number_integer()) {
      const double d = v->get<double>();
      if (d != std::floor(d)) {
        Error(key, "must be an integer");
        return fallback;
      }
      return static_cast<int64_t>(d);
    }
    if (v == nullptr || !v->is_number_integer()) {
      Error(key, "must be an integer");
      return fallback;
    }
    return v->get<int64_t>();
  }

  std::string String(const std::string& key) {
    const json* v = Find(key);
    if (v == nullptr || v->is_null()) return "";
    if (!v->is_string()) {
      Error(key, "must be a string");
      return "";
    }
    return v->get<std::string>();
  }

  bool Bool(const std::string& key) {
    const json* v = Find(key);
    if (v == nullptr || !v->is_boolean()) {
      Error(key, "must be true or false");
      return false;
    }
    return v->get<bool>();
  }

  std::vector<std::string> StringList(const std::string& key) {
    std::vector<std::string> out;
    const json* v = Find(key);
    if (v == nullptr || v->is_null()) return out;
    if (!v->is_array()) {
      Error(key, "must be a list of strings");
      return out;
    }
    for (size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_string()) {
        Error(absl::StrCat(key, "[", i, "]"), "must be a string");
        continue;
      }
      out.push_back((*v)[i].get<std::string>());
    }
    return out;
  }

 private:
  const json& tree_;
  std::vector<FieldError>& errors_;
};

BatchSizeSpec ReadBatchSize(Reader& r, const std::string& key) {
  const std::optional<double> v = r.OptNumber(key);
  if (!v) {
    if (r.Find(key) == nullptr || r.Find(key)->is_null()) {
      r.Error(key, "is required");
    }
    return {};
  }
  if (*v <= 0.0) {
    r.Error(key, "must be positive");
  } else if (*v >= 1.0 && *v != std::floor(*v)) {
    r.Error(key,
            "fractions must lie strictly in (0, 1); absolute sizes must be "
            "positive integers");
  }
  return BatchSizeSpec{*v};
}

BackendDescriptor ReadBackend(Reader& r, const std::string& prefix) {
  BackendDescriptor d;
  const std::string kind = r.String(prefix + ".kind");
  if (kind == "mock") {
    d.kind = BackendKind::kMock;
  } else if (kind == "openai") {
    d.kind = BackendKind::kOpenAiCompatible;
  } else {
    r.Error(prefix + ".kind", "must be mock or openai");
  }
  d.base_url = r.String(prefix + ".base_url");
  d.api_key_env = r.String(prefix + ".api_key_env");
  d.model = r.String(prefix + ".model");
  d.max_concurrent =
      static_cast<int>(r.Integer(prefix + ".max_concurrent", 4));
  if (d.max_concurrent < 1) r.Error(prefix + ".max_concurrent", "must be >= 1");
  const int64_t timeout = r.Integer(prefix + ".timeout_s", 120);
  if (timeout < 1) r.Error(prefix + ".timeout_s", "must be >= 1");
  d.timeout = std::chrono::seconds(timeout);
  d.retry.max_attempts =
      static_cast<int>(r.Integer(prefix + ".retry.max_attempts", 4));
  if (d.retry.max_attempts < 1) {
    r.Error(prefix + ".retry.max_attempts", "must be >= 1");
  }
  d.retry.initial_backoff = std::chrono::milliseconds(
      r.Integer(prefix + ".retry.initial_backoff_ms", 200));
  d.retry.backoff_multiplier =
      r.Number(prefix + ".retry.backoff_multiplier", 2.0);
  d.mock_seed = static_cast<uint64_t>(r.Integer(prefix + ".mock_seed", 0));
  d.mock_embedding_dim =
      static_cast<int>(r.Integer(prefix + ".mock_embedding_dim", 64));
  if (d.mock_embedding_dim < 1) {
    r.Error(prefix + ".mock_embedding_dim", "must be >= 1");
  }
  if (d.kind == BackendKind::kOpenAiCompatible && d.base_url.empty()) {
    r.Error(prefix + ".base_url", "is required for remote backends");
  }
  return d;
}

bool IsEnvVarName(const std::string& s) {
  static const std::regex kName("[A-Za-z_][A-Za-z0-9_]*");
  return std::regex_match(s, kName);
}

void CheckUnit(Reader& r, const std::map<std::string, double>& params,
               const char* key, double lo, double hi, bool integer) {
  auto it = params.find(key);
  if (it == params.end()) return;
  const std::string field = absl::StrCat("al.params.", key);
  if (it->second < lo || it->second > hi) {
    r.Error(field, absl::StrCat("must be in [", lo, ", ", hi, "]"));
  } else if (integer && it->second != std::floor(it->second)) {
    r.Error(field, "must be an integer");
  }
}

}  // namespace

nlohmann::json FieldErrorsToJson(const std::vector<FieldError>& errors) {
  json arr = json::array();
  for (const FieldError& e : errors) {
    arr.push_back({{"field", e.field}, {"message", e.message}});
  }
  return arr;
}

std::string FieldErrorsToString(const std::vector<FieldError>& errors) {
  std::vector<std::string> parts;
  for (const FieldError& e : errors) {
    parts.push_back(absl::StrCat(e.field, ": ", e.message));
  }
  return absl::StrJoin(parts, "; ");
}

std::string_view StopKindName(StopKind kind) {
  switch (kind) {
    case StopKind::kBudget:
      return "budget";
    case StopKind::kLabeledCount:
      return "labeled_count";
    case StopKind::kMetricThreshold:
      return "metric_threshold";
    case StopKind::kIterationLimit:
      return "iteration_limit";
  }
  return "unknown";
}

const StoppingCriterion* RunConfig::FindStop(StopKind kind) const {
  for (const StoppingCriterion& c : stopping) {
    if (c.kind == kind) return &c;
  }
  return nullptr;
}

json DefaultConfigTree() {
  return {
      {"schema_version", kConfigSchemaVersion},
      {"al",
       {{"strategy", "random"},
        {"mode", "al"},
        {"init_query_size", 0.01},
        {"query_size", 0.01},
        {"num_iterations", 10},
        {"budget", nullptr},
        {"seed", 42},
        {"params",
         {{kParamTeDelfyAlpha, 0.5},
          {kParamTeDelfyDecay, 1.0},
          {kParamIddsLambda, 1.0},
          {kParamHudsBeta, 0.5},
          {kParamHudsStrata, 5},
          {kParamBleuVarSamples, 5},
          {kParamBleuVarTemperature, 1.0}}},
        {"stopping", json::array()}}},
      {"data",
       {{"preset", nullptr},
        {"path", ""},
        {"test_path", ""},
        {"input_field", "input"},
        {"references_field", "references"},
        {"id_field", ""},
        {"format", "auto"},
        {"test_fraction", 0.0}}},
      {"model", {{"checkpoint", "base"}, {"backend", DefaultBackend()}}},
      {"embedding", {{"backend", DefaultBackend()}}},
      {"generation",
       {{"temperature", 0.0},
        {"top_p", 0.5},
        {"max_tokens", 256},
        {"logprobs_k", 20}}},
      {"labeller",
       {{"type", "oracle"},
        {"parameters",
         {{"model", ""}, {"max_tokens", 1024}, {"temperature", 0.0}}},
        {"price",
         {{"input_per_1m", 0.0},
          {"output_per_1m", 0.0},
          {"per_label", nullptr}}},
        {"batch", false},
        {"batch_discount", 0.5},
        {"api_key", "OPENAI_API_KEY"},
        {"base_url", "https://api.openai.com/v1"},
        {"backend", "openai"},
        {"prompt_template", "{input}"},
        {"noise", 0.0},
        {"lease_minutes", 30},
        {"max_concurrent", 4}}},
      {"training",
       {{"adapter", "noop"},
        {"command", json::array()},
        {"url", ""},
        {"timeout_s", 3600},
        {"hyperparameters",
         {{"num_train_epochs", 5},
          {"per_device_train_batch_size", 16},
          {"per_device_eval_batch_size", 16},
          {"gradient_accumulation_steps", 1},
          {"learning_rate", 3e-5},
          {"warmup_ratio", 0.03},
          {"weight_decay", 0.01},
          {"max_grad_norm", 1.0},
          {"early_stopping_patience", 5},
          {"optim", "adamw_hf"},
          {"peft",
           {{"enabled", true},
            {"r", 16},
            {"lora_alpha", 16},
            {"lora_dropout", 0.0},
            {"bias", "none"}}}}}}},
      {"evaluation",
       {{"metrics", json::array({"exact_match"})},
        {"additional_metrics", json::array({"rouge1", "rouge2", "rougeL",
                                            "bleu"})},
        {"split_size", 0.2},
        {"min_eval_size", 5}}},
      {"inference",
       {{"framework", "vllm"},
        {"batch_size", 16},
        {"gpu_memory_utilization", 0.5},
        {"temperature", 0.0},
        {"top_p", 0.5}}},
  };
}

std::vector<std::string> DataPresetNames() {
  std::vector<std::string> names;
  for (const Preset& p : kPresets) names.push_back(p.name);
  return names;
}

void MergeConfig(json& tree, const json& patch,
                 std::vector<FieldError>& errors) {
  if (!patch.is_object()) {
    errors.push_back({"", "configuration document must be a mapping"});
    return;
  }
  json body = patch;
  if (body.contains("schema_version")) {
    if (body["schema_version"] != kConfigSchemaVersion) {
      errors.push_back({"schema_version",
                        absl::StrCat("unsupported; expected ",
                                     kConfigSchemaVersion)});
    }
    body.erase("schema_version");
  }
  // A preset inside the document applies before its other keys.
  if (body.contains("data") && body["data"].is_object() &&
      body["data"].contains("preset") && body["data"]["preset"].is_string()) {
    const std::string name = body["data"]["preset"].get<std::string>();
    if (const Preset* p = FindPreset(name)) {
      ApplyPreset(tree, *p);
    } else {
      errors.push_back({"data.preset", absl::StrCat("unknown preset ", name)});
    }
  }
  MergeAt(tree, body, "", errors);
}

absl::Status ApplyOverrides(json& tree,
                            const std::vector<std::string>& overrides,
                            std::vector<FieldError>& errors) {
  std::vector<std::pair<std::string, std::string>> groups;
  std::vector<std::pair<std::string, std::string>> dotted;
  for (const std::string& o : overrides) {
    const size_t eq = o.find('=');
    if (eq == std::string::npos || eq == 0) {
      errors.push_back({o, "override must look like key=value"});
      continue;
    }
    std::string key = o.substr(0, eq);
    std::string value = o.substr(eq + 1);
    if (key.find('.') == std::string::npos) {
      groups.emplace_back(std::move(key), std::move(value));
    } else {
      dotted.emplace_back(std::move(key), std::move(value));
    }
  }
  for (const auto& [group, value] : groups) {
    if (group == "al") {
      tree["al"]["strategy"] = value;
    } else if (group == "labeller") {
      tree["labeller"]["type"] = value;
    } else if (group == "training") {
      tree["training"]["adapter"] = value;
    } else if (group == "data") {
      if (const Preset* p = FindPreset(value)) {
        ApplyPreset(tree, *p);
      } else {
        errors.push_back({"data", absl::StrCat("unknown dataset preset '",
                                               value, "'; known: ",
                                               absl::StrJoin(DataPresetNames(),
                                                             ", "))});
      }
    } else {
      errors.push_back({group, "unknown configuration group"});
    }
  }
  for (const auto& [key, value] : dotted) {
    SetDotted(tree, key, ParseValue(value), errors);
  }
  if (!errors.empty()) {
    return absl::InvalidArgumentError(FieldErrorsToString(errors));
  }
  return absl::OkStatus();
}

absl::StatusOr<json> ParseConfigText(std::string_view text) {
  try {
    YAML::Node root = YAML::Load(std::string(text));
    return YamlToJson(root);
  } catch (const YAML::Exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("config parse error: ", e.what()));
  }
}

absl::StatusOr<json> LoadConfigFile(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) {
    return absl::NotFoundError(absl::StrCat("cannot read config ", p.string()));
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseConfigText(ss.str());
}

absl::StatusOr<RunConfig> ResolveRunConfig(const json& input,
                                           std::vector<FieldError>& errors) {
  json tree = input;
  Reader r(tree, errors);
  RunConfig c;

  // al
  c.strategy = r.String("al.strategy");
  const StrategyInfo* info = StrategyRegistry::Global().Find(c.strategy);
  if (info == nullptr) {
    r.Error("al.strategy",
            absl::StrCat("unknown strategy '", c.strategy, "'; known: ",
                         absl::StrJoin(StrategyRegistry::Global().Names(), ", ")));
  }
  const std::string mode = r.String("al.mode");
  if (mode == "al") {
    c.mode = RunMode::kAl;
  } else if (mode == "ed") {
    c.mode = RunMode::kEd;
  } else {
    r.Error("al.mode", "must be al or ed");
  }
  c.init_query_size = ReadBatchSize(r, "al.init_query_size");
  c.query_size = ReadBatchSize(r, "al.query_size");
  c.num_iterations = static_cast<int>(r.Integer("al.num_iterations", 1));
  if (c.num_iterations < 0) r.Error("al.num_iterations", "must be >= 0");
  if (c.mode == RunMode::kEd) {
    c.num_iterations = 1;
    tree["al"]["num_iterations"] = 1;
    if (info != nullptr && !info->model_free) {
      r.Error("al.strategy",
              "mode ed needs a strategy that does not use the model "
              "(random, coreset, idds, facility_location)");
    }
  }
  if (std::optional<double> budget = r.OptNumber("al.budget")) {
    if (*budget < 0) {
      r.Error("al.budget", "must be >= 0");
    } else {
      c.budget = Money::FromDouble(*budget);
    }
  }
  const int64_t seed = r.Integer("al.seed", 0);
  if (seed < 0) r.Error("al.seed", "must be >= 0");
  c.seed = static_cast<uint64_t>(seed);
  if (const json* params = r.Find("al.params"); params && params->is_object()) {
    for (auto it = params->begin(); it != params->end(); ++it) {
      if (!it.value().is_number()) {
        r.Error("al.params." + it.key(), "must be a number");
        continue;
      }
      c.strategy_params[it.key()] = it.value().get<double>();
    }
  } else {
    r.Error("al.params", "must be a mapping");
  }
  CheckUnit(r, c.strategy_params, kParamTeDelfyAlpha, 0, 1, false);
  CheckUnit(r, c.strategy_params, kParamHudsBeta, 0, 1, false);
  CheckUnit(r, c.strategy_params, kParamTeDelfyDecay, 0, 1e9, false);
  CheckUnit(r, c.strategy_params, kParamIddsLambda, 0, 1e9, false);
  CheckUnit(r, c.strategy_params, kParamHudsStrata, 1, 1e6, true);
  CheckUnit(r, c.strategy_params, kParamBleuVarSamples, 1, 1e3, true);
  CheckUnit(r, c.strategy_params, kParamBleuVarTemperature, 1e-9, 1e3, false);

  // data
  c.data_preset = r.String("data.preset");
  c.data_path = r.String("data.path");
  c.test_path = r.String("data.test_path");
  c.schema.input_field = r.String("data.input_field");
  if (c.schema.input_field.empty()) r.Error("data.input_field", "is required");
  c.schema.references_field = r.String("data.references_field");
  c.schema.id_field = r.String("data.id_field");
  const std::string format = r.String("data.format");
  if (format == "auto") {
    c.schema.format = DatasetFormat::kAuto;
  } else if (format == "csv") {
    c.schema.format = DatasetFormat::kCsv;
  } else if (format == "json") {
    c.schema.format = DatasetFormat::kJson;
  } else {
    r.Error("data.format", "must be auto, csv or json");
  }
  c.test_fraction = r.Number("data.test_fraction", 0.0);
  if (c.test_fraction < 0 || c.test_fraction >= 1) {
    r.Error("data.test_fraction", "must be in [0, 1)");
  }

  // model
  c.base_model = r.String("model.checkpoint");
  if (c.base_model.empty()) r.Error("model.checkpoint", "is required");
  c.model_backend = ReadBackend(r, "model.backend");
  c.embedding_backend = ReadBackend(r, "embedding.backend");
  c.generation.temperature = r.Number("generation.temperature", 0.0);
  if (c.generation.temperature < 0) {
    r.Error("generation.temperature", "must be >= 0");
  }
  c.generation.top_p = r.Number("generation.top_p", 0.5);
  if (c.generation.top_p <= 0 || c.generation.top_p > 1) {
    r.Error("generation.top_p", "must be in (0, 1]");
  }
  c.generation.max_tokens =
      static_cast<int>(r.Integer("generation.max_tokens", 256));
  if (c.generation.max_tokens < 1) {
    r.Error("generation.max_tokens", "must be >= 1");
  }
  c.generation.logprobs_k =
      static_cast<int>(r.Integer("generation.logprobs_k", 20));
  if (c.generation.logprobs_k < 0) {
    r.Error("generation.logprobs_k", "must be >= 0");
  }

  // labeller
  const std::string labeller = r.String("labeller.type");
  if (labeller == "human") {
    c.labeller = LabellerType::kHuman;
  } else if (labeller == "api_llm") {
    c.labeller = LabellerType::kApiLlm;
  } else if (labeller == "local_llm") {
    c.labeller = LabellerType::kLocalLlm;
  } else if (labeller == "oracle") {
    c.labeller = LabellerType::kOracle;
  } else if (labeller == "noisy_oracle") {
    c.labeller = LabellerType::kNoisyOracle;
  } else {
    r.Error("labeller.type",
            "must be human, api_llm, local_llm, oracle or noisy_oracle");
  }
  c.labeller_model = r.String("labeller.parameters.model");
  c.labeller_decode.max_tokens =
      static_cast<int>(r.Integer("labeller.parameters.max_tokens", 1024));
  if (c.labeller_decode.max_tokens < 1) {
    r.Error("labeller.parameters.max_tokens", "must be >= 1");
  }
  c.labeller_decode.temperature =
      r.Number("labeller.parameters.temperature", 0.0);
  if (c.labeller_decode.temperature < 0) {
    r.Error("labeller.parameters.temperature", "must be >= 0");
  }
  c.labeller_decode.logprobs_k = 0;
  c.labeller_decode.top_p = 1.0;
  const double in_price = r.Number("labeller.price.input_per_1m", 0.0);
  const double out_price = r.Number("labeller.price.output_per_1m", 0.0);
  const std::optional<double> per_label = r.OptNumber("labeller.price.per_label");
  const double discount = r.Number("labeller.batch_discount", 0.5);
  if (in_price < 0) r.Error("labeller.price.input_per_1m", "must be >= 0");
  if (out_price < 0) r.Error("labeller.price.output_per_1m", "must be >= 0");
  if (per_label && *per_label < 0) {
    r.Error("labeller.price.per_label", "must be >= 0");
  }
  if (!(discount > 0 && discount <= 1)) {
    r.Error("labeller.batch_discount", "must be in (0, 1]");
  }
  if (auto prices = PriceSheet::Create(std::max(in_price, 0.0),
                                       std::max(out_price, 0.0),
                                       discount > 0 && discount <= 1 ? discount
                                                                     : 1.0,
                                       per_label && *per_label >= 0
                                           ? per_label
                                           : std::nullopt);
      prices.ok()) {
    c.prices = *prices;
  }
  c.batch = r.Bool("labeller.batch");
  c.prompt_template = r.String("labeller.prompt_template");
  if (!ValidatePromptTemplate(c.prompt_template).ok()) {
    r.Error("labeller.prompt_template", "must contain {input}");
  }
  c.noise = r.Number("labeller.noise", 0.0);
  if (c.noise < 0 || c.noise > 1) r.Error("labeller.noise", "must be in [0, 1]");
  const double lease = r.Number("labeller.lease_minutes", 30);
  if (lease <= 0) r.Error("labeller.lease_minutes", "must be > 0");
  c.lease = std::chrono::seconds(static_cast<int64_t>(std::llround(lease * 60)));
  const int max_concurrent =
      static_cast<int>(r.Integer("labeller.max_concurrent", 4));
  if (max_concurrent < 1) r.Error("labeller.max_concurrent", "must be >= 1");
  const std::string api_key = r.String("labeller.api_key");
  const std::string backend = r.String("labeller.backend");
  c.labeller_backend.model = c.labeller_model;
  c.labeller_backend.max_concurrent = std::max(max_concurrent, 1);
  c.labeller_backend.base_url = r.String("labeller.base_url");
  c.labeller_backend.api_key_env = api_key;
  c.labeller_backend.mock_seed = c.seed;
  if (backend == "openai") {
    c.labeller_backend.kind = BackendKind::kOpenAiCompatible;
  } else if (backend == "mock") {
    c.labeller_backend.kind = BackendKind::kMock;
  } else {
    r.Error("labeller.backend", "must be openai or mock");
  }
  if (c.labeller == LabellerType::kApiLlm) {
    if (c.labeller_model.empty()) {
      r.Error("labeller.parameters.model", "is required for api_llm");
    }
    if (backend == "openai") {
      if (c.labeller_backend.base_url.empty()) {
        r.Error("labeller.base_url", "is required for api_llm");
      }
      if (!IsEnvVarName(api_key)) {
        r.Error("labeller.api_key",
                "must name the environment variable holding the key");
      }
    }
  }
  if (c.labeller == LabellerType::kLocalLlm && c.labeller_model.empty()) {
    c.labeller_model = c.base_model;
  }

  // training
  const std::string adapter = r.String("training.adapter");
  if (adapter == "noop") {
    c.adapter = AdapterKind::kNoop;
  } else if (adapter == "mock") {
    c.adapter = AdapterKind::kMock;
  } else if (adapter == "command") {
    c.adapter = AdapterKind::kCommand;
  } else if (adapter == "http") {
    c.adapter = AdapterKind::kHttp;
  } else {
    r.Error("training.adapter", "must be noop, mock, command or http");
  }
  if (const json* cmd = r.Find("training.command"); cmd && cmd->is_string()) {
    c.train_command = absl::StrSplit(cmd->get<std::string>(), ' ',
                                     absl::SkipEmpty());
  } else {
    c.train_command = r.StringList("training.command");
  }
  c.train_url = r.String("training.url");
  if (c.adapter == AdapterKind::kCommand && c.train_command.empty()) {
    r.Error("training.command", "is required for the command adapter");
  }
  if (c.adapter == AdapterKind::kHttp && c.train_url.empty()) {
    r.Error("training.url", "is required for the http adapter");
  }
  const int64_t train_timeout = r.Integer("training.timeout_s", 3600);
  if (train_timeout < 1) r.Error("training.timeout_s", "must be >= 1");
  c.train_timeout = std::chrono::seconds(train_timeout);
  if (const json* hp = r.Find("training.hyperparameters");
      hp && hp->is_object()) {
    c.hyperparameters = *hp;
  } else {
    r.Error("training.hyperparameters", "must be a mapping");
  }
  if (c.hyperparameters.is_object()) {
    // Generation settings travel with the training request.
    c.hyperparameters["generation"] = tree["generation"];
    if (const json* inf = r.Find("inference")) {
      c.hyperparameters["inference"] = *inf;
    }
  }

  // evaluation
  for (const std::string& m : r.StringList("evaluation.metrics")) {
    if (std::find(c.metrics.begin(), c.metrics.end(), m) == c.metrics.end()) {
      c.metrics.push_back(m);
    }
  }
  for (const std::string& m : r.StringList("evaluation.additional_metrics")) {
    if (std::find(c.metrics.begin(), c.metrics.end(), m) == c.metrics.end()) {
      c.metrics.push_back(m);
    }
  }
  for (size_t i = 0; i < c.metrics.size(); ++i) {
    if (!IsKnownMetric(c.metrics[i])) {
      r.Error("evaluation.metrics",
              absl::StrCat("unknown metric '", c.metrics[i], "'"));
    }
  }
  c.eval_split_size = r.Number("evaluation.split_size", 0.2);
  if (c.eval_split_size <= 0 || c.eval_split_size >= 1) {
    r.Error("evaluation.split_size", "must be in (0, 1)");
  }
  c.min_eval_size = static_cast<int>(r.Integer("evaluation.min_eval_size", 5));
  if (c.min_eval_size < 1) r.Error("evaluation.min_eval_size", "must be >= 1");

  // stopping
  c.stopping.push_back({StopKind::kIterationLimit,
                        static_cast<double>(c.num_iterations), ""});
  if (c.budget) {
    c.stopping.push_back({StopKind::kBudget, c.budget->ToDouble(), ""});
  }
  const json* stops = r.Find("al.stopping");
  if (stops != nullptr && !stops->is_array()) {
    r.Error("al.stopping", "must be a list");
  } else if (stops != nullptr) {
    for (size_t i = 0; i < stops->size(); ++i) {
      const std::string base = absl::StrCat("al.stopping[", i, "]");
      const json& s = (*stops)[i];
      if (!s.is_object() || !s.contains("kind") || !s["kind"].is_string()) {
        r.Error(base + ".kind", "is required");
        continue;
      }
      const std::string kind = s["kind"].get<std::string>();
      StoppingCriterion crit;
      const bool has_value = s.contains("value") && s["value"].is_number();
      const double value = has_value ? s["value"].get<double>() : 0.0;
      if (kind == "labeled_count") {
        crit.kind = StopKind::kLabeledCount;
        if (!has_value || value < 1 || value != std::floor(value)) {
          r.Error(base + ".value", "must be a positive integer");
        }
      } else if (kind == "metric_threshold") {
        crit.kind = StopKind::kMetricThreshold;
        crit.metric = s.value("metric", "");
        if (!has_value) r.Error(base + ".value", "is required");
        if (std::find(c.metrics.begin(), c.metrics.end(), crit.metric) ==
            c.metrics.end()) {
          r.Error(base + ".metric",
                  absl::StrCat("metric '", crit.metric,
                               "' is not computed by this run"));
        }
      } else if (kind == "iteration_limit") {
        crit.kind = StopKind::kIterationLimit;
        if (!has_value || value < 0 || value != std::floor(value)) {
          r.Error(base + ".value", "must be a non-negative integer");
        }
      } else if (kind == "budget") {
        crit.kind = StopKind::kBudget;
        if (!c.budget) r.Error("al.budget", "is required by a budget criterion");
        continue;  // already present
      } else {
        r.Error(base + ".kind",
                "must be labeled_count, metric_threshold, iteration_limit or "
                "budget");
        continue;
      }
      crit.threshold = value;
      c.stopping.push_back(crit);
    }
  }

  if (!errors.empty()) {
    return absl::InvalidArgumentError(FieldErrorsToString(errors));
  }
  c.tree = std::move(tree);
  return c;
}

absl::StatusOr<RunConfig> BuildRunConfig(
    const std::optional<std::filesystem::path>& file,
    const std::vector<std::string>& overrides,
    std::vector<FieldError>& errors) {
  json tree = DefaultConfigTree();
  if (file) {
    absl::StatusOr<json> doc = LoadConfigFile(*file);
    if (!doc.ok()) return doc.status();
    MergeConfig(tree, *doc, errors);
  }
  ApplyOverrides(tree, overrides, errors).IgnoreError();
  if (!errors.empty()) {
    return absl::InvalidArgumentError(FieldErrorsToString(errors));
  }
  return ResolveRunConfig(tree, errors);
}

}  // namespace textal
