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

#include "textal/openai_backend.h"

#include <cstdlib>

#include "absl/strings/match.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "httplib.h"
#include "textal/http_util.h"
#include "textal/status_macros.h"

namespace textal {

using nlohmann::json;

struct OpenAiBackend::Endpoint {
  std::unique_ptr<httplib::Client> client;
  std::string path_prefix;
  std::string bearer;
  std::mutex mu;
};

json BuildChatRequest(const std::string& model, const std::string& prompt,
                      const DecodeParams& decode) {
  json body = {
      {"model", model},
      {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
      {"temperature", decode.temperature},
      {"top_p", decode.top_p},
      {"max_tokens", decode.max_tokens},
      {"n", decode.num_samples},
  };
  if (decode.logprobs_k > 0) {
    body["logprobs"] = true;
    body["top_logprobs"] = decode.logprobs_k;
  }
  return body;
}

absl::StatusOr<std::vector<GenerationResult>> ParseChatResponse(
    const json& body, int expected_samples) {
  try {
    const json& choices = body.at("choices");
    if (!choices.is_array() ||
        static_cast<int>(choices.size()) != expected_samples) {
      return absl::DataLossError(
          absl::StrCat("expected ", expected_samples, " choices"));
    }
    std::vector<GenerationResult> results(choices.size());
    for (size_t i = 0; i < choices.size(); ++i) {
      const json& choice = choices[i];
      GenerationResult& r = results[i];
      const json& content = choice.at("message").at("content");
      r.text = content.is_string() ? content.get<std::string>() : "";
      auto lp = choice.find("logprobs");
      if (lp != choice.end() && lp->is_object() && lp->contains("content") &&
          (*lp)["content"].is_array()) {
        for (const json& tok : (*lp)["content"]) {
          r.tokens.push_back(tok.at("token").get<std::string>());
          r.token_logprobs.push_back(tok.at("logprob").get<double>());
          std::vector<TokenAlternative> alts;
          if (tok.contains("top_logprobs")) {
            for (const json& alt : tok["top_logprobs"]) {
              alts.push_back({alt.at("token").get<std::string>(),
                              alt.at("logprob").get<double>()});
            }
          }
          r.top_alternatives.push_back(std::move(alts));
        }
      } else {
        r.tokens = absl::StrSplit(r.text, absl::ByAnyChar(" \t\r\n"),
                                  absl::SkipEmpty());
      }
    }
    const json usage = body.value("usage", json::object());
    const int64_t prompt_tokens = usage.value("prompt_tokens", int64_t{0});
    const int64_t completion_tokens =
        usage.value("completion_tokens", int64_t{0});
    results.front().usage.input_tokens = prompt_tokens;
    // Per-choice completion tokens from logprob counts when available,
    // otherwise an even split; either way the sum matches the usage block.
    int64_t assigned = 0;
    for (size_t i = 0; i < results.size(); ++i) {
      int64_t n = results[i].token_logprobs.empty()
                      ? completion_tokens / static_cast<int64_t>(results.size())
                      : static_cast<int64_t>(results[i].tokens.size());
      results[i].usage.output_tokens = n;
      assigned += n;
    }
    if (completion_tokens > 0) {
      results.front().usage.output_tokens += completion_tokens - assigned;
    }
    return results;
  } catch (const json::exception& e) {
    return absl::DataLossError(
        absl::StrCat("malformed chat completion response: ", e.what()));
  }
}

absl::StatusOr<std::unique_ptr<OpenAiBackend>> OpenAiBackend::Create(
    OpenAiBackendOptions options) {
  ASSIGN_OR_RETURN(HttpTarget target, ParseHttpUrl(options.base_url));
  auto ep = std::make_unique<Endpoint>();
  ASSIGN_OR_RETURN(ep->client, MakeHttpClient(target, options.timeout));
  ep->path_prefix = target.path;
  if (!options.api_key_env.empty()) {
    if (const char* key = std::getenv(options.api_key_env.c_str())) {
      ep->bearer = key;
    }
  }
  return std::unique_ptr<OpenAiBackend>(
      new OpenAiBackend(std::move(options), std::move(ep)));
}

OpenAiBackend::OpenAiBackend(OpenAiBackendOptions options,
                             std::unique_ptr<Endpoint> ep)
    : options_(std::move(options)), endpoint_(std::move(ep)) {}

OpenAiBackend::~OpenAiBackend() = default;

std::string OpenAiBackend::name() const {
  return absl::StrCat("openai-compatible(", options_.base_url, ")");
}

absl::StatusOr<json> OpenAiBackend::Post(const std::string& path,
                                         const json& body) {
  httplib::Headers headers;
  if (!endpoint_->bearer.empty()) {
    headers.emplace("Authorization", "Bearer " + endpoint_->bearer);
  }
  httplib::Result res = [&] {
    // httplib::Client is not safe for concurrent requests.
    std::lock_guard<std::mutex> lock(endpoint_->mu);
    return endpoint_->client->Post(endpoint_->path_prefix + path, headers,
                                   body.dump(), "application/json");
  }();
  if (!res) {
    return absl::UnavailableError(absl::StrCat(
        "transport failure: ", httplib::to_string(res.error())));
  }
  RETURN_IF_ERROR(StatusFromHttp(res->status, res->body));
  json parsed = json::parse(res->body, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded()) {
    return absl::DataLossError("response body is not JSON");
  }
  return parsed;
}

absl::StatusOr<std::vector<GenerationResult>> OpenAiBackend::Generate(
    const std::string& model_ref, const std::string& prompt,
    const DecodeParams& decode) {
  const std::string& model = model_ref.empty() ? options_.model : model_ref;
  ASSIGN_OR_RETURN(json body, Post("/chat/completions",
                                   BuildChatRequest(model, prompt, decode)));
  return ParseChatResponse(body, decode.num_samples);
}

absl::StatusOr<std::vector<std::vector<double>>> OpenAiBackend::Embed(
    std::span<const std::string> texts) {
  json request = {{"model", options_.model},
                  {"input", std::vector<std::string>(texts.begin(),
                                                     texts.end())}};
  ASSIGN_OR_RETURN(json body, Post("/embeddings", request));
  try {
    const json& data = body.at("data");
    std::vector<std::vector<double>> out(data.size());
    for (size_t i = 0; i < data.size(); ++i) {
      const size_t index = data[i].value("index", i);
      if (index >= out.size()) {
        return absl::DataLossError("embedding index out of range");
      }
      out[index] = data[i].at("embedding").get<std::vector<double>>();
    }
    return out;
  } catch (const json::exception& e) {
    return absl::DataLossError(
        absl::StrCat("malformed embeddings response: ", e.what()));
  }
}

}  // namespace textal
