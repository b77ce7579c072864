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

#ifndef TEXTAL_OPENAI_BACKEND_H_
#define TEXTAL_OPENAI_BACKEND_H_

#include <chrono>
#include <memory>
#include <string>

#include "nlohmann/json.hpp"
#include "textal/backend.h"

namespace textal {

struct OpenAiBackendOptions {
  // e.g. "http://localhost:8000/v1" or "https://api.openai.com/v1".
  std::string base_url;
  std::string api_key_env;
  std::string model;
  std::chrono::seconds timeout{120};
};

// Client for OpenAI-compatible /chat/completions and /embeddings endpoints
// (OpenAI, vLLM, SGLang and similar servers).
//
// Usage is attributed per call: the first choice carries the prompt tokens,
// every choice carries its own completion tokens, so the sum over results
// equals the response's usage block.
class OpenAiBackend : public ModelBackend {
 public:
  static absl::StatusOr<std::unique_ptr<OpenAiBackend>> Create(
      OpenAiBackendOptions options);
  ~OpenAiBackend() override;

  std::string name() const override;
  absl::StatusOr<std::vector<GenerationResult>> Generate(
      const std::string& model_ref, const std::string& prompt,
      const DecodeParams& decode) override;
  absl::StatusOr<std::vector<std::vector<double>>> Embed(
      std::span<const std::string> texts) override;
  std::string embedding_model() const override { return options_.model; }

 private:
  struct Endpoint;
  OpenAiBackend(OpenAiBackendOptions options, std::unique_ptr<Endpoint> ep);
  absl::StatusOr<nlohmann::json> Post(const std::string& path,
                                      const nlohmann::json& body);

  OpenAiBackendOptions options_;
  std::unique_ptr<Endpoint> endpoint_;
};

// Request body for a chat completion. Exposed for tests.
nlohmann::json BuildChatRequest(const std::string& model,
                                const std::string& prompt,
                                const DecodeParams& decode);

// Parses a chat completion response body.
absl::StatusOr<std::vector<GenerationResult>> ParseChatResponse(
    const nlohmann::json& body, int expected_samples);

}  // namespace textal

#endif  // TEXTAL_OPENAI_BACKEND_H_
