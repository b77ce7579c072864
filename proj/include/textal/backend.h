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

// Model backends: text generation with token log-probabilities and text
// embeddings. All log-probabilities are natural logs.

#ifndef TEXTAL_BACKEND_H_
#define TEXTAL_BACKEND_H_

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"

namespace textal {

struct Usage {
  int64_t input_tokens = 0;
  int64_t output_tokens = 0;

  Usage& operator+=(const Usage& o) {
    input_tokens += o.input_tokens;
    output_tokens += o.output_tokens;
    return *this;
  }
  friend bool operator==(const Usage&, const Usage&) = default;
};

struct TokenAlternative {
  std::string token;
  double logprob = 0.0;
};

struct GenerationResult {
  std::string text;
  std::vector<std::string> tokens;
  std::vector<double> token_logprobs;
  // Per position, up to K alternatives. Empty when not requested.
  std::vector<std::vector<TokenAlternative>> top_alternatives;
  Usage usage;
};

struct DecodeParams {
  double temperature = 0.0;
  double top_p = 0.5;
  int max_tokens = 64;
  int num_samples = 1;
  int logprobs_k = 20;
};

struct EmbeddingVector {
  std::vector<double> values;
  std::string model;
};

// Backend implementations do transport only. Validation, retries and the
// in-flight cap live in ModelGateway.
class ModelBackend {
 public:
  virtual ~ModelBackend() = default;

  virtual std::string name() const = 0;

  // Returns decode.num_samples results. kUnavailable marks a retriable
  // transport failure.
  virtual absl::StatusOr<std::vector<GenerationResult>> Generate(
      const std::string& model_ref, const std::string& prompt,
      const DecodeParams& decode) = 0;

  // One raw (not necessarily normalized) vector per text.
  virtual absl::StatusOr<std::vector<std::vector<double>>> Embed(
      std::span<const std::string> texts) = 0;

  virtual std::string embedding_model() const = 0;
};

struct MockBackendOptions {
  uint64_t seed = 0;
  int embedding_dim = 64;
  std::string embedding_model = "mock-embed";
  // Fixed completions by prompt; other prompts get hash-derived text.
  std::map<std::string, std::string> canned_responses;
  // Fixed raw embeddings by text.
  std::map<std::string, std::vector<double>> embedding_overrides;
  // The first N Generate/Embed calls fail with kUnavailable.
  int fail_first_calls = 0;
  // When set, Generate never returns log-probabilities.
  bool omit_logprobs = false;
};

// Deterministic stand-in for a served model.
//
// Tokenization is whitespace. The log-probability of a token is
//   -((FNV1a(token || seed) mod 1000) / 1000 + 0.05),
// so it depends on the token text and the backend seed only. Completion text
// is a pure function of (model_ref, prompt, seed, decode params, sample
// index). Embeddings are seeded hashes of the text.
class MockBackend : public ModelBackend {
 public:
  explicit MockBackend(MockBackendOptions options = {});

  std::string name() const override { return "mock"; }
  absl::StatusOr<std::vector<GenerationResult>> Generate(
      const std::string& model_ref, const std::string& prompt,
      const DecodeParams& decode) override;
  absl::StatusOr<std::vector<std::vector<double>>> Embed(
      std::span<const std::string> texts) override;
  std::string embedding_model() const override {
    return options_.embedding_model;
  }

  double TokenLogprob(const std::string& token) const;
  std::vector<double> RawEmbedding(const std::string& text) const;

  void SetCannedResponse(const std::string& prompt, std::string text);
  void SetEmbedding(const std::string& text, std::vector<double> values);

  int64_t generate_calls() const { return generate_calls_.load(); }
  int64_t embed_calls() const { return embed_calls_.load(); }

 private:
  bool ConsumeInjectedFailure();
  GenerationResult Sample(const std::string& model_ref,
                          const std::string& prompt,
                          const DecodeParams& decode, int sample_index) const;

  MockBackendOptions options_;
  mutable std::mutex mu_;
  int failures_left_;
  std::atomic<int64_t> generate_calls_{0};
  std::atomic<int64_t> embed_calls_{0};
};

// Whitespace token count; the mock's tokenizer.
int64_t CountWhitespaceTokens(std::string_view text);

}  // namespace textal

#endif  // TEXTAL_BACKEND_H_
