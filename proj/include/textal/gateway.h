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

#ifndef TEXTAL_GATEWAY_H_
#define TEXTAL_GATEWAY_H_

#include <chrono>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "textal/backend.h"

namespace textal {

enum class BackendKind { kMock, kOpenAiCompatible };

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds initial_backoff{200};
  double backoff_multiplier = 2.0;
};

// Where and how to reach a model.
struct BackendDescriptor {
  BackendKind kind = BackendKind::kMock;
  std::string base_url;
  // Name of the environment variable holding the bearer token.
  std::string api_key_env;
  std::string model;
  int max_concurrent = 4;
  RetryPolicy retry;
  std::chrono::seconds timeout{120};
  // Mock only.
  uint64_t mock_seed = 0;
  int mock_embedding_dim = 64;
};

// kInvalidArgument when a remote descriptor lacks a base URL.
absl::Status ValidateDescriptor(const BackendDescriptor& descriptor);

absl::StatusOr<std::shared_ptr<ModelBackend>> MakeBackend(
    const BackendDescriptor& descriptor);

// Uniform front for a backend: precondition checks, bounded parallelism,
// retries with exponential backoff on kUnavailable, and result validation.
// Safe for concurrent use.
class ModelGateway {
 public:
  ModelGateway(std::shared_ptr<ModelBackend> backend, int max_concurrent = 4,
               RetryPolicy retry = {});

  // Preconditions: num_samples >= 1, temperature >= 0, and temperature > 0
  // when num_samples > 1 (kInvalidArgument otherwise). A backend that
  // returns no log-probabilities while logprobs_k > 0 yields kUnimplemented.
  absl::StatusOr<std::vector<GenerationResult>> Generate(
      const std::string& model_ref, const std::string& prompt,
      const DecodeParams& decode);

  // Generates for every prompt with at most max_concurrent calls in flight.
  // All-or-nothing: the first failure is returned.
  absl::StatusOr<std::vector<std::vector<GenerationResult>>> GenerateBatch(
      const std::string& model_ref, const std::vector<std::string>& prompts,
      const DecodeParams& decode);

  // Unit-normalized embeddings, one per text, in order.
  absl::StatusOr<std::vector<EmbeddingVector>> Embed(
      const std::vector<std::string>& texts);

  std::string backend_name() const { return backend_->name(); }
  std::string embedding_model() const { return backend_->embedding_model(); }
  ModelBackend& backend() { return *backend_; }

  // Sum of the usage of every successful generation call.
  Usage total_usage() const;
  int64_t generate_requests() const;
  int64_t embed_requests() const;

 private:
  class Slot;

  template <typename Fn>
  auto WithRetries(Fn&& fn) -> decltype(fn());

  std::shared_ptr<ModelBackend> backend_;
  int max_concurrent_;
  RetryPolicy retry_;

  mutable std::mutex mu_;
  std::condition_variable slot_cv_;
  int in_flight_ = 0;
  Usage usage_;
  int64_t generate_requests_ = 0;
  int64_t embed_requests_ = 0;
  std::optional<size_t> embedding_dim_;
};

}  // namespace textal

#endif  // TEXTAL_GATEWAY_H_
