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

#include "textal/gateway.h"

#include <cmath>
#include <future>
#include <thread>

#include "absl/strings/str_cat.h"
#include "textal/openai_backend.h"
#include "textal/status_macros.h"

namespace textal {
namespace {

constexpr size_t kEmbedChunk = 256;

absl::Status ValidateResult(const GenerationResult& r,
                            const DecodeParams& decode,
                            const std::string& backend) {
  if (decode.logprobs_k > 0 && !r.tokens.empty() && r.token_logprobs.empty()) {
    return absl::UnimplementedError(absl::StrCat(
        "capability error: backend '", backend,
        "' returned no token log-probabilities"));
  }
  if (!r.token_logprobs.empty() &&
      r.token_logprobs.size() != r.tokens.size()) {
    return absl::DataLossError(absl::StrCat(
        "backend '", backend, "' returned ", r.tokens.size(), " tokens but ",
        r.token_logprobs.size(), " log-probabilities"));
  }
  for (double lp : r.token_logprobs) {
    if (!(lp <= 0.0)) {
      return absl::DataLossError(absl::StrCat(
          "backend '", backend, "' returned log-probability ", lp, " > 0"));
    }
  }
  for (const auto& position : r.top_alternatives) {
    double mass = 0.0;
    for (const TokenAlternative& alt : position) mass += std::exp(alt.logprob);
    if (mass > 1.0 + 1e-6) {
      return absl::DataLossError(absl::StrCat(
          "backend '", backend, "' alternatives sum to ", mass, " > 1"));
    }
  }
  return absl::OkStatus();
}

}  // namespace

absl::Status ValidateDescriptor(const BackendDescriptor& descriptor) {
  if (descriptor.kind == BackendKind::kOpenAiCompatible &&
      descriptor.base_url.empty()) {
    return absl::InvalidArgumentError(
        "remote backend descriptor requires a base URL");
  }
  if (descriptor.max_concurrent < 1) {
    return absl::InvalidArgumentError("max_concurrent must be >= 1");
  }
  return absl::OkStatus();
}

absl::StatusOr<std::shared_ptr<ModelBackend>> MakeBackend(
    const BackendDescriptor& descriptor) {
  RETURN_IF_ERROR(ValidateDescriptor(descriptor));
  switch (descriptor.kind) {
    case BackendKind::kMock: {
      MockBackendOptions options;
      options.seed = descriptor.mock_seed;
      options.embedding_dim = descriptor.mock_embedding_dim;
      if (!descriptor.model.empty()) options.embedding_model = descriptor.model;
      return std::shared_ptr<ModelBackend>(
          std::make_shared<MockBackend>(std::move(options)));
    }
    case BackendKind::kOpenAiCompatible: {
      OpenAiBackendOptions options;
      options.base_url = descriptor.base_url;
      options.api_key_env = descriptor.api_key_env;
      options.model = descriptor.model;
      options.timeout = descriptor.timeout;
      ASSIGN_OR_RETURN(auto backend, OpenAiBackend::Create(options));
      return std::shared_ptr<ModelBackend>(std::move(backend));
    }
  }
  return absl::InvalidArgumentError("unknown backend kind");
}

// Holds one of the gateway's in-flight slots for its lifetime.
class ModelGateway::Slot {
 public:
  explicit Slot(ModelGateway& gw) : gw_(gw) {
    std::unique_lock<std::mutex> lock(gw_.mu_);
    gw_.slot_cv_.wait(lock,
                      [&] { return gw_.in_flight_ < gw_.max_concurrent_; });
    ++gw_.in_flight_;
  }
  ~Slot() {
    {
      std::lock_guard<std::mutex> lock(gw_.mu_);
      --gw_.in_flight_;
    }
    gw_.slot_cv_.notify_one();
  }
  Slot(const Slot&) = delete;
  Slot& operator=(const Slot&) = delete;

 private:
  ModelGateway& gw_;
};

ModelGateway::ModelGateway(std::shared_ptr<ModelBackend> backend,
                           int max_concurrent, RetryPolicy retry)
    : backend_(std::move(backend)),
      max_concurrent_(std::max(1, max_concurrent)),
      retry_(retry) {}

template <typename Fn>
auto ModelGateway::WithRetries(Fn&& fn) -> decltype(fn()) {
  auto delay = retry_.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    auto result = [&] {
      Slot slot(*this);
      return fn();
    }();
    if (result.ok() || !absl::IsUnavailable(result.status()) ||
        attempt >= retry_.max_attempts) {
      if (!result.ok() && absl::IsUnavailable(result.status())) {
        return absl::UnavailableError(
            absl::StrCat("backend error (retriable) after ", attempt,
                         " attempts: ", result.status().message()));
      }
      return result;
    }
    std::this_thread::sleep_for(delay);
    delay = std::chrono::duration_cast<std::chrono::milliseconds>(
        delay * retry_.backoff_multiplier);
  }
}

absl::StatusOr<std::vector<GenerationResult>> ModelGateway::Generate(
    const std::string& model_ref, const std::string& prompt,
    const DecodeParams& decode) {
  if (decode.num_samples < 1) {
    return absl::InvalidArgumentError("num_samples must be >= 1");
  }
  if (!(decode.temperature >= 0.0)) {
    return absl::InvalidArgumentError("temperature must be >= 0");
  }
  if (decode.num_samples > 1 && decode.temperature == 0.0) {
    return absl::InvalidArgumentError(
        "num_samples > 1 requires temperature > 0");
  }
  if (decode.max_tokens < 1) {
    return absl::InvalidArgumentError("max_tokens must be >= 1");
  }
  ASSIGN_OR_RETURN(auto results, WithRetries([&] {
                     return backend_->Generate(model_ref, prompt, decode);
                   }));
  if (static_cast<int>(results.size()) != decode.num_samples) {
    return absl::DataLossError(absl::StrCat(
        "backend '", backend_->name(), "' returned ", results.size(),
        " samples, expected ", decode.num_samples));
  }
  Usage call_usage;
  for (const GenerationResult& r : results) {
    RETURN_IF_ERROR(ValidateResult(r, decode, backend_->name()));
    call_usage += r.usage;
  }
  std::lock_guard<std::mutex> lock(mu_);
  usage_ += call_usage;
  ++generate_requests_;
  return results;
}

absl::StatusOr<std::vector<std::vector<GenerationResult>>>
ModelGateway::GenerateBatch(const std::string& model_ref,
                            const std::vector<std::string>& prompts,
                            const DecodeParams& decode) {
  std::vector<std::vector<GenerationResult>> out(prompts.size());
  if (max_concurrent_ == 1 || prompts.size() <= 1) {
    for (size_t i = 0; i < prompts.size(); ++i) {
      ASSIGN_OR_RETURN(out[i], Generate(model_ref, prompts[i], decode));
    }
    return out;
  }
  // Slots bound the real concurrency; the worker count only limits threads.
  const size_t workers =
      std::min<size_t>(static_cast<size_t>(max_concurrent_), prompts.size());
  std::atomic<size_t> next{0};
  std::vector<absl::Status> errors(prompts.size());
  std::vector<std::future<void>> futures;
  for (size_t w = 0; w < workers; ++w) {
    futures.push_back(std::async(std::launch::async, [&] {
      for (size_t i = next++; i < prompts.size(); i = next++) {
        auto r = Generate(model_ref, prompts[i], decode);
        if (r.ok()) {
          out[i] = std::move(r).value();
        } else {
          errors[i] = r.status();
        }
      }
    }));
  }
  for (auto& f : futures) f.get();
  for (const absl::Status& s : errors) RETURN_IF_ERROR(s);
  return out;
}

absl::StatusOr<std::vector<EmbeddingVector>> ModelGateway::Embed(
    const std::vector<std::string>& texts) {
  if (texts.empty()) {
    return absl::InvalidArgumentError("embed requires at least one text");
  }
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  const std::string model = backend_->embedding_model();
  for (size_t start = 0; start < texts.size(); start += kEmbedChunk) {
    const size_t len = std::min(kEmbedChunk, texts.size() - start);
    std::span<const std::string> chunk(texts.data() + start, len);
    ASSIGN_OR_RETURN(auto raw,
                     WithRetries([&] { return backend_->Embed(chunk); }));
    if (raw.size() != len) {
      return absl::DataLossError(
          absl::StrCat("backend '", backend_->name(), "' returned ",
                       raw.size(), " embeddings for ", len, " texts"));
    }
    for (auto& v : raw) {
      {
        std::lock_guard<std::mutex> lock(mu_);
        if (!embedding_dim_) embedding_dim_ = v.size();
        if (v.empty() || v.size() != *embedding_dim_) {
          return absl::DataLossError(absl::StrCat(
              "backend integrity error: embedding dimension ", v.size(),
              " differs from ", *embedding_dim_));
        }
      }
      double norm = 0.0;
      for (double x : v) {
        if (!std::isfinite(x)) {
          return absl::DataLossError(
              "backend integrity error: non-finite embedding entry");
        }
        norm += x * x;
      }
      norm = std::sqrt(norm);
      if (norm == 0.0) {
        return absl::DataLossError(
            "backend integrity error: zero embedding vector");
      }
      for (double& x : v) x /= norm;
      out.push_back(EmbeddingVector{std::move(v), model});
    }
    std::lock_guard<std::mutex> lock(mu_);
    ++embed_requests_;
  }
  return out;
}

Usage ModelGateway::total_usage() const {
  std::lock_guard<std::mutex> lock(mu_);
  return usage_;
}

int64_t ModelGateway::generate_requests() const {
  std::lock_guard<std::mutex> lock(mu_);
  return generate_requests_;
}

int64_t ModelGateway::embed_requests() const {
  std::lock_guard<std::mutex> lock(mu_);
  return embed_requests_;
}

}  // namespace textal
