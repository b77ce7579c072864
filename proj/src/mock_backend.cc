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

#include <bit>
#include <cmath>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "textal/backend.h"
#include "textal/hash.h"

namespace textal {
namespace {

constexpr int kPseudoVocab = 16;
constexpr int kMaxMockLength = 6;
constexpr int kMaxMockAlternatives = 4;

std::vector<std::string> SplitWhitespace(std::string_view text) {
  return absl::StrSplit(absl::string_view(text.data(), text.size()),
                        absl::ByAnyChar(" \t\r\n"), absl::SkipEmpty());
}

}  // namespace

int64_t CountWhitespaceTokens(std::string_view text) {
  return static_cast<int64_t>(SplitWhitespace(text).size());
}

MockBackend::MockBackend(MockBackendOptions options)
    : options_(std::move(options)), failures_left_(options_.fail_first_calls) {}

bool MockBackend::ConsumeInjectedFailure() {
  std::lock_guard<std::mutex> lock(mu_);
  if (failures_left_ > 0) {
    --failures_left_;
    return true;
  }
  return false;
}

void MockBackend::SetCannedResponse(const std::string& prompt,
                                    std::string text) {
  std::lock_guard<std::mutex> lock(mu_);
  options_.canned_responses[prompt] = std::move(text);
}

void MockBackend::SetEmbedding(const std::string& text,
                               std::vector<double> values) {
  std::lock_guard<std::mutex> lock(mu_);
  options_.embedding_overrides[text] = std::move(values);
}

double MockBackend::TokenLogprob(const std::string& token) const {
  const uint64_t h = HashWithSeed(token, options_.seed);
  return -(static_cast<double>(h % 1000) / 1000.0 + 0.05);
}

std::vector<double> MockBackend::RawEmbedding(const std::string& text) const {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = options_.embedding_overrides.find(text);
    if (it != options_.embedding_overrides.end()) return it->second;
  }
  const uint64_t base = HashWithSeed(text, options_.seed);
  std::vector<double> v(options_.embedding_dim);
  for (int i = 0; i < options_.embedding_dim; ++i) {
    v[i] = 2.0 * UnitInterval(HashCombine(base, static_cast<uint64_t>(i))) -
           1.0;
  }
  return v;
}

GenerationResult MockBackend::Sample(const std::string& model_ref,
                                     const std::string& prompt,
                                     const DecodeParams& decode,
                                     int sample_index) const {
  GenerationResult out;
  std::string canned;
  bool has_canned = false;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = options_.canned_responses.find(prompt);
    if (it != options_.canned_responses.end()) {
      canned = it->second;
      has_canned = true;
    }
  }
  if (has_canned) {
    out.tokens = SplitWhitespace(canned);
  } else {
    uint64_t h = HashCombine(Fnv1a64(model_ref),
                             HashWithSeed(prompt, options_.seed));
    if (decode.temperature > 0.0) {
      h = HashCombine(h, std::bit_cast<uint64_t>(decode.temperature));
      h = HashCombine(h, static_cast<uint64_t>(sample_index) + 1);
    }
    const std::vector<std::string> words = SplitWhitespace(prompt);
    const int length =
        std::min(decode.max_tokens, 1 + static_cast<int>(h % kMaxMockLength));
    const uint64_t vocab = words.size() + kPseudoVocab;
    for (int t = 0; t < length; ++t) {
      const uint64_t pick = HashCombine(h, static_cast<uint64_t>(t)) % vocab;
      out.tokens.push_back(pick < words.size()
                               ? words[pick]
                               : absl::StrCat("w", pick - words.size()));
    }
  }
  out.text = absl::StrJoin(out.tokens, " ");
  if (!options_.omit_logprobs) {
    for (const std::string& token : out.tokens) {
      const double lp = TokenLogprob(token);
      out.token_logprobs.push_back(lp);
      if (decode.logprobs_k <= 0) continue;
      std::vector<TokenAlternative> alts = {{token, lp}};
      const int extra = std::min(decode.logprobs_k, kMaxMockAlternatives) - 1;
      const double rest = 1.0 - std::exp(lp);
      std::vector<double> weights;
      double total = 0.0;
      for (int j = 0; j < extra; ++j) {
        weights.push_back(
            1.0 + static_cast<double>(HashWithSeed(token, j + 1) % 9));
        total += weights.back();
      }
      // 10% of the non-chosen mass is left outside the reported alternatives.
      for (int j = 0; j < extra; ++j) {
        alts.push_back({absl::StrCat("<alt", j + 1, ">"),
                        std::log(rest * 0.9 * weights[j] / total)});
      }
      out.top_alternatives.push_back(std::move(alts));
    }
  }
  out.usage.output_tokens = static_cast<int64_t>(out.tokens.size());
  return out;
}

absl::StatusOr<std::vector<GenerationResult>> MockBackend::Generate(
    const std::string& model_ref, const std::string& prompt,
    const DecodeParams& decode) {
  ++generate_calls_;
  if (ConsumeInjectedFailure()) {
    return absl::UnavailableError("mock: injected transport failure");
  }
  std::vector<GenerationResult> results;
  for (int i = 0; i < decode.num_samples; ++i) {
    results.push_back(Sample(model_ref, prompt, decode, i));
  }
  if (!results.empty()) {
    results.front().usage.input_tokens = CountWhitespaceTokens(prompt);
  }
  return results;
}

absl::StatusOr<std::vector<std::vector<double>>> MockBackend::Embed(
    std::span<const std::string> texts) {
  ++embed_calls_;
  if (ConsumeInjectedFailure()) {
    return absl::UnavailableError("mock: injected transport failure");
  }
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const std::string& t : texts) out.push_back(RawEmbedding(t));
  return out;
}

}  // namespace textal
