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

#include "textal/metrics.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "absl/strings/ascii.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"

namespace textal {
namespace {

absl::string_view ToAbsl(std::string_view s) {
  return absl::string_view(s.data(), s.size());
}

using NgramCounts = std::map<std::vector<std::string>, int>;

NgramCounts CountNgrams(const std::vector<std::string>& tokens, int n) {
  NgramCounts counts;
  if (n <= 0 || tokens.size() < static_cast<size_t>(n)) return counts;
  for (size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + i,
                                      tokens.begin() + i + n)];
  }
  return counts;
}

int ClippedOverlap(const NgramCounts& hyp, const NgramCounts& ref) {
  int overlap = 0;
  for (const auto& [gram, count] : hyp) {
    auto it = ref.find(gram);
    if (it != ref.end()) overlap += std::min(count, it->second);
  }
  return overlap;
}

double F1(double matches, double hyp_total, double ref_total) {
  if (matches <= 0.0) return 0.0;
  const double p = matches / hyp_total;
  const double r = matches / ref_total;
  return 2.0 * p * r / (p + r);
}

size_t LcsLength(const std::vector<std::string>& a,
                 const std::vector<std::string>& b) {
  std::vector<size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

std::vector<std::string> MetricTokens(std::string_view text) {
  return absl::StrSplit(absl::AsciiStrToLower(ToAbsl(text)),
                        absl::ByAnyChar(" \t\r\n\f\v"), absl::SkipEmpty());
}

std::string NormalizeAnswer(std::string_view text) {
  return absl::StrJoin(MetricTokens(text), " ");
}

std::string NormalizeAnswerRelaxed(std::string_view text) {
  std::string lowered = absl::AsciiStrToLower(ToAbsl(text));
  std::string no_punct;
  no_punct.reserve(lowered.size());
  for (char c : lowered) {
    if (!absl::ascii_ispunct(static_cast<unsigned char>(c))) {
      no_punct.push_back(c);
    }
  }
  std::vector<std::string> kept;
  for (absl::string_view tok :
       absl::StrSplit(no_punct, absl::ByAnyChar(" \t\r\n\f\v"),
                      absl::SkipEmpty())) {
    if (tok == "a" || tok == "an" || tok == "the") continue;
    kept.emplace_back(tok);
  }
  return absl::StrJoin(kept, " ");
}

double ExactMatch(std::string_view prediction,
                  const std::vector<std::string>& references) {
  if (references.empty()) return 0.0;
  return NormalizeAnswer(prediction) == NormalizeAnswer(references.front())
             ? 1.0
             : 0.0;
}

double RelaxedExactMatch(std::string_view prediction,
                         const std::vector<std::string>& references) {
  const std::string pred = NormalizeAnswerRelaxed(prediction);
  for (const std::string& ref : references) {
    if (pred == NormalizeAnswerRelaxed(ref)) return 1.0;
  }
  return 0.0;
}

double RougeN(std::string_view prediction, std::string_view reference, int n) {
  const auto hyp = MetricTokens(prediction);
  const auto ref = MetricTokens(reference);
  const NgramCounts hyp_grams = CountNgrams(hyp, n);
  const NgramCounts ref_grams = CountNgrams(ref, n);
  if (hyp_grams.empty() || ref_grams.empty()) return hyp == ref ? 1.0 : 0.0;
  const double hyp_total = static_cast<double>(hyp.size() - n + 1);
  const double ref_total = static_cast<double>(ref.size() - n + 1);
  return F1(ClippedOverlap(hyp_grams, ref_grams), hyp_total, ref_total);
}

double RougeL(std::string_view prediction, std::string_view reference) {
  const auto hyp = MetricTokens(prediction);
  const auto ref = MetricTokens(reference);
  if (hyp.empty() || ref.empty()) return hyp == ref ? 1.0 : 0.0;
  return F1(static_cast<double>(LcsLength(hyp, ref)),
            static_cast<double>(hyp.size()), static_cast<double>(ref.size()));
}

double SentenceBleu(const std::vector<std::string>& hypothesis,
                    const std::vector<std::string>& reference) {
  if (hypothesis.empty() || reference.empty()) {
    return hypothesis.empty() && reference.empty() ? 1.0 : 0.0;
  }
  const int max_n = static_cast<int>(
      std::min<size_t>(4, std::min(hypothesis.size(), reference.size())));
  double log_sum = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    const int matches =
        ClippedOverlap(CountNgrams(hypothesis, n), CountNgrams(reference, n));
    if (matches == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matches) /
                        static_cast<double>(hypothesis.size() - n + 1));
  }
  const double c = static_cast<double>(hypothesis.size());
  const double r = static_cast<double>(reference.size());
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_sum / max_n);
}

absl::StatusOr<double> CorpusBleu(
    const std::vector<std::string>& predictions,
    const std::vector<std::vector<std::string>>& references) {
  if (predictions.size() != references.size()) {
    return absl::InvalidArgumentError(
        "BLEU requires one reference list per prediction");
  }
  if (predictions.empty()) {
    return absl::InvalidArgumentError("BLEU requires a non-empty corpus");
  }
  constexpr int kMaxOrder = 4;
  int64_t matches[kMaxOrder] = {};
  int64_t totals[kMaxOrder] = {};
  int64_t hyp_len = 0;
  int64_t ref_len = 0;
  for (size_t i = 0; i < predictions.size(); ++i) {
    if (references[i].empty()) {
      return absl::InvalidArgumentError("BLEU: empty reference list");
    }
    const auto hyp = MetricTokens(predictions[i]);
    std::vector<std::vector<std::string>> refs;
    for (const std::string& r : references[i]) refs.push_back(MetricTokens(r));
    hyp_len += static_cast<int64_t>(hyp.size());
    // Closest reference length; ties go to the shorter one.
    size_t best = refs.front().size();
    for (const auto& r : refs) {
      const auto d = [&](size_t len) {
        return std::llabs(static_cast<long long>(len) -
                          static_cast<long long>(hyp.size()));
      };
      if (d(r.size()) < d(best) || (d(r.size()) == d(best) && r.size() < best)) {
        best = r.size();
      }
    }
    ref_len += static_cast<int64_t>(best);
    for (int n = 1; n <= kMaxOrder; ++n) {
      const NgramCounts hyp_grams = CountNgrams(hyp, n);
      NgramCounts max_ref;
      for (const auto& r : refs) {
        for (const auto& [gram, count] : CountNgrams(r, n)) {
          max_ref[gram] = std::max(max_ref[gram], count);
        }
      }
      matches[n - 1] += ClippedOverlap(hyp_grams, max_ref);
      if (hyp.size() >= static_cast<size_t>(n)) {
        totals[n - 1] += static_cast<int64_t>(hyp.size() - n + 1);
      }
    }
  }
  double log_sum = 0.0;
  for (int n = 0; n < kMaxOrder; ++n) {
    if (matches[n] == 0 || totals[n] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matches[n]) /
                        static_cast<double>(totals[n]));
  }
  if (hyp_len == 0) return 0.0;
  const double bp =
      hyp_len > ref_len
          ? 1.0
          : std::exp(1.0 - static_cast<double>(ref_len) /
                               static_cast<double>(hyp_len));
  return bp * std::exp(log_sum / kMaxOrder);
}

const std::vector<std::string>& KnownMetrics() {
  static const auto* kMetrics = new std::vector<std::string>{
      std::string(kMetricExactMatch), std::string(kMetricRelaxedExactMatch),
      std::string(kMetricRouge1),     std::string(kMetricRouge2),
      std::string(kMetricRougeL),     std::string(kMetricBleu)};
  return *kMetrics;
}

bool IsKnownMetric(std::string_view id) {
  const auto& known = KnownMetrics();
  return std::find(known.begin(), known.end(), id) != known.end();
}

}  // namespace textal
