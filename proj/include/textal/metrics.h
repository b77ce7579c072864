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

// Reference-based text metrics. Tokens are lowercased whitespace tokens; no
// stemming, so scores are comparable only with the same tokenization.

#ifndef TEXTAL_METRICS_H_
#define TEXTAL_METRICS_H_

#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"

namespace textal {

std::vector<std::string> MetricTokens(std::string_view text);

// Lowercase, trim, collapse internal whitespace.
std::string NormalizeAnswer(std::string_view text);

// NormalizeAnswer plus removal of ASCII punctuation and the articles a, an,
// the (SQuAD convention).
std::string NormalizeAnswerRelaxed(std::string_view text);

// 1 iff the normalized prediction equals the normalized first reference.
// References must be non-empty; an empty list scores 0.
double ExactMatch(std::string_view prediction,
                  const std::vector<std::string>& references);

// 1 iff the relaxed-normalized prediction equals any relaxed-normalized
// reference.
double RelaxedExactMatch(std::string_view prediction,
                         const std::vector<std::string>& references);

// F1 of clipped n-gram overlap. If either side has no n-grams the score is 1
// when the token sequences are identical and 0 otherwise.
double RougeN(std::string_view prediction, std::string_view reference, int n);

// LCS-based F1 with the same degenerate-case rule as RougeN.
double RougeL(std::string_view prediction, std::string_view reference);

// Unsmoothed sentence BLEU of `hypothesis` against one `reference`, geometric
// mean over n = 1..min(4, shorter length), with brevity penalty. Two empty
// token sequences score 1; one empty sequence scores 0.
double SentenceBleu(const std::vector<std::string>& hypothesis,
                    const std::vector<std::string>& reference);

// Corpus BLEU-4: clipped counts pooled over the corpus (max count over each
// instance's references), closest-reference-length brevity penalty, no
// smoothing. kInvalidArgument on length mismatch or empty input.
absl::StatusOr<double> CorpusBleu(
    const std::vector<std::string>& predictions,
    const std::vector<std::vector<std::string>>& references);

// Metric ids accepted in configuration.
inline constexpr std::string_view kMetricExactMatch = "exact_match";
inline constexpr std::string_view kMetricRelaxedExactMatch =
    "relaxed_exact_match";
inline constexpr std::string_view kMetricRouge1 = "rouge1";
inline constexpr std::string_view kMetricRouge2 = "rouge2";
inline constexpr std::string_view kMetricRougeL = "rougeL";
inline constexpr std::string_view kMetricBleu = "bleu";

bool IsKnownMetric(std::string_view id);
const std::vector<std::string>& KnownMetrics();

}  // namespace textal

#endif  // TEXTAL_METRICS_H_
