// Copyright (c) 2026 The plfuse Authors
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

#ifndef PLFUSE_METRICS_H_
#define PLFUSE_METRICS_H_

#include <span>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "plfuse/core.h"
#include "plfuse/scorers.h"

namespace plfuse {

struct WerBreakdown {
  int substitutions = 0;
  int deletions = 0;
  int insertions = 0;
  int ref_words = 0;
  double wer = 0.0;

  int errors() const { return substitutions + deletions + insertions; }
  nlohmann::ordered_json ToJson() const;
};

// Word-level Levenshtein alignment with unit costs over whitespace-split
// words. When several alignments share the minimum cost, the backtrace
// prefers substitution (or match), then insertion, then deletion.
// Throws InputError when the reference has no words.
WerBreakdown Wer(std::string_view reference, std::string_view hypothesis);

// Total errors over total reference words.
WerBreakdown CorpusWer(std::span<const WerBreakdown> samples);

// exp(-(sum of log P over every token, plus EOT per sequence when
// `include_eot`) / token count). Sequences are scored from the BOS state.
// Returns +inf if any scored token has zero probability. Throws InputError on
// an empty corpus or an empty sequence.
double Perplexity(const Scorer& lm, const std::vector<TokenSeq>& corpus,
                  TokenId eot, bool include_eot);

// Includes EOT exactly when the model was trained with EOT appended.
double Perplexity(const NGramLM& lm, const std::vector<TokenSeq>& corpus);

// Spearman rank correlation with average ranks for ties. Returns 0 when
// either side is constant. Throws UsageError on length mismatch or fewer
// than two points.
double SpearmanCorrelation(std::span<const double> x, std::span<const double> y);

}  // namespace plfuse

#endif  // PLFUSE_METRICS_H_
