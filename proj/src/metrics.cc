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

#include "plfuse/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "plfuse/errors.h"

namespace plfuse {

nlohmann::ordered_json WerBreakdown::ToJson() const {
  nlohmann::ordered_json j;
  j["substitutions"] = substitutions;
  j["deletions"] = deletions;
  j["insertions"] = insertions;
  j["ref_words"] = ref_words;
  j["wer"] = wer;
  return j;
}

WerBreakdown Wer(std::string_view reference, std::string_view hypothesis) {
  const auto ref = SplitWords(reference);
  const auto hyp = SplitWords(hypothesis);
  if (ref.empty()) throw InputError("WER reference has no words");

  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  // cost[i][j]: edit distance between ref[0, i) and hyp[0, j).
  std::vector<std::vector<int>> cost(n + 1, std::vector<int>(m + 1, 0));
  for (std::size_t i = 0; i <= n; ++i) cost[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= m; ++j) cost[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const int sub = cost[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      cost[i][j] = std::min({sub, cost[i][j - 1] + 1, cost[i - 1][j] + 1});
    }
  }

  WerBreakdown out;
  out.ref_words = static_cast<int>(n);
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool match = ref[i - 1] == hyp[j - 1];
      if (cost[i][j] == cost[i - 1][j - 1] + (match ? 0 : 1)) {
        if (!match) ++out.substitutions;
        --i;
        --j;
        continue;
      }
    }
    if (j > 0 && cost[i][j] == cost[i][j - 1] + 1) {
      ++out.insertions;
      --j;
    } else {
      ++out.deletions;
      --i;
    }
  }
  out.wer = static_cast<double>(out.errors()) / static_cast<double>(n);
  return out;
}

WerBreakdown CorpusWer(std::span<const WerBreakdown> samples) {
  WerBreakdown total;
  for (const auto& s : samples) {
    total.substitutions += s.substitutions;
    total.deletions += s.deletions;
    total.insertions += s.insertions;
    total.ref_words += s.ref_words;
  }
  if (total.ref_words == 0) throw InputError("corpus has no reference words");
  total.wer = static_cast<double>(total.errors()) /
              static_cast<double>(total.ref_words);
  return total;
}

namespace {

// Log probabilities are already rounded, so exp(-mean) can land an ulp or two
// off a value such as |V|. Digits beyond the 12th carry no information here.
double RoundSignificant(double x, int digits) {
  if (!std::isfinite(x) || x == 0.0) return x;
  const int exponent = static_cast<int>(std::floor(std::log10(std::abs(x))));
  const double scale = std::pow(10.0, digits - 1 - exponent);
  return std::round(x * scale) / scale;
}

}  // namespace

double Perplexity(const Scorer& lm, const std::vector<TokenSeq>& corpus,
                  TokenId eot, bool include_eot) {
  if (corpus.empty()) throw InputError("perplexity corpus is empty");
  long double log_sum = 0.0L;
  std::size_t count = 0;
  for (const auto& seq : corpus) {
    if (seq.empty()) throw InputError("perplexity corpus has an empty sequence");
    ScorerState state = lm.Initial();
    auto score_token = [&](TokenId t) {
      const double lp = lm.Score(state).at(static_cast<std::size_t>(t));
      log_sum += lp;
      ++count;
    };
    for (TokenId t : seq) {
      score_token(t);
      state = lm.Advance(state, t);
    }
    if (include_eot) score_token(eot);
  }
  if (log_sum == -std::numeric_limits<long double>::infinity()) {
    return std::numeric_limits<double>::infinity();
  }
  const auto mean = static_cast<double>(log_sum / static_cast<long double>(count));
  return RoundSignificant(std::exp(-mean), 12);
}

double Perplexity(const NGramLM& lm, const std::vector<TokenSeq>& corpus) {
  return Perplexity(lm, corpus, lm.eot(), lm.eot_appended());
}

namespace {

std::vector<double> AverageRanks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double SpearmanCorrelation(std::span<const double> x,
                           std::span<const double> y) {
  if (x.size() != y.size()) throw UsageError("spearman: length mismatch");
  if (x.size() < 2) throw UsageError("spearman: need at least two points");
  const auto rx = AverageRanks(x);
  const auto ry = AverageRanks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace plfuse
