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

#include <cmath>

#include "gtest/gtest.h"
#include "oracles.h"
#include "plfuse/errors.h"

namespace plfuse {
namespace {

TEST(WerTest, Examples) {
  auto w = Wer("a b c", "a b c");
  EXPECT_EQ(w.wer, 0.0);
  EXPECT_EQ(w.errors(), 0);

  w = Wer("a b c", "a x c");
  EXPECT_EQ(w.substitutions, 1);
  EXPECT_DOUBLE_EQ(w.wer, 1.0 / 3);

  w = Wer("a b c", "");
  EXPECT_EQ(w.deletions, 3);
  EXPECT_EQ(w.wer, 1.0);

  w = Wer("a", "a a a");
  EXPECT_EQ(w.insertions, 2);
  EXPECT_EQ(w.wer, 2.0);

  EXPECT_THROW(Wer("", "a"), InputError);
}

TEST(WerTest, AgreesWithOracle) {
  testing::TestRng rng(51);
  const std::vector<std::string> alphabet = {"w", "x", "y", "z"};
  auto random_text = [&](int min_len) {
    std::string s;
    const int n = rng.Int(min_len, 10);
    for (int i = 0; i < n; ++i) {
      if (i) s += ' ';
      s += alphabet[static_cast<std::size_t>(rng.Int(0, rng.Int(0, 3)))];
    }
    return s;
  };
  for (int trial = 0; trial < 500; ++trial) {
    const std::string ref = random_text(1);
    const std::string hyp = random_text(0);
    const auto r = testing::Words(ref);
    const auto h = testing::Words(hyp);
    const auto w = Wer(ref, hyp);
    const int dist = testing::EditDistance(r, h);
    ASSERT_EQ(w.errors(), dist);
    ASSERT_EQ(w.ref_words, static_cast<int>(r.size()));
    ASSERT_EQ(w.wer, static_cast<double>(dist) / static_cast<double>(r.size()));
    ASSERT_LE(w.substitutions + w.deletions, w.ref_words);
    ASSERT_EQ(w.insertions - w.deletions,
              static_cast<int>(h.size()) - static_cast<int>(r.size()));
  }
}

TEST(WerTest, CorpusAggregate) {
  std::vector<WerBreakdown> parts = {Wer("a b c d", "a b c d"), Wer("a b c d", "a x c d"),
                                     Wer("a b c d", "a b c d"), Wer("a b c d", "a b c d")};
  const auto total = CorpusWer(parts);
  EXPECT_EQ(total.ref_words, 16);
  EXPECT_EQ(total.wer, 1.0 / 16);
}

TEST(PerplexityTest, MleUnigramEntropyIdentity) {
  const Vocabulary v({"<bos>", "<eot>", "a", "b"}, 0, 1);
  const std::vector<TokenSeq> corpus = {{2, 2, 2, 3}};
  const NGramLM lm = NGramLM::Train(corpus, v, NGramTrainOptions{1, 1e-12, false});
  const double h = -(0.75 * std::log(0.75) + 0.25 * std::log(0.25));
  EXPECT_NEAR(Perplexity(lm, corpus), std::exp(h), 1e-6);
  EXPECT_NEAR(Perplexity(lm, corpus), 1.7548, 1e-4);
}

TEST(PerplexityTest, UniformIsVocabularySize) {
  testing::TestRng rng(52);
  for (int content = 1; content <= 30; ++content) {
    const Vocabulary v = testing::LetterVocab(content);
    const UniformScorer u(v.size());
    for (int trial = 0; trial < 10; ++trial) {
      const auto corpus = testing::RandomCorpus(rng, v, rng.Int(1, 30), 12);
      EXPECT_EQ(Perplexity(u, corpus, v.eot(), trial % 2 == 0),
                static_cast<double>(v.size()));
    }
  }
}

TEST(PerplexityTest, HeldOutIsAboveOne) {
  testing::TestRng rng(53);
  const Vocabulary v = testing::LetterVocab(3);
  const NGramLM lm = NGramLM::Train(testing::RandomCorpus(rng, v, 30, 6), v,
                                    NGramTrainOptions{2, 1.0, true});
  EXPECT_GT(Perplexity(lm, testing::RandomCorpus(rng, v, 30, 6)), 1.0);
}

TEST(PerplexityTest, IncludesEotWhenTrainedWithIt) {
  const Vocabulary v({"<bos>", "<eot>", "a", "b"}, 0, 1);
  const std::vector<TokenSeq> corpus = {{2, 3}};
  const NGramLM lm = NGramLM::Train(corpus, v, NGramTrainOptions{2, 1.0, true});
  // Three predictions: a|BOS, b|a, EOT|b.
  const double lp = std::log(2.0 / 5) * 3;
  EXPECT_NEAR(Perplexity(lm, corpus), std::exp(-lp / 3), 1e-12);
}

TEST(SpearmanTest, Basics) {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  const std::vector<double> up = {2, 4, 6, 8, 100};
  const std::vector<double> down = {5, 4, 3, 2, 1};
  EXPECT_NEAR(SpearmanCorrelation(x, up), 1.0, 1e-12);
  EXPECT_NEAR(SpearmanCorrelation(x, down), -1.0, 1e-12);
  // Ties get average ranks: ranks of y are 1.5, 1.5, 3, 4, 5.
  const std::vector<double> tied = {0, 0, 1, 2, 3};
  EXPECT_NEAR(SpearmanCorrelation(x, tied), 0.9746794344808963, 1e-12);
  EXPECT_THROW(SpearmanCorrelation(x, std::vector<double>{1, 2}), UsageError);
}

}  // namespace
}  // namespace plfuse
