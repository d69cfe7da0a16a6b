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


#include "plfuse/core.h"

#include <cmath>

#include "gtest/gtest.h"
#include "oracles.h"
#include "plfuse/errors.h"

namespace plfuse {
namespace {

Vocabulary AbVocab() {
  // a:2, b:3
  return Vocabulary({"<bos>", "<eot>", "a", "b"}, 0, 1);
}

TEST(VocabularyTest, RejectsBadConstruction) {
  EXPECT_THROW(Vocabulary({"<bos>", "<eot>"}, 0, 1), InputError);
  EXPECT_THROW(Vocabulary({"<bos>", "<eot>", "a"}, 0, 0), InputError);
  EXPECT_THROW(Vocabulary({"<bos>", "<eot>", "a", "a"}, 0, 1), InputError);
  EXPECT_THROW(Vocabulary({"<bos>", "<eot>", "ab"}, 0, 1, TokenMode::kChar),
               InputError);
}

TEST(VocabularyTest, Lookups) {
  const Vocabulary v = AbVocab();
  EXPECT_EQ(v.size(), 4u);
  EXPECT_EQ(v.Find("b"), 3);
  EXPECT_FALSE(v.Find("z").has_value());
  EXPECT_EQ(v.ContentIds(), (TokenSeq{2, 3}));
  EXPECT_TRUE(v.IsSpecial(1));
  EXPECT_THROW(v.Token(9), InvalidIdError);
}

TEST(VocabularyTest, JsonRoundTrip) {
  const Vocabulary v({"<s>", "</s>", "x", "y", "z"}, 1, 0, TokenMode::kChar);
  const auto j = v.ToJson();
  const Vocabulary back = Vocabulary::FromJson(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back, v);
  EXPECT_EQ(back.ToJson().dump(), j.dump());
}

TEST(EncodeTest, Examples) {
  const Vocabulary v = AbVocab();
  EXPECT_EQ(Encode("a b", v), (TokenSeq{2, 3}));
  EXPECT_TRUE(Encode("", v).empty());
  EXPECT_THROW(Encode("a z", v), UnknownTokenError);
  EXPECT_THROW(Encode("a <eot>", v), InputError);
}

TEST(DecodeTextTest, Examples) {
  const Vocabulary v = AbVocab();
  const TokenSeq ab = {2, 3};
  const TokenSeq empty;
  const TokenSeq a_eot = {2, v.eot()};
  EXPECT_EQ(DecodeText(ab, v), "a b");
  EXPECT_EQ(DecodeText(empty, v), "");
  EXPECT_EQ(DecodeText(a_eot, v), "a");
}

TEST(DecodeTextTest, RoundTripProperty) {
  const Vocabulary words({"<bos>", "<eot>", "alma", "su", "kol", "tau"}, 0, 1);
  const Vocabulary chars({"<bos>", "<eot>", "a", "\xc3\xa4", "\xd2\x9b", "b"}, 0,
                         1, TokenMode::kChar);
  testing::TestRng rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    for (const Vocabulary* v : {&words, &chars}) {
      const auto content = v->ContentIds();
      TokenSeq seq;
      const int len = rng.Int(0, 12);
      for (int i = 0; i < len; ++i) {
        seq.push_back(content[static_cast<std::size_t>(
            rng.Int(0, static_cast<int>(content.size()) - 1))]);
      }
      if (v == &words) {
        const std::string text = DecodeText(seq, *v);
        EXPECT_EQ(DecodeText(Encode(text, *v), *v), text);
        EXPECT_EQ(Encode(text, *v), seq);
      } else {
        const std::string text = DecodeText(seq, *v);
        EXPECT_EQ(Encode(text, *v), seq);
      }
    }
  }
}

TEST(SplitTest, WordsAndCodePoints) {
  EXPECT_EQ(SplitWords("  a  b\tc\n"), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(SplitCodePoints("a\xd2\x9b"),
            (std::vector<std::string>{"a", "\xd2\x9b"}));
}

TEST(LogProbTest, Normalization) {
  const std::vector<double> probs = {0.7, 0.2, 0.1, 0.0};
  const LogProbVector lp = ToLogProbs(probs);
  EXPECT_EQ(lp[3], kNegInf);
  EXPECT_DOUBLE_EQ(lp[0], std::log(0.7));
  EXPECT_TRUE(IsNormalized(lp));
  const LogProbVector bad = {std::log(0.5), std::log(0.4)};
  EXPECT_FALSE(IsNormalized(bad));
  EXPECT_THROW(CheckNormalized(bad, "test"), InputError);
}

TEST(LogProbTest, NormalizationProperty) {
  testing::TestRng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const auto lp = testing::RandomLogProbs(rng, static_cast<std::size_t>(rng.Int(2, 40)));
    double sum = 0.0;
    for (double x : lp) sum += std::exp(x);
    EXPECT_NEAR(sum, 1.0, 1e-9);
    EXPECT_TRUE(IsNormalized(lp));
  }
}

TEST(ArgmaxTest, LowestIndexOnTies) {
  const std::vector<double> v = {0.1, 0.5, 0.5, 0.2};
  EXPECT_EQ(Argmax(v), 1);
}

}  // namespace
}  // namespace plfuse
