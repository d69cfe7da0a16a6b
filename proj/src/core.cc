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

#include "plfuse/errors.h"

namespace plfuse {

Vocabulary::Vocabulary(std::vector<std::string> tokens, TokenId bos,
                       TokenId eot, TokenMode mode)
    : tokens_(std::move(tokens)), bos_(bos), eot_(eot), mode_(mode) {
  if (tokens_.size() < 3) {
    throw InputError("vocabulary needs BOS, EOT and at least one content token");
  }
  if (!IsValid(bos_) || !IsValid(eot_)) {
    throw InputError("vocabulary BOS/EOT ids out of range");
  }
  if (bos_ == eot_) throw InputError("vocabulary BOS and EOT must differ");
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    const std::string& t = tokens_[i];
    if (t.empty()) throw InputError("vocabulary contains an empty token");
    if (mode_ == TokenMode::kChar && !IsSpecial(static_cast<TokenId>(i)) &&
        SplitCodePoints(t).size() != 1) {
      throw InputError("char-mode vocabulary token is not one character: '" +
                       t + "'");
    }
    if (!index_.emplace(t, static_cast<TokenId>(i)).second) {
      throw InputError("duplicate vocabulary token: '" + t + "'");
    }
  }
}

const std::string& Vocabulary::Token(TokenId id) const {
  if (!IsValid(id)) throw InvalidIdError(id);
  return tokens_[id];
}

std::optional<TokenId> Vocabulary::Find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<TokenId> Vocabulary::ContentIds() const {
  std::vector<TokenId> ids;
  for (TokenId i = 0; i < static_cast<TokenId>(tokens_.size()); ++i) {
    if (!IsSpecial(i)) ids.push_back(i);
  }
  return ids;
}

nlohmann::ordered_json Vocabulary::ToJson() const {
  nlohmann::ordered_json j;
  j["tokens"] = tokens_;
  j["bos"] = bos_;
  j["eot"] = eot_;
  j["mode"] = mode_ == TokenMode::kChar ? "char" : "word";
  return j;
}

Vocabulary Vocabulary::FromJson(const nlohmann::json& j) {
  try {
    TokenMode mode = TokenMode::kWord;
    if (j.contains("mode")) {
      const auto m = j.at("mode").get<std::string>();
      if (m == "char") {
        mode = TokenMode::kChar;
      } else if (m != "word") {
        throw InputError("unknown vocabulary mode: " + m);
      }
    }
    return Vocabulary(j.at("tokens").get<std::vector<std::string>>(),
                      j.at("bos").get<TokenId>(), j.at("eot").get<TokenId>(),
                      mode);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed vocabulary: ") + e.what());
  }
}

std::vector<std::string> SplitWords(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  };
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) words.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return words;
}

std::vector<std::string> SplitCodePoints(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if (lead >= 0xF0) {
      len = 4;
    } else if (lead >= 0xE0) {
      len = 3;
    } else if (lead >= 0xC0) {
      len = 2;
    }
    len = std::min(len, text.size() - i);
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

TokenSeq Encode(std::string_view text, const Vocabulary& vocab) {
  const auto units = vocab.mode() == TokenMode::kWord ? SplitWords(text)
                                                      : SplitCodePoints(text);
  TokenSeq ids;
  ids.reserve(units.size());
  for (const auto& unit : units) {
    auto id = vocab.Find(unit);
    if (!id || vocab.IsSpecial(*id)) throw UnknownTokenError(unit);
    ids.push_back(*id);
  }
  return ids;
}

std::string DecodeText(std::span<const TokenId> tokens,
                       const Vocabulary& vocab) {
  std::string out;
  for (TokenId id : tokens) {
    const std::string& t = vocab.Token(id);
    if (vocab.IsSpecial(id)) continue;
    if (vocab.mode() == TokenMode::kWord && !out.empty()) out += ' ';
    out += t;
  }
  return out;
}

LogProbVector ToLogProbs(std::span<const double> probs) {
  LogProbVector out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    out[i] = probs[i] > 0.0 ? std::log(probs[i]) : kNegInf;
  }
  return out;
}

bool IsNormalized(std::span<const double> logprobs, double tol) {
  double sum = 0.0;
  for (double v : logprobs) {
    if (std::isnan(v) || v > 0.0) return false;
    sum += std::exp(v);
  }
  return std::abs(sum - 1.0) <= tol;
}

void CheckNormalized(std::span<const double> logprobs,
                     const std::string& what) {
  if (!IsNormalized(logprobs)) {
    throw InputError(what + ": probabilities do not sum to 1 within 1e-9");
  }
}

TokenId Argmax(std::span<const double> values) {
  TokenId best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = static_cast<TokenId>(i);
  }
  return best;
}

}  // namespace plfuse
