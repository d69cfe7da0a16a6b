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

#ifndef PLFUSE_CORE_H_
#define PLFUSE_CORE_H_

#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace plfuse {

using TokenId = std::int32_t;
using TokenSeq = std::vector<TokenId>;

// Natural-log probabilities, one entry per vocabulary id.
using LogProbVector = std::vector<double>;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kLn2 = std::numbers::ln2;
inline constexpr double kNormTolerance = 1e-9;

enum class TokenMode { kWord, kChar };

// Dense token-id <-> string table with two reserved specials (BOS and EOT).
// Immutable after construction.
class Vocabulary {
 public:
  Vocabulary(std::vector<std::string> tokens, TokenId bos, TokenId eot,
             TokenMode mode = TokenMode::kWord);

  std::size_t size() const { return tokens_.size(); }
  TokenId bos() const { return bos_; }
  TokenId eot() const { return eot_; }
  TokenMode mode() const { return mode_; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  bool IsValid(TokenId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < tokens_.size();
  }
  bool IsSpecial(TokenId id) const { return id == bos_ || id == eot_; }
  // Throws InvalidIdError.
  const std::string& Token(TokenId id) const;
  std::optional<TokenId> Find(std::string_view token) const;
  // Content ids in ascending order (everything except BOS and EOT).
  std::vector<TokenId> ContentIds() const;

  nlohmann::ordered_json ToJson() const;
  static Vocabulary FromJson(const nlohmann::json& j);

  bool operator==(const Vocabulary& other) const {
    return tokens_ == other.tokens_ && bos_ == other.bos_ &&
           eot_ == other.eot_ && mode_ == other.mode_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId bos_;
  TokenId eot_;
  TokenMode mode_;
};

// Splits `text` into units per the vocabulary mode and maps them to ids.
// Throws UnknownTokenError for units missing from the vocabulary or naming a
// special token.
TokenSeq Encode(std::string_view text, const Vocabulary& vocab);

// Inverse of Encode. Special tokens render as empty.
std::string DecodeText(std::span<const TokenId> tokens, const Vocabulary& vocab);

// Splits on ASCII whitespace, dropping empty fields.
std::vector<std::string> SplitWords(std::string_view text);

// Splits a UTF-8 string into code points (each returned as its byte string).
std::vector<std::string> SplitCodePoints(std::string_view text);

// Converts probabilities to natural-log probabilities; zero maps to kNegInf.
LogProbVector ToLogProbs(std::span<const double> probs);

// True when exp-sum of `logprobs` is within `tol` of one and every entry is
// <= 0 or kNegInf.
bool IsNormalized(std::span<const double> logprobs,
                  double tol = kNormTolerance);

// Throws InputError naming `what` unless IsNormalized.
void CheckNormalized(std::span<const double> logprobs, const std::string& what);

// Index of the largest entry, lowest index on ties. A finite entry always
// wins over kNegInf. Returns 0 for an all-impossible vector.
TokenId Argmax(std::span<const double> values);

// A beam candidate. `tokens` excludes BOS and includes EOT once finished.
struct Hypothesis {
  TokenSeq tokens;
  double slp = 0.0;
  bool finished = false;
  bool truncated = false;

  bool operator==(const Hypothesis&) const = default;
};

}  // namespace plfuse

#endif  // PLFUSE_CORE_H_
