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

#ifndef PLFUSE_SCORERS_H_
#define PLFUSE_SCORERS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "plfuse/core.h"

namespace plfuse {

// Incremental per-prefix state: the desk-scale analogue of a decoder
// key/value cache. Its fields are interpreted by the scorer that produced it
// (a trie node for table scorers, a context window for n-gram models). It is
// a plain value, so copying it takes an independent snapshot.
struct ScorerState {
  std::int64_t node = 0;
  TokenSeq window;

  bool operator==(const ScorerState&) const = default;
};

// Next-token scorer over a fixed vocabulary. Score() is a pure query and does
// not advance the state; Advance() never mutates its argument.
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual std::size_t VocabSize() const = 0;
  // State for the empty output prefix (BOS context).
  virtual ScorerState Initial() const = 0;
  // Throws InvalidIdError for ids outside the vocabulary.
  virtual ScorerState Advance(const ScorerState& state, TokenId token) const = 0;
  virtual LogProbVector Score(const ScorerState& state) const = 0;

  // Convenience: Initial() advanced by every token of `prefix`.
  ScorerState StateFor(std::span<const TokenId> prefix) const;
};

// One table-driven stand-in for an audio clip: prefix -> next-token
// distribution, with a default for unlisted prefixes. Stores probabilities
// as given so that files round-trip exactly.
struct AcousticScenario {
  struct Entry {
    TokenSeq prefix;
    std::vector<double> probs;
  };

  std::string id;
  std::string vocab_ref;
  std::vector<Entry> entries;
  std::vector<double> default_probs;

  nlohmann::ordered_json ToJson() const;
  static AcousticScenario FromJson(const nlohmann::json& j);
  static AcousticScenario Load(const std::filesystem::path& path);
  void Save(const std::filesystem::path& path) const;
};

// Serves an AcousticScenario through the Scorer contract. The state is a node
// in a trie over the listed prefixes; node -1 means "off the table" and
// answers with the default vector.
class TableScorer : public Scorer {
 public:
  // Validates the scenario: vector lengths, normalization, token ids, unique
  // prefixes, and presence of the empty prefix. Throws InputError.
  explicit TableScorer(const AcousticScenario& scenario);

  std::size_t VocabSize() const override { return default_.size(); }
  ScorerState Initial() const override { return ScorerState{0, {}}; }
  ScorerState Advance(const ScorerState& state, TokenId token) const override;
  LogProbVector Score(const ScorerState& state) const override;

 private:
  struct Node {
    std::map<TokenId, std::int64_t> children;
    std::int64_t vector = -1;
  };

  std::vector<Node> nodes_;
  std::vector<LogProbVector> vectors_;
  LogProbVector default_;
};

// Every entry equals -ln(|V|).
class UniformScorer : public Scorer {
 public:
  explicit UniformScorer(std::size_t vocab_size);

  std::size_t VocabSize() const override { return vocab_size_; }
  ScorerState Initial() const override { return {}; }
  ScorerState Advance(const ScorerState& state, TokenId token) const override;
  LogProbVector Score(const ScorerState& state) const override;

 private:
  std::size_t vocab_size_;
};

struct NGramTrainOptions {
  int order = 2;
  double k = 1.0;
  // Append EOT to every training sequence so the model predicts endings.
  bool append_eot = true;
};

// Add-k smoothed n-gram model:
//   P(y | ctx) = (count(ctx y) + k) / (count(ctx *) + k |V|)
// where ctx is the last order-1 tokens, left-padded with BOS.
class NGramLM : public Scorer {
 public:
  struct ContextCounts {
    std::map<TokenId, std::uint64_t> next;
    std::uint64_t total = 0;
  };

  NGramLM(int order, double k, std::size_t vocab_size, TokenId bos,
          TokenId eot, bool eot_appended,
          std::map<TokenSeq, ContextCounts> counts);

  // Throws InputError on an empty corpus or invalid ids, UsageError on
  // order < 1 or k <= 0.
  static NGramLM Train(const std::vector<TokenSeq>& corpus,
                       const Vocabulary& vocab,
                       const NGramTrainOptions& options);

  int order() const { return order_; }
  double k() const { return k_; }
  TokenId bos() const { return bos_; }
  TokenId eot() const { return eot_; }
  bool eot_appended() const { return eot_appended_; }
  const std::map<TokenSeq, ContextCounts>& counts() const { return counts_; }

  // Conditional distribution for an explicit context window (length
  // order-1). Shorter windows are left-padded with BOS.
  LogProbVector Distribution(std::span<const TokenId> context) const;

  std::size_t VocabSize() const override { return vocab_size_; }
  ScorerState Initial() const override;
  ScorerState Advance(const ScorerState& state, TokenId token) const override;
  LogProbVector Score(const ScorerState& state) const override;

  nlohmann::ordered_json ToJson() const;
  static NGramLM FromJson(const nlohmann::json& j);
  static NGramLM Load(const std::filesystem::path& path);
  void Save(const std::filesystem::path& path) const;

 private:
  int order_;
  double k_;
  std::size_t vocab_size_;
  TokenId bos_;
  TokenId eot_;
  bool eot_appended_;
  std::map<TokenSeq, ContextCounts> counts_;
};

// Reads a corpus file (one sequence per line) and encodes every line.
std::vector<TokenSeq> LoadCorpus(const std::filesystem::path& path,
                                 const Vocabulary& vocab);

}  // namespace plfuse

#endif  // PLFUSE_SCORERS_H_
