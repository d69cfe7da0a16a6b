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

#include "plfuse/scorers.h"

#include <cmath>

#include "plfuse/errors.h"
#include "plfuse/io.h"

namespace plfuse {

namespace {

void CheckId(TokenId token, std::size_t vocab_size) {
  if (token < 0 || static_cast<std::size_t>(token) >= vocab_size) {
    throw InvalidIdError(token);
  }
}

}  // namespace

ScorerState Scorer::StateFor(std::span<const TokenId> prefix) const {
  ScorerState state = Initial();
  for (TokenId t : prefix) state = Advance(state, t);
  return state;
}

// ---------------------------------------------------------------------------
// AcousticScenario / TableScorer

nlohmann::ordered_json AcousticScenario::ToJson() const {
  nlohmann::ordered_json j;
  j["id"] = id;
  j["vocab_ref"] = vocab_ref;
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    nlohmann::ordered_json item;
    item["prefix"] = e.prefix;
    item["probs"] = e.probs;
    list.push_back(std::move(item));
  }
  j["entries"] = std::move(list);
  j["default_probs"] = default_probs;
  return j;
}

AcousticScenario AcousticScenario::FromJson(const nlohmann::json& j) {
  try {
    AcousticScenario s;
    s.id = j.at("id").get<std::string>();
    s.vocab_ref = j.value("vocab_ref", std::string());
    for (const auto& item : j.at("entries")) {
      s.entries.push_back(Entry{item.at("prefix").get<TokenSeq>(),
                                item.at("probs").get<std::vector<double>>()});
    }
    s.default_probs = j.at("default_probs").get<std::vector<double>>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed scenario: ") + e.what());
  }
}

AcousticScenario AcousticScenario::Load(const std::filesystem::path& path) {
  try {
    return FromJson(ReadJson(path));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void AcousticScenario::Save(const std::filesystem::path& path) const {
  // Compact: scenario files are machine-generated and can be large.
  WriteFile(path, ToJson().dump() + "\n");
}

TableScorer::TableScorer(const AcousticScenario& scenario) {
  const std::size_t v = scenario.default_probs.size();
  const std::string where = "scenario '" + scenario.id + "'";
  if (v == 0) throw InputError(where + ": empty default_probs");
  default_ = ToLogProbs(scenario.default_probs);
  CheckNormalized(default_, where + " default_probs");

  nodes_.emplace_back();
  bool has_root = false;
  for (const auto& entry : scenario.entries) {
    if (entry.probs.size() != v) {
      throw LengthMismatchError(where + ": entry vector length " +
                                std::to_string(entry.probs.size()) +
                                " != " + std::to_string(v));
    }
    std::int64_t node = 0;
    for (TokenId t : entry.prefix) {
      CheckId(t, v);
      auto [it, inserted] = nodes_[node].children.emplace(
          t, static_cast<std::int64_t>(nodes_.size()));
      if (inserted) nodes_.emplace_back();
      node = it->second;
    }
    if (nodes_[node].vector >= 0) {
      throw InputError(where + ": duplicate prefix entry");
    }
    LogProbVector logs = ToLogProbs(entry.probs);
    CheckNormalized(logs, where + " entry");
    nodes_[node].vector = static_cast<std::int64_t>(vectors_.size());
    vectors_.push_back(std::move(logs));
    if (entry.prefix.empty()) has_root = true;
  }
  if (!has_root) throw InputError(where + ": missing empty-prefix entry");
}

ScorerState TableScorer::Advance(const ScorerState& state,
                                 TokenId token) const {
  CheckId(token, VocabSize());
  if (state.node < 0) return ScorerState{-1, {}};
  const auto& children = nodes_.at(state.node).children;
  auto it = children.find(token);
  return ScorerState{it == children.end() ? -1 : it->second, {}};
}

LogProbVector TableScorer::Score(const ScorerState& state) const {
  if (state.node < 0) return default_;
  const std::int64_t idx = nodes_.at(state.node).vector;
  return idx < 0 ? default_ : vectors_[idx];
}

// ---------------------------------------------------------------------------
// UniformScorer

UniformScorer::UniformScorer(std::size_t vocab_size) : vocab_size_(vocab_size) {
  if (vocab_size == 0) throw UsageError("uniform scorer needs |V| > 0");
}

ScorerState UniformScorer::Advance(const ScorerState& state,
                                   TokenId token) const {
  CheckId(token, vocab_size_);
  return state;
}

LogProbVector UniformScorer::Score(const ScorerState&) const {
  return LogProbVector(vocab_size_, -std::log(static_cast<double>(vocab_size_)));
}

// ---------------------------------------------------------------------------
// NGramLM

NGramLM::NGramLM(int order, double k, std::size_t vocab_size, TokenId bos,
                 TokenId eot, bool eot_appended,
                 std::map<TokenSeq, ContextCounts> counts)
    : order_(order),
      k_(k),
      vocab_size_(vocab_size),
      bos_(bos),
      eot_(eot),
      eot_appended_(eot_appended),
      counts_(std::move(counts)) {
  if (order_ < 1) throw UsageError("n-gram order must be >= 1");
  if (!(k_ > 0.0) || !std::isfinite(k_)) {
    throw UsageError("smoothing constant k must be > 0");
  }
  if (vocab_size_ < 3) throw InputError("n-gram vocabulary too small");
  CheckId(bos_, vocab_size_);
  CheckId(eot_, vocab_size_);
  for (const auto& [ctx, c] : counts_) {
    if (ctx.size() != static_cast<std::size_t>(order_ - 1)) {
      throw InputError("n-gram context length does not match order");
    }
    std::uint64_t sum = 0;
    for (const auto& [tok, n] : c.next) {
      CheckId(tok, vocab_size_);
      sum += n;
    }
    if (sum != c.total) throw InputError("n-gram context total mismatch");
  }
}

NGramLM NGramLM::Train(const std::vector<TokenSeq>& corpus,
                       const Vocabulary& vocab,
                       const NGramTrainOptions& options) {
  if (options.order < 1) throw UsageError("n-gram order must be >= 1");
  if (!(options.k > 0.0)) throw UsageError("smoothing constant k must be > 0");
  if (corpus.empty()) throw InputError("empty training corpus");

  const std::size_t ctx_len = static_cast<std::size_t>(options.order - 1);
  std::map<TokenSeq, ContextCounts> counts;
  for (const auto& seq : corpus) {
    TokenSeq padded(ctx_len, vocab.bos());
    for (TokenId t : seq) {
      if (!vocab.IsValid(t)) throw InvalidIdError(t);
      padded.push_back(t);
    }
    if (options.append_eot) padded.push_back(vocab.eot());
    for (std::size_t i = ctx_len; i < padded.size(); ++i) {
      TokenSeq ctx(padded.begin() + (i - ctx_len), padded.begin() + i);
      auto& c = counts[ctx];
      ++c.next[padded[i]];
      ++c.total;
    }
  }
  return NGramLM(options.order, options.k, vocab.size(), vocab.bos(),
                 vocab.eot(), options.append_eot, std::move(counts));
}

LogProbVector NGramLM::Distribution(std::span<const TokenId> context) const {
  const std::size_t ctx_len = static_cast<std::size_t>(order_ - 1);
  TokenSeq ctx;
  if (context.size() >= ctx_len) {
    ctx.assign(context.end() - ctx_len, context.end());
  } else {
    ctx.assign(ctx_len - context.size(), bos_);
    ctx.insert(ctx.end(), context.begin(), context.end());
  }
  const double v = static_cast<double>(vocab_size_);
  auto it = counts_.find(ctx);
  const double total = it == counts_.end() ? 0.0 : static_cast<double>(it->second.total);
  const double denom = total + k_ * v;
  LogProbVector out(vocab_size_, std::log(k_ / denom));
  if (it != counts_.end()) {
    for (const auto& [tok, n] : it->second.next) {
      out[tok] = std::log((static_cast<double>(n) + k_) / denom);
    }
  }
  return out;
}

ScorerState NGramLM::Initial() const {
  return ScorerState{0, TokenSeq(static_cast<std::size_t>(order_ - 1), bos_)};
}

ScorerState NGramLM::Advance(const ScorerState& state, TokenId token) const {
  CheckId(token, vocab_size_);
  ScorerState next = state;
  if (order_ > 1) {
    next.window.erase(next.window.begin());
    next.window.push_back(token);
  }
  return next;
}

LogProbVector NGramLM::Score(const ScorerState& state) const {
  return Distribution(state.window);
}

nlohmann::ordered_json NGramLM::ToJson() const {
  nlohmann::ordered_json j;
  j["order"] = order_;
  j["k"] = k_;
  j["vocab_size"] = vocab_size_;
  j["bos"] = bos_;
  j["eot"] = eot_;
  j["eot_appended"] = eot_appended_;
  nlohmann::ordered_json contexts = nlohmann::ordered_json::array();
  for (const auto& [ctx, c] : counts_) {
    nlohmann::ordered_json item;
    item["context"] = ctx;
    item["total"] = c.total;
    nlohmann::ordered_json next = nlohmann::ordered_json::array();
    for (const auto& [tok, n] : c.next) next.push_back({tok, n});
    item["next"] = std::move(next);
    contexts.push_back(std::move(item));
  }
  j["contexts"] = std::move(contexts);
  return j;
}

NGramLM NGramLM::FromJson(const nlohmann::json& j) {
  try {
    std::map<TokenSeq, ContextCounts> counts;
    for (const auto& item : j.at("contexts")) {
      ContextCounts c;
      c.total = item.at("total").get<std::uint64_t>();
      for (const auto& pair : item.at("next")) {
        c.next[pair.at(0).get<TokenId>()] = pair.at(1).get<std::uint64_t>();
      }
      if (!counts.emplace(item.at("context").get<TokenSeq>(), std::move(c))
               .second) {
        throw InputError("duplicate n-gram context");
      }
    }
    return NGramLM(j.at("order").get<int>(), j.at("k").get<double>(),
                   j.at("vocab_size").get<std::size_t>(),
                   j.at("bos").get<TokenId>(), j.at("eot").get<TokenId>(),
                   j.at("eot_appended").get<bool>(), std::move(counts));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed language model: ") + e.what());
  } catch (const UsageError& e) {
    throw InputError(std::string("malformed language model: ") + e.what());
  }
}

NGramLM NGramLM::Load(const std::filesystem::path& path) {
  return FromJson(ReadJson(path));
}

void NGramLM::Save(const std::filesystem::path& path) const {
  WriteFile(path, ToJson().dump() + "\n");
}

std::vector<TokenSeq> LoadCorpus(const std::filesystem::path& path,
                                 const Vocabulary& vocab) {
  std::vector<TokenSeq> corpus;
  for (const auto& line : ReadLines(path)) corpus.push_back(Encode(line, vocab));
  return corpus;
}

}  // namespace plfuse
