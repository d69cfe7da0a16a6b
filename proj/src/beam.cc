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

#include "plfuse/beam.h"

#include <algorithm>
#include <cmath>

#include "plfuse/errors.h"

namespace plfuse {

namespace {

struct LiveHyp {
  TokenSeq tokens;
  double slp = 0.0;
  ScorerState acoustic_state;
  ScorerState lm_state;
};

struct Extension {
  std::size_t parent;
  TokenId token;
  double slp;
};

// Lexicographic comparison of parent_a + [tok_a] against parent_b + [tok_b]
// for two sequences of equal length.
bool LexLess(const TokenSeq& parent_a, TokenId tok_a, const TokenSeq& parent_b,
             TokenId tok_b) {
  if (parent_a != parent_b) return parent_a < parent_b;
  return tok_a < tok_b;
}

}  // namespace

void BeamConfig::Validate() const {
  if (beam_size < 1) throw UsageError("beam_size must be >= 1");
  if (max_tokens < 1) throw UsageError("max_tokens must be >= 1");
  if (!(fusion.lambda_gpt >= 0.0) || !std::isfinite(fusion.lambda_gpt)) {
    throw UsageError("lambda_gpt must be a finite value >= 0");
  }
}

nlohmann::ordered_json BeamConfig::ToJson() const {
  nlohmann::ordered_json j;
  j["beam_size"] = beam_size;
  j["max_tokens"] = max_tokens;
  j["lambda_gpt"] = fusion.lambda_gpt;
  j["eot_gate"] = fusion.eot_gate_enabled;
  j["hallucination_penalty"] = hallucination_penalty_enabled;
  j["truncation_penalty"] = truncation_penalty_enabled;
  return j;
}

nlohmann::ordered_json Candidate::ToJson() const {
  nlohmann::ordered_json j;
  j["tokens"] = hyp.tokens;
  j["raw_slp"] = raw_slp;
  j["penalized_slp"] = penalized_slp;
  j["alp"] = alp;
  j["finished"] = hyp.finished;
  j["truncated"] = hyp.truncated;
  j["cycle"] = cycle.ToJson();
  return j;
}

nlohmann::ordered_json DecodeResult::ToJson() const {
  nlohmann::ordered_json j;
  j["text"] = text;
  j["alp"] = alp;
  j["tokens"] = best.tokens;
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& c : candidates) list.push_back(c.ToJson());
  j["candidates"] = std::move(list);
  return j;
}

Candidate ScoreCandidate(const Hypothesis& hyp, const BeamConfig& config,
                         TokenId eot) {
  Candidate c;
  c.hyp = hyp;
  c.raw_slp = hyp.slp;
  const int n = static_cast<int>(hyp.tokens.size());
  std::span<const TokenId> content(hyp.tokens);
  if (!content.empty() && content.back() == eot) {
    content = content.first(content.size() - 1);
  }
  c.cycle = DetectMaxCycle(content);

  double slp = hyp.slp;
  if (config.truncation_penalty_enabled) {
    slp = ApplyTruncationPenalty(slp, n, hyp.truncated);
  }
  if (config.hallucination_penalty_enabled) {
    slp = ApplyCyclePenalty(slp, c.cycle);
  }
  c.penalized_slp = slp;
  c.alp = n > 0 ? slp / static_cast<double>(n) : slp;
  return c;
}

bool RanksBefore(const Candidate& a, const Candidate& b) {
  if (a.alp != b.alp) return a.alp > b.alp;
  if (a.penalized_slp != b.penalized_slp) {
    return a.penalized_slp > b.penalized_slp;
  }
  if (a.hyp.tokens.size() != b.hyp.tokens.size()) {
    return a.hyp.tokens.size() < b.hyp.tokens.size();
  }
  return a.hyp.tokens < b.hyp.tokens;
}

DecodeResult BeamSearch(const Scorer& acoustic, const Scorer& lm,
                        const Vocabulary& vocab, const BeamConfig& config,
                        const StepObserver& observer) {
  config.Validate();
  if (vocab.size() == 0) throw InputError("empty vocabulary");
  if (acoustic.VocabSize() != vocab.size() || lm.VocabSize() != vocab.size()) {
    throw VocabMismatchError(
        "scorer vocabulary sizes (acoustic " +
        std::to_string(acoustic.VocabSize()) + ", lm " +
        std::to_string(lm.VocabSize()) + ") do not match vocabulary size " +
        std::to_string(vocab.size()));
  }
  const auto beam = static_cast<std::size_t>(config.beam_size);
  const auto max_tokens = static_cast<std::size_t>(config.max_tokens);
  const TokenId eot = vocab.eot();
  const TokenId bos = vocab.bos();

  std::vector<LiveHyp> live;
  live.push_back(LiveHyp{{}, 0.0, acoustic.Initial(), lm.Initial()});
  std::vector<Hypothesis> finished;

  std::vector<Extension> extensions;
  while (!live.empty() && finished.size() < beam) {
    extensions.clear();
    for (std::size_t i = 0; i < live.size(); ++i) {
      const LiveHyp& h = live[i];
      const LogProbVector a = acoustic.Score(h.acoustic_state);
      const LogProbVector l = lm.Score(h.lm_state);
      const LogProbVector fused = FuseStep(a, l, config.fusion, eot);
      if (observer) observer(h.tokens, a, l, fused);
      for (TokenId y = 0; y < static_cast<TokenId>(fused.size()); ++y) {
        if (y == bos || fused[y] == kNegInf) continue;
        extensions.push_back(Extension{i, y, h.slp + fused[y]});
      }
    }
    // Live hypotheses share one length, so the length tie-break is moot here.
    std::sort(extensions.begin(), extensions.end(),
              [&live](const Extension& x, const Extension& y) {
                if (x.slp != y.slp) return x.slp > y.slp;
                return LexLess(live[x.parent].tokens, x.token,
                               live[y.parent].tokens, y.token);
              });

    std::vector<LiveHyp> next;
    for (const Extension& ext : extensions) {
      const LiveHyp& parent = live[ext.parent];
      const bool ends = ext.token == eot;
      const bool truncates = !ends && parent.tokens.size() + 1 >= max_tokens;
      if (ends || truncates) {
        if (finished.size() < beam) {
          Hypothesis hyp{parent.tokens, ext.slp, true, truncates};
          hyp.tokens.push_back(ext.token);
          finished.push_back(std::move(hyp));
        }
        continue;
      }
      LiveHyp child{parent.tokens, ext.slp,
                    acoustic.Advance(parent.acoustic_state, ext.token),
                    lm.Advance(parent.lm_state, ext.token)};
      child.tokens.push_back(ext.token);
      next.push_back(std::move(child));
      if (next.size() == beam) break;
    }
    live = std::move(next);
  }

  if (finished.empty()) {
    throw InputError("beam search finished no hypothesis");
  }

  DecodeResult result;
  result.candidates.reserve(finished.size());
  for (const auto& hyp : finished) {
    result.candidates.push_back(ScoreCandidate(hyp, config, eot));
  }
  std::sort(result.candidates.begin(), result.candidates.end(), RanksBefore);
  result.best = result.candidates.front().hyp;
  result.alp = result.candidates.front().alp;
  result.text = DecodeText(result.best.tokens, vocab);
  return result;
}

}  // namespace plfuse
