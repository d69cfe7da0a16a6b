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

#ifndef PLFUSE_BEAM_H_
#define PLFUSE_BEAM_H_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "plfuse/core.h"
#include "plfuse/fusion.h"
#include "plfuse/penalty.h"
#include "plfuse/scorers.h"

namespace plfuse {

struct BeamConfig {
  int beam_size = 5;
  int max_tokens = 64;
  FusionConfig fusion;
  bool hallucination_penalty_enabled = true;
  bool truncation_penalty_enabled = true;

  // Throws UsageError when beam_size or max_tokens is < 1 or lambda < 0.
  void Validate() const;
  nlohmann::ordered_json ToJson() const;
};

// One finished beam entry with its final-selection scores.
struct Candidate {
  Hypothesis hyp;
  double raw_slp = 0.0;
  double penalized_slp = 0.0;
  double alp = 0.0;
  CycleReport cycle;

  nlohmann::ordered_json ToJson() const;
};

struct DecodeResult {
  Hypothesis best;
  double alp = 0.0;
  // Sorted best first by the final ranking.
  std::vector<Candidate> candidates;
  std::string text;

  const Candidate& best_candidate() const { return candidates.front(); }
  nlohmann::ordered_json ToJson() const;
};

// Called once per expanded live hypothesis with its prefix and the three
// per-step vectors. For instrumentation and tests.
using StepObserver = std::function<void(
    const TokenSeq& prefix, std::span<const double> acoustic,
    std::span<const double> lm, std::span<const double> fused)>;

// Applies the enabled penalties to a finished hypothesis. N counts every
// generated token including a final EOT; cycles are searched over content
// tokens only.
Candidate ScoreCandidate(const Hypothesis& hyp, const BeamConfig& config,
                         TokenId eot);

// Final ranking order: higher ALP, then higher penalized SLP, then shorter,
// then lexicographically smaller tokens.
bool RanksBefore(const Candidate& a, const Candidate& b);

// Beam search over the fused acoustic/LM scores.
//
// Each step expands every live hypothesis by every token except BOS, ranks
// the extensions by raw SLP (ties: shorter, then lexicographically smaller),
// and walks them in order: an EOT extension or one reaching max_tokens is
// set aside as finished (until beam_size finished exist), anything else
// joins the next live set until it holds beam_size entries. Search stops
// once beam_size hypotheses have finished or nothing is live. Penalties are
// applied only to the finished set, which is then ranked by RanksBefore.
//
// Throws VocabMismatchError if the scorers disagree with `vocab` on size and
// InputError if no hypothesis finishes.
DecodeResult BeamSearch(const Scorer& acoustic, const Scorer& lm,
                        const Vocabulary& vocab, const BeamConfig& config,
                        const StepObserver& observer = {});

}  // namespace plfuse

#endif  // PLFUSE_BEAM_H_
