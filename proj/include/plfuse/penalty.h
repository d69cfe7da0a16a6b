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

#ifndef PLFUSE_PENALTY_H_
#define PLFUSE_PENALTY_H_

#include <span>

#include "json.hpp"
#include "plfuse/core.h"

namespace plfuse {

// The maximal run of consecutive copies of one substring.
// `length` is the period L, `repeats` the copies beyond the first (C).
struct CycleReport {
  int length = 0;
  int repeats = 0;
  int start = 0;

  bool operator==(const CycleReport&) const = default;

  nlohmann::ordered_json ToJson() const;
  static CycleReport FromJson(const nlohmann::json& j);
};

// Among all runs of r >= 2 consecutive copies of tokens[s, s+p), picks the
// largest p, then the largest r, then the smallest s. Periods need not be
// primitive: "XXXX" yields p=2, r=2. Returns {0, 0, 0} when nothing repeats.
CycleReport DetectMaxCycle(std::span<const TokenId> tokens);

// slp - L * C * ln 2.
double ApplyCyclePenalty(double slp, const CycleReport& report);

// slp - n_tokens * ln 2 when truncated, else slp.
double ApplyTruncationPenalty(double slp, int n_tokens, bool truncated);

}  // namespace plfuse

#endif  // PLFUSE_PENALTY_H_
