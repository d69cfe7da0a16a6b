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

#ifndef PLFUSE_FUSION_H_
#define PLFUSE_FUSION_H_

#include <span>

#include "plfuse/core.h"

namespace plfuse {

struct FusionConfig {
  // Language-model weight; 0 disables fusion.
  double lambda_gpt = 0.3;
  // Drop the LM for any step whose acoustic argmax is EOT.
  bool eot_gate_enabled = true;
};

// True when EOT attains the acoustic maximum (ties count).
bool EotGateFires(std::span<const double> acoustic, TokenId eot);

// Per-token fused score
//   LP(y) = (acoustic[y] + lambda * lm[y]) / (1 + lambda)
// with lambda forced to 0 for the whole step when the gate is enabled and
// fires. The result is a score, not a distribution: it is not renormalized.
// With an effective lambda of 0 the acoustic vector is returned unchanged.
// Throws LengthMismatchError when the vectors differ in length.
LogProbVector FuseStep(std::span<const double> acoustic,
                       std::span<const double> lm, const FusionConfig& config,
                       TokenId eot);

}  // namespace plfuse

#endif  // PLFUSE_FUSION_H_
