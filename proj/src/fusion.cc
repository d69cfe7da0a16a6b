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

#include "plfuse/fusion.h"

#include <algorithm>
#include <string>

#include "plfuse/errors.h"

namespace plfuse {

bool EotGateFires(std::span<const double> acoustic, TokenId eot) {
  if (eot < 0 || static_cast<std::size_t>(eot) >= acoustic.size()) {
    throw InvalidIdError(eot);
  }
  const double top = *std::max_element(acoustic.begin(), acoustic.end());
  return acoustic[eot] >= top;
}

LogProbVector FuseStep(std::span<const double> acoustic,
                       std::span<const double> lm, const FusionConfig& config,
                       TokenId eot) {
  if (acoustic.size() != lm.size()) {
    throw LengthMismatchError("fusion: acoustic length " +
                              std::to_string(acoustic.size()) +
                              " != lm length " + std::to_string(lm.size()));
  }
  if (config.lambda_gpt < 0.0) throw UsageError("lambda_gpt must be >= 0");

  LogProbVector out(acoustic.begin(), acoustic.end());
  const double lambda = config.lambda_gpt;
  if (lambda == 0.0) return out;
  if (config.eot_gate_enabled && EotGateFires(acoustic, eot)) return out;

  const double norm = 1.0 + lambda;
  for (std::size_t y = 0; y < out.size(); ++y) {
    out[y] = (acoustic[y] + lambda * lm[y]) / norm;
  }
  return out;
}

}  // namespace plfuse
