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

#include "plfuse/penalty.h"

#include <algorithm>

#include "plfuse/errors.h"

namespace plfuse {

nlohmann::ordered_json CycleReport::ToJson() const {
  nlohmann::ordered_json j;
  j["L"] = length;
  j["C"] = repeats;
  j["start"] = start;
  return j;
}

CycleReport CycleReport::FromJson(const nlohmann::json& j) {
  try {
    return CycleReport{j.at("L").get<int>(), j.at("C").get<int>(),
                       j.at("start").get<int>()};
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed cycle report: ") + e.what());
  }
}

CycleReport DetectMaxCycle(std::span<const TokenId> tokens) {
  const int n = static_cast<int>(tokens.size());
  // Periods are scanned longest first, so the first period with any run wins.
  for (int p = n / 2; p >= 1; --p) {
    CycleReport best;
    for (int s = 0; s + 2 * p <= n; ++s) {
      const auto unit = tokens.subspan(s, p);
      int r = 1;
      while (s + (r + 1) * p <= n &&
             std::equal(unit.begin(), unit.end(), tokens.begin() + s + r * p)) {
        ++r;
      }
      if (r >= 2 && r - 1 > best.repeats) best = CycleReport{p, r - 1, s};
    }
    if (best.length > 0) return best;
  }
  return {};
}

double ApplyCyclePenalty(double slp, const CycleReport& report) {
  return slp - static_cast<double>(report.length) *
                   static_cast<double>(report.repeats) * kLn2;
}

double ApplyTruncationPenalty(double slp, int n_tokens, bool truncated) {
  if (!truncated) return slp;
  return slp - static_cast<double>(n_tokens) * kLn2;
}

}  // namespace plfuse
