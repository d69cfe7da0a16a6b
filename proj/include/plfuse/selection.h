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

#ifndef PLFUSE_SELECTION_H_
#define PLFUSE_SELECTION_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "plfuse/beam.h"
#include "plfuse/penalty.h"
#include "plfuse/scorers.h"

namespace plfuse {

// One decoded utterance in a pseudo-label manifest. A non-empty `error`
// marks a sample whose decode failed; such records carry no usable ALP.
struct SampleRecord {
  std::string sample_id;
  std::string scenario_ref;
  std::string text;
  double alp = 0.0;
  int n_tokens = 0;
  bool truncated = false;
  CycleReport cycle;
  std::string error;

  bool failed() const { return !error.empty(); }
  nlohmann::ordered_json ToJson() const;
  static SampleRecord FromJson(const nlohmann::json& j);
};

struct SelectionReport {
  double fraction = 1.0;
  int total = 0;
  int selected_count = 0;
  double alp_threshold = 0.0;
  std::vector<std::string> selected_ids;

  nlohmann::ordered_json ToJson() const;
  static SelectionReport FromJson(const nlohmann::json& j);
};

SampleRecord MakeSampleRecord(const std::string& sample_id,
                              const std::string& scenario_ref,
                              const DecodeResult& result);

struct BatchOptions {
  // Worker threads; 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
  // Per-scenario reference strings for the manifest. Defaults to scenario ids.
  std::vector<std::string> scenario_refs;
};

// Independent beam search per scenario; output order matches input order
// regardless of scheduling. A failing sample is returned flagged rather
// than aborting the batch. Throws UsageError on an empty scenario list.
std::vector<SampleRecord> BatchDecode(std::span<const AcousticScenario> scenarios,
                                      const Scorer& lm, const Vocabulary& vocab,
                                      const BeamConfig& config,
                                      const BatchOptions& options = {});

// Ranks the non-failed records by ALP (descending, sample_id ascending on
// ties) and keeps the top ceil(fraction * n). Throws UsageError unless
// 0 < fraction <= 1, InputError on duplicate ids or no usable records.
SelectionReport SelectTopFraction(std::span<const SampleRecord> records,
                                  double fraction);

// Records whose ids appear in the report, in the report's ranked order.
std::vector<SampleRecord> FilterSelected(std::span<const SampleRecord> records,
                                         const SelectionReport& report);

std::vector<SampleRecord> ReadManifest(const std::filesystem::path& path);
void WriteManifest(const std::filesystem::path& path,
                   std::span<const SampleRecord> records);

}  // namespace plfuse

#endif  // PLFUSE_SELECTION_H_
