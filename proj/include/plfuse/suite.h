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

#ifndef PLFUSE_SUITE_H_
#define PLFUSE_SUITE_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "plfuse/beam.h"
#include "plfuse/core.h"
#include "plfuse/metrics.h"
#include "plfuse/scorers.h"
#include "plfuse/selection.h"

namespace plfuse {

// A named decoding configuration evaluated by a suite.
struct SuiteConfiguration {
  std::string name;
  BeamConfig beam;
};

// Contents of suite.json.
struct SuiteConfig {
  std::string name;
  std::string kind;
  std::uint64_t seed = 0;
  NGramTrainOptions lm;
  std::vector<SuiteConfiguration> configurations;
  std::vector<double> fractions;
  // Optional pair of configuration names whose best transcripts are compared
  // sample by sample (e.g. without and with the hallucination penalty).
  std::string compare_without;
  std::string compare_with;

  nlohmann::ordered_json ToJson() const;
  static SuiteConfig FromJson(const nlohmann::json& j);
};

struct SuiteSample {
  std::string sample_id;
  std::string reference;
  // Free-form label set by the generator ("normal", "hallucination", ...).
  std::string tag;
  AcousticScenario scenario;
};

// A self-contained evaluation set: vocabulary, LM training text, and
// scenario/reference pairs.
struct Suite {
  SuiteConfig config;
  Vocabulary vocab;
  std::vector<std::string> corpus;
  std::vector<SuiteSample> samples;

  // Layout: suite.json, vocab.json, corpus.txt, references.jsonl and
  // scenarios/<sample_id>.json.
  void Save(const std::filesystem::path& dir) const;
  // Throws InputError when the directory or any file is missing/malformed.
  static Suite Load(const std::filesystem::path& dir);
};

// Suite kinds shipped with the tool.
//   noisy-channel  100 utterances, per-position corruption rate 0.4
//   eot            references end where the LM expects more words
//   hallucination  crafted repeat-or-stop samples mixed with noisy ones
//   selection      500 utterances with per-utterance noise in [0, 0.8]
std::vector<std::string> SuiteKinds();
Suite GenerateSuite(const std::string& kind, std::uint64_t seed);

struct ConfigurationResult {
  SuiteConfiguration configuration;
  std::vector<SampleRecord> records;
  std::vector<WerBreakdown> wers;
  WerBreakdown corpus;
  double mean_alp = 0.0;
  int truncated = 0;
  int cyclic = 0;
  int failed = 0;
};

struct SweepRow {
  std::string configuration;
  double fraction = 0.0;
  int selected = 0;
  double mean_wer = 0.0;
  double corpus_wer = 0.0;
};

struct FlipRow {
  std::string sample_id;
  std::string tag;
  std::string reference;
  std::string text_without;
  std::string text_with;
  bool cyclic_without = false;
  bool cyclic_with = false;
};

struct SuiteReport {
  std::string suite;
  double lm_train_perplexity = 0.0;
  std::vector<ConfigurationResult> results;
  std::vector<SweepRow> sweep;
  std::vector<FlipRow> flips;

  const ConfigurationResult& Result(const std::string& name) const;
  // Mean per-sample WER of one configuration's top-fraction subset.
  double SweepMeanWer(const std::string& configuration, double fraction) const;
  // Spearman correlation of -ALP against per-sample WER.
  double AlpWerSpearman(const std::string& configuration) const;

  nlohmann::ordered_json ToJson() const;
  std::string ResultsCsv() const;
  std::string SweepCsv() const;
  std::string FlipsCsv() const;
};

// Trains the LM on the suite corpus, decodes every sample under every
// configuration, scores WER against the references, and sweeps the ALP
// selection fractions.
SuiteReport RunSuite(const Suite& suite, unsigned threads = 0);

// Writes results.csv, results.json, sweep.csv, flips.csv (when a comparison
// pair is configured), the trained LM, and one manifest plus WER file per
// configuration.
void WriteSuiteOutputs(const Suite& suite, const SuiteReport& report,
                       const std::filesystem::path& out_dir);

}  // namespace plfuse

#endif  // PLFUSE_SUITE_H_
