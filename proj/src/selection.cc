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

#include "plfuse/selection.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <set>
#include <thread>
#include <unordered_map>

#include "plfuse/errors.h"
#include "plfuse/io.h"

namespace plfuse {

nlohmann::ordered_json SampleRecord::ToJson() const {
  nlohmann::ordered_json j;
  j["sample_id"] = sample_id;
  j["scenario_ref"] = scenario_ref;
  j["text"] = text;
  if (failed()) {
    j["alp"] = nullptr;
  } else {
    j["alp"] = alp;
  }
  j["n_tokens"] = n_tokens;
  j["truncated"] = truncated;
  j["cycle"] = cycle.ToJson();
  if (failed()) j["error"] = error;
  return j;
}

SampleRecord SampleRecord::FromJson(const nlohmann::json& j) {
  try {
    SampleRecord r;
    r.sample_id = j.at("sample_id").get<std::string>();
    r.scenario_ref = j.value("scenario_ref", std::string());
    r.text = j.at("text").get<std::string>();
    r.error = j.value("error", std::string());
    const auto& alp = j.at("alp");
    r.alp = alp.is_null() ? std::numeric_limits<double>::quiet_NaN()
                          : alp.get<double>();
    r.n_tokens = j.at("n_tokens").get<int>();
    r.truncated = j.at("truncated").get<bool>();
    r.cycle = CycleReport::FromJson(j.at("cycle"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed sample record: ") + e.what());
  }
}

nlohmann::ordered_json SelectionReport::ToJson() const {
  nlohmann::ordered_json j;
  j["fraction"] = fraction;
  j["total"] = total;
  j["selected_count"] = selected_count;
  j["alp_threshold"] = alp_threshold;
  j["selected_ids"] = selected_ids;
  return j;
}

SelectionReport SelectionReport::FromJson(const nlohmann::json& j) {
  try {
    SelectionReport r;
    r.fraction = j.at("fraction").get<double>();
    r.total = j.at("total").get<int>();
    r.selected_count = j.at("selected_count").get<int>();
    r.alp_threshold = j.at("alp_threshold").get<double>();
    r.selected_ids = j.at("selected_ids").get<std::vector<std::string>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed selection report: ") + e.what());
  }
}

SampleRecord MakeSampleRecord(const std::string& sample_id,
                              const std::string& scenario_ref,
                              const DecodeResult& result) {
  const Candidate& best = result.best_candidate();
  SampleRecord r;
  r.sample_id = sample_id;
  r.scenario_ref = scenario_ref;
  r.text = result.text;
  r.alp = result.alp;
  r.n_tokens = static_cast<int>(best.hyp.tokens.size());
  r.truncated = best.hyp.truncated;
  r.cycle = best.cycle;
  return r;
}

std::vector<SampleRecord> BatchDecode(std::span<const AcousticScenario> scenarios,
                                      const Scorer& lm, const Vocabulary& vocab,
                                      const BeamConfig& config,
                                      const BatchOptions& options) {
  if (scenarios.empty()) throw UsageError("batch decode: no scenarios");
  config.Validate();
  if (!options.scenario_refs.empty() &&
      options.scenario_refs.size() != scenarios.size()) {
    throw UsageError("batch decode: scenario_refs size mismatch");
  }

  std::vector<SampleRecord> records(scenarios.size());
  auto decode_one = [&](std::size_t i) {
    const AcousticScenario& s = scenarios[i];
    const std::string& ref =
        options.scenario_refs.empty() ? s.id : options.scenario_refs[i];
    try {
      const TableScorer acoustic(s);
      records[i] = MakeSampleRecord(s.id, ref, BeamSearch(acoustic, lm, vocab, config));
    } catch (const std::exception& e) {
      SampleRecord failed;
      failed.sample_id = s.id;
      failed.scenario_ref = ref;
      failed.alp = std::numeric_limits<double>::quiet_NaN();
      failed.error = e.what();
      records[i] = std::move(failed);
    }
  };

  unsigned threads = options.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(scenarios.size()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < scenarios.size(); ++i) decode_one(i);
    return records;
  }
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < scenarios.size(); i = next++) {
          decode_one(i);
        }
      });
    }
  }
  return records;
}

SelectionReport SelectTopFraction(std::span<const SampleRecord> records,
                                  double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw UsageError("selection fraction must be in (0, 1]");
  }
  std::set<std::string> seen;
  std::vector<const SampleRecord*> ranked;
  for (const auto& r : records) {
    if (!seen.insert(r.sample_id).second) {
      throw InputError("duplicate sample_id in manifest: " + r.sample_id);
    }
    if (!r.failed() && std::isfinite(r.alp)) ranked.push_back(&r);
  }
  if (ranked.empty()) throw InputError("no decodable records to select from");
  std::sort(ranked.begin(), ranked.end(),
            [](const SampleRecord* a, const SampleRecord* b) {
              if (a->alp != b->alp) return a->alp > b->alp;
              return a->sample_id < b->sample_id;
            });

  SelectionReport report;
  report.fraction = fraction;
  report.total = static_cast<int>(ranked.size());
  // The slack keeps products such as 0.7 * 10 = 7.000000000000001 from
  // rounding up to an extra record.
  auto count = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(ranked.size()) - 1e-9));
  count = std::clamp<std::size_t>(count, 1, ranked.size());
  report.selected_count = static_cast<int>(count);
  for (std::size_t i = 0; i < count; ++i) {
    report.selected_ids.push_back(ranked[i]->sample_id);
  }
  report.alp_threshold = ranked[count - 1]->alp;
  return report;
}

std::vector<SampleRecord> FilterSelected(std::span<const SampleRecord> records,
                                         const SelectionReport& report) {
  std::unordered_map<std::string, const SampleRecord*> by_id;
  for (const auto& r : records) by_id.emplace(r.sample_id, &r);
  std::vector<SampleRecord> out;
  out.reserve(report.selected_ids.size());
  for (const auto& id : report.selected_ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw InputError("selected id not in manifest: " + id);
    out.push_back(*it->second);
  }
  return out;
}

std::vector<SampleRecord> ReadManifest(const std::filesystem::path& path) {
  std::vector<SampleRecord> out;
  for (const auto& j : ReadJsonLines(path)) out.push_back(SampleRecord::FromJson(j));
  return out;
}

void WriteManifest(const std::filesystem::path& path,
                   std::span<const SampleRecord> records) {
  std::vector<nlohmann::ordered_json> lines;
  lines.reserve(records.size());
  for (const auto& r : records) lines.push_back(r.ToJson());
  WriteJsonLines(path, lines);
}

}  // namespace plfuse
