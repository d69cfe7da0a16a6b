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


// Acceptance gate. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails or overruns its time budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.h"
#include "plfuse/beam.h"
#include "plfuse/core.h"
#include "plfuse/fusion.h"
#include "plfuse/io.h"
#include "plfuse/metrics.h"
#include "plfuse/penalty.h"
#include "plfuse/scorers.h"
#include "plfuse/selection.h"
#include "plfuse/suite.h"

namespace plfuse {
namespace {

namespace fs = std::filesystem;
using testing::TestRng;

// Tolerances.
constexpr double kFusionTol = 1e-9;
constexpr double kPenaltyTol = 1e-12;
constexpr double kEntropyTol = 1e-6;
constexpr double kTrendAMargin = 0.02;
constexpr double kSpearmanFloor = 0.3;
constexpr double kSweepSlack = 0.01;
constexpr std::uint64_t kShippedSeed = 0;

struct Outcome {
  bool ok = true;
  std::string detail;
};

std::string Fmt(double x) {
  std::ostringstream s;
  s.precision(4);
  s << std::fixed << x;
  return s.str();
}

Outcome FusionExactness() {
  TestRng rng(1001);
  const TokenId eot = 1;
  double worst = 0.0;
  bool identity = true;
  for (int i = 0; i < 10000; ++i) {
    const auto v = static_cast<std::size_t>(rng.Int(3, 12));
    const auto ac = testing::RandomLogProbs(rng, v);
    const auto lm = testing::RandomLogProbs(rng, v);
    const double lambda = rng.Uniform(0.0, 2.0);
    const auto out = FuseStep(ac, lm, FusionConfig{lambda, false}, eot);
    for (std::size_t y = 0; y < v; ++y) {
      worst = std::max(worst, std::abs(out[y] - (ac[y] + lambda * lm[y]) / (1.0 + lambda)));
    }
    identity = identity && FuseStep(ac, lm, FusionConfig{0.0, true}, eot) == ac &&
               FuseStep(ac, lm, FusionConfig{0.0, false}, eot) == ac;
  }
  return {worst <= kFusionTol && identity,
          "max |err| " + std::to_string(worst) + (identity ? ", identity exact" : ", identity broken")};
}

Outcome EotGate() {
  TestRng rng(1002);
  const TokenId eot = 1;
  int steps = 0;
  bool exact = true;
  for (int i = 0; i < 5000; ++i) {
    const auto v = static_cast<std::size_t>(rng.Int(3, 12));
    auto p = testing::RandomProbs(rng, v);
    // Move the largest mass onto EOT.
    const auto top = static_cast<std::size_t>(Argmax(p));
    std::swap(p[top], p[eot]);
    const auto ac = ToLogProbs(p);
    const auto lm = testing::RandomLogProbs(rng, v);
    if (Argmax(ac) != eot) continue;
    ++steps;
    exact = exact && FuseStep(ac, lm, FusionConfig{rng.Uniform(0.01, 5.0), true}, eot) == ac;
  }
  const std::vector<double> ac = {kNegInf, std::log(0.6), std::log(0.3), std::log(0.1)};
  const std::vector<double> lm = {kNegInf, std::log(0.01), std::log(0.9), std::log(0.09)};
  const bool open_differs = FuseStep(ac, lm, FusionConfig{0.3, false}, eot) != ac;
  return {exact && open_differs && steps > 0,
          std::to_string(steps) + " gated steps bit-exact, gate-off counterexample " +
              (open_differs ? "differs" : "does not differ")};
}

Outcome CycleOracle() {
  auto letters = [](const std::string& s) {
    TokenSeq t;
    for (char c : s) t.push_back(c - 'A');
    return t;
  };
  bool ok = DetectMaxCycle(letters("ABCDABCD")) == CycleReport{4, 1, 0} &&
            DetectMaxCycle(letters("ABABAB")) == CycleReport{2, 2, 0} &&
            DetectMaxCycle(letters("XXXX")) == CycleReport{2, 1, 0};
  const bool pinned = ok;
  TestRng rng(1003);
  int mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    const int alphabet = rng.Int(2, 5);
    TokenSeq t;
    const int n = rng.Int(0, 50);
    for (int k = 0; k < n; ++k) t.push_back(rng.Int(0, alphabet - 1));
    const auto got = DetectMaxCycle(t);
    const auto want = testing::BruteForceCycle(t);
    if (got.length != want.length || got.repeats != want.repeats || got.start != want.start) {
      ++mismatches;
    }
  }
  ok = ok && mismatches == 0;
  return {ok, std::string("pinned ") + (pinned ? "ok" : "wrong") + ", " +
                  std::to_string(mismatches) + "/1000 mismatches"};
}

Outcome PenaltyArithmetic() {
  TestRng rng(1004);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double slp = rng.Uniform(-200.0, 0.0);
    const int n = rng.Int(0, 64);
    const CycleReport c{rng.Int(0, 32), rng.Int(0, 16), 0};
    const double ln2 = std::log(2.0);
    worst = std::max(worst, std::abs(ApplyTruncationPenalty(slp, n, true) - (slp - n * ln2)));
    worst = std::max(worst, std::abs(ApplyTruncationPenalty(slp, n, false) - slp));
    worst = std::max(worst, std::abs(ApplyCyclePenalty(slp, c) - (slp - c.length * c.repeats * ln2)));
    const double ab = ApplyCyclePenalty(ApplyTruncationPenalty(slp, n, true), c);
    const double ba = ApplyTruncationPenalty(ApplyCyclePenalty(slp, c), n, true);
    worst = std::max(worst, std::abs(ab - ba));
  }
  return {worst <= kPenaltyTol, "max |err| " + std::to_string(worst)};
}

Outcome BeamOracle() {
  TestRng rng(1005);
  int mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int content = rng.Int(1, 3);
    const int max_tokens = rng.Int(1, 5);
    const Vocabulary v = testing::LetterVocab(content);
    int total = 0;
    for (int k = 0, pw = 1; k <= max_tokens; ++k, pw *= content) total += pw;
    const TableScorer ac(testing::RandomFullScenario(rng, v, max_tokens));
    const NGramLM lm = NGramLM::Train(testing::RandomCorpus(rng, v, 20, 5), v,
                                      NGramTrainOptions{rng.Int(1, 3), 0.5, true});
    BeamConfig config;
    config.beam_size = total + rng.Int(0, 3);
    config.max_tokens = max_tokens;
    config.fusion = FusionConfig{rng.Uniform(0.0, 1.0), rng.Uniform() < 0.5};
    config.hallucination_penalty_enabled = rng.Uniform() < 0.7;
    config.truncation_penalty_enabled = rng.Uniform() < 0.7;
    const auto all = testing::EnumerateSequences(
        ac, lm, v.bos(), v.eot(), v.size(),
        testing::OracleSettings{max_tokens, config.fusion.lambda_gpt,
                                config.fusion.eot_gate_enabled,
                                config.hallucination_penalty_enabled,
                                config.truncation_penalty_enabled});
    const auto want = testing::ExhaustiveBest(all);
    const auto got = BeamSearch(ac, lm, v, config);
    if (got.best.tokens != want.tokens || got.alp != want.alp) ++mismatches;
  }
  return {mismatches == 0, std::to_string(mismatches) + "/200 mismatches"};
}

Outcome WerOracle() {
  bool pinned = true;
  auto check = [&pinned](const char* r, const char* h, int s, int d, int i, double wer) {
    const auto w = Wer(r, h);
    pinned = pinned && w.substitutions == s && w.deletions == d && w.insertions == i &&
             w.wer == wer;
  };
  check("a b c", "a b c", 0, 0, 0, 0.0);
  check("a b c", "a x c", 1, 0, 0, 1.0 / 3);
  check("a b c", "", 0, 3, 0, 1.0);
  check("a", "a a a", 0, 0, 2, 2.0);
  TestRng rng(1006);
  const std::vector<std::string> alphabet = {"p", "q", "r", "s"};
  auto text = [&](int lo) {
    std::string s;
    const int n = rng.Int(lo, 10);
    for (int k = 0; k < n; ++k) s += (k ? " " : "") + alphabet[static_cast<std::size_t>(rng.Int(0, 3))];
    return s;
  };
  int mismatches = 0;
  for (int i = 0; i < 500; ++i) {
    const std::string r = text(1);
    const std::string h = text(0);
    const auto rw = testing::Words(r);
    const auto w = Wer(r, h);
    const int dist = testing::EditDistance(rw, testing::Words(h));
    if (w.errors() != dist || w.wer != static_cast<double>(dist) / static_cast<double>(rw.size())) {
      ++mismatches;
    }
  }
  return {pinned && mismatches == 0,
          std::string("pinned ") + (pinned ? "ok" : "wrong") + ", " +
              std::to_string(mismatches) + "/500 mismatches"};
}

Outcome PerplexityIdentity() {
  const Vocabulary v({"<bos>", "<eot>", "a", "b"}, 0, 1);
  const std::vector<TokenSeq> corpus = {{2, 2, 2, 3}};
  const NGramLM mle = NGramLM::Train(corpus, v, NGramTrainOptions{1, 1e-12, false});
  const double h = -(0.75 * std::log(0.75) + 0.25 * std::log(0.25));
  const double err = std::abs(Perplexity(mle, corpus) - std::exp(h));

  TestRng rng(1007);
  bool uniform_exact = true;
  for (int content = 1; content <= 6; ++content) {
    const Vocabulary lv = testing::LetterVocab(content);
    const UniformScorer u(lv.size());
    const auto c = testing::RandomCorpus(rng, lv, 25, 10);
    uniform_exact = uniform_exact &&
                    Perplexity(u, c, lv.eot(), true) == static_cast<double>(lv.size()) &&
                    Perplexity(u, c, lv.eot(), false) == static_cast<double>(lv.size());
  }
  return {err <= kEntropyTol && uniform_exact,
          "MLE |err| " + std::to_string(err) +
              (uniform_exact ? ", uniform ppl == |V|" : ", uniform ppl != |V|")};
}

// Suites come from the shipped directory when present, otherwise they are
// regenerated at the shipped seed.
Suite LoadSuite(const std::string& kind) {
#ifdef PLFUSE_SUITES_DIR
  const fs::path dir = fs::path(PLFUSE_SUITES_DIR) / kind;
  if (fs::exists(dir / "suite.json")) return Suite::Load(dir);
#endif
  return GenerateSuite(kind, kShippedSeed);
}

Outcome TrendA() {
  const SuiteReport r = RunSuite(LoadSuite("noisy-channel"));
  bool ok = true;
  std::string detail;
  for (const auto& [without, with] : {std::pair<std::string, std::string>{"baseline", "gpt"},
                                      {"baseline+hp", "gpt+hp"}}) {
    const double a = r.Result(without).corpus.wer;
    const double b = r.Result(with).corpus.wer;
    ok = ok && b <= a - kTrendAMargin;
    detail += without + " " + Fmt(a) + " -> " + with + " " + Fmt(b) + "; ";
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

Outcome TrendB() {
  const SuiteReport r = RunSuite(LoadSuite("eot"));
  const double off = r.Result("gpt+hp-nogate").corpus.wer;
  const double on = r.Result("gpt+hp").corpus.wer;
  return {on < off, "gate off " + Fmt(off) + " -> gate on " + Fmt(on)};
}

Outcome TrendC() {
  const Suite suite = LoadSuite("hallucination");
  const SuiteReport r = RunSuite(suite);
  int crafted = 0;
  int flipped = 0;
  for (const auto& f : r.flips) {
    if (f.tag != "hallucination") continue;
    ++crafted;
    if (f.cyclic_without && !f.cyclic_with && f.text_with == f.reference) ++flipped;
  }
  const double without = r.SweepMeanWer("gpt", 0.2);
  const double with = r.SweepMeanWer("gpt+hp", 0.2);
  return {crafted > 0 && flipped == crafted && with < without,
          std::to_string(flipped) + "/" + std::to_string(crafted) +
              " flipped; top-20% mean WER " + Fmt(without) + " -> " + Fmt(with)};
}

Outcome TrendD() {
  const SuiteReport r = RunSuite(LoadSuite("noisy-channel"));
  const double rho = r.AlpWerSpearman("gpt+hp");
  return {rho >= kSpearmanFloor, "spearman(-ALP, WER) " + Fmt(rho)};
}

Outcome TrendE() {
  const Suite suite = LoadSuite("selection");
  const SuiteReport r = RunSuite(suite);
  int violations = 0;
  bool small = true;
  std::string detail;
  double prev = -1.0;
  for (double f : suite.config.fractions) {
    const double w = r.SweepMeanWer("gpt+hp", f);
    if (prev >= 0.0 && w < prev) {
      ++violations;
      small = small && prev - w <= kSweepSlack;
    }
    detail += Fmt(w) + " ";
    prev = w;
  }
  detail.pop_back();
  return {violations <= 1 && small, "mean WER by fraction " + detail};
}

Outcome RoundTrips() {
  const fs::path dir = fs::temp_directory_path() / "plfuse_acceptance_rt";
  fs::remove_all(dir);
  fs::create_directories(dir);
  bool ok = true;
  std::string bad;
  auto same = [&](const std::string& what, const fs::path& a, const fs::path& b) {
    if (ReadFile(a) != ReadFile(b)) {
      ok = false;
      bad += " " + what;
    }
  };

  const Suite s = GenerateSuite("noisy-channel", kShippedSeed);
  WriteJson(dir / "v1.json", s.vocab.ToJson());
  const Vocabulary v = Vocabulary::FromJson(ReadJson(dir / "v1.json"));
  WriteJson(dir / "v2.json", v.ToJson());
  same("vocabulary", dir / "v1.json", dir / "v2.json");
  ok = ok && v == s.vocab;

  std::vector<TokenSeq> corpus;
  for (const auto& line : s.corpus) corpus.push_back(Encode(line, s.vocab));
  const NGramLM lm = NGramLM::Train(corpus, s.vocab, NGramTrainOptions{3, 0.1, true});
  lm.Save(dir / "lm1.json");
  const NGramLM lm2 = NGramLM::Load(dir / "lm1.json");
  lm2.Save(dir / "lm2.json");
  same("lm", dir / "lm1.json", dir / "lm2.json");
  for (std::size_t i = 0; i < 50; ++i) {
    const TokenSeq& p = corpus[i];
    ok = ok && lm.Score(lm.StateFor(p)) == lm2.Score(lm2.StateFor(p));
  }

  const auto& sc = s.samples.front().scenario;
  sc.Save(dir / "s1.json");
  const AcousticScenario sc2 = AcousticScenario::Load(dir / "s1.json");
  sc2.Save(dir / "s2.json");
  same("scenario", dir / "s1.json", dir / "s2.json");
  BeamConfig config;
  config.max_tokens = 16;
  const auto d1 = BeamSearch(TableScorer(sc), lm, s.vocab, config);
  const auto d2 = BeamSearch(TableScorer(sc2), lm2, s.vocab, config);
  ok = ok && d1.ToJson().dump() == d2.ToJson().dump();

  std::vector<AcousticScenario> scenarios;
  for (std::size_t i = 0; i < 20; ++i) scenarios.push_back(s.samples[i].scenario);
  const auto recs = BatchDecode(scenarios, lm, s.vocab, config);
  WriteManifest(dir / "m1.jsonl", recs);
  const auto recs2 = ReadManifest(dir / "m1.jsonl");
  WriteManifest(dir / "m2.jsonl", recs2);
  same("manifest", dir / "m1.jsonl", dir / "m2.jsonl");
  for (std::size_t i = 0; i < recs.size(); ++i) {
    ok = ok && recs[i].alp == recs2[i].alp && recs[i].text == recs2[i].text;
  }
  return {ok, ok ? "vocabulary, lm, scenario, manifest byte-identical" : "differs:" + bad};
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

int Main() {
  const std::vector<Criterion> criteria = {
      {1, "fusion exactness", 1, FusionExactness},
      {2, "eot gate", 1, EotGate},
      {3, "cycle detection oracle", 10, CycleOracle},
      {4, "penalty arithmetic", 1, PenaltyArithmetic},
      {5, "beam/exhaustive equivalence", 60, BeamOracle},
      {6, "wer oracle", 5, WerOracle},
      {7, "perplexity identity", 1, PerplexityIdentity},
      {8, "trend A: lm fusion lowers wer", 120, TrendA},
      {9, "trend B: eot gate lowers wer", 60, TrendB},
      {10, "trend C: hallucination penalty", 60, TrendC},
      {11, "trend D: alp/wer rank correlation", 60, TrendD},
      {12, "trend E: selection sweep", 180, TrendE},
      {13, "round trips", 5, RoundTrips},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.limit_s;
    const bool pass = o.ok && in_time;
    if (!pass) ++failed;
    std::printf("%s %2d %-34s %7.3fs/%gs  %s%s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs,
                c.limit_s, o.detail.c_str(), in_time ? "" : " (over time budget)");
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}

}  // namespace
}  // namespace plfuse

int main() { return plfuse::Main(); }
