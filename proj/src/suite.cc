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

#include "plfuse/suite.h"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "plfuse/errors.h"
#include "plfuse/io.h"

namespace plfuse {

namespace {

// Portable draws on top of mt19937_64, whose output sequence is fixed by the
// standard (the <random> distributions are not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  std::size_t Index(std::size_t n) {
    return static_cast<std::size_t>(engine_() % n);
  }
  int Int(int lo, int hi) {
    return lo + static_cast<int>(Index(static_cast<std::size_t>(hi - lo + 1)));
  }
  bool Bernoulli(double p) { return Uniform() < p; }

  template <typename T>
  void Shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[Index(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

const std::vector<std::string>& Words() {
  static const std::vector<std::string> kWords = {
      "alma", "bala", "kitap", "su",  "nan",  "uy",
      "kol",  "tau",  "kun",   "zhol", "dala", "ot"};
  return kWords;
}

Vocabulary MakeWordVocab() {
  std::vector<std::string> tokens = {"<bos>", "<eot>"};
  tokens.insert(tokens.end(), Words().begin(), Words().end());
  return Vocabulary(std::move(tokens), 0, 1, TokenMode::kWord);
}

// Bigram source over content tokens. Each context favours three successors
// (0.50, 0.25, 0.12) and spreads the remaining 0.13 over the rest.
class SourceModel {
 public:
  SourceModel(const Vocabulary& vocab, Rng& rng) : content_(vocab.ContentIds()) {
    std::vector<TokenId> contexts = content_;
    contexts.insert(contexts.begin(), vocab.bos());
    const std::vector<double> top = {0.50, 0.25, 0.12};
    for (TokenId ctx : contexts) {
      std::vector<TokenId> order = content_;
      rng.Shuffle(order);
      const double rest = (1.0 - 0.87) / static_cast<double>(order.size() - top.size());
      std::vector<double> probs;
      for (std::size_t i = 0; i < order.size(); ++i) {
        probs.push_back(i < top.size() ? top[i] : rest);
      }
      ranked_[ctx] = order;
      probs_[ctx] = probs;
    }
  }

  TokenId Sample(TokenId ctx, Rng& rng) const {
    const auto& order = ranked_.at(ctx);
    const auto& probs = probs_.at(ctx);
    double u = rng.Uniform();
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (u < probs[i]) return order[i];
      u -= probs[i];
    }
    return order.back();
  }

  TokenSeq Sentence(TokenId bos, int length, Rng& rng) const {
    TokenSeq out;
    TokenId ctx = bos;
    for (int i = 0; i < length; ++i) {
      ctx = Sample(ctx, rng);
      out.push_back(ctx);
    }
    return out;
  }

  // Successors of `ctx`, most likely first.
  const std::vector<TokenId>& Ranked(TokenId ctx) const { return ranked_.at(ctx); }
  const std::vector<TokenId>& content() const { return content_; }

 private:
  std::vector<TokenId> content_;
  std::map<TokenId, std::vector<TokenId>> ranked_;
  std::map<TokenId, std::vector<double>> probs_;
};

// Mass left on EOT wherever the audio has not ended.
constexpr double kEotFloor = 1e-4;

// Places `masses` on the listed tokens, kEotFloor on EOT unless listed, and
// spreads the remainder uniformly over the other content tokens. BOS gets 0.
std::vector<double> MakeProbs(const Vocabulary& vocab,
                              const std::vector<std::pair<TokenId, double>>& masses) {
  std::vector<double> probs(vocab.size(), 0.0);
  auto listed = [&masses](TokenId t) {
    return std::any_of(masses.begin(), masses.end(),
                       [t](const auto& p) { return p.first == t; });
  };
  double used = 0.0;
  for (const auto& [tok, m] : masses) {
    probs[tok] += m;
    used += m;
  }
  if (!listed(vocab.eot())) {
    probs[vocab.eot()] = kEotFloor;
    used += kEotFloor;
  }
  std::vector<TokenId> others;
  for (TokenId t : vocab.ContentIds()) {
    if (!listed(t)) others.push_back(t);
  }
  const double share = (1.0 - used) / static_cast<double>(others.size());
  for (TokenId t : others) probs[t] = share;
  return probs;
}

// Off-track prefixes: no preference among words, and no sign of an ending.
std::vector<double> UniformProbs(const Vocabulary& vocab) {
  return MakeProbs(vocab, {});
}

std::string SampleName(const std::string& prefix, int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s-%04d", prefix.c_str(), index);
  return buf;
}

TokenId OtherContent(const SourceModel& source, TokenId avoid, Rng& rng) {
  const auto& content = source.content();
  TokenId t = avoid;
  while (t == avoid) t = content[rng.Index(content.size())];
  return t;
}

// Position-indexed acoustic evidence: at position i the scenario offers
// `options[i]` as the plausible tokens with distribution `vectors[i]`.
// Entries are emitted for every prefix that picks one of the options at each
// earlier position, so substitutions among the options keep the audio
// aligned. `at_end` emits the entries for a prefix that covers the audio.
struct PositionalEvidence {
  std::vector<std::vector<TokenId>> options;
  std::vector<std::vector<double>> vectors;
};

using EndEmitter = std::function<void(const TokenSeq&, AcousticScenario&)>;

void EmitEntries(const PositionalEvidence& ev, TokenSeq& prefix,
                 AcousticScenario& scenario, const EndEmitter& at_end) {
  const std::size_t i = prefix.size();
  if (i == ev.options.size()) {
    at_end(prefix, scenario);
    return;
  }
  scenario.entries.push_back({prefix, ev.vectors[i]});
  for (TokenId t : ev.options[i]) {
    prefix.push_back(t);
    EmitEntries(ev, prefix, scenario, at_end);
    prefix.pop_back();
  }
}

// Clean positions put 0.9 on the truth. A corrupted position (probability
// `noise`) hands a confuser drawn uniformly from the other words a share
// q ~ U(0.55, 0.8) of that 0.9, so the audio alone prefers the confuser.
SuiteSample MakeNoisySample(const std::string& id, const TokenSeq& truth,
                            double noise, const Vocabulary& vocab,
                            const SourceModel& source, Rng& rng) {
  PositionalEvidence ev;
  for (TokenId t : truth) {
    if (rng.Bernoulli(noise)) {
      const TokenId confuser = OtherContent(source, t, rng);
      const double q = rng.Uniform(0.55, 0.8);
      ev.options.push_back({t, confuser});
      ev.vectors.push_back(MakeProbs(vocab, {{confuser, 0.9 * q}, {t, 0.9 * (1.0 - q)}}));
    } else {
      ev.options.push_back({t});
      ev.vectors.push_back(MakeProbs(vocab, {{t, 0.9}}));
    }
  }
  const auto end_vector = MakeProbs(vocab, {{vocab.eot(), 0.9}});
  SuiteSample sample;
  sample.sample_id = id;
  sample.reference = DecodeText(truth, vocab);
  sample.tag = "normal";
  sample.scenario.id = id;
  sample.scenario.vocab_ref = "vocab.json";
  sample.scenario.default_probs = UniformProbs(vocab);
  TokenSeq prefix;
  EmitEntries(ev, prefix, sample.scenario,
              [&end_vector](const TokenSeq& spoken, AcousticScenario& scenario) {
                scenario.entries.push_back({spoken, end_vector});
              });
  return sample;
}

std::vector<std::string> SourceCorpus(const SourceModel& source,
                                      const Vocabulary& vocab, int sentences,
                                      int min_len, int max_len, Rng& rng) {
  std::vector<std::string> corpus;
  corpus.reserve(static_cast<std::size_t>(sentences));
  for (int i = 0; i < sentences; ++i) {
    corpus.push_back(DecodeText(
        source.Sentence(vocab.bos(), rng.Int(min_len, max_len), rng), vocab));
  }
  return corpus;
}

SuiteConfiguration MakeConfiguration(const std::string& name, double lambda,
                                     bool gate, bool penalties) {
  SuiteConfiguration c;
  c.name = name;
  c.beam.beam_size = 5;
  c.beam.max_tokens = 16;
  c.beam.fusion.lambda_gpt = lambda;
  c.beam.fusion.eot_gate_enabled = gate;
  c.beam.hallucination_penalty_enabled = penalties;
  c.beam.truncation_penalty_enabled = penalties;
  return c;
}

SuiteConfig BaseConfig(const std::string& kind, std::uint64_t seed) {
  SuiteConfig c;
  c.name = kind;
  c.kind = kind;
  c.seed = seed;
  c.lm.order = 2;
  c.lm.k = 0.1;
  c.lm.append_eot = true;
  c.fractions = {0.2, 0.4, 0.6, 0.8, 1.0};
  return c;
}

Suite NoisyChannelSuite(const std::string& kind, std::uint64_t seed,
                        int utterances, double noise_lo, double noise_hi) {
  Rng rng(seed);
  Suite suite{BaseConfig(kind, seed), MakeWordVocab(), {}, {}};
  const SourceModel source(suite.vocab, rng);
  suite.corpus = SourceCorpus(source, suite.vocab, 3000, 4, 8, rng);
  for (int u = 0; u < utterances; ++u) {
    const TokenSeq truth = source.Sentence(suite.vocab.bos(), rng.Int(4, 8), rng);
    const double noise = noise_lo == noise_hi ? noise_lo : rng.Uniform(noise_lo, noise_hi);
    suite.samples.push_back(MakeNoisySample(SampleName("utt", u), truth, noise,
                                            suite.vocab, source, rng));
  }
  return suite;
}

// References stop mid-flow: the LM is trained on long sentences, so it puts
// little mass on EOT after any word. Three or four positions are genuinely
// ambiguous between the truth and the LM's favourite alternative, and past
// the end of the audio the acoustic model only mildly prefers EOT (0.40)
// over the LM's favourite continuation (0.38).
Suite EotSuite(std::uint64_t seed) {
  Rng rng(seed);
  Suite suite{BaseConfig("eot", seed), MakeWordVocab(), {}, {}};
  const Vocabulary& vocab = suite.vocab;
  const SourceModel source(vocab, rng);
  suite.corpus = SourceCorpus(source, vocab, 3000, 30, 50, rng);
  const int max_tokens = 16;
  for (int u = 0; u < 100; ++u) {
    const int n = rng.Int(4, 7);
    const TokenSeq truth = source.Sentence(vocab.bos(), n, rng);
    std::vector<int> positions(static_cast<std::size_t>(n));
    std::iota(positions.begin(), positions.end(), 0);
    rng.Shuffle(positions);
    positions.resize(static_cast<std::size_t>(std::min(n, rng.Int(3, 4))));
    std::set<int> ambiguous(positions.begin(), positions.end());

    PositionalEvidence ev;
    for (int i = 0; i < n; ++i) {
      const TokenId t = truth[static_cast<std::size_t>(i)];
      if (ambiguous.count(i)) {
        const TokenId ctx = i == 0 ? vocab.bos() : truth[static_cast<std::size_t>(i - 1)];
        TokenId alt = source.Ranked(ctx)[0];
        if (alt == t) alt = source.Ranked(ctx)[1];
        ev.options.push_back({t, alt});
        ev.vectors.push_back(MakeProbs(vocab, {{t, 0.45}, {alt, 0.45}}));
      } else {
        ev.options.push_back({t});
        ev.vectors.push_back(MakeProbs(vocab, {{t, 0.9}}));
      }
    }
    auto post_audio = [&](TokenId next) {
      return MakeProbs(vocab, {{vocab.eot(), 0.40}, {next, 0.38}});
    };
    auto tail = [&](const TokenSeq& spoken, AcousticScenario& scenario) {
      TokenSeq prefix = spoken;
      scenario.entries.push_back({prefix, post_audio(source.Ranked(prefix.back())[0])});
      while (static_cast<int>(prefix.size()) + 1 < max_tokens) {
        prefix.push_back(source.Ranked(prefix.back())[0]);
        scenario.entries.push_back({prefix, post_audio(source.Ranked(prefix.back())[0])});
      }
    };

    SuiteSample sample;
    sample.sample_id = SampleName("eot", u);
    sample.reference = DecodeText(truth, vocab);
    sample.tag = "truncated-reference";
    sample.scenario.id = sample.sample_id;
    sample.scenario.vocab_ref = "vocab.json";
    sample.scenario.default_probs = UniformProbs(vocab);
    TokenSeq prefix;
    EmitEntries(ev, prefix, sample.scenario, tail);
    suite.samples.push_back(std::move(sample));
  }
  suite.config.configurations = {
      MakeConfiguration("baseline+hp", 0.0, true, true),
      MakeConfiguration("gpt+hp-nogate", 0.3, false, true),
      MakeConfiguration("gpt+hp", 0.3, true, true),
  };
  suite.config.compare_without = "gpt+hp-nogate";
  suite.config.compare_with = "gpt+hp";
  return suite;
}

// Twenty crafted samples where the audio, after a confident phrase, slightly
// prefers restarting the phrase (0.6) over stopping (0.35); once repeated it
// stops. Phrases are chosen so the source LM also likes the loop. Eighty
// noisy-channel samples fill out the ALP ranking.
Suite HallucinationSuite(std::uint64_t seed) {
  Rng rng(seed);
  Suite suite{BaseConfig("hallucination", seed), MakeWordVocab(), {}, {}};
  const Vocabulary& vocab = suite.vocab;
  const SourceModel source(vocab, rng);
  suite.corpus = SourceCorpus(source, vocab, 3000, 4, 8, rng);

  std::set<TokenSeq> used;
  for (int u = 0; u < 20; ++u) {
    TokenSeq phrase;
    for (int attempt = 0; attempt < 10000; ++attempt) {
      phrase = source.Sentence(vocab.bos(), rng.Int(4, 6), rng);
      const std::set<TokenId> distinct(phrase.begin(), phrase.end());
      const auto& loop = source.Ranked(phrase.back());
      const bool loops = loop[0] == phrase.front() || loop[1] == phrase.front();
      if (distinct.size() == phrase.size() && loops && !used.count(phrase)) break;
    }
    used.insert(phrase);
    const std::size_t n = phrase.size();
    SuiteSample sample;
    sample.sample_id = SampleName("hal", u);
    sample.reference = DecodeText(phrase, vocab);
    sample.tag = "hallucination";
    AcousticScenario& s = sample.scenario;
    s.id = sample.sample_id;
    s.vocab_ref = "vocab.json";
    s.default_probs = UniformProbs(vocab);
    TokenSeq prefix;
    for (std::size_t i = 0; i < n; ++i) {
      s.entries.push_back({prefix, MakeProbs(vocab, {{phrase[i], 0.99}})});
      prefix.push_back(phrase[i]);
    }
    s.entries.push_back(
        {prefix, MakeProbs(vocab, {{phrase[0], 0.6}, {vocab.eot(), 0.35}})});
    for (std::size_t i = 0; i < n; ++i) {
      prefix.push_back(phrase[i]);
      if (i + 1 < n) {
        s.entries.push_back({prefix, MakeProbs(vocab, {{phrase[i + 1], 0.99}})});
      }
    }
    s.entries.push_back({prefix, MakeProbs(vocab, {{vocab.eot(), 0.99}})});
    suite.samples.push_back(std::move(sample));
  }
  for (int u = 0; u < 80; ++u) {
    const TokenSeq truth = source.Sentence(vocab.bos(), rng.Int(4, 8), rng);
    suite.samples.push_back(MakeNoisySample(SampleName("utt", u), truth,
                                            rng.Uniform(0.1, 0.5), vocab, source, rng));
  }
  suite.config.configurations = {
      MakeConfiguration("baseline", 0.0, true, false),
      MakeConfiguration("baseline+hp", 0.0, true, true),
      MakeConfiguration("gpt", 0.3, true, false),
      MakeConfiguration("gpt+hp", 0.3, true, true),
  };
  suite.config.compare_without = "gpt";
  suite.config.compare_with = "gpt+hp";
  return suite;
}

std::string CsvField(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string Num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

double MeanWer(std::span<const WerBreakdown> wers) {
  double sum = 0.0;
  for (const auto& w : wers) sum += w.wer;
  return wers.empty() ? 0.0 : sum / static_cast<double>(wers.size());
}

}  // namespace

// ---------------------------------------------------------------------------
// SuiteConfig

nlohmann::ordered_json SuiteConfig::ToJson() const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["kind"] = kind;
  j["seed"] = seed;
  j["lm"] = {{"order", lm.order}, {"k", lm.k}, {"append_eot", lm.append_eot}};
  nlohmann::ordered_json configs = nlohmann::ordered_json::array();
  for (const auto& c : configurations) {
    nlohmann::ordered_json item;
    item["name"] = c.name;
    const auto beam = c.beam.ToJson();
    for (const auto& [key, value] : beam.items()) item[key] = value;
    configs.push_back(std::move(item));
  }
  j["configurations"] = std::move(configs);
  j["fractions"] = fractions;
  if (!compare_without.empty()) {
    j["compare"] = {{"without", compare_without}, {"with", compare_with}};
  }
  return j;
}

SuiteConfig SuiteConfig::FromJson(const nlohmann::json& j) {
  try {
    SuiteConfig c;
    c.name = j.at("name").get<std::string>();
    c.kind = j.value("kind", std::string());
    c.seed = j.value("seed", std::uint64_t{0});
    const auto& lm = j.at("lm");
    c.lm.order = lm.at("order").get<int>();
    c.lm.k = lm.at("k").get<double>();
    c.lm.append_eot = lm.value("append_eot", true);
    for (const auto& item : j.at("configurations")) {
      SuiteConfiguration sc;
      sc.name = item.at("name").get<std::string>();
      sc.beam.beam_size = item.value("beam_size", 5);
      sc.beam.max_tokens = item.value("max_tokens", 64);
      sc.beam.fusion.lambda_gpt = item.value("lambda_gpt", 0.3);
      sc.beam.fusion.eot_gate_enabled = item.value("eot_gate", true);
      sc.beam.hallucination_penalty_enabled = item.value("hallucination_penalty", true);
      sc.beam.truncation_penalty_enabled = item.value("truncation_penalty", true);
      sc.beam.Validate();
      c.configurations.push_back(std::move(sc));
    }
    if (c.configurations.empty()) throw InputError("suite declares no configurations");
    c.fractions = j.value("fractions", std::vector<double>{});
    for (double f : c.fractions) {
      if (!(f > 0.0 && f <= 1.0)) throw InputError("suite fraction out of (0, 1]");
    }
    if (j.contains("compare")) {
      c.compare_without = j.at("compare").at("without").get<std::string>();
      c.compare_with = j.at("compare").at("with").get<std::string>();
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed suite config: ") + e.what());
  } catch (const UsageError& e) {
    throw InputError(std::string("malformed suite config: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Suite IO

void Suite::Save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir / "scenarios");
  WriteJson(dir / "suite.json", config.ToJson());
  WriteJson(dir / "vocab.json", vocab.ToJson());
  std::string text;
  for (const auto& line : corpus) text += line + "\n";
  WriteFile(dir / "corpus.txt", text);
  std::vector<nlohmann::ordered_json> refs;
  for (const auto& s : samples) {
    const std::string rel = "scenarios/" + s.sample_id + ".json";
    refs.push_back({{"sample_id", s.sample_id},
                    {"text", s.reference},
                    {"tag", s.tag},
                    {"scenario", rel}});
    s.scenario.Save(dir / rel);
  }
  WriteJsonLines(dir / "references.jsonl", refs);
}

Suite Suite::Load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw InputError("suite directory not found: " + dir.string());
  }
  if (!std::filesystem::exists(dir / "suite.json")) {
    throw InputError("suite directory has no suite.json: " + dir.string());
  }
  Suite suite{SuiteConfig::FromJson(ReadJson(dir / "suite.json")),
              Vocabulary::FromJson(ReadJson(dir / "vocab.json")),
              ReadLines(dir / "corpus.txt"),
              {}};
  std::set<std::string> ids;
  for (const auto& j : ReadJsonLines(dir / "references.jsonl")) {
    try {
      SuiteSample s;
      s.sample_id = j.at("sample_id").get<std::string>();
      s.reference = j.at("text").get<std::string>();
      s.tag = j.value("tag", std::string());
      s.scenario = AcousticScenario::Load(dir / j.at("scenario").get<std::string>());
      if (!ids.insert(s.sample_id).second) {
        throw InputError("duplicate sample_id in suite: " + s.sample_id);
      }
      suite.samples.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("malformed suite reference: ") + e.what());
    }
  }
  if (suite.samples.empty()) throw InputError("suite has no samples");
  return suite;
}

std::vector<std::string> SuiteKinds() {
  return {"noisy-channel", "eot", "hallucination", "selection"};
}

Suite GenerateSuite(const std::string& kind, std::uint64_t seed) {
  if (kind == "noisy-channel") {
    Suite s = NoisyChannelSuite(kind, seed, 100, 0.4, 0.4);
    s.config.configurations = {
        MakeConfiguration("baseline", 0.0, true, false),
        MakeConfiguration("baseline+hp", 0.0, true, true),
        MakeConfiguration("gpt", 0.3, true, false),
        MakeConfiguration("gpt+hp", 0.3, true, true),
    };
    s.config.compare_without = "gpt";
    s.config.compare_with = "gpt+hp";
    return s;
  }
  if (kind == "selection") {
    Suite s = NoisyChannelSuite(kind, seed, 500, 0.0, 0.8);
    s.config.configurations = {
        MakeConfiguration("baseline+hp", 0.0, true, true),
        MakeConfiguration("gpt+hp", 0.3, true, true),
    };
    return s;
  }
  if (kind == "eot") return EotSuite(seed);
  if (kind == "hallucination") return HallucinationSuite(seed);
  throw UsageError("unknown suite kind: " + kind);
}

// ---------------------------------------------------------------------------
// Running

const ConfigurationResult& SuiteReport::Result(const std::string& name) const {
  for (const auto& r : results) {
    if (r.configuration.name == name) return r;
  }
  throw UsageError("no configuration named " + name);
}

double SuiteReport::SweepMeanWer(const std::string& configuration,
                                 double fraction) const {
  for (const auto& row : sweep) {
    if (row.configuration == configuration && std::abs(row.fraction - fraction) < 1e-12) {
      return row.mean_wer;
    }
  }
  throw UsageError("no sweep row for " + configuration);
}

double SuiteReport::AlpWerSpearman(const std::string& configuration) const {
  const auto& r = Result(configuration);
  std::vector<double> neg_alp, wer;
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    if (r.records[i].failed()) continue;
    neg_alp.push_back(-r.records[i].alp);
    wer.push_back(r.wers[i].wer);
  }
  return SpearmanCorrelation(neg_alp, wer);
}

nlohmann::ordered_json SuiteReport::ToJson() const {
  nlohmann::ordered_json j;
  j["suite"] = suite;
  j["lm_train_perplexity"] = lm_train_perplexity;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    nlohmann::ordered_json row;
    row["configuration"] = r.configuration.name;
    row["config"] = r.configuration.beam.ToJson();
    row["corpus"] = r.corpus.ToJson();
    row["mean_alp"] = r.mean_alp;
    row["truncated"] = r.truncated;
    row["cyclic"] = r.cyclic;
    row["failed"] = r.failed;
    row["alp_wer_spearman"] = r.records.size() >= 2 ? AlpWerSpearman(r.configuration.name) : 0.0;
    rows.push_back(std::move(row));
  }
  j["results"] = std::move(rows);
  nlohmann::ordered_json sweep_rows = nlohmann::ordered_json::array();
  for (const auto& s : sweep) {
    sweep_rows.push_back({{"configuration", s.configuration},
                          {"fraction", s.fraction},
                          {"selected", s.selected},
                          {"mean_wer", s.mean_wer},
                          {"corpus_wer", s.corpus_wer}});
  }
  j["sweep"] = std::move(sweep_rows);
  nlohmann::ordered_json flip_rows = nlohmann::ordered_json::array();
  for (const auto& f : flips) {
    flip_rows.push_back({{"sample_id", f.sample_id},
                         {"tag", f.tag},
                         {"reference", f.reference},
                         {"text_without", f.text_without},
                         {"text_with", f.text_with},
                         {"cyclic_without", f.cyclic_without},
                         {"cyclic_with", f.cyclic_with},
                         {"flipped", f.text_without != f.text_with}});
  }
  j["flips"] = std::move(flip_rows);
  return j;
}

std::string SuiteReport::ResultsCsv() const {
  std::string out =
      "configuration,lambda_gpt,eot_gate,hallucination_penalty,truncation_penalty,"
      "corpus_wer,substitutions,deletions,insertions,ref_words,mean_alp,"
      "truncated,cyclic,failed,alp_wer_spearman\n";
  for (const auto& r : results) {
    const auto& b = r.configuration.beam;
    out += r.configuration.name + "," + Num(b.fusion.lambda_gpt) + "," +
           (b.fusion.eot_gate_enabled ? "on" : "off") + "," +
           (b.hallucination_penalty_enabled ? "on" : "off") + "," +
           (b.truncation_penalty_enabled ? "on" : "off") + "," +
           Num(r.corpus.wer) + "," + std::to_string(r.corpus.substitutions) + "," +
           std::to_string(r.corpus.deletions) + "," +
           std::to_string(r.corpus.insertions) + "," +
           std::to_string(r.corpus.ref_words) + "," + Num(r.mean_alp) + "," +
           std::to_string(r.truncated) + "," + std::to_string(r.cyclic) + "," +
           std::to_string(r.failed) + "," +
           Num(r.records.size() >= 2 ? AlpWerSpearman(r.configuration.name) : 0.0) +
           "\n";
  }
  return out;
}

std::string SuiteReport::SweepCsv() const {
  std::string out = "configuration,fraction,selected,mean_wer,corpus_wer\n";
  for (const auto& s : sweep) {
    out += s.configuration + "," + Num(s.fraction) + "," +
           std::to_string(s.selected) + "," + Num(s.mean_wer) + "," +
           Num(s.corpus_wer) + "\n";
  }
  return out;
}

std::string SuiteReport::FlipsCsv() const {
  std::string out = "sample_id,tag,reference,text_without,text_with,flipped\n";
  for (const auto& f : flips) {
    out += f.sample_id + "," + f.tag + "," + CsvField(f.reference) + "," +
           CsvField(f.text_without) + "," + CsvField(f.text_with) + "," +
           (f.text_without != f.text_with ? "yes" : "no") + "\n";
  }
  return out;
}

SuiteReport RunSuite(const Suite& suite, unsigned threads) {
  const Vocabulary& vocab = suite.vocab;
  std::vector<TokenSeq> corpus;
  corpus.reserve(suite.corpus.size());
  for (const auto& line : suite.corpus) corpus.push_back(Encode(line, vocab));
  const NGramLM lm = NGramLM::Train(corpus, vocab, suite.config.lm);

  SuiteReport report;
  report.suite = suite.config.name;
  report.lm_train_perplexity = Perplexity(lm, corpus);

  std::vector<AcousticScenario> scenarios;
  for (const auto& s : suite.samples) scenarios.push_back(s.scenario);

  for (const auto& configuration : suite.config.configurations) {
    ConfigurationResult r;
    r.configuration = configuration;
    BatchOptions options;
    options.threads = threads;
    r.records = BatchDecode(scenarios, lm, vocab, configuration.beam, options);
    double alp_sum = 0.0;
    int decoded = 0;
    for (std::size_t i = 0; i < r.records.size(); ++i) {
      const SampleRecord& rec = r.records[i];
      r.wers.push_back(Wer(suite.samples[i].reference, rec.text));
      if (rec.failed()) {
        ++r.failed;
        continue;
      }
      alp_sum += rec.alp;
      ++decoded;
      if (rec.truncated) ++r.truncated;
      if (rec.cycle.length > 0) ++r.cyclic;
    }
    r.corpus = CorpusWer(r.wers);
    r.mean_alp = decoded > 0 ? alp_sum / decoded : 0.0;

    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < r.records.size(); ++i) index[r.records[i].sample_id] = i;
    for (double fraction : suite.config.fractions) {
      const SelectionReport sel = SelectTopFraction(r.records, fraction);
      std::vector<WerBreakdown> subset;
      for (const auto& id : sel.selected_ids) subset.push_back(r.wers[index.at(id)]);
      report.sweep.push_back(SweepRow{configuration.name, fraction,
                                      sel.selected_count, MeanWer(subset),
                                      CorpusWer(subset).wer});
    }
    report.results.push_back(std::move(r));
  }

  if (!suite.config.compare_without.empty()) {
    const auto& without = report.Result(suite.config.compare_without);
    const auto& with = report.Result(suite.config.compare_with);
    for (std::size_t i = 0; i < suite.samples.size(); ++i) {
      report.flips.push_back(FlipRow{suite.samples[i].sample_id, suite.samples[i].tag,
                                     suite.samples[i].reference,
                                     without.records[i].text, with.records[i].text,
                                     without.records[i].cycle.length > 0,
                                     with.records[i].cycle.length > 0});
    }
  }
  return report;
}

void WriteSuiteOutputs(const Suite& suite, const SuiteReport& report,
                       const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  WriteFile(out_dir / "results.csv", report.ResultsCsv());
  WriteFile(out_dir / "sweep.csv", report.SweepCsv());
  WriteJson(out_dir / "results.json", report.ToJson());
  if (!report.flips.empty()) WriteFile(out_dir / "flips.csv", report.FlipsCsv());
  for (const auto& r : report.results) {
    WriteManifest(out_dir / ("decode_" + r.configuration.name + ".jsonl"), r.records);
    std::vector<nlohmann::ordered_json> lines;
    for (std::size_t i = 0; i < r.wers.size(); ++i) {
      nlohmann::ordered_json line;
      line["sample_id"] = suite.samples[i].sample_id;
      const auto wer = r.wers[i].ToJson();
      for (const auto& [k, v] : wer.items()) line[k] = v;
      lines.push_back(std::move(line));
    }
    WriteJsonLines(out_dir / ("wer_" + r.configuration.name + ".jsonl"), lines);
  }
}

}  // namespace plfuse
