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

#include "plfuse/commands.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <map>
#include <optional>
#include <set>

#include "CLI11.hpp"
#include "plfuse/beam.h"
#include "plfuse/errors.h"
#include "plfuse/io.h"
#include "plfuse/metrics.h"
#include "plfuse/scorers.h"
#include "plfuse/selection.h"
#include "plfuse/suite.h"

namespace plfuse {

namespace fs = std::filesystem;

namespace {

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string UtcTimestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Records what a command did. Only `started_at` and `duration_ms` vary
// between identical runs.
class RunManifest {
 public:
  explicit RunManifest(std::string command)
      : command_(std::move(command)),
        started_at_(UtcTimestamp()),
        start_(std::chrono::steady_clock::now()) {}

  nlohmann::ordered_json& config() { return config_; }
  void AddInput(const std::string& role, const std::string& path) {
    inputs_[role] = path;
  }
  void AddOutput(const std::string& role, const std::string& path) {
    outputs_[role] = path;
  }

  void Write(const fs::path& path) const {
    const auto elapsed = std::chrono::steady_clock::now() - start_;
    nlohmann::ordered_json j;
    j["command"] = command_;
    j["tool_version"] = PLFUSE_VERSION;
    j["config"] = config_;
    j["inputs"] = inputs_;
    j["outputs"] = outputs_;
    j["started_at"] = started_at_;
    j["duration_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
    WriteJson(path, j);
  }

 private:
  std::string command_;
  std::string started_at_;
  std::chrono::steady_clock::time_point start_;
  nlohmann::ordered_json config_ = nlohmann::ordered_json::object();
  nlohmann::ordered_json inputs_ = nlohmann::ordered_json::object();
  nlohmann::ordered_json outputs_ = nlohmann::ordered_json::object();
};

fs::path RunManifestPath(const std::string& primary_output) {
  return fs::path(primary_output + ".run.json");
}

// --------------------------------------------------------------------------

struct TrainLmArgs {
  std::string corpus;
  std::string vocab;
  int order = 2;
  double k = 1.0;
  bool append_eot = true;
  std::string out;
};

int TrainLm(const TrainLmArgs& a, std::ostream& out) {
  if (a.order < 1) throw UsageError("--order must be >= 1");
  if (!(a.k > 0.0)) throw UsageError("--k must be > 0");
  RunManifest run("train-lm");
  const Vocabulary vocab = Vocabulary::FromJson(ReadJson(a.vocab));
  const auto corpus = LoadCorpus(a.corpus, vocab);
  const NGramLM lm = NGramLM::Train(corpus, vocab, {a.order, a.k, a.append_eot});
  lm.Save(a.out);
  out << "trained order-" << a.order << " model on " << corpus.size()
      << " sequences; training perplexity " << Fixed(Perplexity(lm, corpus), 4)
      << "\n";
  run.config() = {{"order", a.order}, {"k", a.k}, {"append_eot", a.append_eot}};
  run.AddInput("corpus", a.corpus);
  run.AddInput("vocab", a.vocab);
  run.AddOutput("lm", a.out);
  run.Write(RunManifestPath(a.out));
  return kExitOk;
}

struct DecodeArgs {
  std::vector<std::string> scenarios;
  std::string scenario_dir;
  std::string vocab;
  std::string lm;
  int beam_size = 5;
  double lambda_gpt = 0.3;
  int max_tokens = 64;
  bool eot_gate = true;
  bool hallucination_penalty = true;
  bool truncation_penalty = true;
  unsigned threads = 0;
  std::string out;
  std::string details;
};

int Decode(DecodeArgs a, std::ostream& out) {
  BeamConfig config;
  config.beam_size = a.beam_size;
  config.max_tokens = a.max_tokens;
  config.fusion.lambda_gpt = a.lambda_gpt;
  config.fusion.eot_gate_enabled = a.eot_gate;
  config.hallucination_penalty_enabled = a.hallucination_penalty;
  config.truncation_penalty_enabled = a.truncation_penalty;
  config.Validate();

  if (!a.scenario_dir.empty()) {
    if (!fs::is_directory(a.scenario_dir)) {
      throw InputError("scenario directory not found: " + a.scenario_dir);
    }
    std::vector<std::string> found;
    for (const auto& entry : fs::directory_iterator(a.scenario_dir)) {
      if (entry.path().extension() == ".json") found.push_back(entry.path().string());
    }
    std::sort(found.begin(), found.end());
    a.scenarios.insert(a.scenarios.end(), found.begin(), found.end());
  }
  if (a.scenarios.empty()) throw UsageError("no scenarios given");

  RunManifest run("decode");
  const Vocabulary vocab = Vocabulary::FromJson(ReadJson(a.vocab));
  std::optional<NGramLM> ngram;
  if (!a.lm.empty()) ngram = NGramLM::Load(a.lm);
  const UniformScorer uniform(vocab.size());
  const Scorer& lm = ngram ? static_cast<const Scorer&>(*ngram) : uniform;

  // Unparsable scenario files become flagged records in their slot.
  std::vector<std::optional<SampleRecord>> slots(a.scenarios.size());
  std::vector<AcousticScenario> loaded;
  std::vector<std::string> refs;
  std::vector<std::size_t> positions;
  for (std::size_t i = 0; i < a.scenarios.size(); ++i) {
    try {
      loaded.push_back(AcousticScenario::Load(a.scenarios[i]));
      refs.push_back(a.scenarios[i]);
      positions.push_back(i);
    } catch (const InputError& e) {
      SampleRecord failed;
      failed.sample_id = fs::path(a.scenarios[i]).stem().string();
      failed.scenario_ref = a.scenarios[i];
      failed.alp = std::nan("");
      failed.error = e.what();
      slots[i] = std::move(failed);
    }
  }
  if (!loaded.empty()) {
    BatchOptions options;
    options.threads = a.threads;
    options.scenario_refs = refs;
    auto decoded = BatchDecode(loaded, lm, vocab, config, options);
    for (std::size_t j = 0; j < decoded.size(); ++j) {
      slots[positions[j]] = std::move(decoded[j]);
    }
  }
  std::vector<SampleRecord> records;
  for (auto& s : slots) records.push_back(std::move(*s));
  WriteManifest(a.out, records);

  if (!a.details.empty()) {
    // Re-decoding keeps BatchDecode's record-only contract; details are rare.
    std::vector<nlohmann::ordered_json> lines;
    for (const auto& s : loaded) {
      try {
        const TableScorer acoustic(s);
        auto j = BeamSearch(acoustic, lm, vocab, config).ToJson();
        j["sample_id"] = s.id;
        lines.push_back(std::move(j));
      } catch (const std::exception& e) {
        lines.push_back({{"sample_id", s.id}, {"error", e.what()}});
      }
    }
    WriteJsonLines(a.details, lines);
  }

  int failed = 0, truncated = 0, cyclic = 0;
  double alp_sum = 0.0;
  for (const auto& r : records) {
    if (r.failed()) {
      ++failed;
      continue;
    }
    alp_sum += r.alp;
    truncated += r.truncated ? 1 : 0;
    cyclic += r.cycle.length > 0 ? 1 : 0;
  }
  const int ok = static_cast<int>(records.size()) - failed;
  out << "decoded " << ok << "/" << records.size() << " samples; mean ALP "
      << (ok > 0 ? Fixed(alp_sum / ok, 6) : std::string("n/a")) << "; truncated "
      << truncated << "; cyclic " << cyclic << "; failed " << failed << "\n";

  run.config() = config.ToJson();
  run.config()["threads"] = a.threads;
  run.config()["lm"] = a.lm.empty() ? "uniform" : "ngram";
  run.AddInput("vocab", a.vocab);
  if (!a.lm.empty()) run.AddInput("lm", a.lm);
  for (std::size_t i = 0; i < a.scenarios.size(); ++i) {
    run.AddInput("scenario[" + std::to_string(i) + "]", a.scenarios[i]);
  }
  run.AddOutput("manifest", a.out);
  if (!a.details.empty()) run.AddOutput("details", a.details);
  run.Write(RunManifestPath(a.out));
  return ok == 0 ? kExitInput : kExitOk;
}

struct EvalArgs {
  std::string ref;
  std::string hyp;
  std::string out;
  std::string summary;
};

std::vector<std::pair<std::string, std::string>> ReadIdText(const fs::path& path) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& j : ReadJsonLines(path)) {
    try {
      out.emplace_back(j.at("sample_id").get<std::string>(),
                       j.at("text").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw InputError(path.string() + ": " + e.what());
    }
  }
  return out;
}

int EvalWer(const EvalArgs& a, std::ostream& out) {
  RunManifest run("eval-wer");
  const auto refs = ReadIdText(a.ref);
  const auto hyps = ReadIdText(a.hyp);
  std::map<std::string, std::string> hyp_text;
  for (const auto& [id, text] : hyps) {
    if (!hyp_text.emplace(id, text).second) {
      throw InputError("duplicate sample_id in hypothesis manifest: " + id);
    }
  }
  std::set<std::string> ref_ids;
  std::vector<std::string> offenders;
  for (const auto& [id, text] : refs) {
    if (!ref_ids.insert(id).second) {
      throw InputError("duplicate sample_id in reference manifest: " + id);
    }
    if (!hyp_text.count(id)) offenders.push_back(id + " (missing hypothesis)");
  }
  for (const auto& [id, text] : hyps) {
    if (!ref_ids.count(id)) offenders.push_back(id + " (missing reference)");
  }
  if (!offenders.empty()) {
    std::string msg = "sample id mismatch:";
    for (const auto& o : offenders) msg += " " + o;
    throw InputError(msg);
  }

  std::vector<WerBreakdown> wers;
  std::vector<nlohmann::ordered_json> lines;
  for (const auto& [id, text] : refs) {
    WerBreakdown w;
    try {
      w = Wer(text, hyp_text.at(id));
    } catch (const InputError& e) {
      throw InputError("sample " + id + ": " + e.what());
    }
    nlohmann::ordered_json line;
    line["sample_id"] = id;
    const auto breakdown = w.ToJson();
    for (const auto& [k, v] : breakdown.items()) line[k] = v;
    lines.push_back(std::move(line));
    wers.push_back(w);
  }
  if (wers.empty()) throw InputError("reference manifest is empty");
  const WerBreakdown corpus = CorpusWer(wers);
  WriteJsonLines(a.out, lines);
  const std::string summary = a.summary.empty() ? a.out + ".corpus.json" : a.summary;
  nlohmann::ordered_json s;
  s["samples"] = wers.size();
  s["corpus"] = corpus.ToJson();
  WriteJson(summary, s);
  out << "corpus WER " << Fixed(corpus.wer, 6) << " (" << corpus.errors() << "/"
      << corpus.ref_words << ")\n";

  run.AddInput("reference", a.ref);
  run.AddInput("hypothesis", a.hyp);
  run.AddOutput("per_sample", a.out);
  run.AddOutput("corpus", summary);
  run.Write(RunManifestPath(a.out));
  return kExitOk;
}

struct SelectArgs {
  std::string manifest;
  double fraction = 0.2;
  std::string out_report;
  std::string out_manifest;
};

int Select(const SelectArgs& a, std::ostream& out) {
  if (!(a.fraction > 0.0 && a.fraction <= 1.0)) {
    throw UsageError("--fraction must be in (0, 1]");
  }
  RunManifest run("select");
  const auto records = ReadManifest(a.manifest);
  const SelectionReport report = SelectTopFraction(records, a.fraction);
  WriteJson(a.out_report, report.ToJson());
  WriteManifest(a.out_manifest, FilterSelected(records, report));
  out << "selected " << report.selected_count << "/" << report.total
      << " samples; ALP threshold " << Fixed(report.alp_threshold, 6) << "\n";
  run.config() = {{"fraction", a.fraction}};
  run.AddInput("manifest", a.manifest);
  run.AddOutput("report", a.out_report);
  run.AddOutput("manifest", a.out_manifest);
  run.Write(RunManifestPath(a.out_report));
  return kExitOk;
}

struct PplArgs {
  std::string lm;
  std::string corpus;
  std::string vocab;
};

int Ppl(const PplArgs& a, std::ostream& out) {
  const Vocabulary vocab = Vocabulary::FromJson(ReadJson(a.vocab));
  const NGramLM lm = NGramLM::Load(a.lm);
  if (lm.VocabSize() != vocab.size()) {
    throw VocabMismatchError("language model and vocabulary sizes differ");
  }
  out << Fixed(Perplexity(lm, LoadCorpus(a.corpus, vocab)), 4) << "\n";
  return kExitOk;
}

struct SuiteArgs {
  std::string suite_dir;
  std::string out_dir;
  unsigned threads = 0;
};

int RunSuiteCommand(const SuiteArgs& a, std::ostream& out) {
  RunManifest run("run-suite");
  const Suite suite = Suite::Load(a.suite_dir);
  const SuiteReport report = RunSuite(suite, a.threads);
  WriteSuiteOutputs(suite, report, a.out_dir);
  out << "suite " << report.suite << ": " << suite.samples.size()
      << " samples, LM training perplexity "
      << Fixed(report.lm_train_perplexity, 4) << "\n";
  for (const auto& r : report.results) {
    out << "  " << r.configuration.name << ": corpus WER "
        << Fixed(r.corpus.wer, 4) << ", mean ALP " << Fixed(r.mean_alp, 4)
        << "\n";
  }
  run.config() = suite.config.ToJson();
  run.config()["threads"] = a.threads;
  run.AddInput("suite", a.suite_dir);
  run.AddOutput("dir", a.out_dir);
  run.Write(fs::path(a.out_dir) / "run.json");
  return kExitOk;
}

struct GenerateArgs {
  std::string kind;
  std::uint64_t seed = 0;
  std::string out_dir;
};

int GenerateSuiteCommand(const GenerateArgs& a, std::ostream& out) {
  RunManifest run("generate-suite");
  const Suite suite = GenerateSuite(a.kind, a.seed);
  suite.Save(a.out_dir);
  out << "wrote " << a.kind << " suite (" << suite.samples.size()
      << " samples) to " << a.out_dir << "\n";
  run.config() = {{"kind", a.kind}, {"seed", a.seed}};
  run.AddOutput("dir", a.out_dir);
  run.Write(fs::path(a.out_dir) / "generate.run.json");
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"plfuse: LM-fused beam search and ALP-based pseudo-label selection", "plfuse"};
  app.require_subcommand(1);
  app.set_version_flag("--version", PLFUSE_VERSION);

  TrainLmArgs train;
  auto* train_cmd = app.add_subcommand("train-lm", "Train an add-k n-gram LM");
  train_cmd->add_option("--corpus", train.corpus, "Corpus, one sequence per line")->required();
  train_cmd->add_option("--vocab", train.vocab, "Vocabulary JSON")->required();
  train_cmd->add_option("--order", train.order, "N-gram order")->capture_default_str();
  train_cmd->add_option("--k", train.k, "Add-k smoothing constant")->capture_default_str();
  train_cmd->add_flag("--eot,!--no-eot", train.append_eot,
                      "Append EOT to each training sequence");
  train_cmd->add_option("--out", train.out, "Output model JSON")->required();

  DecodeArgs decode;
  auto* decode_cmd = app.add_subcommand("decode", "Beam-search decode scenarios");
  // Options for a subcommand live under its own section, e.g. [decode].
  app.set_config("--config", "", "TOML/INI file with option defaults");
  decode_cmd->fallthrough();
  decode_cmd->add_option("--scenario", decode.scenarios, "Scenario JSON (repeatable)");
  decode_cmd->add_option("--scenario-dir", decode.scenario_dir,
                         "Directory of scenario JSON files");
  decode_cmd->add_option("--vocab", decode.vocab, "Vocabulary JSON")->required();
  decode_cmd->add_option("--lm", decode.lm, "N-gram LM JSON (uniform if omitted)");
  decode_cmd->add_option("--beam-size", decode.beam_size)->capture_default_str();
  decode_cmd->add_option("--lambda-gpt", decode.lambda_gpt, "LM fusion weight")
      ->capture_default_str();
  decode_cmd->add_option("--max-tokens", decode.max_tokens)->capture_default_str();
  decode_cmd->add_flag("--eot-gate,!--no-eot-gate", decode.eot_gate,
                       "Drop the LM on steps whose acoustic argmax is EOT");
  decode_cmd->add_flag("--hallucination-penalty,!--no-hallucination-penalty",
                       decode.hallucination_penalty, "Penalize repeated runs");
  decode_cmd->add_flag("--truncation-penalty,!--no-truncation-penalty",
                       decode.truncation_penalty, "Penalize truncated decodes");
  decode_cmd->add_option("--threads", decode.threads, "Worker threads (0 = auto)");
  decode_cmd->add_option("--out", decode.out, "Output manifest JSONL")->required();
  decode_cmd->add_option("--details", decode.details,
                         "Optional JSONL with every candidate per sample");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval-wer", "Score a manifest against references");
  eval_cmd->add_option("--ref", eval.ref, "Reference manifest JSONL")->required();
  eval_cmd->add_option("--hyp", eval.hyp, "Hypothesis manifest JSONL")->required();
  eval_cmd->add_option("--out", eval.out, "Per-sample WER JSONL")->required();
  eval_cmd->add_option("--summary", eval.summary,
                       "Corpus WER JSON (default: <out>.corpus.json)");

  SelectArgs select;
  auto* select_cmd = app.add_subcommand("select", "Keep the top ALP fraction");
  select_cmd->add_option("--manifest", select.manifest, "Decode manifest JSONL")->required();
  select_cmd->add_option("--fraction", select.fraction, "Fraction in (0, 1]")
      ->capture_default_str();
  select_cmd->add_option("--out-report", select.out_report, "Selection report JSON")
      ->required();
  select_cmd->add_option("--out-manifest", select.out_manifest, "Filtered manifest JSONL")
      ->required();

  PplArgs ppl;
  auto* ppl_cmd = app.add_subcommand("ppl", "Perplexity of an LM on a corpus");
  ppl_cmd->add_option("--lm", ppl.lm, "N-gram LM JSON")->required();
  ppl_cmd->add_option("--corpus", ppl.corpus, "Corpus, one sequence per line")->required();
  ppl_cmd->add_option("--vocab", ppl.vocab, "Vocabulary JSON")->required();

  SuiteArgs suite;
  auto* suite_cmd = app.add_subcommand("run-suite", "Run a scenario suite end to end");
  suite_cmd->add_option("--suite-dir", suite.suite_dir)->required();
  suite_cmd->add_option("--out-dir", suite.out_dir)->required();
  suite_cmd->add_option("--threads", suite.threads, "Worker threads (0 = auto)");

  GenerateArgs gen;
  auto* gen_cmd = app.add_subcommand("generate-suite", "Write a synthetic suite");
  gen_cmd->add_option("--kind", gen.kind)->required()->check(CLI::IsMember(SuiteKinds()));
  gen_cmd->add_option("--seed", gen.seed)->capture_default_str();
  gen_cmd->add_option("--out-dir", gen.out_dir)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << PLFUSE_VERSION << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*train_cmd) return TrainLm(train, out);
    if (*decode_cmd) return Decode(decode, out);
    if (*eval_cmd) return EvalWer(eval, out);
    if (*select_cmd) return Select(select, out);
    if (*ppl_cmd) return Ppl(ppl, out);
    if (*suite_cmd) return RunSuiteCommand(suite, out);
    if (*gen_cmd) return GenerateSuiteCommand(gen, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace plfuse
