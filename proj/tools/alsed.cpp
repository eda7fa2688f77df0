// tools/alsed.cpp

// Copyright 2026  The alsed Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: generate, prepare, simulate, evaluate, serve, report.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "alsed/binary_io.hpp"
#include "alsed/corpus.hpp"
#include "alsed/error.hpp"
#include "alsed/experiment.hpp"
#include "alsed/service.hpp"
#include "alsed/text_io.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace alsed;

namespace {

bool is_preset(const std::string& name) {
  for (const auto& n : experiment_preset_names())
    if (n == name) return true;
  return false;
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

/// An experiment preset name or a JSON experiment document.
ExperimentSpec load_experiment(const std::string& config) {
  if (is_preset(config)) return experiment_preset(config);
  return experiment_from_json(read_json(config));
}

/// A project config: experiment preset name (its base config), or a JSON
/// document that is either a project config or an experiment with "project".
ProjectConfig load_project_config(const std::string& config, int system) {
  ProjectConfig c;
  if (is_preset(config)) {
    c = experiment_preset(config).base;
  } else {
    const json doc = read_json(config);
    c = doc.contains("project") || doc.contains("preset") ? experiment_from_json(doc).base
                                                          : project_config_from_json(doc);
  }
  return system > 0 ? apply_system(c, system) : c;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file_atomic(path, text);
}

int cmd_generate(const std::string& config, std::optional<std::uint64_t> seed,
                 const fs::path& out) {
  GeneratorSpec train, test;
  if (config == "rare" || config == "dense") {
    const auto spec = experiment_preset(config == "rare" ? "exp_b" : "exp_a1_dense");
    train = spec.train_corpus;
    test = spec.test_corpus;
  } else if (is_preset(config)) {
    const auto spec = experiment_preset(config);
    train = spec.train_corpus;
    test = spec.test_corpus;
  } else {
    const json doc = read_json(config);
    if (doc.contains("train_corpus") || doc.contains("preset")) {
      const auto spec = experiment_from_json(doc);
      train = spec.train_corpus;
      test = spec.test_corpus;
    } else if (doc.contains("train")) {
      train = generator_spec_from_json(doc.at("train"));
      if (doc.contains("test")) test = generator_spec_from_json(doc.at("test"));
      else test.n_recordings = 0;
    } else {
      train = generator_spec_from_json(doc);
      test.n_recordings = 0;
    }
  }
  if (seed) {
    train.seed = *seed;
    test.seed = *seed + 1;
  }
  const auto train_corpus = generate(train);
  const auto test_corpus = test.n_recordings > 0 ? generate(test) : SynthCorpus{};
  const auto manifest = write_synth_corpus(out, train_corpus, test_corpus);
  write_text(out / "generator.json", json{{"train", to_json(train)}, {"test", to_json(test)}}.dump(2) + "\n");
  std::cout << manifest.recordings.size() << " recordings written to " << out.string() << "\n";
  return 0;
}

int cmd_prepare(const fs::path& corpus, const std::string& config, int system, bool keep_features,
                const fs::path& out) {
  const fs::path manifest_path = fs::is_directory(corpus) ? corpus / "manifest.json" : corpus;
  auto manifest = read_corpus_manifest(manifest_path);
  const fs::path base = fs::absolute(manifest_path).parent_path();
  const ProjectConfig cfg = load_project_config(config, system);
  const auto train = load_corpus_audio(manifest, base, RecordingRole::kTrain);
  const auto test = load_corpus_audio(manifest, base, RecordingRole::kTest);
  for (auto& r : manifest.recordings)
    for (const auto* clips : {&train, &test})
      for (const auto& c : *clips)
        if (c.recording_id == r.recording_id) r.duration_s = c.duration_s();
  const auto corpora = prepare_corpora(train, test, manifest.class_names, manifest.truth,
                                       cfg.features, cfg.embedding, keep_features);
  write_prepared(out, manifest, base, corpora);
  const auto candidates = build_candidates(corpora.train, cfg.segmentation,
                                           cfg.unit == AnnotationUnit::kRecording);
  std::ostringstream table;
  write_segment_table(table, candidates);
  write_text(out / "segments.csv", table.str());
  std::cout << corpora.train.recordings.size() << " train and " << corpora.test.recordings.size()
            << " test recordings, " << candidates.size() << " candidate segments\n";
  return 0;
}

int cmd_simulate(const std::string& config, std::optional<std::uint64_t> seed,
                 const std::string& systems, const fs::path& corpus, const fs::path& out,
                 bool quiet) {
  ExperimentSpec spec = load_experiment(config);
  if (seed) spec.seeds = {*seed};
  if (!systems.empty()) {
    spec.systems.clear();
    for (const auto& s : split_csv_line(systems)) spec.systems.push_back(std::stoi(s));
  }
  std::ostream* log = quiet ? nullptr : &std::cerr;
  const SuiteResult suite = corpus.empty()
                                ? run_experiment_suite(spec, log)
                                : run_experiment_suite(spec, load_prepared(corpus), log);
  write_suite(out, suite);
  write_text(out / "experiment.json", to_json(spec).dump(2) + "\n");
  std::cout << "results written to " << out.string() << "\n";
  return 0;
}

int cmd_evaluate(const fs::path& model_path, const fs::path& prepared, const std::string& role) {
  const auto model = decode_checkpoint(read_file(model_path));
  const auto corpora = load_prepared(prepared);
  const auto& corpus = recording_role_from_string(role) == RecordingRole::kTest ? corpora.test
                                                                                 : corpora.train;
  const ErReport er = evaluate_model(model, corpus);
  std::cout << "S,D,I,N,ER\n"
            << er.substitutions << "," << er.deletions << "," << er.insertions << ","
            << er.reference_active << "," << format_double(er.error_rate()) << "\n";
  return 0;
}

int cmd_report(const fs::path& suite, const fs::path& out) {
  std::ifstream in(suite / "metrics.csv");
  if (!in) throw InputError("no metrics.csv in " + suite.string());
  const auto rows = summarize(read_metrics_csv(in));
  if (out.empty()) {
    write_summary_csv(std::cout, rows);
  } else {
    std::ostringstream s;
    write_summary_csv(s, rows);
    write_text(out, s.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active learning for sound event detection"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;

  auto* gen = app.add_subcommand("generate", "Write a synthetic corpus (WAV + manifest)");
  gen->add_option("--config", config, "rare, dense, an experiment preset or a JSON file")
      ->required();
  gen->add_option("--seed", seed, "Training corpus seed (test uses seed + 1)");
  gen->add_option("--out", out, "Output directory")->required();

  std::string corpus;
  int system = 0;
  bool keep_features = false;
  auto* prep = app.add_subcommand("prepare", "Compute features, embeddings and segments");
  prep->add_option("--corpus", corpus, "Corpus directory or manifest")->required();
  prep->add_option("--config", config, "Experiment preset or JSON config")->required();
  prep->add_option("--system", system, "Apply a system preset (1-7)");
  prep->add_flag("--keep-features", keep_features, "Also store log-mel features");
  prep->add_option("--out", out, "Output directory")->required();

  std::string systems;
  bool quiet = false;
  auto* sim = app.add_subcommand("simulate", "Run simulated active-learning experiments");
  sim->add_option("--config", config, "Experiment preset or JSON file")->required();
  sim->add_option("--seed", seed, "Run only this seed");
  sim->add_option("--systems", systems, "Comma-separated systems");
  sim->add_option("--corpus", corpus, "Prepared corpus directory instead of generating");
  sim->add_option("--out", out, "Results directory")->required();
  sim->add_flag("--quiet", quiet, "No per-checkpoint log");

  std::string model, role = "test";
  auto* eval = app.add_subcommand("evaluate", "Segment-based error rate of a model checkpoint");
  eval->add_option("--model", model, "SEDM checkpoint")->required();
  eval->add_option("--prepared", corpus, "Prepared corpus directory")->required();
  eval->add_option("--role", role, "train or test");

  std::string root = "projects", host = "127.0.0.1";
  int port = 8080;
  auto* srv = app.add_subcommand("serve", "Run the annotation service");
  srv->add_option("--root", root, "Project storage directory");
  srv->add_option("--host", host, "Listen address");
  srv->add_option("--port", port, "Port (0 picks a free one)");

  std::string suite;
  auto* rep = app.add_subcommand("report", "ER-vs-budget summary of a finished suite");
  rep->add_option("--suite", suite, "Directory written by simulate")->required();
  rep->add_option("--out", out, "Output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*gen) return cmd_generate(config, seed, out);
    if (*prep) return cmd_prepare(corpus, config, system, keep_features, out);
    if (*sim) return cmd_simulate(config, seed, systems, corpus, out, quiet);
    if (*eval) return cmd_evaluate(model, corpus, role);
    if (*rep) return cmd_report(suite, out);
    if (*srv) {
      ProjectStore store(root);
      return serve(store, host, port, [&](int bound) {
        std::cout << "listening on " << host << ":" << bound << std::endl;
      });
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
