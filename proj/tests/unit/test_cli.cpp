// tests/unit/test_cli.cpp

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

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "alsed/experiment.hpp"
#include "helpers.hpp"

using namespace alsed;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run(const std::string& args, const std::filesystem::path& scratch) {
  const auto out = scratch / "stdout.txt", err = scratch / "stderr.txt";
  const std::string cmd = std::string(ALSED_CLI_PATH) + " " + args + " >" + out.string() + " 2>" +
                          err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(out), read_file(err)};
}

ExperimentSpec tiny_experiment() {
  ExperimentSpec spec = experiment_preset("exp_c");
  spec.train_corpus.n_recordings = 4;
  spec.train_corpus.recording_len_s = 8.0;
  spec.train_corpus.events_per_minute = 15.0;
  spec.test_corpus = spec.train_corpus;
  spec.test_corpus.seed += 1;
  spec.test_corpus.n_recordings = 2;
  spec.test_corpus.id_prefix = "test";
  spec.base.embedding.dim = 16;
  spec.base.hidden = 8;
  spec.base.training.max_epochs = 4;
  spec.base.training.min_epochs = 1;
  spec.base.batch_fraction = 0.15;
  spec.base.checkpoints = {0.2, 0.5};
  spec.seeds = {4};
  return spec;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit 2 with help on stderr") {
  test::TempDir dir("cli");
  const auto bogus = run("bogus", dir.path());
  CHECK(bogus.code == 2);
  CHECK(bogus.err.find("generate") != std::string::npos);
  CHECK(run("simulate", dir.path()).code == 2);
  CHECK(run("", dir.path()).code == 2);
}

TEST_CASE("simulate twice gives identical files and report matches summary") {
  test::TempDir dir("cli_sim");
  const auto cfg = dir.path() / "exp.json";
  std::ofstream(cfg) << to_json(tiny_experiment()).dump(2);
  const auto a = run("simulate --quiet --config " + cfg.string() + " --out " +
                         (dir.path() / "a").string(), dir.path());
  REQUIRE(a.code == 0);
  const auto b = run("simulate --quiet --config " + cfg.string() + " --out " +
                         (dir.path() / "b").string(), dir.path());
  REQUIRE(b.code == 0);
  for (const char* f : {"metrics.csv", "runs.csv", "summary.csv", "experiment.json",
                        "traces/system5_seed4.csv", "traces/system7_seed4.csv"})
    CHECK(read_file(dir.path() / "a" / f) == read_file(dir.path() / "b" / f));

  const auto rep = run("report --suite " + (dir.path() / "a").string(), dir.path());
  REQUIRE(rep.code == 0);
  CHECK(rep.out == read_file(dir.path() / "a" / "summary.csv"));
}

TEST_CASE("generate, prepare, evaluate") {
  test::TempDir dir("cli_gen");
  const auto spec = tiny_experiment();
  const auto cfg = dir.path() / "exp.json";
  std::ofstream(cfg) << to_json(spec).dump(2);
  REQUIRE(run("generate --config " + cfg.string() + " --seed 9 --out " +
                  (dir.path() / "corpus").string(), dir.path()).code == 0);
  const auto manifest = read_corpus_manifest(dir.path() / "corpus" / "manifest.json");
  CHECK(manifest.recordings.size() == 6);
  REQUIRE(run("prepare --corpus " + (dir.path() / "corpus").string() + " --config " +
                  cfg.string() + " --system 7 --out " + (dir.path() / "prep").string(), dir.path())
              .code == 0);
  std::ifstream table(dir.path() / "prep" / "segments.csv");
  CHECK(read_segment_table(table).size() >= 16);  // 4 x 8 s in 2 s windows

  const auto corpora = load_prepared(dir.path() / "prep");
  SedModel<float> m(SedDims{2, 16, 4, 3}, corpora.test.class_names);
  m.params.class_bias.setConstant(-20.0f);
  write_file_atomic(dir.path() / "m.sedm", encode_checkpoint(m));
  const auto ev = run("evaluate --model " + (dir.path() / "m.sedm").string() + " --prepared " +
                          (dir.path() / "prep").string(), dir.path());
  REQUIRE(ev.code == 0);
  const auto er = evaluate_model(m, corpora.test);
  std::ostringstream expect;
  expect << "S,D,I,N,ER\n0," << er.deletions << ",0," << er.reference_active << ",";
  CHECK(ev.out.rfind(expect.str(), 0) == 0);
  CHECK(run("evaluate --model /nonexistent --prepared " + (dir.path() / "prep").string(),
            dir.path()).code != 0);
}

}  // TEST_SUITE
