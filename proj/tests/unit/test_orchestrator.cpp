// tests/unit/test_orchestrator.cpp

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

#include <fstream>
#include <set>
#include <sstream>

#include "alsed/error.hpp"
#include "alsed/experiment.hpp"
#include "alsed/text_io.hpp"
#include "helpers.hpp"

using namespace alsed;

namespace {

ExperimentSpec small_experiment() {
  ExperimentSpec spec = experiment_preset("exp_b");
  spec.train_corpus.n_recordings = 6;
  spec.train_corpus.recording_len_s = 10.0;
  spec.train_corpus.events_per_minute = 12.0;
  spec.test_corpus = spec.train_corpus;
  spec.test_corpus.seed = spec.train_corpus.seed + 1;
  spec.test_corpus.n_recordings = 3;
  spec.test_corpus.id_prefix = "test";
  spec.base.embedding.dim = 16;
  spec.base.hidden = 8;
  spec.base.training.max_epochs = 8;
  spec.base.training.min_epochs = 2;
  spec.base.batch_fraction = 0.1;
  spec.base.checkpoints = {0.1, 0.3, 1.0};
  spec.systems = {1, 5};
  spec.seeds = {1, 2};
  return spec;
}

const PreparedCorpora& small_corpora() {
  static const PreparedCorpora corpora = [] {
    const auto spec = small_experiment();
    const auto tr = generate(spec.train_corpus), te = generate(spec.test_corpus);
    GroundTruth truth = tr.truth;
    truth.events.insert(te.truth.events.begin(), te.truth.events.end());
    return prepare_corpora(tr.clips, te.clips, tr.class_names, truth, spec.base.features,
                           spec.base.embedding);
  }();
  return corpora;
}

std::shared_ptr<const PreparedCorpus> train_ptr() {
  return std::shared_ptr<const PreparedCorpus>(&small_corpora().train, [](auto*) {});
}

std::vector<int> traced_ids(const std::string& trace) {
  std::istringstream in(trace);
  std::string line;
  std::getline(in, line);
  std::vector<int> ids;
  while (std::getline(in, line)) ids.push_back(std::stoi(split_csv_line(line)[2]));
  return ids;
}

}  // namespace

TEST_SUITE("orchestrator") {

TEST_CASE("system presets") {
  ProjectConfig base;
  CHECK(apply_system(base, 1).strategy == Strategy::kRandom);
  CHECK(apply_system(base, 2).input == TrainingInput::kSegmentsOnly);
  CHECK(apply_system(base, 3).labels == LabelMode::kStrong);
  CHECK(apply_system(base, 4).unit == AnnotationUnit::kRecording);
  CHECK(apply_system(base, 4).labels == LabelMode::kStrong);
  CHECK(apply_system(base, 5).strategy == Strategy::kMfft);
  CHECK(apply_system(base, 6).strategy == Strategy::kUncertainty);
  CHECK(apply_system(base, 7).segmentation.mode == SegmentationMode::kFixed);
  CHECK(apply_system(base, 7).segmentation.fixed_length_s == 2.0);
  CHECK_THROWS_AS(apply_system(base, 8), InputError);
  CHECK(experiment_preset("exp_b").systems == std::vector<int>{1, 5, 6});
  CHECK(experiment_preset("exp_c").systems == std::vector<int>{5, 7});
  CHECK_THROWS_AS(experiment_preset("nope"), NotFoundError);
}

TEST_CASE("config validation and JSON round trip") {
  ProjectConfig c;
  c.checkpoints = {0.5, 0.2};
  CHECK_THROWS_AS(c.validate(), InputError);
  c.checkpoints = {0.0, 1.0};
  CHECK_THROWS_AS(c.validate(), InputError);
  c = ProjectConfig{};
  c.batch_fraction = 0.0;
  CHECK_THROWS_AS(c.validate(), InputError);

  auto spec = small_experiment();
  const auto back = experiment_from_json(to_json(spec));
  CHECK(to_json(back) == to_json(spec));
  const auto cfg = project_config_from_json(nlohmann::json{{"model", {{"hidden", 12}}}}, spec.base);
  CHECK(cfg.hidden == 12);
  CHECK(cfg.embedding.dim == 16);
}

TEST_CASE("session budget accounting and batch lifecycle") {
  auto cfg = apply_system(small_experiment().base, 1);
  ActiveLearningSession s(cfg, train_ptr());
  CHECK(s.total_duration_s() == doctest::Approx(60.0));
  const auto batch = s.next_batch();
  double sum = 0.0;
  for (const auto& p : batch.picks) sum += s.candidates()[p.segment_id].duration_s();
  CHECK(sum >= s.quota().seconds);
  CHECK(sum - s.candidates()[batch.picks.back().segment_id].duration_s() < s.quota().seconds);
  CHECK_THROWS_AS(s.next_batch(), ConflictError);
  CHECK(!s.batch_complete());
  const int first = batch.picks.front().segment_id;
  s.annotate(first, {});
  CHECK_THROWS_AS(s.annotate(first, {}), ConflictError);
  CHECK_THROWS_AS(s.annotate(-5, {}), NotFoundError);
  for (std::size_t i = 1; i < batch.picks.size(); ++i) s.annotate(batch.picks[i].segment_id, {});
  CHECK(s.batch_complete());
  s.commit_batch();
  CHECK(s.rounds() == 1);
  CHECK(s.labeled_duration_s() == doctest::Approx(sum));
  CHECK(s.state().consistent(static_cast<int>(s.candidates().size())));

  const auto next = s.next_batch();
  s.abandon_batch();
  CHECK(!s.batch_open());
  CHECK(s.rounds() == 2);  // an abandoned batch still advances the iteration
  CHECK(s.state().unlabeled.count(next.picks.front().segment_id) == 1);
}

TEST_CASE("full budget with random selection annotates every candidate once") {
  auto cfg = apply_system(small_experiment().base, 1);
  cfg.checkpoints = {1.0};
  cfg.batch_fraction = 0.25;
  const auto run = run_active_learning(cfg, train_ptr(), small_corpora().test);
  const auto ids = traced_ids(run.trace_csv);
  CHECK(static_cast<int>(ids.size()) == run.candidates);
  CHECK(std::set<int>(ids.begin(), ids.end()).size() == ids.size());
  REQUIRE(run.checkpoints.size() == 1);
  CHECK(run.checkpoints[0].labeled_fraction == doctest::Approx(1.0));
  CHECK(run.checkpoints[0].labeled_duration_s == doctest::Approx(60.0));
}

TEST_CASE("systems 1 and 5 share segmentation and differ only in selection") {
  auto base = small_experiment().base;
  ActiveLearningSession a(apply_system(base, 1), train_ptr()), b(apply_system(base, 5), train_ptr());
  REQUIRE(a.candidates().size() == b.candidates().size());
  for (std::size_t i = 0; i < a.candidates().size(); ++i) {
    CHECK(a.candidates()[i].start_frame == b.candidates()[i].start_frame);
    CHECK(a.candidates()[i].end_frame == b.candidates()[i].end_frame);
  }
  const auto r1 = run_active_learning(apply_system(base, 1), train_ptr(), small_corpora().test);
  const auto r5 = run_active_learning(apply_system(base, 5), train_ptr(), small_corpora().test);
  CHECK(r1.candidates == r5.candidates);
  CHECK(r1.corpus_positive_fraction == r5.corpus_positive_fraction);
  CHECK(r1.trace_csv != r5.trace_csv);
  for (const auto* r : {&r1, &r5}) {
    REQUIRE(r->checkpoints.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(r->checkpoints[i].labeled_fraction >= r->checkpoints[i].budget_fraction - 1e-9);
      if (i > 0) CHECK(r->checkpoints[i].labeled_fraction >= r->checkpoints[i - 1].labeled_fraction);
    }
  }
}

TEST_CASE("every-batch refresh reports one round per batch") {
  auto cfg = apply_system(small_experiment().base, 5);
  cfg.refresh = RefreshMode::kEveryBatch;
  cfg.max_rounds = 3;
  const auto run = run_active_learning(cfg, train_ptr(), small_corpora().test);
  REQUIRE(run.rounds.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(run.rounds[i].round == i + 1);
}

TEST_CASE("suites are deterministic and the report matches the per-run metrics") {
  const auto spec = small_experiment();
  test::TempDir dir("suite");
  const auto a = run_experiment_suite(spec, small_corpora());
  const auto b = run_experiment_suite(spec, small_corpora());
  write_suite(dir.path() / "a", a);
  write_suite(dir.path() / "b", b);
  for (const char* f : {"metrics.csv", "runs.csv", "summary.csv", "traces/system5_seed2.csv"})
    CHECK(read_file(dir.path() / "a" / f) == read_file(dir.path() / "b" / f));

  std::ifstream in(dir.path() / "a" / "metrics.csv");
  const auto rows = read_metrics_csv(in);
  CHECK(rows.size() == 2 * 2 * 3);
  const auto summary = summarize(rows);
  CHECK(summary.size() == 2 * 3);
  for (const auto& s : summary) {
    std::vector<double> ers;
    for (const auto& run : a.runs)
      if (run.system == s.system)
        for (const auto& cp : run.checkpoints)
          if (cp.budget_fraction == s.budget_fraction && !std::isnan(cp.er.error_rate()))
            ers.push_back(cp.er.error_rate());
    std::sort(ers.begin(), ers.end());
    REQUIRE(!ers.empty());
    const double median = ers.size() % 2 ? ers[ers.size() / 2]
                                         : 0.5 * (ers[ers.size() / 2 - 1] + ers[ers.size() / 2]);
    CHECK(s.median_er == doctest::Approx(median).epsilon(1e-9));
  }
}

TEST_CASE("evaluation of a model against the test corpus") {
  SedModel<float> silent(SedDims{2, 16, 4, 3}, small_corpora().test.class_names);
  silent.params.class_bias.setConstant(-20.0f);
  const auto er = evaluate_model(silent, small_corpora().test);
  CHECK(er.substitutions == 0);
  CHECK(er.insertions == 0);
  CHECK(er.deletions == er.reference_active);
}

}  // TEST_SUITE
