// include/alsed/experiment.hpp

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


// The active-learning loop: project configuration, the seven system presets,
// an annotation session shared by the simulator and the service, and the
// experiment suite with its CSV outputs.

#ifndef ALSED_EXPERIMENT_HPP_
#define ALSED_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "alsed/corpus.hpp"
#include "alsed/evaluation.hpp"
#include "alsed/sed_model.hpp"
#include "alsed/selection.hpp"
#include "alsed/synthdata.hpp"
#include "alsed/training.hpp"

namespace alsed {

enum class AnnotationUnit { kSegment, kRecording };
enum class TrainingInput { kRecordingContext, kSegmentsOnly };
/// When the SED model is retrained: at budget checkpoint crossings (plus once
/// after the first batch if the strategy needs a model) or after every batch.
enum class RefreshMode { kCheckpoint, kEveryBatch };

struct ProjectConfig {
  std::vector<std::string> classes;
  FeatureConfig features;
  EmbeddingConfig embedding;
  SegmentationConfig segmentation;
  Strategy strategy = Strategy::kMfft;
  AnnotationUnit unit = AnnotationUnit::kSegment;
  LabelMode labels = LabelMode::kWeak;
  TrainingInput input = TrainingInput::kRecordingContext;
  double batch_fraction = 0.005;
  int batch_count = 0;  // > 0 sizes batches by segment count
  std::vector<double> checkpoints = default_checkpoints();
  RefreshMode refresh = RefreshMode::kCheckpoint;
  int max_rounds = 0;  // > 0 stops after this many batches
  int hidden = 64;
  int model_context = 2;
  TrainingSettings training;
  std::uint64_t seed = 0;

  static std::vector<double> default_checkpoints();
  /// Throws InputError.
  void validate() const;
  SedDims model_dims() const;
};

nlohmann::json to_json(const ProjectConfig& config);
/// Keys absent from `doc` keep their value from `base`.
ProjectConfig project_config_from_json(const nlohmann::json& doc, ProjectConfig base = {});

/// Systems 1-7: the selection/training variants compared in the experiments.
/// 1 random, full-recording training; 2 as 1 with segments-only training;
/// 3 as 1 with strong labels; 4 whole recordings with strong labels;
/// 5 mismatch-first farthest traversal; 6 uncertainty; 7 as 5 on fixed 2 s
/// segments.
ProjectConfig apply_system(ProjectConfig base, int system);

/// Everything an annotator can say about one unit.
struct Annotation {
  LabelSet labels;            // weak label
  std::vector<Event> events;  // strong label, clipped to the unit
};

Annotation simulate_annotation(const CandidateSegment& unit, const GroundTruth& truth,
                               LabelMode mode);

/// Seed for the training run of round `round`.
std::uint64_t training_seed(std::uint64_t seed, int round);

/// Selection state, annotations and the current model of one project. The
/// simulator and the annotation service drive the same object.
class ActiveLearningSession {
 public:
  ActiveLearningSession(ProjectConfig config, std::shared_ptr<const PreparedCorpus> train);

  const ProjectConfig& config() const { return config_; }
  const PreparedCorpus& corpus() const { return *train_; }
  const std::vector<CandidateSegment>& candidates() const { return candidates_; }
  const SelectionState& state() const { return state_; }
  const std::map<int, Annotation>& annotations() const { return annotations_; }
  double total_duration_s() const { return total_s_; }
  double labeled_duration_s() const { return labeled_s_; }
  /// Number of committed batches.
  int rounds() const { return state_.iteration - 1; }
  bool batch_open() const { return !state_.selected_in_batch.empty(); }
  bool exhausted() const { return state_.unlabeled.empty() && !batch_open(); }
  BatchQuota quota() const;

  /// Throws ConflictError when a batch is open. An exhausted pool yields an
  /// empty batch with the exhaustion flag.
  BatchResult next_batch();
  /// Throws NotFoundError / ConflictError / InputError.
  void annotate(int segment_id, Annotation annotation);
  bool batch_complete() const;
  /// Moves a fully annotated batch into the labeled set.
  void commit_batch();
  /// Returns the open batch to the pool.
  void abandon_batch();

  /// Restores a persisted state: annotations of committed rounds plus the
  /// open batch (with any of its annotations).
  void restore(int iteration, const std::vector<int>& open_batch,
               const std::map<int, Annotation>& annotations);

  bool needs_model() const { return config_.strategy != Strategy::kRandom; }
  const std::optional<SedModel<float>>& model() const { return model_; }
  void set_model(std::optional<SedModel<float>> model);

  std::vector<TrainingExample> training_examples() const;
  /// Trains a fresh model on everything annotated so far.
  SedModel<float> train_model(int round, TrainingHistory* history = nullptr) const;

  /// Event-active share of the labeled duration and share of the labeled
  /// duration in units with a non-empty label, from the corpus ground truth.
  double labeled_positive_fraction() const;
  double labeled_positive_unit_fraction() const;

 private:
  void refresh_predictions();

  ProjectConfig config_;
  std::shared_ptr<const PreparedCorpus> train_;
  std::vector<CandidateSegment> candidates_;
  std::unique_ptr<SegmentDistances> distances_;
  SelectionState state_;
  std::map<int, Annotation> annotations_;
  double total_s_ = 0.0;
  double labeled_s_ = 0.0;
  std::optional<SedModel<float>> model_;
  std::uint64_t model_version_ = 0;
  std::uint64_t predictions_version_ = ~std::uint64_t{0};
  std::map<int, LabelSet> model_labels_;
  std::map<int, Eigen::VectorXd> pooled_;
};

/// Segment-based error of `model` over every recording of `test` with ground
/// truth.
ErReport evaluate_model(const SedModel<float>& model, const PreparedCorpus& test);

/// Fraction of recording time covered by ground-truth events.
double corpus_positive_fraction(const PreparedCorpus& corpus);
/// Share of candidate duration in units whose simulated weak label is non-empty.
double corpus_positive_unit_fraction(const PreparedCorpus& corpus,
                                     const std::vector<CandidateSegment>& candidates);

struct CheckpointResult {
  double budget_fraction = 0.0;
  double labeled_duration_s = 0.0;
  double labeled_fraction = 0.0;
  int rounds = 0;
  ErReport er;
  double labeled_positive_fraction = 0.0;
  double labeled_positive_unit_fraction = 0.0;
  double wall_s = 0.0;  // logged, never written to result files
};

/// ER after each retraining, in every-batch refresh mode.
struct RoundResult {
  int round = 0;
  double labeled_duration_s = 0.0;
  ErReport er;
};

struct RunResult {
  int system = 0;
  std::uint64_t seed = 0;
  std::vector<CheckpointResult> checkpoints;
  std::vector<RoundResult> rounds;
  std::string trace_csv;
  int candidates = 0;
  double corpus_positive_fraction = 0.0;
  double corpus_positive_unit_fraction = 0.0;
  bool exhausted_early = false;
};

/// Runs the loop until the last checkpoint (or max_rounds), answering label
/// queries from the training corpus ground truth and evaluating on `test`.
RunResult run_active_learning(const ProjectConfig& config,
                              std::shared_ptr<const PreparedCorpus> train,
                              const PreparedCorpus& test, std::ostream* log = nullptr);

nlohmann::json to_json(const GeneratorSpec& spec);
/// {"preset": "rare" | "dense"} starts from a preset; other keys override.
GeneratorSpec generator_spec_from_json(const nlohmann::json& doc, GeneratorSpec base = {});

struct ExperimentSpec {
  std::string name;
  std::vector<int> systems;
  std::vector<std::uint64_t> seeds{1};
  GeneratorSpec train_corpus;
  GeneratorSpec test_corpus;
  ProjectConfig base;
};

/// exp_a1, exp_a1_dense, exp_a2, exp_b, exp_c; throws NotFoundError.
ExperimentSpec experiment_preset(std::string_view name);
std::vector<std::string> experiment_preset_names();
nlohmann::json to_json(const ExperimentSpec& spec);
/// {"preset": name} starts from a preset; other keys override.
ExperimentSpec experiment_from_json(const nlohmann::json& doc);

struct SuiteResult {
  std::string name;
  std::vector<RunResult> runs;
};

/// Systems x seeds over one prepared corpus pair.
SuiteResult run_experiment_suite(const ExperimentSpec& spec, const PreparedCorpora& corpora,
                                 std::ostream* log = nullptr);
/// Generates and prepares the synthetic corpora, then runs the suite.
SuiteResult run_experiment_suite(const ExperimentSpec& spec, std::ostream* log = nullptr);

/// system,seed,budget_fraction,S,D,I,N,ER
void write_metrics_csv(std::ostream& out, const SuiteResult& suite);
/// system,seed,budget_fraction,labeled_duration_s,labeled_fraction,rounds,
/// labeled_positive_fraction,corpus_positive_fraction,labeled_positive_unit_fraction,
/// corpus_positive_unit_fraction
void write_runs_csv(std::ostream& out, const SuiteResult& suite);
/// metrics.csv, runs.csv, summary.csv, traces/system<k>_seed<s>.csv
void write_suite(const std::filesystem::path& dir, const SuiteResult& suite);

struct MetricsRow {
  int system = 0;
  std::uint64_t seed = 0;
  double budget_fraction = 0.0;
  ErReport er;
};
std::vector<MetricsRow> read_metrics_csv(std::istream& in);

struct SummaryRow {
  int system = 0;
  double budget_fraction = 0.0;
  int runs = 0;
  double median_er = 0.0;
  double mean_er = 0.0;
};
/// Median and mean ER per (system, budget), NaN runs excluded.
std::vector<SummaryRow> summarize(const std::vector<MetricsRow>& rows);
/// system,budget_fraction,runs,median_ER,mean_ER
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

}  // namespace alsed

#endif  // ALSED_EXPERIMENT_HPP_
