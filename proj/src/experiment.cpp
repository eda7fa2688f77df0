// src/experiment.cpp

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


#include "alsed/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "alsed/error.hpp"
#include "alsed/text_io.hpp"

namespace alsed {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename E>
struct EnumName {
  E value;
  const char* name;
};

constexpr EnumName<AnnotationUnit> kUnits[] = {{AnnotationUnit::kSegment, "segment"},
                                               {AnnotationUnit::kRecording, "recording"}};
constexpr EnumName<LabelMode> kLabelModes[] = {{LabelMode::kWeak, "weak"},
                                               {LabelMode::kStrong, "strong"}};
constexpr EnumName<TrainingInput> kInputs[] = {
    {TrainingInput::kRecordingContext, "recording-context"},
    {TrainingInput::kSegmentsOnly, "segments-only"}};
constexpr EnumName<RefreshMode> kRefresh[] = {{RefreshMode::kCheckpoint, "checkpoint"},
                                              {RefreshMode::kEveryBatch, "every-batch"}};
constexpr EnumName<SegmentationMode> kSegModes[] = {{SegmentationMode::kVariable, "variable"},
                                                    {SegmentationMode::kFixed, "fixed"}};
constexpr EnumName<TemplateKind> kTemplates[] = {{TemplateKind::kToneBurst, "tone-burst"},
                                                 {TemplateKind::kChirp, "chirp"},
                                                 {TemplateKind::kNoiseBurst, "noise-burst"},
                                                 {TemplateKind::kAmTone, "am-tone"},
                                                 {TemplateKind::kClickTrain, "click-train"}};

template <typename E, std::size_t N>
std::string name_of(const EnumName<E> (&table)[N], E v) {
  for (const auto& e : table)
    if (e.value == v) return e.name;
  return "?";
}

template <typename E, std::size_t N>
E parse_name(const EnumName<E> (&table)[N], const std::string& s, const char* what) {
  for (const auto& e : table)
    if (s == e.name) return e.value;
  throw InputError(std::string("unknown ") + what + ": " + s);
}

template <typename T>
void read_key(const json& doc, const char* key, T& out) {
  if (doc.contains(key)) out = doc.at(key).get<T>();
}

template <typename E, std::size_t N>
void read_enum(const json& doc, const char* key, const EnumName<E> (&table)[N], E& out) {
  if (doc.contains(key)) out = parse_name(table, doc.at(key).get<std::string>(), key);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Event-covered time inside [lo, hi).
double covered_s(std::span<const Event> events, double lo, double hi) {
  std::vector<std::pair<double, double>> spans;
  for (const auto& e : events) {
    const double a = std::max(e.onset_s, lo), b = std::min(e.offset_s, hi);
    if (b > a) spans.emplace_back(a, b);
  }
  std::sort(spans.begin(), spans.end());
  double total = 0.0, cur_lo = 0.0, cur_hi = -1.0;
  for (const auto& [a, b] : spans) {
    if (a > cur_hi) {
      if (cur_hi > cur_lo) total += cur_hi - cur_lo;
      cur_lo = a;
      cur_hi = b;
    } else {
      cur_hi = std::max(cur_hi, b);
    }
  }
  if (cur_hi > cur_lo) total += cur_hi - cur_lo;
  return total;
}

/// Frame-wise targets of a strongly labeled unit, run-length grouped into
/// regions. Frame t is active for a class when its center lies in an event.
std::vector<LabeledRegion> strong_regions(const CandidateSegment& unit,
                                          std::span<const Event> events, int n_classes,
                                          double hop_s, Eigen::Index offset) {
  std::vector<LabeledRegion> out;
  for (Eigen::Index t = unit.start_frame; t < unit.end_frame; ++t) {
    Eigen::VectorXd target = Eigen::VectorXd::Zero(n_classes);
    const double center = (static_cast<double>(t) + 0.5) * hop_s;
    for (const auto& e : events)
      if (center >= e.onset_s && center < e.offset_s) target[e.class_id] = 1.0;
    if (!out.empty() && out.back().end == t - offset && out.back().target == target)
      ++out.back().end;
    else
      out.push_back({t - offset, t - offset + 1, std::move(target)});
  }
  return out;
}

}  // namespace

std::vector<double> ProjectConfig::default_checkpoints() {
  return {0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10, 0.20, 1.00};
}

void ProjectConfig::validate() const {
  if (!(batch_fraction > 0.0 && batch_fraction <= 1.0) && batch_count <= 0)
    throw InputError("batch_fraction must be in (0, 1]");
  if (checkpoints.empty()) throw InputError("at least one budget checkpoint is required");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (!(checkpoints[i] > 0.0 && checkpoints[i] <= 1.0))
      throw InputError("budget checkpoints must lie in (0, 1]");
    if (i > 0 && checkpoints[i] <= checkpoints[i - 1])
      throw InputError("budget checkpoints must be ascending");
  }
  if (hidden <= 0 || model_context < 0) throw InputError("invalid model dimensions");
  if (embedding.dim <= 0) throw InputError("embedding dim must be positive");
  if (training.batch_size <= 0 || training.max_epochs <= 0 || !(training.weight_decay >= 0.0))
    throw InputError("invalid training settings");
  std::set<std::string> seen;
  for (const auto& c : classes)
    if (c.empty() || !seen.insert(c).second)
      throw InputError("class names must be unique and non-empty");
}

SedDims ProjectConfig::model_dims() const {
  SedDims d;
  d.context = model_context;
  d.input_dim = embedding.kind == EmbeddingKind::kLogmelPassthrough ? features.n_bands
                                                                   : embedding.dim;
  d.hidden = hidden;
  d.classes = static_cast<int>(classes.size());
  return d;
}

json to_json(const ProjectConfig& c) {
  return {
      {"classes", c.classes},
      {"features", {{"frame_ms", c.features.frame_ms}, {"hop_ms", c.features.hop_ms},
                    {"n_bands", c.features.n_bands}}},
      {"embedding", {{"kind", std::string(to_string(c.embedding.kind))},
                     {"dim", c.embedding.dim},
                     {"context", c.embedding.context},
                     {"seed", c.embedding.seed},
                     {"manifest", c.embedding.manifest.generic_string()}}},
      {"segmentation", {{"mode", name_of(kSegModes, c.segmentation.mode)},
                        {"half_window", c.segmentation.half_window},
                        {"min_gap_s", c.segmentation.picking.min_gap_s},
                        {"threshold", c.segmentation.picking.threshold},
                        {"fixed_length_s", c.segmentation.fixed_length_s}}},
      {"strategy", std::string(to_string(c.strategy))},
      {"unit", name_of(kUnits, c.unit)},
      {"labels", name_of(kLabelModes, c.labels)},
      {"training_input", name_of(kInputs, c.input)},
      {"batch_fraction", c.batch_fraction},
      {"batch_count", c.batch_count},
      {"checkpoints", c.checkpoints},
      {"refresh", name_of(kRefresh, c.refresh)},
      {"max_rounds", c.max_rounds},
      {"model", {{"hidden", c.hidden}, {"context", c.model_context}}},
      {"training", {{"learning_rate", c.training.learning_rate},
                    {"batch_size", c.training.batch_size},
                    {"max_epochs", c.training.max_epochs},
                    {"min_epochs", c.training.min_epochs},
                    {"patience", c.training.patience},
                    {"validation_fraction", c.training.validation_fraction},
                    {"initial_class_bias", c.training.initial_class_bias},
                    {"class_weight_init_scale", c.training.class_weight_init_scale},
                    {"weight_decay", c.training.weight_decay}}},
      {"seed", c.seed},
  };
}

ProjectConfig project_config_from_json(const json& doc, ProjectConfig c) {
  try {
    if (!doc.is_object()) throw InputError("project config must be an object");
    read_key(doc, "classes", c.classes);
    if (doc.contains("features")) {
      const auto& f = doc.at("features");
      read_key(f, "frame_ms", c.features.frame_ms);
      read_key(f, "hop_ms", c.features.hop_ms);
      read_key(f, "n_bands", c.features.n_bands);
    }
    if (doc.contains("embedding")) {
      const auto& e = doc.at("embedding");
      if (e.contains("kind"))
        c.embedding.kind = embedding_kind_from_string(e.at("kind").get<std::string>());
      read_key(e, "dim", c.embedding.dim);
      read_key(e, "context", c.embedding.context);
      read_key(e, "seed", c.embedding.seed);
      if (e.contains("manifest")) c.embedding.manifest = e.at("manifest").get<std::string>();
    }
    if (doc.contains("segmentation")) {
      const auto& s = doc.at("segmentation");
      read_enum(s, "mode", kSegModes, c.segmentation.mode);
      read_key(s, "half_window", c.segmentation.half_window);
      read_key(s, "min_gap_s", c.segmentation.picking.min_gap_s);
      read_key(s, "threshold", c.segmentation.picking.threshold);
      read_key(s, "fixed_length_s", c.segmentation.fixed_length_s);
    }
    if (doc.contains("strategy")) c.strategy = strategy_from_string(doc.at("strategy").get<std::string>());
    read_enum(doc, "unit", kUnits, c.unit);
    read_enum(doc, "labels", kLabelModes, c.labels);
    read_enum(doc, "training_input", kInputs, c.input);
    read_key(doc, "batch_fraction", c.batch_fraction);
    read_key(doc, "batch_count", c.batch_count);
    read_key(doc, "checkpoints", c.checkpoints);
    read_enum(doc, "refresh", kRefresh, c.refresh);
    read_key(doc, "max_rounds", c.max_rounds);
    if (doc.contains("model")) {
      read_key(doc.at("model"), "hidden", c.hidden);
      read_key(doc.at("model"), "context", c.model_context);
    }
    if (doc.contains("training")) {
      const auto& t = doc.at("training");
      read_key(t, "learning_rate", c.training.learning_rate);
      read_key(t, "batch_size", c.training.batch_size);
      read_key(t, "max_epochs", c.training.max_epochs);
      read_key(t, "min_epochs", c.training.min_epochs);
      read_key(t, "patience", c.training.patience);
      read_key(t, "validation_fraction", c.training.validation_fraction);
      read_key(t, "initial_class_bias", c.training.initial_class_bias);
      read_key(t, "class_weight_init_scale", c.training.class_weight_init_scale);
      read_key(t, "weight_decay", c.training.weight_decay);
    }
    read_key(doc, "seed", c.seed);
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed project config: ") + e.what());
  }
  c.validate();
  return c;
}

ProjectConfig apply_system(ProjectConfig c, int system) {
  c.strategy = Strategy::kRandom;
  c.unit = AnnotationUnit::kSegment;
  c.labels = LabelMode::kWeak;
  c.input = TrainingInput::kRecordingContext;
  c.segmentation.mode = SegmentationMode::kVariable;
  switch (system) {
    case 1:
      break;
    case 2:
      c.input = TrainingInput::kSegmentsOnly;
      break;
    case 3:
      c.labels = LabelMode::kStrong;
      break;
    case 4:
      c.unit = AnnotationUnit::kRecording;
      c.labels = LabelMode::kStrong;
      break;
    case 5:
      c.strategy = Strategy::kMfft;
      break;
    case 6:
      c.strategy = Strategy::kUncertainty;
      break;
    case 7:
      c.strategy = Strategy::kMfft;
      c.segmentation.mode = SegmentationMode::kFixed;
      c.segmentation.fixed_length_s = 2.0;
      break;
    default:
      throw InputError("system must be 1..7, got " + std::to_string(system));
  }
  return c;
}

Annotation simulate_annotation(const CandidateSegment& unit, const GroundTruth& truth,
                               LabelMode mode) {
  const auto& events = truth.of(unit.recording_id);
  Annotation a;
  if (mode == LabelMode::kWeak) {
    a.labels = simulate_weak_annotation(unit, events);
  } else {
    a.events = simulate_strong_annotation(unit, events);
    for (const auto& e : a.events) a.labels.insert(e.class_id);
  }
  return a;
}

std::uint64_t training_seed(std::uint64_t seed, int round) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(round) + 0x51ed));
}

// ActiveLearningSession

ActiveLearningSession::ActiveLearningSession(ProjectConfig config,
                                             std::shared_ptr<const PreparedCorpus> train)
    : config_(std::move(config)), train_(std::move(train)) {
  if (config_.classes.empty()) config_.classes = train_->class_names;
  config_.validate();
  if (train_->recordings.empty()) throw InputError("project has no training recordings");
  candidates_ = build_candidates(*train_, config_.segmentation,
                                 config_.unit == AnnotationUnit::kRecording);
  distances_ = std::make_unique<SegmentDistances>(candidates_);
  state_ = SelectionState::fresh(static_cast<int>(candidates_.size()), config_.seed);
  for (const auto& c : candidates_) total_s_ += c.duration_s();
}

BatchQuota ActiveLearningSession::quota() const {
  return {config_.batch_fraction * total_s_, config_.batch_count};
}

void ActiveLearningSession::set_model(std::optional<SedModel<float>> model) {
  model_ = std::move(model);
  ++model_version_;
}

void ActiveLearningSession::refresh_predictions() {
  if (!model_ || predictions_version_ == model_version_) return;
  model_labels_.clear();
  pooled_.clear();
  std::size_t next = 0;
  for (const auto& rec : train_->recordings) {
    const auto& frames = rec.embedding->values;
    if (config_.strategy == Strategy::kMfft) {
      const auto events = detect_events(*model_, frames, rec.hop_s(), rec.duration_s());
      for (; next < candidates_.size() && candidates_[next].recording_id == rec.recording_id();
           ++next)
        model_labels_[candidates_[next].segment_id] =
            derive_model_labels(events, candidates_[next]);
    } else {
      const auto out = forward(*model_, frames);
      for (; next < candidates_.size() && candidates_[next].recording_id == rec.recording_id();
           ++next) {
        const auto& c = candidates_[next];
        pooled_[c.segment_id] =
            attention_pool<float>(out.probability, out.weight, c.start_frame, c.end_frame)
                .cast<double>();
      }
    }
  }
  predictions_version_ = model_version_;
}

BatchResult ActiveLearningSession::next_batch() {
  if (batch_open()) throw ConflictError("a batch is already open");
  if (state_.unlabeled.empty()) return {{}, true};
  std::vector<PredictionPair> predictions;
  SelectionInputs inputs;
  if (model_ && !state_.annotated.empty() && config_.strategy != Strategy::kRandom) {
    refresh_predictions();
    if (config_.strategy == Strategy::kMfft) {
      predictions = compute_predictions(state_, *distances_, model_labels_);
      inputs.predictions = &predictions;
    } else {
      inputs.pooled_outputs = &pooled_;
    }
  }
  return select_batch(config_.strategy, state_, candidates_, *distances_, quota(), inputs);
}

void ActiveLearningSession::annotate(int segment_id, Annotation annotation) {
  if (segment_id < 0 || segment_id >= static_cast<int>(candidates_.size()))
    throw NotFoundError("unknown segment " + std::to_string(segment_id));
  if (annotations_.count(segment_id) || state_.annotated.count(segment_id))
    throw ConflictError("segment " + std::to_string(segment_id) + " is already annotated");
  const auto& open = state_.selected_in_batch;
  if (std::find(open.begin(), open.end(), segment_id) == open.end())
    throw ConflictError("segment " + std::to_string(segment_id) + " is not in the open batch");
  const int n_classes = static_cast<int>(config_.classes.size());
  for (int c : annotation.labels)
    if (c < 0 || c >= n_classes) throw InputError("unknown class id " + std::to_string(c));
  const auto& unit = candidates_[static_cast<std::size_t>(segment_id)];
  for (auto& e : annotation.events) {
    if (e.class_id < 0 || e.class_id >= n_classes)
      throw InputError("unknown class id " + std::to_string(e.class_id));
    e.onset_s = std::max(e.onset_s, unit.start_s);
    e.offset_s = std::min(e.offset_s, unit.end_s);
  }
  std::erase_if(annotation.events, [](const Event& e) { return e.offset_s <= e.onset_s; });
  annotations_[segment_id] = std::move(annotation);
  labeled_s_ += unit.duration_s();
}

bool ActiveLearningSession::batch_complete() const {
  if (!batch_open()) return false;
  for (int id : state_.selected_in_batch)
    if (!annotations_.count(id)) return false;
  return true;
}

void ActiveLearningSession::commit_batch() {
  if (!batch_complete()) throw ConflictError("the open batch is not fully annotated");
  std::map<int, LabelSet> labels;
  for (int id : state_.selected_in_batch) labels[id] = annotations_.at(id).labels;
  state_.commit_batch(labels);
}

void ActiveLearningSession::abandon_batch() {
  if (!batch_open()) throw ConflictError("no open batch");
  for (int id : state_.selected_in_batch) {
    auto it = annotations_.find(id);
    if (it != annotations_.end())
      state_.annotated[id] = it->second.labels;
    else
      state_.unlabeled.insert(id);
  }
  state_.selected_in_batch.clear();
  ++state_.iteration;
}

void ActiveLearningSession::restore(int iteration, const std::vector<int>& open_batch,
                                    const std::map<int, Annotation>& annotations) {
  const int n = static_cast<int>(candidates_.size());
  state_ = SelectionState::fresh(n, config_.seed);
  annotations_.clear();
  labeled_s_ = 0.0;
  std::set<int> open(open_batch.begin(), open_batch.end());
  for (int id : open_batch) {
    if (id < 0 || id >= n) throw InputError("restored batch names an unknown segment");
    state_.unlabeled.erase(id);
  }
  state_.selected_in_batch = open_batch;
  for (const auto& [id, a] : annotations) {
    if (id < 0 || id >= n) throw InputError("restored annotation names an unknown segment");
    if (!open.count(id)) {
      state_.annotated[id] = a.labels;
      state_.unlabeled.erase(id);
    }
    annotations_[id] = a;
    labeled_s_ += candidates_[static_cast<std::size_t>(id)].duration_s();
  }
  state_.iteration = iteration;
  if (!state_.consistent(n)) throw InputError("restored state is inconsistent");
}

std::vector<TrainingExample> ActiveLearningSession::training_examples() const {
  const int n_classes = static_cast<int>(config_.classes.size());
  std::map<std::string, std::vector<int>> by_recording;
  for (const auto& [id, a] : annotations_)
    by_recording[candidates_[static_cast<std::size_t>(id)].recording_id].push_back(id);

  std::vector<TrainingExample> out;
  for (const auto& rec : train_->recordings) {
    auto it = by_recording.find(rec.recording_id());
    if (it == by_recording.end()) continue;
    TrainingExample whole{rec.recording_id(), rec.frames(), {}};
    for (int id : it->second) {
      const auto& unit = candidates_[static_cast<std::size_t>(id)];
      const auto& a = annotations_.at(id);
      const bool segments_only = config_.input == TrainingInput::kSegmentsOnly;
      const Eigen::Index offset = segments_only ? unit.start_frame : 0;
      std::vector<LabeledRegion> regions;
      if (config_.labels == LabelMode::kWeak) {
        Eigen::VectorXd target = Eigen::VectorXd::Zero(n_classes);
        for (int c : a.labels) target[c] = 1.0;
        regions.push_back({unit.start_frame - offset, unit.end_frame - offset, std::move(target)});
      } else {
        regions = strong_regions(unit, a.events, n_classes, rec.hop_s(), offset);
      }
      if (segments_only) {
        auto slice = std::make_shared<const RowMatrixXf>(
            rec.embedding->values.middleRows(unit.start_frame, unit.end_frame - unit.start_frame));
        out.push_back({rec.recording_id(), std::move(slice), std::move(regions)});
      } else {
        for (auto& r : regions) whole.regions.push_back(std::move(r));
      }
    }
    if (!whole.regions.empty()) out.push_back(std::move(whole));
  }
  return out;
}

SedModel<float> ActiveLearningSession::train_model(int round, TrainingHistory* history) const {
  SedModel<float> model(config_.model_dims(), config_.classes);
  const auto examples = training_examples();
  auto h = train<float>(model, examples, config_.labels, config_.training,
                        training_seed(config_.seed, round));
  if (history) *history = std::move(h);
  return model;
}

double ActiveLearningSession::labeled_positive_fraction() const {
  if (labeled_s_ <= 0.0) return 0.0;
  double positive = 0.0;
  for (const auto& [id, a] : annotations_) {
    const auto& unit = candidates_[static_cast<std::size_t>(id)];
    auto it = train_->truth.events.find(unit.recording_id);
    if (it != train_->truth.events.end()) positive += covered_s(it->second, unit.start_s, unit.end_s);
  }
  return positive / labeled_s_;
}

double ActiveLearningSession::labeled_positive_unit_fraction() const {
  if (labeled_s_ <= 0.0) return 0.0;
  double positive = 0.0;
  for (const auto& [id, a] : annotations_)
    if (!a.labels.empty()) positive += candidates_[static_cast<std::size_t>(id)].duration_s();
  return positive / labeled_s_;
}

ErReport evaluate_model(const SedModel<float>& model, const PreparedCorpus& test) {
  ErReport total;
  const int n_classes = model.dims.classes;
  for (const auto& rec : test.recordings) {
    auto it = test.truth.events.find(rec.recording_id());
    if (it == test.truth.events.end()) continue;
    const auto hyp = detect_events(model, rec.embedding->values, rec.hop_s(), rec.duration_s());
    total += error_rate(build_roll(it->second, rec.duration_s(), n_classes),
                        build_roll(hyp, rec.duration_s(), n_classes));
  }
  return total;
}

double corpus_positive_fraction(const PreparedCorpus& corpus) {
  return event_active_fraction(corpus.truth, corpus.durations());
}

double corpus_positive_unit_fraction(const PreparedCorpus& corpus,
                                     const std::vector<CandidateSegment>& candidates) {
  double positive = 0.0, total = 0.0;
  for (const auto& c : candidates) {
    total += c.duration_s();
    auto it = corpus.truth.events.find(c.recording_id);
    if (it != corpus.truth.events.end() && !simulate_weak_annotation(c, it->second).empty())
      positive += c.duration_s();
  }
  return total > 0.0 ? positive / total : 0.0;
}

RunResult run_active_learning(const ProjectConfig& config,
                              std::shared_ptr<const PreparedCorpus> train,
                              const PreparedCorpus& test, std::ostream* log) {
  const auto start = std::chrono::steady_clock::now();
  ActiveLearningSession session(config, train);
  const auto& cfg = session.config();
  RunResult result;
  result.seed = cfg.seed;
  result.candidates = static_cast<int>(session.candidates().size());
  result.corpus_positive_fraction = corpus_positive_fraction(*train);
  result.corpus_positive_unit_fraction =
      corpus_positive_unit_fraction(*train, session.candidates());

  std::ostringstream trace;
  write_trace_header(trace);
  std::size_t next_cp = 0;
  const auto& cps = cfg.checkpoints;
  const double total = session.total_duration_s();

  while (next_cp < cps.size()) {
    if (cfg.max_rounds > 0 && session.rounds() >= cfg.max_rounds) break;
    const int iteration = session.state().iteration;
    const auto batch = session.next_batch();
    if (batch.picks.empty()) {
      result.exhausted_early = true;
      break;
    }
    write_trace_rows(trace, iteration, cfg.strategy, batch);
    for (const auto& pick : batch.picks)
      session.annotate(pick.segment_id,
                       simulate_annotation(session.candidates()[static_cast<std::size_t>(pick.segment_id)],
                                           train->truth, cfg.labels));
    session.commit_batch();

    const double fraction = session.labeled_duration_s() / total;
    std::vector<double> crossed;
    while (next_cp < cps.size() && fraction >= cps[next_cp] - 1e-9) crossed.push_back(cps[next_cp++]);
    if (session.exhausted())
      while (next_cp < cps.size()) crossed.push_back(cps[next_cp++]);

    const bool retrain = !crossed.empty() || cfg.refresh == RefreshMode::kEveryBatch ||
                         (session.needs_model() && !session.model());
    if (!retrain) continue;
    session.set_model(session.train_model(session.rounds()));
    std::optional<ErReport> er;
    auto evaluate = [&]() -> const ErReport& {
      if (!er) er = evaluate_model(*session.model(), test);
      return *er;
    };
    if (cfg.refresh == RefreshMode::kEveryBatch)
      result.rounds.push_back({session.rounds(), session.labeled_duration_s(), evaluate()});
    for (double cp : crossed) {
      CheckpointResult r;
      r.budget_fraction = cp;
      r.labeled_duration_s = session.labeled_duration_s();
      r.labeled_fraction = fraction;
      r.rounds = session.rounds();
      r.er = evaluate();
      r.labeled_positive_fraction = session.labeled_positive_fraction();
      r.labeled_positive_unit_fraction = session.labeled_positive_unit_fraction();
      r.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (log)
        *log << "seed " << cfg.seed << " budget " << format_fixed(cp, 2) << " labeled "
             << format_fixed(fraction, 4) << " rounds " << r.rounds << " ER "
             << format_fixed(r.er.error_rate(), 4) << " positive "
             << format_fixed(r.labeled_positive_fraction, 4) << " t " << format_fixed(r.wall_s, 1)
             << "s\n";
      result.checkpoints.push_back(r);
    }
  }
  result.trace_csv = trace.str();
  return result;
}

// Experiment presets

json to_json(const GeneratorSpec& s) {
  json classes = json::array();
  for (const auto& c : s.classes)
    classes.push_back({{"name", c.name},
                       {"kind", name_of(kTemplates, c.kind)},
                       {"freq_hz", c.freq_hz},
                       {"freq2_hz", c.freq2_hz},
                       {"rate_hz", c.rate_hz},
                       {"min_duration_s", c.min_duration_s},
                       {"max_duration_s", c.max_duration_s}});
  return {{"seed", s.seed},
          {"n_recordings", s.n_recordings},
          {"recording_len_s", s.recording_len_s},
          {"sample_rate", s.sample_rate},
          {"classes", classes},
          {"events_per_minute", s.events_per_minute},
          {"ebr_db", s.ebr_db},
          {"n_scenes", s.n_scenes},
          {"background_db_min", s.background_db_min},
          {"background_db_max", s.background_db_max},
          {"id_prefix", s.id_prefix}};
}

GeneratorSpec generator_spec_from_json(const json& doc, GeneratorSpec s) {
  try {
    if (doc.contains("preset")) {
      const auto name = doc.at("preset").get<std::string>();
      auto [rare, dense] = rare_and_dense_presets();
      if (name == "rare")
        s = rare;
      else if (name == "dense")
        s = dense;
      else
        throw InputError("unknown generator preset: " + name);
    }
    read_key(doc, "seed", s.seed);
    read_key(doc, "n_recordings", s.n_recordings);
    read_key(doc, "recording_len_s", s.recording_len_s);
    read_key(doc, "sample_rate", s.sample_rate);
    read_key(doc, "events_per_minute", s.events_per_minute);
    read_key(doc, "ebr_db", s.ebr_db);
    read_key(doc, "n_scenes", s.n_scenes);
    read_key(doc, "background_db_min", s.background_db_min);
    read_key(doc, "background_db_max", s.background_db_max);
    read_key(doc, "id_prefix", s.id_prefix);
    if (doc.contains("classes")) {
      s.classes.clear();
      for (const auto& c : doc.at("classes")) {
        EventTemplate t;
        t.name = c.at("name").get<std::string>();
        read_enum(c, "kind", kTemplates, t.kind);
        read_key(c, "freq_hz", t.freq_hz);
        read_key(c, "freq2_hz", t.freq2_hz);
        read_key(c, "rate_hz", t.rate_hz);
        read_key(c, "min_duration_s", t.min_duration_s);
        read_key(c, "max_duration_s", t.max_duration_s);
        s.classes.push_back(std::move(t));
      }
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed generator spec: ") + e.what());
  }
  s.validate();
  return s;
}

namespace {

std::pair<GeneratorSpec, GeneratorSpec> corpus_pair(bool dense) {
  auto [rare_spec, dense_spec] = rare_and_dense_presets();
  GeneratorSpec train = dense ? dense_spec : rare_spec;
  GeneratorSpec test = train;
  train.seed = dense ? 2101 : 1101;
  test.seed = dense ? 2202 : 1202;
  test.n_recordings = dense ? 10 : 80;
  test.id_prefix = train.id_prefix + "_test";
  return {train, test};
}

ExperimentSpec make_preset(std::string name, std::vector<int> systems, bool dense) {
  ExperimentSpec spec;
  spec.name = std::move(name);
  spec.systems = std::move(systems);
  spec.seeds = {1, 2, 3, 4, 5};
  std::tie(spec.train_corpus, spec.test_corpus) = corpus_pair(dense);
  spec.base.embedding.dim = 64;
  spec.base.embedding.seed = 7;
  spec.base.segmentation.picking.threshold = 0.02;
  spec.base.training.initial_class_bias = -3.0;
  spec.base.training.weight_decay = 1e-2;
  spec.base.training.class_weight_init_scale = 0.1;
  return spec;
}

}  // namespace

std::vector<std::string> experiment_preset_names() {
  return {"exp_a1", "exp_a1_dense", "exp_a2", "exp_b", "exp_c"};
}

ExperimentSpec experiment_preset(std::string_view name) {
  if (name == "exp_a1") return make_preset("exp_a1", {1, 2}, false);
  if (name == "exp_a1_dense") return make_preset("exp_a1_dense", {1, 2}, true);
  if (name == "exp_a2") return make_preset("exp_a2", {3, 4}, true);
  if (name == "exp_b") return make_preset("exp_b", {1, 5, 6}, false);
  if (name == "exp_c") return make_preset("exp_c", {5, 7}, false);
  throw NotFoundError("unknown experiment preset: " + std::string(name));
}

json to_json(const ExperimentSpec& spec) {
  return {{"name", spec.name},
          {"systems", spec.systems},
          {"seeds", spec.seeds},
          {"train_corpus", to_json(spec.train_corpus)},
          {"test_corpus", to_json(spec.test_corpus)},
          {"project", to_json(spec.base)}};
}

ExperimentSpec experiment_from_json(const json& doc) {
  ExperimentSpec spec;
  try {
    if (doc.contains("preset")) spec = experiment_preset(doc.at("preset").get<std::string>());
    read_key(doc, "name", spec.name);
    read_key(doc, "systems", spec.systems);
    read_key(doc, "seeds", spec.seeds);
    if (doc.contains("train_corpus"))
      spec.train_corpus = generator_spec_from_json(doc.at("train_corpus"), spec.train_corpus);
    if (doc.contains("test_corpus"))
      spec.test_corpus = generator_spec_from_json(doc.at("test_corpus"), spec.test_corpus);
    if (doc.contains("project")) spec.base = project_config_from_json(doc.at("project"), spec.base);
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed experiment config: ") + e.what());
  }
  if (spec.name.empty()) spec.name = "experiment";
  if (spec.systems.empty() || spec.seeds.empty())
    throw InputError("experiment needs at least one system and one seed");
  for (int s : spec.systems) apply_system(spec.base, s);
  return spec;
}

SuiteResult run_experiment_suite(const ExperimentSpec& spec, const PreparedCorpora& corpora,
                                 std::ostream* log) {
  auto train = std::make_shared<const PreparedCorpus>(corpora.train);
  SuiteResult suite;
  suite.name = spec.name;
  for (int system : spec.systems)
    for (auto seed : spec.seeds) {
      ProjectConfig cfg = apply_system(spec.base, system);
      cfg.seed = seed;
      if (log) *log << spec.name << ": system " << system << " seed " << seed << "\n";
      RunResult r = run_active_learning(cfg, train, corpora.test, log);
      r.system = system;
      suite.runs.push_back(std::move(r));
    }
  return suite;
}

SuiteResult run_experiment_suite(const ExperimentSpec& spec, std::ostream* log) {
  const auto train = generate(spec.train_corpus);
  const auto test = generate(spec.test_corpus);
  GroundTruth truth = train.truth;
  for (const auto& [id, events] : test.truth.events) truth.events[id] = events;
  const auto corpora = prepare_corpora(train.clips, test.clips, train.class_names, truth,
                                       spec.base.features, spec.base.embedding);
  return run_experiment_suite(spec, corpora, log);
}

void write_metrics_csv(std::ostream& out, const SuiteResult& suite) {
  out << "system,seed,budget_fraction,S,D,I,N,ER\n";
  for (const auto& run : suite.runs)
    for (const auto& cp : run.checkpoints)
      out << run.system << ',' << run.seed << ',' << format_double(cp.budget_fraction) << ','
          << cp.er.substitutions << ',' << cp.er.deletions << ',' << cp.er.insertions << ','
          << cp.er.reference_active << ',' << format_double(cp.er.error_rate()) << '\n';
}

void write_runs_csv(std::ostream& out, const SuiteResult& suite) {
  out << "system,seed,budget_fraction,labeled_duration_s,labeled_fraction,rounds,"
         "labeled_positive_fraction,corpus_positive_fraction,labeled_positive_unit_fraction,"
         "corpus_positive_unit_fraction\n";
  for (const auto& run : suite.runs)
    for (const auto& cp : run.checkpoints)
      out << run.system << ',' << run.seed << ',' << format_double(cp.budget_fraction) << ','
          << format_double(cp.labeled_duration_s) << ',' << format_double(cp.labeled_fraction)
          << ',' << cp.rounds << ',' << format_double(cp.labeled_positive_fraction) << ','
          << format_double(run.corpus_positive_fraction) << ','
          << format_double(cp.labeled_positive_unit_fraction) << ','
          << format_double(run.corpus_positive_unit_fraction) << '\n';
}

namespace {

void write_text(const fs::path& path, const std::string& text) { write_file_atomic(path, text); }

MetricsRow metrics_row(const RunResult& run, const CheckpointResult& cp) {
  return {run.system, run.seed, cp.budget_fraction, cp.er};
}

}  // namespace

void write_suite(const fs::path& dir, const SuiteResult& suite) {
  fs::create_directories(dir / "traces");
  std::ostringstream metrics, runs, summary;
  write_metrics_csv(metrics, suite);
  write_runs_csv(runs, suite);
  std::vector<MetricsRow> rows;
  for (const auto& run : suite.runs)
    for (const auto& cp : run.checkpoints) rows.push_back(metrics_row(run, cp));
  write_summary_csv(summary, summarize(rows));
  write_text(dir / "metrics.csv", metrics.str());
  write_text(dir / "runs.csv", runs.str());
  write_text(dir / "summary.csv", summary.str());
  for (const auto& run : suite.runs)
    write_text(dir / "traces" /
                   ("system" + std::to_string(run.system) + "_seed" + std::to_string(run.seed) +
                    ".csv"),
               run.trace_csv);
}

std::vector<MetricsRow> read_metrics_csv(std::istream& in) {
  std::vector<MetricsRow> rows;
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line).size() != 8 ||
      split_csv_line(line)[0] != "system")
    throw InputError("metrics table: bad header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 8) throw InputError("metrics table: bad row: " + line);
    try {
      MetricsRow r;
      r.system = std::stoi(f[0]);
      r.seed = std::stoull(f[1]);
      r.budget_fraction = std::stod(f[2]);
      r.er.substitutions = std::stoll(f[3]);
      r.er.deletions = std::stoll(f[4]);
      r.er.insertions = std::stoll(f[5]);
      r.er.reference_active = std::stoll(f[6]);
      rows.push_back(r);
    } catch (const std::exception&) {
      throw InputError("metrics table: bad row: " + line);
    }
  }
  return rows;
}

std::vector<SummaryRow> summarize(const std::vector<MetricsRow>& rows) {
  std::map<std::pair<int, double>, std::vector<double>> groups;
  for (const auto& r : rows) {
    auto& g = groups[{r.system, r.budget_fraction}];
    const double er = r.er.error_rate();
    if (std::isfinite(er)) g.push_back(er);
  }
  std::vector<SummaryRow> out;
  for (auto& [key, v] : groups) {
    SummaryRow s;
    s.system = key.first;
    s.budget_fraction = key.second;
    s.runs = static_cast<int>(v.size());
    if (v.empty()) {
      s.median_er = s.mean_er = std::numeric_limits<double>::quiet_NaN();
    } else {
      std::sort(v.begin(), v.end());
      const std::size_t m = v.size() / 2;
      s.median_er = v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
      s.mean_er = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    }
    out.push_back(s);
  }
  return out;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "system,budget_fraction,runs,median_ER,mean_ER\n";
  for (const auto& r : rows)
    out << r.system << ',' << format_double(r.budget_fraction) << ',' << r.runs << ','
        << format_double(r.median_er) << ',' << format_double(r.mean_er) << '\n';
}

}  // namespace alsed
