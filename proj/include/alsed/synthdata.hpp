// include/alsed/synthdata.hpp

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

// Deterministic synthetic mixtures: parametric event templates mixed into
// colored-noise backgrounds at a drawn event-to-background ratio, plus the
// simulated annotator that answers label queries from the hidden ground truth.

#ifndef ALSED_SYNTHDATA_HPP_
#define ALSED_SYNTHDATA_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "alsed/audio.hpp"
#include "alsed/labels.hpp"
#include "alsed/segmentation.hpp"

namespace alsed {

enum class TemplateKind { kToneBurst, kChirp, kNoiseBurst, kAmTone, kClickTrain };

struct EventTemplate {
  std::string name;
  TemplateKind kind = TemplateKind::kToneBurst;
  double freq_hz = 1000.0;   // tone / carrier / band center / chirp start
  double freq2_hz = 0.0;     // chirp end, noise bandwidth
  double rate_hz = 0.0;      // modulation or click rate
  double min_duration_s = 0.5;
  double max_duration_s = 1.0;
};

struct GeneratorSpec {
  std::uint64_t seed = 0;
  int n_recordings = 10;
  double recording_len_s = 30.0;
  int sample_rate = 16000;
  std::vector<EventTemplate> classes;
  double events_per_minute = 1.0;
  std::vector<double> ebr_db{-6.0, 0.0, 6.0};
  int n_scenes = 4;
  double background_db_min = -36.0;  // background RMS in dBFS
  double background_db_max = -26.0;
  std::string id_prefix = "rec";

  std::vector<std::string> class_names() const;
  /// Throws InputError when the spec is invalid.
  void validate() const;
};

struct GroundTruth {
  std::map<std::string, std::vector<Event>> events;

  /// Throws NotFoundError for unknown recordings.
  const std::vector<Event>& of(const std::string& recording_id) const;
};

struct SynthEvent {
  Event event;
  double ebr_db = 0.0;
  Eigen::Index start_sample = 0;
  Eigen::VectorXf signal;  // scaled event as mixed
};

/// One recording with its stems, for inspection and tests.
struct SynthRecording {
  AudioClip mix;
  Eigen::VectorXf background;
  std::vector<SynthEvent> events;
  int scene = 0;
};

struct SynthCorpus {
  std::vector<AudioClip> clips;
  GroundTruth truth;
  std::vector<std::string> class_names;
};

/// Recording `index` of the corpus; depends only on (spec, index).
SynthRecording generate_recording(const GeneratorSpec& spec, int index);

SynthCorpus generate(const GeneratorSpec& spec);

/// Rare (3 classes, 1 event/min, EBR {-6,0,6} dB, 30 s) and dense (11 classes,
/// 55 events/min, EBR +30 dB, 60 s) regimes.
std::pair<GeneratorSpec, GeneratorSpec> rare_and_dense_presets();

/// Weak label: classes whose events overlap the segment by more than 0.1 s.
LabelSet simulate_weak_annotation(const CandidateSegment& segment, std::span<const Event> truth,
                                  double min_overlap_s = 0.1);

/// Strong label: truth events intersecting the unit, clipped to it.
std::vector<Event> simulate_strong_annotation(const CandidateSegment& segment,
                                              std::span<const Event> truth);

/// Fraction of the total duration covered by at least one event.
double event_active_fraction(const GroundTruth& truth,
                             const std::map<std::string, double>& durations);

}  // namespace alsed

#endif  // ALSED_SYNTHDATA_HPP_
