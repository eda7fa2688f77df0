// src/synthdata.cpp

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

#include "alsed/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "alsed/error.hpp"

namespace alsed {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::mt19937_64 recording_rng(std::uint64_t seed, int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), 0x5a7du};
  return std::mt19937_64(seq);
}

double rms(const Eigen::Ref<const Eigen::VectorXd>& x) {
  return std::sqrt(x.squaredNorm() / static_cast<double>(x.size()));
}

/// Raised-cosine fade in/out of `fade_s` seconds.
void apply_fades(Eigen::VectorXd& x, int rate, double fade_s = 0.01) {
  const auto n = x.size();
  const auto fade = std::min<Eigen::Index>(static_cast<Eigen::Index>(fade_s * rate), n / 2);
  for (Eigen::Index i = 0; i < fade; ++i) {
    const double g = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(i) / fade);
    x[i] *= g;
    x[n - 1 - i] *= g;
  }
}

/// RBJ band-pass biquad (constant peak gain).
Eigen::VectorXd bandpass(const Eigen::VectorXd& x, double center_hz, double bandwidth_hz, int rate) {
  const double w0 = kTwoPi * center_hz / rate;
  const double q = center_hz / std::max(bandwidth_hz, 1.0);
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  const double b0 = alpha / a0, b2 = -alpha / a0;
  const double a1 = -2.0 * std::cos(w0) / a0, a2 = (1.0 - alpha) / a0;
  Eigen::VectorXd y(x.size());
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = b0 * x[i] + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = x[i];
    y2 = y1;
    y1 = v;
    y[i] = v;
  }
  return y;
}

Eigen::VectorXd synthesize_event(const EventTemplate& tpl, Eigen::Index n, int rate,
                                 std::mt19937_64& rng) {
  std::uniform_real_distribution<double> jitter(0.95, 1.05);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double f = tpl.freq_hz * jitter(rng);
  const double ph = phase(rng);
  const double dur = static_cast<double>(n) / rate;
  Eigen::VectorXd x(n);

  switch (tpl.kind) {
    case TemplateKind::kToneBurst:
      for (Eigen::Index i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / rate;
        x[i] = std::sin(kTwoPi * f * t + ph) + 0.5 * std::sin(kTwoPi * 2.0 * f * t + ph);
      }
      break;
    case TemplateKind::kChirp: {
      const double f2 = tpl.freq2_hz * jitter(rng);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / rate;
        x[i] = std::sin(kTwoPi * (f * t + 0.5 * (f2 - f) / dur * t * t) + ph);
      }
      break;
    }
    case TemplateKind::kNoiseBurst: {
      Eigen::VectorXd w(n);
      for (Eigen::Index i = 0; i < n; ++i) w[i] = gauss(rng);
      x = bandpass(w, f, tpl.freq2_hz, rate);
      const double decay = 3.0 / dur;
      for (Eigen::Index i = 0; i < n; ++i) x[i] *= std::exp(-decay * static_cast<double>(i) / rate);
      break;
    }
    case TemplateKind::kAmTone: {
      const double m = tpl.rate_hz * jitter(rng);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / rate;
        const double carrier = std::sin(kTwoPi * f * t + ph) + 0.6 * std::sin(kTwoPi * 2.0 * f * t) +
                               0.3 * std::sin(kTwoPi * 3.0 * f * t);
        x[i] = carrier * (0.55 + 0.45 * std::sin(kTwoPi * m * t));
      }
      break;
    }
    case TemplateKind::kClickTrain: {
      x.setZero();
      const double period = 1.0 / (tpl.rate_hz * jitter(rng));
      Eigen::VectorXd w(n);
      for (Eigen::Index i = 0; i < n; ++i) w[i] = gauss(rng);
      w = bandpass(w, f, tpl.freq2_hz > 0 ? tpl.freq2_hz : f, rate);
      for (double start = 0.0; start < dur; start += period) {
        const auto s = static_cast<Eigen::Index>(start * rate);
        for (Eigen::Index i = s; i < n; ++i) {
          const double age = static_cast<double>(i - s) / rate;
          if (age > 0.08) break;
          x[i] += w[i] * std::exp(-age / 0.015);
        }
      }
      break;
    }
  }
  apply_fades(x, rate);
  return x;
}

Eigen::VectorXd colored_noise(Eigen::Index n, int scene, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd x(n);
  // Scenes cycle through spectral tilts: dark, warm, flat, bright.
  static constexpr double kPole[] = {0.97, 0.8, 0.0, -0.7};
  const double a = kPole[scene % 4] * (scene >= 4 ? 0.9 : 1.0);
  double y = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    y = a * y + gauss(rng);
    x[i] = y;
  }
  return x;
}

}  // namespace

std::vector<std::string> GeneratorSpec::class_names() const {
  std::vector<std::string> out;
  for (const auto& c : classes) out.push_back(c.name);
  return out;
}

void GeneratorSpec::validate() const {
  if (n_recordings < 0 || recording_len_s <= 0.0 || sample_rate <= 0)
    throw InputError("generator: invalid corpus dimensions");
  if (events_per_minute < 0.0) throw InputError("generator: events_per_minute must be >= 0");
  if (events_per_minute > 0.0 && (classes.empty() || ebr_db.empty()))
    throw InputError("generator: events requested but no classes or EBR choices");
  if (n_scenes <= 0) throw InputError("generator: need at least one background scene");
  for (const auto& c : classes) {
    if (c.min_duration_s < 0.2 || c.max_duration_s < c.min_duration_s)
      throw InputError("generator: event durations must be >= 0.2 s and ordered: " + c.name);
    if (c.max_duration_s > recording_len_s)
      throw InputError("generator: event longer than recording: " + c.name);
  }
}

const std::vector<Event>& GroundTruth::of(const std::string& recording_id) const {
  auto it = events.find(recording_id);
  if (it == events.end()) throw NotFoundError("unknown recording: " + recording_id);
  return it->second;
}

SynthRecording generate_recording(const GeneratorSpec& spec, int index) {
  spec.validate();
  auto rng = recording_rng(spec.seed, index);
  const int rate = spec.sample_rate;
  const auto n = static_cast<Eigen::Index>(std::llround(spec.recording_len_s * rate));

  SynthRecording rec;
  char id[64];
  std::snprintf(id, sizeof(id), "%s%04d", spec.id_prefix.c_str(), index);
  rec.mix.recording_id = id;
  rec.mix.sample_rate = rate;

  std::uniform_int_distribution<int> scene_pick(0, spec.n_scenes - 1);
  std::uniform_real_distribution<double> level(spec.background_db_min, spec.background_db_max);
  rec.scene = scene_pick(rng);
  Eigen::VectorXd background = colored_noise(n, rec.scene, rng);
  background *= std::pow(10.0, level(rng) / 20.0) / rms(background);

  Eigen::VectorXd mix = background;
  std::vector<Eigen::VectorXd> stems;
  const double expected = spec.events_per_minute * spec.recording_len_s / 60.0;
  int count = 0;
  if (expected > 0.0) {
    std::poisson_distribution<int> poisson(expected);
    count = poisson(rng);
  }
  for (int e = 0; e < count; ++e) {
    std::uniform_int_distribution<std::size_t> class_pick(0, spec.classes.size() - 1);
    const std::size_t cls = class_pick(rng);
    const auto& tpl = spec.classes[cls];
    std::uniform_real_distribution<double> dur_pick(tpl.min_duration_s, tpl.max_duration_s);
    const auto len = static_cast<Eigen::Index>(std::llround(dur_pick(rng) * rate));
    if (len > n) throw InputError("generator: infeasible event placement");
    std::uniform_int_distribution<Eigen::Index> onset_pick(0, n - len);
    const Eigen::Index start = onset_pick(rng);
    std::uniform_int_distribution<std::size_t> ebr_pick(0, spec.ebr_db.size() - 1);
    const double ebr = spec.ebr_db[ebr_pick(rng)];

    Eigen::VectorXd signal = synthesize_event(tpl, len, rate, rng);
    const double bg_rms = rms(background.segment(start, len));
    signal *= std::pow(10.0, ebr / 20.0) * bg_rms / rms(signal);
    mix.segment(start, len) += signal;

    SynthEvent ev;
    ev.event = {static_cast<int>(cls), static_cast<double>(start) / rate,
                static_cast<double>(start + len) / rate};
    ev.ebr_db = ebr;
    ev.start_sample = start;
    rec.events.push_back(std::move(ev));
    stems.push_back(std::move(signal));
  }

  const double peak = mix.cwiseAbs().maxCoeff();
  const double gain = peak > 0.99 ? 0.99 / peak : 1.0;
  rec.mix.samples = (mix * gain).cast<float>();
  rec.background = (background * gain).cast<float>();
  for (std::size_t i = 0; i < stems.size(); ++i)
    rec.events[i].signal = (stems[i] * gain).cast<float>();
  std::sort(rec.events.begin(), rec.events.end(), [](const SynthEvent& a, const SynthEvent& b) {
    return a.event.onset_s != b.event.onset_s ? a.event.onset_s < b.event.onset_s
                                              : a.event.class_id < b.event.class_id;
  });
  return rec;
}

SynthCorpus generate(const GeneratorSpec& spec) {
  spec.validate();
  SynthCorpus corpus;
  corpus.class_names = spec.class_names();
  for (int i = 0; i < spec.n_recordings; ++i) {
    auto rec = generate_recording(spec, i);
    auto& events = corpus.truth.events[rec.mix.recording_id];
    for (const auto& e : rec.events) events.push_back(e.event);
    corpus.clips.push_back(std::move(rec.mix));
  }
  return corpus;
}

std::pair<GeneratorSpec, GeneratorSpec> rare_and_dense_presets() {
  GeneratorSpec rare;
  rare.n_recordings = 60;
  rare.recording_len_s = 30.0;
  rare.events_per_minute = 1.0;
  rare.ebr_db = {-6.0, 0.0, 6.0};
  rare.classes = {
      {"babycry", TemplateKind::kAmTone, 450.0, 0.0, 3.0, 0.8, 2.0},
      {"glassbreak", TemplateKind::kNoiseBurst, 4000.0, 2500.0, 0.0, 0.4, 1.2},
      {"gunshot", TemplateKind::kClickTrain, 1200.0, 1500.0, 6.0, 0.3, 1.0},
  };
  rare.id_prefix = "rare";

  GeneratorSpec dense;
  dense.n_recordings = 15;
  dense.recording_len_s = 60.0;
  dense.events_per_minute = 55.0;
  dense.ebr_db = {30.0};
  dense.background_db_min = -56.0;
  dense.background_db_max = -50.0;
  dense.classes = {
      {"clearthroat", TemplateKind::kNoiseBurst, 700.0, 500.0, 0.0, 0.3, 0.8},
      {"cough", TemplateKind::kClickTrain, 900.0, 800.0, 3.0, 0.3, 0.9},
      {"doorslam", TemplateKind::kClickTrain, 250.0, 300.0, 1.5, 0.3, 0.7},
      {"drawer", TemplateKind::kNoiseBurst, 2500.0, 1500.0, 0.0, 0.5, 1.5},
      {"keyboard", TemplateKind::kClickTrain, 3500.0, 2000.0, 12.0, 0.6, 2.5},
      {"keys", TemplateKind::kNoiseBurst, 6000.0, 1500.0, 0.0, 0.4, 1.2},
      {"knock", TemplateKind::kClickTrain, 500.0, 400.0, 5.0, 0.3, 1.0},
      {"laughter", TemplateKind::kAmTone, 300.0, 0.0, 5.0, 0.8, 2.5},
      {"pageturn", TemplateKind::kChirp, 1500.0, 5000.0, 0.0, 0.3, 0.8},
      {"phone", TemplateKind::kToneBurst, 1800.0, 0.0, 0.0, 1.0, 3.0},
      {"speech", TemplateKind::kAmTone, 180.0, 0.0, 4.0, 1.0, 3.0},
  };
  dense.id_prefix = "dense";
  return {rare, dense};
}

LabelSet simulate_weak_annotation(const CandidateSegment& segment, std::span<const Event> truth,
                                  double min_overlap_s) {
  LabelSet out;
  for (const auto& e : truth)
    if (overlap_s(e.onset_s, e.offset_s, segment.start_s, segment.end_s) > min_overlap_s + 1e-9)
      out.insert(e.class_id);
  return out;
}

std::vector<Event> simulate_strong_annotation(const CandidateSegment& segment,
                                              std::span<const Event> truth) {
  std::vector<Event> out;
  for (const auto& e : truth)
    if (overlap_s(e.onset_s, e.offset_s, segment.start_s, segment.end_s) > 0.0)
      out.push_back({e.class_id, std::max(e.onset_s, segment.start_s),
                     std::min(e.offset_s, segment.end_s)});
  return out;
}

double event_active_fraction(const GroundTruth& truth,
                             const std::map<std::string, double>& durations) {
  double active = 0.0, total = 0.0;
  for (const auto& [id, dur] : durations) {
    total += dur;
    auto it = truth.events.find(id);
    if (it == truth.events.end()) continue;
    std::vector<std::pair<double, double>> spans;
    for (const auto& e : it->second) spans.emplace_back(e.onset_s, e.offset_s);
    std::sort(spans.begin(), spans.end());
    double cur_lo = 0, cur_hi = -1;
    for (const auto& [lo, hi] : spans) {
      if (lo > cur_hi) {
        if (cur_hi > cur_lo) active += cur_hi - cur_lo;
        cur_lo = lo;
        cur_hi = hi;
      } else {
        cur_hi = std::max(cur_hi, hi);
      }
    }
    if (cur_hi > cur_lo) active += cur_hi - cur_lo;
  }
  return total > 0 ? active / total : 0.0;
}

}  // namespace alsed
