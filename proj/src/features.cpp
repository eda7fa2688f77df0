// src/features.cpp

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

#include "alsed/features.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "alsed/error.hpp"

namespace alsed {

int FeatureConfig::frame_samples(int sample_rate) const {
  return static_cast<int>(std::lround(frame_ms * 1e-3 * sample_rate));
}

int FeatureConfig::hop_samples(int sample_rate) const {
  return static_cast<int>(std::lround(hop_ms * 1e-3 * sample_rate));
}

int FeatureConfig::fft_size(int sample_rate) const {
  int n = 1;
  while (n < frame_samples(sample_rate)) n <<= 1;
  return n;
}

Eigen::Index frame_count(Eigen::Index n_samples, int frame_samples,
                         int hop_samples) {
  if (n_samples < frame_samples) return 0;
  return (n_samples - frame_samples) / hop_samples + 1;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

Eigen::VectorXd mel_center_frequencies(int n_bands, int sample_rate) {
  const double top = hz_to_mel(sample_rate / 2.0);
  Eigen::VectorXd centers(n_bands);
  for (int b = 0; b < n_bands; ++b)
    centers[b] = mel_to_hz(top * (b + 1) / (n_bands + 1));
  return centers;
}

Eigen::MatrixXd mel_filterbank(int n_bands, int fft_size, int sample_rate) {
  const int n_bins = fft_size / 2 + 1;
  const double top = hz_to_mel(sample_rate / 2.0);
  Eigen::VectorXd edges(n_bands + 2);
  for (int i = 0; i < n_bands + 2; ++i)
    edges[i] = mel_to_hz(top * i / (n_bands + 1));

  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(n_bands, n_bins);
  for (int b = 0; b < n_bands; ++b) {
    const double lo = edges[b], mid = edges[b + 1], hi = edges[b + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / fft_size;
      if (f > lo && f <= mid)
        fb(b, k) = (f - lo) / (mid - lo);
      else if (f > mid && f < hi)
        fb(b, k) = (hi - f) / (hi - mid);
    }
  }
  return fb;
}

Eigen::VectorXd hann_window(int length) {
  Eigen::VectorXd w(length);
  if (length == 1) {
    w[0] = 1.0;
    return w;
  }
  for (int n = 0; n < length; ++n)
    w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / (length - 1));
  return w;
}

LogMelSpectrogram compute_logmel(const AudioClip& clip,
                                 const FeatureConfig& config) {
  const int rate = clip.sample_rate;
  const int frame = config.frame_samples(rate);
  const int hop = config.hop_samples(rate);
  const int nfft = config.fft_size(rate);
  const Eigen::Index n_frames = frame_count(clip.samples.size(), frame, hop);
  if (n_frames == 0)
    throw InputError(clip.recording_id + ": clip shorter than one frame");

  const Eigen::MatrixXd fb = mel_filterbank(config.n_bands, nfft, rate);
  const Eigen::VectorXd window = hann_window(frame);
  const double log_floor_eps = config.energy_floor;

  LogMelSpectrogram out;
  out.recording_id = clip.recording_id;
  out.hop_s = static_cast<double>(hop) / rate;
  out.duration_s = clip.duration_s();
  out.values.resize(n_frames, config.n_bands);

  Eigen::FFT<double> fft;
  std::vector<double> buf(static_cast<std::size_t>(nfft), 0.0);
  std::vector<std::complex<double>> spectrum;
  Eigen::VectorXd power(nfft / 2 + 1);

  for (Eigen::Index t = 0; t < n_frames; ++t) {
    const Eigen::Index start = t * hop;
    for (int n = 0; n < frame; ++n)
      buf[static_cast<std::size_t>(n)] = clip.samples[start + n] * window[n];
    fft.fwd(spectrum, buf);
    for (int k = 0; k <= nfft / 2; ++k) power[k] = std::norm(spectrum[static_cast<std::size_t>(k)]);
    const Eigen::VectorXd energy = fb * power;
    for (int b = 0; b < config.n_bands; ++b)
      out.values(t, b) = static_cast<float>(std::log(energy[b] + log_floor_eps));
  }
  return out;
}

std::string encode_logmel(const LogMelSpectrogram& spec) {
  return encode_matrix_file("LMEL", spec.values);
}

LogMelSpectrogram decode_logmel(std::string_view bytes, std::string recording_id) {
  LogMelSpectrogram spec;
  spec.values = decode_matrix_file("LMEL", bytes, recording_id);
  spec.recording_id = std::move(recording_id);
  return spec;
}

}  // namespace alsed
