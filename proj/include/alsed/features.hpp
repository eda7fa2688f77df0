// include/alsed/features.hpp

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

#ifndef ALSED_FEATURES_HPP_
#define ALSED_FEATURES_HPP_

#include <filesystem>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "alsed/audio.hpp"
#include "alsed/binary_io.hpp"

namespace alsed {

struct FeatureConfig {
  double frame_ms = 40.0;
  double hop_ms = 20.0;
  int n_bands = 128;
  double energy_floor = 1e-10;

  int frame_samples(int sample_rate) const;
  int hop_samples(int sample_rate) const;
  /// Next power of two >= frame_samples.
  int fft_size(int sample_rate) const;
};

/// T x B natural-log mel energies.
struct LogMelSpectrogram {
  RowMatrixXf values;
  std::string recording_id;
  double hop_s = 0.02;
  double duration_s = 0.0;

  Eigen::Index frames() const { return values.rows(); }
  Eigen::Index bands() const { return values.cols(); }
};

/// Frame count for n samples, or 0 when the clip is shorter than one frame.
Eigen::Index frame_count(Eigen::Index n_samples, int frame_samples,
                         int hop_samples);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular HTK-mel filters, band edges equally spaced in mel from 0 Hz to
/// Nyquist, evaluated on the fft_size/2+1 bin frequencies. Rows are bands.
Eigen::MatrixXd mel_filterbank(int n_bands, int fft_size, int sample_rate);

/// Center frequency of each band in Hz.
Eigen::VectorXd mel_center_frequencies(int n_bands, int sample_rate);

/// Symmetric Hann window.
Eigen::VectorXd hann_window(int length);

LogMelSpectrogram compute_logmel(const AudioClip& clip,
                                 const FeatureConfig& config = {});

std::string encode_logmel(const LogMelSpectrogram& spec);
LogMelSpectrogram decode_logmel(std::string_view bytes, std::string recording_id);

}  // namespace alsed

#endif  // ALSED_FEATURES_HPP_
