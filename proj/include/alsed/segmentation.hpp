// include/alsed/segmentation.hpp

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

#ifndef ALSED_SEGMENTATION_HPP_
#define ALSED_SEGMENTATION_HPP_

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "alsed/embeddings.hpp"

namespace alsed {

/// Cosine distance 1 - u.v/(|u||v|); 1 when either norm is below 1e-12.
template <typename DerivedU, typename DerivedV>
double cosine_distance(const Eigen::MatrixBase<DerivedU>& u,
                       const Eigen::MatrixBase<DerivedV>& v) {
  const double nu = u.template cast<double>().norm();
  const double nv = v.template cast<double>().norm();
  if (nu < 1e-12 || nv < 1e-12) return 1.0;
  return 1.0 - u.template cast<double>().dot(v.template cast<double>()) / (nu * nv);
}

/// Change likelihood for t in [first_frame, first_frame + values.size()).
struct ChangeLikelihoodSeries {
  std::vector<double> values;
  Eigen::Index first_frame = 0;  // equals the half-window M
  int half_window = 24;
  Eigen::Index total_frames = 0;
  double hop_s = 0.02;
  /// Set when T < 2M; no likelihood is defined and the recording is one segment.
  bool too_short = false;

  bool empty() const { return values.empty(); }
  Eigen::Index frame_at(std::size_t i) const { return first_frame + static_cast<Eigen::Index>(i); }
};

ChangeLikelihoodSeries change_likelihood(const EmbeddingSequence& emb,
                                         int half_window = 24);

struct PeakPicking {
  double min_gap_s = 1.0;
  double threshold = 0.1;
};

/// Strict local maxima over +-M frames with value >= threshold, scanned left
/// to right; peaks closer than min_gap_s to the last accepted change point or
/// to either recording boundary are skipped.
std::vector<Eigen::Index> detect_change_points(const ChangeLikelihoodSeries& series,
                                               const PeakPicking& picking = {});

enum class SegmentationMode { kVariable, kFixed };

struct SegmentationConfig {
  SegmentationMode mode = SegmentationMode::kVariable;
  int half_window = 24;
  PeakPicking picking;
  double fixed_length_s = 2.0;
};

struct CandidateSegment {
  int segment_id = -1;
  std::string recording_id;
  Eigen::Index start_frame = 0;  // [start_frame, end_frame)
  Eigen::Index end_frame = 0;
  double start_s = 0.0;
  double end_s = 0.0;
  Eigen::VectorXf mean_embedding;

  double duration_s() const { return end_s - start_s; }
};

/// Splits one recording into segments tiling [0, T). Frame t starts at
/// t * hop_s; the last segment ends at the recording duration. Segment ids are
/// assigned consecutively from `first_id`.
std::vector<CandidateSegment> segment_recording(const EmbeddingSequence& emb,
                                                const SegmentationConfig& config,
                                                int first_id = 0);

/// Segments from explicit change-point frames (no peak picking).
std::vector<CandidateSegment> segments_from_boundaries(
    const EmbeddingSequence& emb, std::span<const Eigen::Index> change_points,
    int first_id = 0);

/// Delimited text: segment_id,recording_id,start_s,end_s
void write_segment_table(std::ostream& out, std::span<const CandidateSegment> segments);

struct SegmentRow {
  int segment_id;
  std::string recording_id;
  double start_s;
  double end_s;
};
std::vector<SegmentRow> read_segment_table(std::istream& in);

}  // namespace alsed

#endif  // ALSED_SEGMENTATION_HPP_
