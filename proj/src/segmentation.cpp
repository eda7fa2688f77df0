// src/segmentation.cpp

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

#include "alsed/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "alsed/error.hpp"
#include "alsed/text_io.hpp"

namespace alsed {

ChangeLikelihoodSeries change_likelihood(const EmbeddingSequence& emb,
                                         int half_window) {
  if (half_window <= 0) throw InputError("half window must be positive");
  ChangeLikelihoodSeries series;
  series.half_window = half_window;
  series.first_frame = half_window;
  series.total_frames = emb.frames();
  series.hop_s = emb.hop_s;
  const Eigen::Index T = emb.frames();
  const Eigen::Index M = half_window;
  if (T < 2 * M) {
    series.too_short = true;
    return series;
  }

  // prefix(t) = sum of rows [0, t)
  const Eigen::Index D = emb.dim();
  Eigen::MatrixXd prefix = Eigen::MatrixXd::Zero(T + 1, D);
  for (Eigen::Index t = 0; t < T; ++t)
    prefix.row(t + 1) = prefix.row(t) + emb.values.row(t).cast<double>();

  series.values.reserve(static_cast<std::size_t>(T - 2 * M + 1));
  for (Eigen::Index t = M; t <= T - M; ++t) {
    const Eigen::RowVectorXd past = (prefix.row(t) - prefix.row(t - M)) / double(M);
    const Eigen::RowVectorXd future = (prefix.row(t + M) - prefix.row(t)) / double(M);
    const double np = past.norm(), nf = future.norm();
    const double d = (np < 1e-12 || nf < 1e-12) ? 0.0 : 1.0 - past.dot(future) / (np * nf);
    series.values.push_back(std::clamp(d, 0.0, 2.0));
  }
  return series;
}

std::vector<Eigen::Index> detect_change_points(const ChangeLikelihoodSeries& series,
                                               const PeakPicking& picking) {
  std::vector<Eigen::Index> accepted;
  if (series.empty()) return accepted;
  const auto n = static_cast<Eigen::Index>(series.values.size());
  const Eigen::Index M = series.half_window;
  const auto min_gap = static_cast<Eigen::Index>(std::llround(picking.min_gap_s / series.hop_s));

  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = series.values[static_cast<std::size_t>(i)];
    if (v < picking.threshold) continue;
    bool is_peak = true;
    for (Eigen::Index j = std::max<Eigen::Index>(0, i - M);
         j <= std::min(n - 1, i + M) && is_peak; ++j)
      if (j != i && series.values[static_cast<std::size_t>(j)] >= v) is_peak = false;
    if (!is_peak) continue;

    const Eigen::Index t = series.first_frame + i;
    if (t < min_gap || series.total_frames - t < min_gap) continue;
    if (!accepted.empty() && t - accepted.back() < min_gap) continue;
    accepted.push_back(t);
  }
  return accepted;
}

std::vector<CandidateSegment> segments_from_boundaries(
    const EmbeddingSequence& emb, std::span<const Eigen::Index> change_points,
    int first_id) {
  const Eigen::Index T = emb.frames();
  std::vector<Eigen::Index> bounds{0};
  for (auto cp : change_points) {
    if (cp <= bounds.back() || cp >= T)
      throw InputError(emb.recording_id + ": change points must be increasing and inside (0, T)");
    bounds.push_back(cp);
  }
  bounds.push_back(T);

  std::vector<CandidateSegment> out;
  out.reserve(bounds.size() - 1);
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    CandidateSegment seg;
    seg.segment_id = first_id + static_cast<int>(i);
    seg.recording_id = emb.recording_id;
    seg.start_frame = bounds[i];
    seg.end_frame = bounds[i + 1];
    seg.start_s = static_cast<double>(seg.start_frame) * emb.hop_s;
    seg.end_s = (i + 2 == bounds.size()) ? emb.duration_s
                                         : static_cast<double>(seg.end_frame) * emb.hop_s;
    seg.mean_embedding = emb.values.middleRows(seg.start_frame, seg.end_frame - seg.start_frame)
                             .cast<double>()
                             .colwise()
                             .mean()
                             .transpose()
                             .cast<float>();
    out.push_back(std::move(seg));
  }
  return out;
}

std::vector<CandidateSegment> segment_recording(const EmbeddingSequence& emb,
                                                const SegmentationConfig& config,
                                                int first_id) {
  if (emb.frames() == 0) throw InputError(emb.recording_id + ": empty embedding sequence");
  std::vector<Eigen::Index> cuts;
  if (config.mode == SegmentationMode::kVariable) {
    cuts = detect_change_points(change_likelihood(emb, config.half_window), config.picking);
  } else {
    const auto len = static_cast<Eigen::Index>(std::llround(config.fixed_length_s / emb.hop_s));
    const auto min_tail = static_cast<Eigen::Index>(std::llround(1.0 / emb.hop_s));
    if (len <= 0) throw InputError("fixed segment length must be positive");
    for (Eigen::Index t = len; t < emb.frames(); t += len) {
      if (emb.frames() - t < min_tail) break;  // remainder joins the last window
      cuts.push_back(t);
    }
  }
  return segments_from_boundaries(emb, cuts, first_id);
}

void write_segment_table(std::ostream& out, std::span<const CandidateSegment> segments) {
  out << "segment_id,recording_id,start_s,end_s\n";
  for (const auto& s : segments)
    out << s.segment_id << ',' << s.recording_id << ',' << format_double(s.start_s) << ','
        << format_double(s.end_s) << '\n';
}

std::vector<SegmentRow> read_segment_table(std::istream& in) {
  std::vector<SegmentRow> rows;
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty segment table");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 4) throw InputError("segment table row must have 4 fields: " + line);
    rows.push_back({std::stoi(f[0]), f[1], std::stod(f[2]), std::stod(f[3])});
  }
  return rows;
}

}  // namespace alsed
