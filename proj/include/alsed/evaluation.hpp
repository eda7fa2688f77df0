// include/alsed/evaluation.hpp

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

#ifndef ALSED_EVALUATION_HPP_
#define ALSED_EVALUATION_HPP_

#include <cstdint>
#include <span>

#include <Eigen/Dense>

#include "alsed/labels.hpp"

namespace alsed {

/// Per 1-second evaluation segment and class: is the class active.
struct EventRoll {
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> active;  // segments x classes
  double segment_s = 1.0;

  Eigen::Index segments() const { return active.rows(); }
  Eigen::Index classes() const { return active.cols(); }
};

/// Marks segment k active for a class when an event of that class overlaps
/// [k, k+1) seconds with positive measure. The roll has ceil(duration) rows;
/// a final partial segment counts as a full one.
EventRoll build_roll(std::span<const Event> events, double duration_s, int n_classes,
                     double segment_s = 1.0);

/// Segment-based error counts, summed over segments (and recordings).
struct ErReport {
  std::int64_t substitutions = 0;
  std::int64_t deletions = 0;
  std::int64_t insertions = 0;
  std::int64_t reference_active = 0;

  /// (S + D + I) / N, NaN when N is zero.
  double error_rate() const;

  ErReport& operator+=(const ErReport& other);
  friend bool operator==(const ErReport&, const ErReport&) = default;
};

ErReport error_rate(const EventRoll& reference, const EventRoll& hypothesis);

}  // namespace alsed

#endif  // ALSED_EVALUATION_HPP_
