// src/evaluation.cpp

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

#include "alsed/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "alsed/error.hpp"

namespace alsed {

EventRoll build_roll(std::span<const Event> events, double duration_s, int n_classes,
                     double segment_s) {
  if (duration_s <= 0.0 || segment_s <= 0.0) throw InputError("roll needs positive durations");
  const auto n_segments = static_cast<Eigen::Index>(std::ceil(duration_s / segment_s - 1e-9));
  EventRoll roll;
  roll.segment_s = segment_s;
  roll.active = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n_segments, n_classes, false);
  for (const auto& e : events) {
    if (e.class_id < 0 || e.class_id >= n_classes) throw InputError("event class out of range");
    if (e.onset_s < -1e-9 || e.offset_s > duration_s + 1e-6 || e.offset_s < e.onset_s)
      throw InputError("event outside recording bounds");
    for (Eigen::Index k = 0; k < n_segments; ++k) {
      const double lo = static_cast<double>(k) * segment_s;
      const double hi = lo + segment_s;
      if (e.onset_s < hi && e.offset_s > lo) roll.active(k, e.class_id) = true;
    }
  }
  return roll;
}

double ErReport::error_rate() const {
  if (reference_active == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(substitutions + deletions + insertions) /
         static_cast<double>(reference_active);
}

ErReport& ErReport::operator+=(const ErReport& o) {
  substitutions += o.substitutions;
  deletions += o.deletions;
  insertions += o.insertions;
  reference_active += o.reference_active;
  return *this;
}

ErReport error_rate(const EventRoll& reference, const EventRoll& hypothesis) {
  if (reference.segments() != hypothesis.segments() || reference.classes() != hypothesis.classes())
    throw InputError("reference and hypothesis rolls differ in shape");
  ErReport r;
  for (Eigen::Index k = 0; k < reference.segments(); ++k) {
    std::int64_t fn = 0, fp = 0;
    for (Eigen::Index c = 0; c < reference.classes(); ++c) {
      const bool ref = reference.active(k, c), hyp = hypothesis.active(k, c);
      fn += (ref && !hyp) ? 1 : 0;
      fp += (hyp && !ref) ? 1 : 0;
      r.reference_active += ref ? 1 : 0;
    }
    r.substitutions += std::min(fn, fp);
    r.deletions += std::max<std::int64_t>(0, fn - fp);
    r.insertions += std::max<std::int64_t>(0, fp - fn);
  }
  return r;
}

}  // namespace alsed
