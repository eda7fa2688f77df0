// include/alsed/labels.hpp

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

#ifndef ALSED_LABELS_HPP_
#define ALSED_LABELS_HPP_

#include <initializer_list>
#include <set>
#include <string>
#include <vector>

namespace alsed {

/// Set of class indices into the project's class list. Empty means
/// "no target events".
class LabelSet {
 public:
  LabelSet() = default;
  LabelSet(std::initializer_list<int> classes) : classes_(classes) {}
  template <typename It>
  LabelSet(It first, It last) : classes_(first, last) {}

  void insert(int c) { classes_.insert(c); }
  bool contains(int c) const { return classes_.count(c) != 0; }
  bool empty() const { return classes_.empty(); }
  std::size_t size() const { return classes_.size(); }
  auto begin() const { return classes_.begin(); }
  auto end() const { return classes_.end(); }

  std::size_t intersection_size(const LabelSet& other) const;
  std::size_t union_size(const LabelSet& other) const;

  friend bool operator==(const LabelSet&, const LabelSet&) = default;

 private:
  std::set<int> classes_;
};

/// Timestamped event [onset_s, offset_s) of one class.
struct Event {
  int class_id = 0;
  double onset_s = 0.0;
  double offset_s = 0.0;

  double duration_s() const { return offset_s - onset_s; }
  friend bool operator==(const Event&, const Event&) = default;
};

/// Length of the intersection of [a0, a1) and [b0, b1), or 0.
inline double overlap_s(double a0, double a1, double b0, double b1) {
  const double lo = a0 > b0 ? a0 : b0;
  const double hi = a1 < b1 ? a1 : b1;
  return hi > lo ? hi - lo : 0.0;
}

/// Jaccard index |a n b| / |a u b|, or 1 when the union is empty.
double jaccard_similarity(const LabelSet& a, const LabelSet& b);

/// Class names in class-list order, e.g. "cry;gun".
std::string label_names(const LabelSet& labels, const std::vector<std::string>& classes);

}  // namespace alsed

#endif  // ALSED_LABELS_HPP_
