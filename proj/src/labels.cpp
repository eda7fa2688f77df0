// src/labels.cpp

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

#include "alsed/labels.hpp"

namespace alsed {

std::size_t LabelSet::intersection_size(const LabelSet& other) const {
  std::size_t n = 0;
  for (int c : classes_) n += other.contains(c) ? 1 : 0;
  return n;
}

std::size_t LabelSet::union_size(const LabelSet& other) const {
  return size() + other.size() - intersection_size(other);
}

double jaccard_similarity(const LabelSet& a, const LabelSet& b) {
  const std::size_t u = a.union_size(b);
  if (u == 0) return 1.0;
  return static_cast<double>(a.intersection_size(b)) / static_cast<double>(u);
}

std::string label_names(const LabelSet& labels, const std::vector<std::string>& classes) {
  std::string out;
  for (int c : labels) {
    if (!out.empty()) out += ';';
    out += (c >= 0 && c < static_cast<int>(classes.size())) ? classes[static_cast<std::size_t>(c)]
                                                            : std::to_string(c);
  }
  return out;
}

}  // namespace alsed
