// include/alsed/selection.hpp

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

// Batch-mode sample selection: mismatch-first farthest traversal and the
// random / uncertainty reference strategies.
//
// Segment ids are dense: the candidate at position i has segment_id == i.

#ifndef ALSED_SELECTION_HPP_
#define ALSED_SELECTION_HPP_

#include <algorithm>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "alsed/labels.hpp"
#include "alsed/segmentation.hpp"

namespace alsed {

enum class Strategy { kMfft, kRandom, kUncertainty };

std::string_view to_string(Strategy s);
Strategy strategy_from_string(std::string_view name);

/// Pairwise cosine distances between segment mean embeddings. The full matrix
/// is cached up front for pools up to kCacheLimit segments and computed on
/// demand above that.
class SegmentDistances {
 public:
  static constexpr Eigen::Index kCacheLimit = 3000;

  explicit SegmentDistances(std::span<const CandidateSegment> segments);
  /// From an explicit symmetric distance matrix (tests, external metrics).
  explicit SegmentDistances(Eigen::MatrixXd matrix);

  double operator()(int a, int b) const;
  Eigen::Index size() const { return n_; }

 private:
  Eigen::Index n_ = 0;
  Eigen::MatrixXd unit_;       // rows: normalized mean embeddings
  std::vector<bool> degenerate_;
  Eigen::MatrixXd cache_;
};

struct SelectionState {
  std::map<int, LabelSet> annotated;
  std::vector<int> selected_in_batch;
  std::set<int> unlabeled;
  std::uint64_t seed = 0;
  int iteration = 1;

  static SelectionState fresh(int n_candidates, std::uint64_t seed);

  /// Pairwise disjoint and covering ids [0, n).
  bool consistent(int n_candidates) const;

  /// Moves the open batch into `annotated` with the given labels.
  void commit_batch(const std::map<int, LabelSet>& labels);

  /// Generator for the current iteration, derived from (seed, iteration) so a
  /// restored state selects exactly what an uninterrupted one would.
  std::mt19937_64 iteration_rng() const;
};

struct PredictionPair {
  int segment_id = -1;
  LabelSet model_labels;       // A_x
  LabelSet propagated_labels;  // B_x
  double similarity = 1.0;     // J(x)
};

/// Nearest annotated segment's labels for every unlabeled segment; ties go to
/// the lowest segment id. Throws if nothing is annotated.
std::map<int, LabelSet> propagate_labels(const SelectionState& state,
                                         const SegmentDistances& distances);

/// Classes of events overlapping the segment by at least `min_overlap_s`.
LabelSet derive_model_labels(std::span<const Event> events, const CandidateSegment& segment,
                             double min_overlap_s = 0.02);

/// A_x, B_x and J(x) for each unlabeled segment, in id order.
std::vector<PredictionPair> compute_predictions(const SelectionState& state,
                                                const SegmentDistances& distances,
                                                const std::map<int, LabelSet>& model_labels);

/// min over classes of 2|o_c - 0.5|.
double prediction_certainty(const Eigen::Ref<const Eigen::VectorXd>& pooled);

struct BatchQuota {
  double seconds = 0.0;
  int count = 0;  // when > 0 the batch is sized by segment count instead

  bool reached(double picked_seconds, int picked_count) const {
    return count > 0 ? picked_count >= count : picked_seconds >= seconds;
  }
};

struct Pick {
  int segment_id = -1;
  double j_value = std::numeric_limits<double>::quiet_NaN();
  double distance_to_selected = std::numeric_limits<double>::infinity();
};

struct BatchResult {
  std::vector<Pick> picks;
  bool exhausted = false;
};

/// One entry of the pool handed to the greedy traversal.
struct TraversalCandidate {
  int segment_id = -1;
  double duration_s = 0.0;
  double tier = 1.0;  // J value; lower tiers are drained first
};

/// Greedy mismatch-first farthest traversal. Repeatedly picks, within the
/// lowest remaining tier, the candidate maximizing its minimum distance to
/// `selected` plus everything picked so far; ties go to the lowest id. With an
/// empty selected set the first pick is `first_pick` (or the lowest id).
template <typename Distance>
BatchResult farthest_traversal(std::vector<TraversalCandidate> pool,
                               std::span<const int> selected, Distance&& distance,
                               const BatchQuota& quota,
                               std::optional<int> first_pick = std::nullopt) {
  std::sort(pool.begin(), pool.end(),
            [](const auto& a, const auto& b) { return a.segment_id < b.segment_id; });
  const std::size_t n = pool.size();
  std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
  for (int s : selected)
    for (std::size_t i = 0; i < n; ++i)
      min_dist[i] = std::min(min_dist[i], distance(pool[i].segment_id, s));

  std::vector<bool> taken(n, false);
  BatchResult result;
  double picked_s = 0.0;
  std::size_t remaining = n;
  while (remaining > 0 && !quota.reached(picked_s, static_cast<int>(result.picks.size()))) {
    std::size_t best = n;
    if (selected.empty() && result.picks.empty() && first_pick) {
      for (std::size_t i = 0; i < n; ++i)
        if (pool[i].segment_id == *first_pick) best = i;
    }
    if (best == n) {
      double tier = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i)
        if (!taken[i]) tier = std::min(tier, pool[i].tier);
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i] || pool[i].tier != tier) continue;
        if (best == n || min_dist[i] > min_dist[best]) best = i;
      }
    }
    taken[best] = true;
    --remaining;
    result.picks.push_back({pool[best].segment_id, pool[best].tier, min_dist[best]});
    picked_s += pool[best].duration_s;
    for (std::size_t i = 0; i < n; ++i)
      if (!taken[i])
        min_dist[i] = std::min(min_dist[i], distance(pool[i].segment_id, pool[best].segment_id));
  }
  result.exhausted = remaining == 0;
  return result;
}

struct SelectionInputs {
  /// Required for mfft once anything is annotated; absent means pure farthest
  /// traversal over the unlabeled pool.
  const std::vector<PredictionPair>* predictions = nullptr;
  /// Segment-level pooled class probabilities, required by uncertainty
  /// sampling after the first iteration.
  const std::map<int, Eigen::VectorXd>* pooled_outputs = nullptr;
};

/// Selects the next batch and moves the picks from `unlabeled` to
/// `selected_in_batch` in pick order. Throws on an empty pool.
BatchResult select_batch(Strategy strategy, SelectionState& state,
                         std::span<const CandidateSegment> segments,
                         const SegmentDistances& distances, const BatchQuota& quota,
                         const SelectionInputs& inputs = {});

/// Selection trace: iteration,pick_index,segment_id,strategy,J_value,distance_to_S
void write_trace_header(std::ostream& out);
void write_trace_rows(std::ostream& out, int iteration, Strategy strategy,
                      const BatchResult& batch);

}  // namespace alsed

#endif  // ALSED_SELECTION_HPP_
