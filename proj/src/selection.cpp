// src/selection.cpp

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

#include "alsed/selection.hpp"

#include <cmath>
#include <ostream>

#include "alsed/error.hpp"
#include "alsed/text_io.hpp"

namespace alsed {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::kMfft:
      return "mfft";
    case Strategy::kRandom:
      return "random";
    case Strategy::kUncertainty:
      return "uncertainty";
  }
  return "unknown";
}

Strategy strategy_from_string(std::string_view name) {
  if (name == "mfft") return Strategy::kMfft;
  if (name == "random") return Strategy::kRandom;
  if (name == "uncertainty") return Strategy::kUncertainty;
  throw InputError("unknown selection strategy: " + std::string(name));
}

SegmentDistances::SegmentDistances(std::span<const CandidateSegment> segments)
    : n_(static_cast<Eigen::Index>(segments.size())) {
  if (n_ == 0) return;
  const Eigen::Index D = segments.front().mean_embedding.size();
  unit_.resize(n_, D);
  degenerate_.assign(static_cast<std::size_t>(n_), false);
  for (Eigen::Index i = 0; i < n_; ++i) {
    const auto& seg = segments[static_cast<std::size_t>(i)];
    if (seg.segment_id != i) throw InputError("segment ids must equal their position");
    if (seg.mean_embedding.size() != D) throw InputError("mean embedding size mismatch");
    Eigen::VectorXd v = seg.mean_embedding.cast<double>();
    const double norm = v.norm();
    if (norm < 1e-12) {
      degenerate_[static_cast<std::size_t>(i)] = true;
      unit_.row(i).setZero();
    } else {
      unit_.row(i) = v.transpose() / norm;
    }
  }
  if (n_ <= kCacheLimit) {
    cache_ = Eigen::MatrixXd::Ones(n_, n_) - unit_ * unit_.transpose();
    for (Eigen::Index i = 0; i < n_; ++i) {
      if (degenerate_[static_cast<std::size_t>(i)]) {
        cache_.row(i).setOnes();
        cache_.col(i).setOnes();
      }
    }
    cache_ = cache_.cwiseMax(0.0).cwiseMin(2.0);
  }
}

SegmentDistances::SegmentDistances(Eigen::MatrixXd matrix)
    : n_(matrix.rows()), cache_(std::move(matrix)) {
  if (cache_.rows() != cache_.cols()) throw InputError("distance matrix must be square");
}

double SegmentDistances::operator()(int a, int b) const {
  if (cache_.size() > 0) return cache_(a, b);
  if (degenerate_[static_cast<std::size_t>(a)] || degenerate_[static_cast<std::size_t>(b)])
    return 1.0;
  return std::clamp(1.0 - unit_.row(a).dot(unit_.row(b)), 0.0, 2.0);
}

SelectionState SelectionState::fresh(int n_candidates, std::uint64_t seed) {
  SelectionState s;
  s.seed = seed;
  for (int i = 0; i < n_candidates; ++i) s.unlabeled.insert(s.unlabeled.end(), i);
  return s;
}

bool SelectionState::consistent(int n_candidates) const {
  std::vector<int> seen(static_cast<std::size_t>(n_candidates), 0);
  auto mark = [&](int id) {
    if (id < 0 || id >= n_candidates) return false;
    return ++seen[static_cast<std::size_t>(id)] == 1;
  };
  for (const auto& [id, labels] : annotated)
    if (!mark(id)) return false;
  for (int id : selected_in_batch)
    if (!mark(id)) return false;
  for (int id : unlabeled)
    if (!mark(id)) return false;
  return std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
}

void SelectionState::commit_batch(const std::map<int, LabelSet>& labels) {
  for (int id : selected_in_batch) {
    auto it = labels.find(id);
    if (it == labels.end())
      throw InputError("missing annotation for segment " + std::to_string(id));
    annotated[id] = it->second;
  }
  selected_in_batch.clear();
  ++iteration;
}

std::mt19937_64 SelectionState::iteration_rng() const {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(iteration), 0x5e1ec7u};
  return std::mt19937_64(seq);
}

std::map<int, LabelSet> propagate_labels(const SelectionState& state,
                                         const SegmentDistances& distances) {
  if (state.annotated.empty())
    throw InputError("label propagation needs at least one annotated segment");
  std::map<int, LabelSet> out;
  for (int x : state.unlabeled) {
    int nearest = -1;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [a, labels] : state.annotated) {  // ascending id
      const double d = distances(x, a);
      if (d < best) {
        best = d;
        nearest = a;
      }
    }
    out.emplace(x, state.annotated.at(nearest));
  }
  return out;
}

LabelSet derive_model_labels(std::span<const Event> events, const CandidateSegment& segment,
                             double min_overlap_s) {
  LabelSet out;
  for (const auto& e : events)
    if (overlap_s(e.onset_s, e.offset_s, segment.start_s, segment.end_s) >= min_overlap_s - 1e-9)
      out.insert(e.class_id);
  return out;
}

std::vector<PredictionPair> compute_predictions(const SelectionState& state,
                                                const SegmentDistances& distances,
                                                const std::map<int, LabelSet>& model_labels) {
  const auto propagated = propagate_labels(state, distances);
  std::vector<PredictionPair> out;
  out.reserve(propagated.size());
  for (const auto& [id, b] : propagated) {
    PredictionPair p;
    p.segment_id = id;
    if (auto it = model_labels.find(id); it != model_labels.end()) p.model_labels = it->second;
    p.propagated_labels = b;
    p.similarity = jaccard_similarity(p.model_labels, p.propagated_labels);
    out.push_back(std::move(p));
  }
  return out;
}

double prediction_certainty(const Eigen::Ref<const Eigen::VectorXd>& pooled) {
  return (2.0 * (pooled.array() - 0.5).abs()).minCoeff();
}

namespace {

double min_distance_to(int x, std::span<const int> set, const SegmentDistances& distances) {
  double best = std::numeric_limits<double>::infinity();
  for (int s : set) best = std::min(best, distances(x, s));
  return best;
}

}  // namespace

BatchResult select_batch(Strategy strategy, SelectionState& state,
                         std::span<const CandidateSegment> segments,
                         const SegmentDistances& distances, const BatchQuota& quota,
                         const SelectionInputs& inputs) {
  if (state.unlabeled.empty()) throw ConflictError("unlabeled pool is empty");
  if (!state.selected_in_batch.empty()) throw ConflictError("a batch is already open");

  std::vector<int> selected;
  for (const auto& [id, labels] : state.annotated) selected.push_back(id);

  auto duration = [&](int id) { return segments[static_cast<std::size_t>(id)].duration_s(); };
  auto rng = state.iteration_rng();
  BatchResult result;

  const bool use_mfft_tiers = strategy == Strategy::kMfft && inputs.predictions != nullptr;
  const bool use_uncertainty = strategy == Strategy::kUncertainty && inputs.pooled_outputs != nullptr;

  if (strategy == Strategy::kMfft) {
    std::vector<TraversalCandidate> pool;
    pool.reserve(state.unlabeled.size());
    if (use_mfft_tiers) {
      std::map<int, double> tier;
      for (const auto& p : *inputs.predictions) tier[p.segment_id] = p.similarity;
      for (int id : state.unlabeled) {
        auto it = tier.find(id);
        if (it == tier.end()) throw InputError("missing prediction for segment " + std::to_string(id));
        pool.push_back({id, duration(id), it->second});
      }
    } else {
      for (int id : state.unlabeled) pool.push_back({id, duration(id), 0.0});
    }
    std::optional<int> first;
    if (selected.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      first = pool[pick(rng)].segment_id;
    }
    result = farthest_traversal(std::move(pool), selected, distances, quota, first);
    if (!use_mfft_tiers)
      for (auto& p : result.picks) p.j_value = std::numeric_limits<double>::quiet_NaN();
  } else {
    std::vector<int> order;
    if (use_uncertainty) {
      std::vector<std::pair<double, int>> ranked;
      for (int id : state.unlabeled) {
        auto it = inputs.pooled_outputs->find(id);
        if (it == inputs.pooled_outputs->end())
          throw InputError("missing pooled output for segment " + std::to_string(id));
        ranked.emplace_back(prediction_certainty(it->second), id);
      }
      std::sort(ranked.begin(), ranked.end());
      for (const auto& [c, id] : ranked) order.push_back(id);
    } else {
      std::vector<int> pool(state.unlabeled.begin(), state.unlabeled.end());
      while (!pool.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        auto k = pick(rng);
        order.push_back(pool[k]);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(k));
      }
    }
    double picked_s = 0.0;
    std::vector<int> running = selected;
    for (int id : order) {
      if (quota.reached(picked_s, static_cast<int>(result.picks.size()))) break;
      Pick p;
      p.segment_id = id;
      p.distance_to_selected = min_distance_to(id, running, distances);
      result.picks.push_back(p);
      running.push_back(id);
      picked_s += duration(id);
    }
  }

  for (const auto& p : result.picks) {
    state.unlabeled.erase(p.segment_id);
    state.selected_in_batch.push_back(p.segment_id);
  }
  result.exhausted = state.unlabeled.empty();
  return result;
}

void write_trace_header(std::ostream& out) {
  out << "iteration,pick_index,segment_id,strategy,J_value,distance_to_S\n";
}

void write_trace_rows(std::ostream& out, int iteration, Strategy strategy,
                      const BatchResult& batch) {
  for (std::size_t i = 0; i < batch.picks.size(); ++i) {
    const auto& p = batch.picks[i];
    out << iteration << ',' << i << ',' << p.segment_id << ',' << to_string(strategy) << ',';
    if (!std::isnan(p.j_value)) out << format_double(p.j_value);
    out << ',';
    if (std::isfinite(p.distance_to_selected)) out << format_double(p.distance_to_selected);
    out << '\n';
  }
}

}  // namespace alsed
