// tests/unit/test_selection.cpp

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

#include <doctest.h>

#include <random>
#include <sstream>

#include "alsed/error.hpp"
#include "alsed/selection.hpp"
#include "oracles.hpp"

using namespace alsed;

namespace {

CandidateSegment seg(int id, double start, double end, Eigen::VectorXf mean = Eigen::VectorXf()) {
  CandidateSegment s;
  s.segment_id = id;
  s.recording_id = "r";
  s.start_s = start;
  s.end_s = end;
  s.mean_embedding = mean.size() ? mean : Eigen::VectorXf::Ones(2);
  return s;
}

// Symmetric matrix with entries on a coarse grid so ties are common.
Eigen::MatrixXd random_distances(int n, std::mt19937& rng) {
  std::uniform_int_distribution<int> q(0, 8);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) d(i, j) = d(j, i) = q(rng) * 0.25;
  return d;
}

}  // namespace

TEST_SUITE("selection") {

TEST_CASE("jaccard examples") {
  CHECK(jaccard_similarity({}, {}) == 1.0);
  CHECK(jaccard_similarity({1, 2}, {1, 2}) == 1.0);
  CHECK(jaccard_similarity({1, 2}, {2, 3}) == doctest::Approx(1.0 / 3.0));
  CHECK(jaccard_similarity({1}, {}) == 0.0);
}

TEST_CASE("segment distances from mean embeddings") {
  std::vector<CandidateSegment> segs{seg(0, 0, 1, Eigen::Vector2f(1, 0)),
                                     seg(1, 1, 2, Eigen::Vector2f(1, 1)),
                                     seg(2, 2, 3, Eigen::Vector2f(0, 0))};
  SegmentDistances d(segs);
  CHECK(d(0, 1) == doctest::Approx(1.0 - 1.0 / std::sqrt(2.0)));
  CHECK(d(0, 0) == doctest::Approx(0.0));
  CHECK(d(0, 2) == 1.0);
  CHECK(d(2, 2) == 1.0);
}

TEST_CASE("label propagation") {
  SelectionState st = SelectionState::fresh(5, 1);
  SUBCASE("single source") {
    st.unlabeled.erase(2);
    st.annotated[2] = {0};
    std::mt19937 rng(1);
    const auto out = propagate_labels(st, SegmentDistances(random_distances(5, rng)));
    CHECK(out.size() == 4);
    for (const auto& [id, l] : out) CHECK(l == LabelSet{0});
  }
  SUBCASE("exact tie goes to the lower id") {
    Eigen::MatrixXd d = Eigen::MatrixXd::Constant(5, 5, 0.5);
    d.diagonal().setZero();
    st.unlabeled.erase(1);
    st.unlabeled.erase(3);
    st.annotated[1] = {7};
    st.annotated[3] = {8};
    const auto out = propagate_labels(st, SegmentDistances(d));
    CHECK(out.at(0) == LabelSet{7});
    CHECK(out.at(4) == LabelSet{7});
  }
  SUBCASE("points on a line match exhaustive nearest neighbour") {
    const std::vector<double> x{0.0, 1.0, 2.5, 4.0, 7.0};
    Eigen::MatrixXd d(5, 5);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) d(i, j) = std::abs(x[i] - x[j]);
    st.unlabeled.erase(0);
    st.unlabeled.erase(3);
    st.annotated[0] = {1};
    st.annotated[3] = {2};
    const auto out = propagate_labels(st, SegmentDistances(d));
    for (int u : {1, 2, 4}) {
      const int nearest = std::abs(x[u] - x[0]) <= std::abs(x[u] - x[3]) ? 0 : 3;
      CHECK(out.at(u) == st.annotated.at(nearest));
    }
  }
  SUBCASE("nothing annotated is an error") {
    CHECK_THROWS(propagate_labels(st, SegmentDistances(Eigen::MatrixXd::Zero(5, 5))));
  }
}

TEST_CASE("model labels from detected events") {
  const auto s = seg(0, 5.0, 8.0);
  CHECK(derive_model_labels({}, s).empty());
  const std::vector<Event> spanning{{2, 5.0, 8.0}};
  CHECK(derive_model_labels(spanning, s) == LabelSet{2});
  const std::vector<Event> edge{{1, 4.99, 5.50}};
  CHECK(derive_model_labels(edge, s) == LabelSet{1});
  const std::vector<Event> touching{{1, 3.0, 5.0}, {0, 8.0, 9.0}};
  CHECK(derive_model_labels(touching, s).empty());
}

TEST_CASE("certainty is min over classes of 2|o - 0.5|") {
  CHECK(prediction_certainty(Eigen::Vector2d(0.5, 0.9)) == doctest::Approx(0.0));
  CHECK(prediction_certainty(Eigen::Vector2d(0.3, 0.9)) == doctest::Approx(0.4));
}

TEST_CASE("farthest traversal prefers the farther candidate") {
  Eigen::MatrixXd d(3, 3);
  d << 0, 0.5, 0.2,  //
      0.5, 0, 0.7,   //
      0.2, 0.7, 0;
  const std::vector<TraversalCandidate> pool{{0, 1.0, 1.0}, {1, 1.0, 1.0}};
  const std::vector<int> s{2};
  const auto r = farthest_traversal(pool, s, SegmentDistances(d), BatchQuota{0, 1});
  REQUIRE(r.picks.size() == 1);
  CHECK(r.picks[0].segment_id == 1);
  CHECK(r.picks[0].distance_to_selected == doctest::Approx(0.7));
}

TEST_CASE("mismatch-first: J values (0, 0, 0.5, 1) with a two-segment quota") {
  Eigen::MatrixXd d(5, 5);
  d << 0, 0.9, 0.3, 0.1, 0.4,  //
      0.9, 0, 0.6, 0.8, 0.2,   //
      0.3, 0.6, 0, 0.5, 0.9,   //
      0.1, 0.8, 0.5, 0, 0.7,   //
      0.4, 0.2, 0.9, 0.7, 0;
  std::vector<CandidateSegment> segs;
  for (int i = 0; i < 5; ++i) segs.push_back(seg(i, i, i + 1));
  SelectionState st = SelectionState::fresh(5, 3);
  st.unlabeled.erase(4);
  st.annotated[4] = {0};
  std::vector<PredictionPair> preds(4);
  const double j[] = {0.5, 0.0, 1.0, 0.0};
  for (int i = 0; i < 4; ++i) {
    preds[i].segment_id = i;
    preds[i].similarity = j[i];
  }
  SelectionInputs in;
  in.predictions = &preds;
  const auto r = select_batch(Strategy::kMfft, st, segs, SegmentDistances(d), BatchQuota{2.0, 0}, in);
  REQUIRE(r.picks.size() == 2);
  // d(3,4) = 0.7 > d(1,4) = 0.2, so 3 first, then 1
  CHECK(r.picks[0].segment_id == 3);
  CHECK(r.picks[1].segment_id == 1);
  CHECK(r.picks[0].j_value == 0.0);
  CHECK(st.selected_in_batch == std::vector<int>{3, 1});
  CHECK(st.consistent(5));
  const auto oracle = oracle::greedy_traversal(d, {0, 1, 2, 3}, {0.5, 0.0, 1.0, 0.0, 0.0},
                                               {1, 1, 1, 1, 1}, {4}, 2.0, -1);
  CHECK(oracle == std::vector<int>{3, 1});
}

TEST_CASE("farthest traversal matches the brute-force greedy oracle") {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = std::uniform_int_distribution<int>(2, 50)(rng);
    const Eigen::MatrixXd d = random_distances(n, rng);
    std::vector<double> tier(n), dur(n);
    std::vector<int> ids, chosen;
    const bool tiers = trial % 2 == 1;
    for (int i = 0; i < n; ++i) {
      tier[i] = tiers ? std::uniform_int_distribution<int>(0, 2)(rng) * 0.5 : 1.0;
      dur[i] = std::uniform_int_distribution<int>(1, 8)(rng) * 0.5;
      if (std::bernoulli_distribution(0.2)(rng)) chosen.push_back(i);
      else ids.push_back(i);
    }
    if (ids.empty()) continue;
    const int first = chosen.empty() ? ids[std::uniform_int_distribution<std::size_t>(0, ids.size() - 1)(rng)] : -1;
    const double quota = std::uniform_real_distribution<double>(0.5, 20.0)(rng);
    std::vector<TraversalCandidate> pool;
    for (int i : ids) pool.push_back({i, dur[i], tier[i]});
    std::shuffle(pool.begin(), pool.end(), rng);
    const auto got = farthest_traversal(pool, chosen, SegmentDistances(d), BatchQuota{quota, 0},
                                        first >= 0 ? std::optional<int>(first) : std::nullopt);
    std::vector<int> order;
    for (const auto& p : got.picks) order.push_back(p.segment_id);
    CHECK(order == oracle::greedy_traversal(d, ids, tier, dur, chosen, quota, first));
  }
}

TEST_CASE("all-mismatch candidates are drained before any partial match") {
  std::mt19937 rng(8);
  const Eigen::MatrixXd d = random_distances(30, rng);
  std::vector<TraversalCandidate> pool;
  for (int i = 0; i < 30; ++i) pool.push_back({i, 1.0, i % 3 == 0 ? 0.0 : 1.0});
  const std::vector<int> s{};
  const auto r = farthest_traversal(pool, s, SegmentDistances(d), BatchQuota{15.0, 0});
  for (std::size_t k = 0; k < 10; ++k) CHECK(r.picks[k].segment_id % 3 == 0);
  for (std::size_t k = 10; k < r.picks.size(); ++k) CHECK(r.picks[k].segment_id % 3 != 0);
}

TEST_CASE("uncertainty picks the least certain first") {
  std::vector<CandidateSegment> segs{seg(0, 0, 1), seg(1, 1, 2), seg(2, 2, 3)};
  SelectionState st = SelectionState::fresh(3, 1);
  st.unlabeled.erase(2);
  st.annotated[2] = {};
  std::map<int, Eigen::VectorXd> pooled{{0, Eigen::Vector2d(0.3, 0.9)},
                                        {1, Eigen::Vector2d(0.5, 0.9)}};
  SelectionInputs in;
  in.pooled_outputs = &pooled;
  const auto r = select_batch(Strategy::kUncertainty, st, segs,
                              SegmentDistances(Eigen::MatrixXd::Ones(3, 3)), BatchQuota{0, 1}, in);
  REQUIRE(r.picks.size() == 1);
  CHECK(r.picks[0].segment_id == 1);
}

TEST_CASE("selection is deterministic per seed and iteration") {
  std::mt19937 rng(4);
  const int n = 40;
  const Eigen::MatrixXd d = random_distances(n, rng);
  std::vector<CandidateSegment> segs;
  for (int i = 0; i < n; ++i) segs.push_back(seg(i, i, i + 1.5));
  for (Strategy s : {Strategy::kMfft, Strategy::kRandom, Strategy::kUncertainty}) {
    auto a = SelectionState::fresh(n, 99), b = SelectionState::fresh(n, 99);
    const auto ra = select_batch(s, a, segs, SegmentDistances(d), BatchQuota{6.0, 0});
    const auto rb = select_batch(s, b, segs, SegmentDistances(d), BatchQuota{6.0, 0});
    REQUIRE(ra.picks.size() == rb.picks.size());
    CHECK(ra.picks.size() == 4);  // 4 x 1.5 s reaches 6 s
    for (std::size_t k = 0; k < ra.picks.size(); ++k)
      CHECK(ra.picks[k].segment_id == rb.picks[k].segment_id);
    CHECK(a.consistent(n));
  }
  auto c = SelectionState::fresh(n, 100);
  auto e = SelectionState::fresh(n, 99);
  const auto rc = select_batch(Strategy::kRandom, c, segs, SegmentDistances(d), BatchQuota{20.0, 0});
  const auto re = select_batch(Strategy::kRandom, e, segs, SegmentDistances(d), BatchQuota{20.0, 0});
  bool differ = false;
  for (std::size_t k = 0; k < rc.picks.size(); ++k)
    differ |= rc.picks[k].segment_id != re.picks[k].segment_id;
  CHECK(differ);
}

TEST_CASE("pool exhaustion and open batch") {
  std::vector<CandidateSegment> segs{seg(0, 0, 1), seg(1, 1, 2)};
  SegmentDistances d(Eigen::MatrixXd::Ones(2, 2));
  auto st = SelectionState::fresh(2, 1);
  const auto r = select_batch(Strategy::kRandom, st, segs, d, BatchQuota{100.0, 0});
  CHECK(r.picks.size() == 2);
  CHECK(r.exhausted);
  CHECK_THROWS_AS(select_batch(Strategy::kRandom, st, segs, d, BatchQuota{1.0, 0}), ConflictError);
  st.commit_batch({{0, {}}, {1, {1}}});
  CHECK(st.iteration == 2);
  CHECK(st.annotated.size() == 2);
  CHECK(st.consistent(2));
}

TEST_CASE("trace rows") {
  BatchResult r;
  r.picks.push_back({4, 0.5, 0.25});
  std::ostringstream out;
  write_trace_header(out);
  write_trace_rows(out, 3, Strategy::kMfft, r);
  CHECK(out.str() == "iteration,pick_index,segment_id,strategy,J_value,distance_to_S\n"
                     "3,0,4,mfft,0.5,0.25\n");
}

}  // TEST_SUITE
