// tests/unit/test_segmentation.cpp

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
#include "alsed/segmentation.hpp"
#include "helpers.hpp"

using namespace alsed;

namespace {

// Rows of `basis` repeated over [bounds[i], bounds[i+1]).
RowMatrixXf piecewise(const std::vector<Eigen::Index>& bounds, const RowMatrixXf& basis) {
  RowMatrixXf v(bounds.back(), basis.cols());
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i)
    for (Eigen::Index t = bounds[i]; t < bounds[i + 1]; ++t) v.row(t) = basis.row(i);
  return v;
}

double brute_delta(const RowMatrixXf& x, Eigen::Index t, Eigen::Index M) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(x.cols()), b = Eigen::VectorXd::Zero(x.cols());
  for (Eigen::Index i = t - M; i < t; ++i)
    for (Eigen::Index d = 0; d < x.cols(); ++d) a[d] += x(i, d);
  for (Eigen::Index i = t; i < t + M; ++i)
    for (Eigen::Index d = 0; d < x.cols(); ++d) b[d] += x(i, d);
  double dot = 0, na = 0, nb = 0;
  for (Eigen::Index d = 0; d < x.cols(); ++d) {
    dot += a[d] * b[d];
    na += a[d] * a[d];
    nb += b[d] * b[d];
  }
  return 1.0 - dot / std::sqrt(na * nb);
}

}  // namespace

TEST_SUITE("segmentation") {

TEST_CASE("cosine distance examples") {
  CHECK(cosine_distance(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)) == doctest::Approx(1.0));
  CHECK(cosine_distance(Eigen::Vector2d(2, 2), Eigen::Vector2d(1, 1)) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(cosine_distance(Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 1)) ==
        doctest::Approx(0.292893).epsilon(1e-6));
  CHECK(cosine_distance(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1)) == 1.0);
}

TEST_CASE("constant sequence has zero change likelihood and no change points") {
  const auto e = test::make_sequence(RowMatrixXf::Constant(100, 3, 0.7f));
  const auto s = change_likelihood(e, 8);
  REQUIRE(s.values.size() == 100 - 16 + 1);
  for (double v : s.values) CHECK(v == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(detect_change_points(s).empty());
}

TEST_CASE("orthogonal halves give 1 at the boundary") {
  const RowMatrixXf basis = RowMatrixXf::Identity(2, 2);
  const auto e = test::make_sequence(piecewise({0, 50, 100}, basis));
  const auto s = change_likelihood(e, 10);
  CHECK(s.values[static_cast<std::size_t>(50 - s.first_frame)] == doctest::Approx(1.0));
}

TEST_CASE("random 60x4 sequence with M=8 matches brute force") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  RowMatrixXf x(60, 4);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
  const auto s = change_likelihood(test::make_sequence(x), 8);
  REQUIRE(s.first_frame == 8);
  REQUIRE(s.values.size() == 45);
  for (std::size_t i = 0; i < s.values.size(); ++i)
    CHECK(s.values[i] == doctest::Approx(brute_delta(x, s.frame_at(i), 8)).epsilon(1e-9));
}

TEST_CASE("too-short recordings are one segment") {
  const auto e = test::make_sequence(RowMatrixXf::Random(30, 4));
  const auto s = change_likelihood(e, 24);
  CHECK(s.too_short);
  CHECK(s.empty());
  const auto segs = segment_recording(e, SegmentationConfig{});
  REQUIRE(segs.size() == 1);
  CHECK(segs[0].start_frame == 0);
  CHECK(segs[0].end_frame == 30);
}

TEST_CASE("single orthogonal step at frame 200") {
  const auto e = test::make_sequence(piecewise({0, 200, 400}, RowMatrixXf::Identity(2, 8)));
  const auto cps = detect_change_points(change_likelihood(e, 24), PeakPicking{1.0, 0.1});
  REQUIRE(cps.size() == 1);
  CHECK(std::abs(cps[0] - 200) <= 2);
}

TEST_CASE("two steps 0.4 s apart keep only the earlier peak") {
  const RowMatrixXf basis = RowMatrixXf::Identity(3, 3);
  const auto e = test::make_sequence(piecewise({0, 200, 220, 400}, basis));
  const auto s = change_likelihood(e, 10);
  // both boundaries are strict local maxima of equal height
  CHECK(s.values[static_cast<std::size_t>(200 - 10)] == doctest::Approx(1.0));
  CHECK(s.values[static_cast<std::size_t>(220 - 10)] == doctest::Approx(1.0));
  const auto cps = detect_change_points(s, PeakPicking{1.0, 0.1});
  REQUIRE(cps.size() == 1);
  CHECK(cps[0] == 200);
  const auto wide = detect_change_points(s, PeakPicking{0.3, 0.1});
  CHECK(wide == std::vector<Eigen::Index>{200, 220});
}

TEST_CASE("peaks within min gap of the recording edges are skipped") {
  const auto e = test::make_sequence(piecewise({0, 30, 400}, RowMatrixXf::Identity(2, 2)));
  CHECK(detect_change_points(change_likelihood(e, 10), PeakPicking{1.0, 0.1}).empty());
}

TEST_CASE("threshold filters low peaks") {
  RowMatrixXf basis(2, 2);
  basis << 1, 0, 1, 0.2f;  // distance about 0.02
  const auto e = test::make_sequence(piecewise({0, 200, 400}, basis));
  const auto s = change_likelihood(e, 24);
  CHECK(detect_change_points(s, PeakPicking{1.0, 0.1}).empty());
  CHECK(detect_change_points(s, PeakPicking{1.0, 0.01}).size() == 1);
}

TEST_CASE("segments from change points at 5.0 s and 12.5 s") {
  const auto e = test::make_sequence(RowMatrixXf::Random(1500, 2));
  const std::vector<Eigen::Index> cps{250, 625};
  const auto segs = segments_from_boundaries(e, cps, 7);
  REQUIRE(segs.size() == 3);
  CHECK(segs[0].start_s == 0.0);
  CHECK(segs[0].end_s == doctest::Approx(5.0));
  CHECK(segs[1].start_s == doctest::Approx(5.0));
  CHECK(segs[1].end_s == doctest::Approx(12.5));
  CHECK(segs[2].start_s == doctest::Approx(12.5));
  CHECK(segs[2].end_s == doctest::Approx(30.0));
  CHECK(segs[0].segment_id == 7);
  CHECK(segs[2].segment_id == 9);
  const Eigen::VectorXf mean = e.values.middleRows(250, 375).colwise().mean().transpose();
  CHECK((segs[1].mean_embedding - mean).cwiseAbs().maxCoeff() < 1e-5f);
  const std::vector<Eigen::Index> bad{625, 250};
  CHECK_THROWS_AS(segments_from_boundaries(e, bad), InputError);
}

TEST_CASE("no change points gives one whole segment") {
  const auto e = test::make_sequence(RowMatrixXf::Constant(1500, 4, 1.0f));
  const auto segs = segment_recording(e, SegmentationConfig{});
  REQUIRE(segs.size() == 1);
  CHECK(segs[0].duration_s() == doctest::Approx(30.0));
}

TEST_CASE("fixed 2 s segmentation of 30 s gives 15 segments") {
  const auto e = test::make_sequence(RowMatrixXf::Random(1500, 4));
  SegmentationConfig cfg;
  cfg.mode = SegmentationMode::kFixed;
  const auto segs = segment_recording(e, cfg);
  REQUIRE(segs.size() == 15);
  for (const auto& s : segs) CHECK(s.duration_s() == doctest::Approx(2.0));
}

TEST_CASE("segments tile the recording and are invariant to embedding scale") {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> len(60, 200);
  std::vector<Eigen::Index> bounds{0};
  while (bounds.back() < 1400) bounds.push_back(bounds.back() + len(rng));
  RowMatrixXf basis = RowMatrixXf::Random(static_cast<Eigen::Index>(bounds.size()), 16);
  RowMatrixXf x = piecewise(bounds, basis);
  const auto a = segment_recording(test::make_sequence(x), SegmentationConfig{});
  const auto b = segment_recording(test::make_sequence(x * 3.5f), SegmentationConfig{});
  REQUIRE(a.size() == b.size());
  REQUIRE(!a.empty());
  CHECK(a.front().start_frame == 0);
  CHECK(a.back().end_frame == x.rows());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].start_frame == b[i].start_frame);
    if (i > 0) CHECK(a[i].start_frame == a[i - 1].end_frame);
  }
}

TEST_CASE("segment table round trip") {
  const auto e = test::make_sequence(RowMatrixXf::Random(500, 2));
  const std::vector<Eigen::Index> cps{120, 333};
  const auto segs = segments_from_boundaries(e, cps);
  std::stringstream ss;
  write_segment_table(ss, segs);
  CHECK(ss.str().rfind("segment_id,recording_id,start_s,end_s\n", 0) == 0);
  const auto rows = read_segment_table(ss);
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(rows[i].segment_id == segs[i].segment_id);
    CHECK(rows[i].start_s == segs[i].start_s);
    CHECK(rows[i].end_s == segs[i].end_s);
  }
}

}  // TEST_SUITE
