// tests/unit/test_evaluation.cpp

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

#include "alsed/evaluation.hpp"
#include "oracles.hpp"

using namespace alsed;

namespace {

EventRoll roll_of(const std::vector<std::vector<bool>>& a) {
  EventRoll r;
  r.active.resize(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(a[0].size()));
  for (std::size_t k = 0; k < a.size(); ++k)
    for (std::size_t c = 0; c < a[k].size(); ++c) r.active(k, c) = a[k][c];
  return r;
}

std::vector<std::vector<bool>> cover_oracle(const std::vector<Event>& ev, double duration, int C) {
  std::vector<std::vector<bool>> a;
  for (int k = 0; k < duration; ++k) {
    a.emplace_back(C, false);
    for (const auto& e : ev)
      if (std::min(e.offset_s, k + 1.0) - std::max(e.onset_s, double(k)) > 0) a[k][e.class_id] = true;
  }
  return a;
}

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("roll examples") {
  CHECK(!build_roll({}, 3.0, 2).active.any());
  const std::vector<Event> a{{0, 0.2, 0.8}};
  const auto ra = build_roll(a, 3.0, 1);
  CHECK(ra.segments() == 3);
  CHECK(ra.active(0, 0));
  CHECK(!ra.active(1, 0));
  const std::vector<Event> b{{0, 0.9, 2.1}};
  const auto rb = build_roll(b, 3.0, 1);
  CHECK((rb.active(0, 0) && rb.active(1, 0) && rb.active(2, 0)));
  CHECK(build_roll({}, 2.5, 1).segments() == 3);
  const std::vector<Event> edge{{0, 1.0, 2.0}};
  const auto re = build_roll(edge, 3.0, 1);
  CHECK((!re.active(0, 0) && re.active(1, 0) && !re.active(2, 0)));
}

TEST_CASE("error rate examples") {
  const auto ref = roll_of({{true, false}, {true, false}, {false, false}});
  CHECK(error_rate(ref, ref).error_rate() == 0.0);
  const auto hyp = roll_of({{true, false}, {false, true}, {false, true}});
  const auto r = error_rate(ref, hyp);
  CHECK(r.substitutions == 1);
  CHECK(r.deletions == 0);
  CHECK(r.insertions == 1);
  CHECK(r.reference_active == 2);
  CHECK(r.error_rate() == 1.0);

  EventRoll ten;
  ten.active = Eigen::Array<bool, -1, -1>::Constant(10, 1, true);
  EventRoll empty;
  empty.active = Eigen::Array<bool, -1, -1>::Constant(10, 1, false);
  const auto d = error_rate(ten, empty);
  CHECK(d == ErReport{0, 10, 0, 10});
  CHECK(d.error_rate() == 1.0);
  CHECK(std::isnan(error_rate(empty, empty).error_rate()));
}

TEST_CASE("random rolls match the per-definition oracle") {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const int C = std::uniform_int_distribution<int>(1, 6)(rng);
    const int dur = std::uniform_int_distribution<int>(1, 40)(rng);
    auto events = [&] {
      std::vector<Event> ev;
      const int n = std::uniform_int_distribution<int>(0, 12)(rng);
      std::uniform_real_distribution<double> t(0.0, dur);
      for (int i = 0; i < n; ++i) {
        double a = t(rng), b = t(rng);
        if (a > b) std::swap(a, b);
        ev.push_back({std::uniform_int_distribution<int>(0, C - 1)(rng), a, b});
      }
      return ev;
    };
    const auto er = events(), eh = events();
    const auto ref_a = cover_oracle(er, dur, C), hyp_a = cover_oracle(eh, dur, C);
    const auto ref = build_roll(er, dur, C), hyp = build_roll(eh, dur, C);
    CHECK(ref.active.matrix() == roll_of(ref_a).active.matrix());
    const auto got = error_rate(ref, hyp);
    const auto want = oracle::segment_error(ref_a, hyp_a);
    CHECK(got.substitutions == want.s);
    CHECK(got.deletions == want.d);
    CHECK(got.insertions == want.i);
    CHECK(got.reference_active == want.n);
  }
}

TEST_CASE("reports accumulate") {
  ErReport a{1, 2, 3, 4};
  a += ErReport{1, 1, 1, 1};
  CHECK(a == ErReport{2, 3, 4, 5});
  CHECK(a.error_rate() == doctest::Approx(9.0 / 5.0));
}

TEST_CASE("shape mismatch is rejected") {
  CHECK_THROWS(error_rate(build_roll({}, 3.0, 1), build_roll({}, 4.0, 1)));
}

}  // TEST_SUITE
