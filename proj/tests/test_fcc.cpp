// Copyright 2026 The compresim Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#include <doctest.h>

#include <cmath>
#include <vector>

#include "compresim/fcc.hpp"

using namespace compresim;

namespace {

RealVector vec(std::initializer_list<double> v) {
  RealVector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) x[i++] = e;
  return x;
}

}  // namespace

TEST_CASE("identity sends everything in one round") {
  CompressorState c(CompressorSpec::identity(), 3, RngStream(0, {StreamKind::worker_compressor, 0}));
  const RealVector v = vec({1.5, -2, 0.25});
  const FccTranscript t = fcc(v, c, 1);
  REQUIRE(t.chunks.size() == 1);
  CHECK(t.chunks[0] == v);
  CHECK(t.returned == v);
  CHECK(t.rounds == 1);
}

TEST_CASE("top-1 on [3,-1,2] finishes in three rounds") {
  CompressorState c(CompressorSpec::top_k(1), 3, RngStream(0, {StreamKind::worker_compressor, 0}));
  const FccTranscript t = fcc(vec({3, -1, 2}), c, 3);
  REQUIRE(t.chunks.size() == 3);
  CHECK(t.chunks[0] == vec({3, 0, 0}));
  CHECK(t.chunks[1] == vec({0, 0, 2}));
  CHECK(t.chunks[2] == vec({0, -1, 0}));
  CHECK(t.returned == vec({3, -1, 2}));
  CHECK(t.total_cost.scalars == 3);
}

TEST_CASE("rand-1 on d=2, R=2 has mean error 0.5") {
  // Four equiprobable paths with errors 0, 0, 1, 1.
  const FccErrorCurve c = fcc_error_curve(vec({1, 1}), CompressorSpec::rand_k(1), 2, 40000, 3);
  CHECK(c.mean[0] == 2.0);
  CHECK(c.mean[1] == 1.0);
  // Per-trial error is Bernoulli(1/2): SE 0.0025.
  CHECK(std::abs(c.mean[2] - 0.5) < 0.0125);
}

TEST_CASE("returned is the ordered sum of chunks") {
  RngStream in(5, {StreamKind::probe, 0});
  CompressorState c(CompressorSpec::rand_k(2), 7, RngStream(5, {StreamKind::worker_compressor, 0}));
  for (int t = 0; t < 20; ++t) {
    const FccTranscript tr = fcc(normal_vector(in, 7), c, 6);
    REQUIRE(tr.chunks.size() == 6);
    RealVector sum = RealVector::Zero(7);
    for (const auto& ch : tr.chunks) sum += ch;
    REQUIRE(sum == tr.returned);
  }
}

TEST_CASE("zero residual keeps running and is reported") {
  CompressorState c(CompressorSpec::identity(), 2, RngStream(0, {StreamKind::worker_compressor, 0}));
  int calls = 0;
  const FccTranscript t = fcc(vec({1, 2}), c, 3, [&](int, const RealVector&, const CompressorState&) { ++calls; });
  CHECK(calls == 3);
  CHECK(t.chunks.size() == 3);
  REQUIRE(t.first_zero_residual_round.has_value());
  CHECK(*t.first_zero_residual_round == 1);
  CHECK(t.chunks[2] == vec({0, 0}));
}

TEST_CASE("rand-1 error curve on all-ones d=10") {
  const FccErrorCurve c =
      fcc_error_curve(RealVector::Ones(10), CompressorSpec::rand_k(1), 20, 50000, 9);
  const double se1 = c.stddev[1] / std::sqrt(50000.0);
  CHECK(std::abs(c.mean[1] - 9.0) <= 3.0 * se1);
  const double se20 = c.stddev[20] / std::sqrt(50000.0);
  // 10 * 0.9^20
  CHECK(std::abs(c.mean[20] - 1.2157665459056934) <= 3.0 * se20);
}

TEST_CASE("identity curve is zero after one round") {
  const FccErrorCurve c = fcc_error_curve(RealVector::Ones(4), CompressorSpec::identity(), 3, 10, 1);
  CHECK(c.mean[0] == 4.0);
  for (int r = 1; r <= 3; ++r) CHECK(c.mean[r] == 0.0);
}

TEST_CASE("bad arguments") {
  CompressorState c(CompressorSpec::identity(), 2, RngStream(0, {StreamKind::worker_compressor, 0}));
  CHECK_THROWS_AS(fcc(vec({1, 2}), c, 0), Error);
  CHECK_THROWS_AS(fcc(vec({1, 2, 3}), c, 1), Error);
}
