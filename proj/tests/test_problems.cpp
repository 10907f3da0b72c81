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

#include "compresim/problems.hpp"

using namespace compresim;

namespace {

constexpr double kSqrtE = 1.6487212707001282;
constexpr double kLn2 = 0.6931471805599453;

// d=3, n=2, A_i = I, b_i = x_i*.
LeastSquaresProblem identity_design() {
  std::vector<RealMatrix> A(2, RealMatrix::Identity(3, 3));
  std::vector<RealVector> b = {RealVector::Constant(3, 1.0), RealVector::Constant(3, -2.0)};
  return LeastSquaresProblem(A, b);
}

double fd_local(const Problem& p, int worker, const RealVector& x) {
  return fd_gradient_check([&](const RealVector& y) { return p.local_value(worker, y); },
                           [&](const RealVector& y) { return p.local_grad(worker, y); }, x);
}

}  // namespace

TEST_CASE("least squares with identity design") {
  const auto p = identity_design();
  const RealVector x = RealVector::LinSpaced(3, 0.0, 1.0);
  // f_i = ||x - x_i*||^2 / (2M) with M = 3 rows.
  CHECK((p.local_grad(0, x) - (x - RealVector::Constant(3, 1.0)) / 3.0).norm() < 1e-15);
  CHECK((p.local_grad(1, x) - (x + RealVector::Constant(3, 2.0)) / 3.0).norm() < 1e-15);
  CHECK(p.samples(0) == 3);
}

TEST_CASE("generated least squares") {
  LeastSquaresOptions o;
  o.d = 8;
  o.n = 4;
  o.M = 50;
  const auto p = gen_least_squares(3, o);
  CHECK(p->dim() == 8);
  CHECK(p->workers() == 4);
  RngStream rng(1, {StreamKind::probe, 0});
  for (int t = 0; t < 5; ++t) {
    const RealVector x = normal_vector(rng, 8);
    for (int i = 0; i < 4; ++i) CHECK(fd_local(*p, i, x) <= 1e-6);
    std::vector<RealVector> locals;
    for (int i = 0; i < 4; ++i) locals.push_back(p->local_grad(i, x));
    CHECK((mean_of(locals) - p->global_grad(x)).norm() <= 1e-12 * p->global_grad(x).norm());
  }
  // Same seed, same instance.
  const auto q = gen_least_squares(3, o);
  const RealVector xm = RealVector::Constant(8, 0.7);
  CHECK(q->global_value(xm) == p->global_value(xm));
  // Probe-based L never exceeds the analytic bound.
  RngStream pr(2, {StreamKind::probe, 1});
  CHECK(estimate_L_probe(*p, 10, pr) <= p->constants().L * (1 + 1e-9));
}

TEST_CASE("logistic at zero") {
  LogisticOptions o;
  o.d = 5;
  o.n = 3;
  o.M = 40;
  const auto p = gen_logistic(7, o);
  for (int i = 0; i < 3; ++i) CHECK(p->local_value(i, RealVector::Zero(5)) == doctest::Approx(kLn2).epsilon(1e-15));
  RngStream rng(3, {StreamKind::probe, 0});
  for (int t = 0; t < 20; ++t) {
    const RealVector x = normal_vector(rng, 5);
    for (int i = 0; i < 3; ++i) CHECK(fd_local(*p, i, x) <= 1e-5);
  }
}

TEST_CASE("single-sample logistic oracle is unbiased at zero") {
  LogisticOptions o;
  o.d = 4;
  o.n = 1;
  o.M = 30;
  const auto p = gen_logistic(5, o);
  const RealVector x = RealVector::Zero(4);
  const RealVector g = p->local_grad(0, x);
  RngStream rng(8, {StreamKind::worker_oracle, 0});
  const int n = 50000;
  RealVector s = RealVector::Zero(4), s2 = RealVector::Zero(4);
  for (int t = 0; t < n; ++t) {
    const RealVector y = query_oracle(*p, OracleSpec::minibatch(1), 0, x, rng);
    s += y;
    s2 += y.cwiseAbs2();
  }
  for (int j = 0; j < 4; ++j) {
    const double m = s[j] / n;
    const double se = std::sqrt((s2[j] / n - m * m) / n);
    CHECK(std::abs(m - g[j]) <= 4.0 * se);
  }
}

TEST_CASE("chain building blocks") {
  CHECK(chain::psi(1.0) == 1.0);
  CHECK(chain::psi(0.5) == 0.0);
  CHECK(chain::psi(-3.0) == 0.0);
  CHECK(chain::phi_prime(0.0) == doctest::Approx(kSqrtE).epsilon(1e-15));
  const RealVector g = chain::gradient(chain::Component::full, RealVector::Zero(5));
  CHECK(g[0] == doctest::Approx(-kSqrtE).epsilon(1e-15));
  for (int j = 1; j < 5; ++j) CHECK(g[j] == 0.0);
  CHECK(fd_gradient_check([](const RealVector& y) { return chain::value(chain::Component::full, y); },
                          [](const RealVector& y) { return chain::gradient(chain::Component::full, y); },
                          RealVector::Zero(5)) <= 1e-5);
}

TEST_CASE("chain gradient floor when the last coordinate is zero") {
  RngStream rng(4, {StreamKind::probe, 0});
  for (int t = 0; t < 1000; ++t) {
    RealVector x = 2.0 * normal_vector(rng, 8);
    x[7] = 0.0;
    REQUIRE(chain::gradient(chain::Component::full, x).cwiseAbs().maxCoeff() >= 1.0);
  }
}

TEST_CASE("zero-chain problems") {
  ZeroChainOptions o;
  o.d = 6;
  o.n = 4;
  o.lambda = 0.8;
  o.L = 3.0;
  const ZeroChainProblem homo(o);
  o.assignment = ChainAssignment::split_h1_h2;
  const ZeroChainProblem split(o);
  CHECK(homo.constants().b2 == 0.0);
  CHECK(split.component(0) == chain::Component::even_links);
  CHECK(split.component(3) == chain::Component::odd_links);
  RngStream rng(6, {StreamKind::probe, 0});
  for (int t = 0; t < 100; ++t) {
    const RealVector x = normal_vector(rng, 6);
    const double expect = o.L * o.lambda * o.lambda / chain::kL0 *
                          chain::value(chain::Component::full, x / o.lambda);
    CHECK(homo.global_value(x) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(split.global_value(x) == doctest::Approx(homo.global_value(x)).epsilon(1e-12));
    CHECK((split.global_grad(x) - homo.global_grad(x)).norm() <= 1e-12 * (1 + homo.global_grad(x).norm()));
  }
  CHECK(homo.gradient_floor() == doctest::Approx(3.0 * 0.8 / 152));

  ZeroChainOptions odd = o;
  odd.n = 3;
  CHECK_THROWS_AS(ZeroChainProblem{odd}, Error);
  CHECK(parse_chain_assignment("split_h1_h2") == ChainAssignment::split_h1_h2);
  CHECK_THROWS_AS(parse_chain_assignment("zigzag"), Error);
}

TEST_CASE("split workers stall on their parity") {
  ZeroChainOptions o;
  o.d = 10;
  o.n = 2;
  o.assignment = ChainAssignment::split_h1_h2;
  const ZeroChainProblem p(o);
  RngStream rng(7, {StreamKind::probe, 0});
  for (int keep = 1; keep < 10; ++keep) {
    RealVector x = RealVector::Zero(10);
    for (int j = 0; j < keep; ++j) x[j] = 2.0 * rng.normal() + (rng.uniform() < 0.5 ? 1.0 : -1.0);
    REQUIRE(prog(x) == keep);
    for (int i = 0; i < 2; ++i) REQUIRE(prog(p.local_grad(i, x)) <= keep + 1);
    // Odd progress: the h1 worker cannot extend; even progress: the h2 worker cannot.
    const int stalled = keep % 2 == 1 ? 0 : 1;
    CHECK(prog(p.local_grad(stalled, x)) <= keep);
  }
}

TEST_CASE("oracles") {
  ZeroChainOptions o;
  o.d = 6;
  o.n = 1;
  const ZeroChainProblem p(o);
  RealVector x = RealVector::Zero(6);
  x[0] = 1.2;
  x[1] = -0.9;
  const RealVector g = p.local_grad(0, x);
  REQUIRE(prog(g) == 3);
  RngStream rng(3, {StreamKind::worker_oracle, 0});
  CHECK(query_oracle(p, OracleSpec::exact(), 0, x, rng) == g);

  // zeta = 0 wipes every coordinate at or past prog(x).
  OracleTrace trace;
  bool saw_zero = false;
  for (int t = 0; t < 50 && !saw_zero; ++t) {
    const RealVector y = query_oracle(p, OracleSpec::masked(0.5), 0, x, rng, &trace);
    REQUIRE(trace.zeta.has_value());
    if (!*trace.zeta) {
      saw_zero = true;
      CHECK(y[2] == 0.0);
      CHECK(y[0] == g[0]);
    }
  }
  CHECK(saw_zero);

  // p = 0.5: unbiased, variance at the frontier g^2 (1-p)/p = g^2.
  const int n = 40000;
  double s = 0.0, s2 = 0.0;
  for (int t = 0; t < n; ++t) {
    const double y = query_oracle(p, OracleSpec::masked(0.5), 0, x, rng)[2];
    s += y;
    s2 += y * y;
  }
  const double m = s / n;
  const double var = s2 / n - m * m;
  CHECK(std::abs(m - g[2]) <= 4.0 * std::sqrt(var / n));
  CHECK(var == doctest::Approx(g[2] * g[2]).epsilon(0.03));

  CHECK_THROWS_AS(validate_oracle(p, OracleSpec::minibatch(1)), Error);
  CHECK_THROWS_AS(validate_oracle(p, OracleSpec::masked(0.0)), Error);
  const auto ls = gen_least_squares(1);
  CHECK_THROWS_AS(validate_oracle(*ls, OracleSpec::masked(0.5)), Error);
  CHECK(parse_oracle_kind(to_string(OracleKind::bernoulli_masked_fullgrad)) ==
        OracleKind::bernoulli_masked_fullgrad);
}

TEST_CASE("estimators") {
  ZeroChainOptions o;
  o.d = 5;
  o.n = 2;
  const ZeroChainProblem homo(o);
  RngStream rng(1, {StreamKind::probe, 0});
  CHECK(estimate_b2(homo, 5, rng) == 0.0);
  CHECK(estimate_sigma2(homo, OracleSpec::exact(), 5, rng) == 0.0);

  LeastSquaresOptions lo;
  lo.d = 6;
  lo.n = 3;
  lo.M = 40;
  const auto ls = gen_least_squares(2, lo);
  CHECK(estimate_b2(*ls, 5, rng) > 0.0);
  CHECK(estimate_sigma2(*ls, OracleSpec::minibatch(1), 5, rng) > 0.0);
  // Batch b divides the single-sample variance by b.
  RngStream r1(9, {StreamKind::probe, 3});
  RngStream r2(9, {StreamKind::probe, 3});
  const double s1 = estimate_sigma2(*ls, OracleSpec::minibatch(1), 4, r1);
  const double s4 = estimate_sigma2(*ls, OracleSpec::minibatch(4), 4, r2);
  CHECK(s4 == doctest::Approx(s1 / 4.0).epsilon(1e-12));
}
