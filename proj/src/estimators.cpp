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

#include <algorithm>

#include "compresim/problems.hpp"

namespace compresim {

std::vector<RealVector> probe_points(const Problem& problem, int n_probe_points, RngStream& rng) {
  if (n_probe_points < 1) throw Error("n_probe_points must be >= 1");
  std::vector<RealVector> pts{problem.x0()};
  for (int k = 1; k < n_probe_points; ++k) pts.push_back(normal_vector(rng, problem.dim()));
  return pts;
}

double estimate_b2(const Problem& problem, int n_probe_points, RngStream& rng) {
  double worst = 0.0;
  for (const auto& x : probe_points(problem, n_probe_points, rng)) {
    const RealVector g = problem.global_grad(x);
    double acc = 0.0;
    for (int i = 0; i < problem.workers(); ++i) acc += (problem.local_grad(i, x) - g).squaredNorm();
    worst = std::max(worst, acc / problem.workers());
  }
  return worst;
}

double estimate_sigma2(const Problem& problem, const OracleSpec& oracle, int n_probe_points,
                       RngStream& rng) {
  validate_oracle(problem, oracle);
  if (oracle.kind == OracleKind::exact) return 0.0;
  double worst = 0.0;
  for (const auto& x : probe_points(problem, n_probe_points, rng)) {
    for (int i = 0; i < problem.workers(); ++i) {
      const RealVector g = problem.local_grad(i, x);
      double var = 0.0;
      if (oracle.kind == OracleKind::minibatch) {
        const std::size_t M = problem.samples(i);
        for (std::size_t m = 0; m < M; ++m) var += (problem.sample_grad(i, m, x) - g).squaredNorm();
        // Sampling with replacement: the batch mean has 1/batch of the variance.
        var /= static_cast<double>(M) * oracle.batch;
      } else {
        // Coordinates past prog(x) are g_j / p w.p. p and 0 otherwise.
        const double tail = g.tail(g.size() - prog(x)).squaredNorm();
        var = tail * (1.0 - oracle.p) / oracle.p;
      }
      worst = std::max(worst, var);
    }
  }
  return worst;
}

double estimate_L_probe(const Problem& problem, int n_probe_points, RngStream& rng) {
  const auto pts = probe_points(problem, std::max(n_probe_points, 2), rng);
  double worst = 0.0;
  for (int i = 0; i < problem.workers(); ++i) {
    std::vector<RealVector> grads;
    for (const auto& x : pts) grads.push_back(problem.local_grad(i, x));
    for (std::size_t a = 0; a < pts.size(); ++a) {
      for (std::size_t b = a + 1; b < pts.size(); ++b) {
        const double dx = (pts[a] - pts[b]).norm();
        if (dx == 0.0) continue;
        worst = std::max(worst, (grads[a] - grads[b]).norm() / dx);
      }
    }
  }
  return worst;
}

double estimate_L(const Problem& problem, int n_probe_points, RngStream& rng) {
  if (problem.constants().L_analytic) return problem.constants().L;
  return estimate_L_probe(problem, n_probe_points, rng);
}

}  // namespace compresim
