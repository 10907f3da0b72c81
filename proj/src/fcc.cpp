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

#include "compresim/fcc.hpp"

#include <cmath>

namespace compresim {

FccTranscript fcc(const RealVector& v_star, CompressorState& compressor, int rounds,
                  const FccRoundHook& hook) {
  if (rounds < 1) throw Error("fcc: rounds must be >= 1");
  if (v_star.size() != compressor.dim()) throw Error("fcc: dimension mismatch");

  FccTranscript t;
  t.rounds = rounds;
  t.returned = RealVector::Zero(v_star.size());
  t.chunks.reserve(static_cast<std::size_t>(rounds));
  for (int r = 0; r < rounds; ++r) {
    const RealVector residual = v_star - t.returned;
    if (!t.first_zero_residual_round && residual.isZero(0.0)) t.first_zero_residual_round = r;
    Compressed c = compressor.compress(residual);
    if (hook) hook(r, residual, compressor);
    t.returned += c.value;
    t.total_cost += c.cost;
    t.chunks.push_back(std::move(c.value));
  }
  return t;
}

FccErrorCurve fcc_error_curve(const RealVector& v_star, const CompressorSpec& spec, int r_max,
                              int n_trials, std::uint64_t seed) {
  if (n_trials < 1) throw Error("fcc_error_curve: n_trials must be >= 1");
  if (r_max < 1) throw Error("fcc_error_curve: r_max must be >= 1");
  const int d = static_cast<int>(v_star.size());
  // Every R-round transcript is a prefix of the r_max-round one, so one run
  // per trial gives all entries.
  std::vector<double> sum(static_cast<std::size_t>(r_max) + 1, 0.0);
  std::vector<double> sum_sq(sum.size(), 0.0);
  CompressorState state(spec, d, RngStream(seed, {StreamKind::worker_compressor, 0}));
  for (int trial = 0; trial < n_trials; ++trial) {
    RealVector v = RealVector::Zero(d);
    for (int r = 0; r <= r_max; ++r) {
      const RealVector residual = v_star - v;
      const double e = residual.squaredNorm();
      sum[r] += e;
      sum_sq[r] += e * e;
      if (r == r_max) break;
      v += state.compress(residual).value;
    }
  }
  FccErrorCurve curve;
  curve.trials = n_trials;
  for (std::size_t r = 0; r < sum.size(); ++r) {
    const double m = sum[r] / n_trials;
    curve.mean.push_back(m);
    const double var = n_trials > 1 ? std::max(0.0, (sum_sq[r] - n_trials * m * m) / (n_trials - 1))
                                    : 0.0;
    curve.stddev.push_back(std::sqrt(var));
  }
  return curve;
}

}  // namespace compresim
