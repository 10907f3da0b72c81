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

#include <cmath>

#include "compresim/problems.hpp"

namespace compresim {

OracleKind parse_oracle_kind(const std::string& name) {
  if (name == "minibatch") return OracleKind::minibatch;
  if (name == "bernoulli_masked_fullgrad" || name == "masked") {
    return OracleKind::bernoulli_masked_fullgrad;
  }
  if (name == "exact") return OracleKind::exact;
  throw Error("unknown oracle kind '" + name + "'");
}

std::string to_string(OracleKind kind) {
  switch (kind) {
    case OracleKind::minibatch: return "minibatch";
    case OracleKind::bernoulli_masked_fullgrad: return "bernoulli_masked_fullgrad";
    case OracleKind::exact: return "exact";
  }
  return "unknown";
}

void validate_oracle(const Problem& problem, const OracleSpec& oracle) {
  switch (oracle.kind) {
    case OracleKind::exact:
      return;
    case OracleKind::minibatch:
      if (oracle.batch < 1) throw Error("oracle: batch must be >= 1");
      if (!problem.data_driven()) {
        throw Error("minibatch oracle needs a finite-sum problem, got " + problem.name());
      }
      return;
    case OracleKind::bernoulli_masked_fullgrad:
      if (!(oracle.p > 0.0 && oracle.p <= 1.0)) throw Error("oracle: p must lie in (0, 1]");
      if (!problem.analytic_gradient()) {
        throw Error("masked oracle requires analytic gradient (problem " + problem.name() + ")");
      }
      return;
  }
}

RealVector query_oracle(const Problem& problem, const OracleSpec& oracle, int worker,
                        const RealVector& x, RngStream& rng, OracleTrace* trace) {
  validate_oracle(problem, oracle);
  switch (oracle.kind) {
    case OracleKind::exact:
      return problem.local_grad(worker, x);
    case OracleKind::minibatch: {
      const auto M = static_cast<std::uint64_t>(problem.samples(worker));
      RealVector acc = RealVector::Zero(problem.dim());
      for (int b = 0; b < oracle.batch; ++b) {
        acc += problem.sample_grad(worker, static_cast<std::size_t>(rng.uniform_index(M)), x);
      }
      if (oracle.batch > 1) acc /= static_cast<double>(oracle.batch);
      return acc;
    }
    case OracleKind::bernoulli_masked_fullgrad: {
      const bool zeta = rng.bernoulli(oracle.p);
      if (trace) trace->zeta = zeta;
      RealVector g = problem.local_grad(worker, x);
      const double factor = (zeta ? 1.0 : 0.0) / oracle.p;
      for (Eigen::Index j = prog(x); j < g.size(); ++j) g[j] *= factor;
      return g;
    }
  }
  throw Error("unreachable oracle kind");
}

}  // namespace compresim
