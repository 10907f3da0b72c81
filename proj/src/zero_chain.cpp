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
#include <numbers>

#include "compresim/problems.hpp"

namespace compresim::chain {

namespace {

const double kSqrtE = std::sqrt(std::numbers::e);

// Weight of the leading -psi(1) phi(x_1) term.
double head_weight(Component c) {
  switch (c) {
    case Component::full: return 1.0;
    case Component::even_links: return 2.0;
    case Component::odd_links: return 0.0;
  }
  return 0.0;
}

// Weight of link j (1-based), which couples x_j and x_{j+1}.
double link_weight(Component c, int j) {
  switch (c) {
    case Component::full: return 1.0;
    case Component::even_links: return j % 2 == 0 ? 2.0 : 0.0;
    case Component::odd_links: return j % 2 == 1 ? 2.0 : 0.0;
  }
  return 0.0;
}

void check_dim(const RealVector& x) {
  if (x.size() < 2) throw Error("zero-chain functions need d >= 2");
}

}  // namespace

double psi(double z) {
  if (z <= 0.5) return 0.0;
  const double t = 2.0 * z - 1.0;
  return std::exp(1.0 - 1.0 / (t * t));
}

double psi_prime(double z) {
  if (z <= 0.5) return 0.0;
  const double t = 2.0 * z - 1.0;
  return psi(z) * 4.0 / (t * t * t);
}

double phi(double z) {
  return std::sqrt(2.0 * std::numbers::pi * std::numbers::e) * 0.5 *
         std::erfc(-z / std::numbers::sqrt2);
}

double phi_prime(double z) { return kSqrtE * std::exp(-0.5 * z * z); }

double value(Component c, const RealVector& x) {
  check_dim(x);
  const auto d = static_cast<int>(x.size());
  double v = -head_weight(c) * psi(1.0) * phi(x[0]);
  for (int j = 1; j < d; ++j) {
    const double w = link_weight(c, j);
    if (w == 0.0) continue;
    const double a = x[j - 1];
    const double b = x[j];
    v += w * (psi(-a) * phi(-b) - psi(a) * phi(b));
  }
  return v;
}

RealVector gradient(Component c, const RealVector& x) {
  check_dim(x);
  const auto d = static_cast<int>(x.size());
  RealVector g = RealVector::Zero(d);
  g[0] = -head_weight(c) * psi(1.0) * phi_prime(x[0]);
  for (int j = 1; j < d; ++j) {
    const double w = link_weight(c, j);
    if (w == 0.0) continue;
    const double a = x[j - 1];
    const double b = x[j];
    g[j - 1] += w * (-psi_prime(-a) * phi(-b) - psi_prime(a) * phi(b));
    g[j] += w * (-psi(-a) * phi_prime(-b) - psi(a) * phi_prime(b));
  }
  return g;
}

}  // namespace compresim::chain
