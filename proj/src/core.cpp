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

#include "compresim/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace compresim {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

bool all_finite(const RealVector& x) { return x.allFinite(); }

RealVector mean_of(std::span<const RealVector> xs) {
  if (xs.empty()) throw Error("mean_of: empty set");
  RealVector acc = RealVector::Zero(xs.front().size());
  for (const auto& x : xs) {
    if (x.size() != acc.size()) throw Error("mean_of: dimension mismatch");
    acc += x;
  }
  acc /= static_cast<double>(xs.size());
  return acc;
}

std::uint64_t derive_seed(std::uint64_t seed, StreamId id) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(id.kind));
  h = splitmix64(h ^ id.index);
  return h;
}

RngStream::RngStream(std::uint64_t seed, StreamId id)
    : engine_(derive_seed(seed, id)), seed_(seed), id_(id) {}

std::uint64_t RngStream::next_u64() {
  ++draws_;
  return engine_();
}

double RngStream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
  if (n == 0) throw Error("uniform_index: empty range");
  // Largest multiple of n that fits; values above it are rejected.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v = next_u64();
  while (v >= limit) v = next_u64();
  return v % n;
}

double RngStream::normal() {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

bool RngStream::bernoulli(double p) { return uniform() < p; }

RealVector normal_vector(RngStream& rng, int d) {
  RealVector v(d);
  for (int j = 0; j < d; ++j) v[j] = rng.normal();
  return v;
}

int prog(const RealVector& x, double zero_tol) {
  for (Eigen::Index j = x.size(); j > 0; --j) {
    if (std::abs(x[j - 1]) > zero_tol) return static_cast<int>(j);
  }
  return 0;
}

int prog_set(std::span<const RealVector> xs, double zero_tol) {
  if (xs.empty()) throw Error("prog_set: empty set");
  int best = 0;
  for (const auto& x : xs) best = std::max(best, prog(x, zero_tol));
  return best;
}

double fd_gradient_check(const ScalarFn& f, const GradientFn& grad, const RealVector& x,
                         double h) {
  if (!(h > 0.0)) throw Error("fd_gradient_check: step must be positive");
  const RealVector g = grad(x);
  if (g.size() != x.size()) throw Error("fd_gradient_check: gradient has wrong dimension");
  RealVector probe = x;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    probe[j] = x[j] + h;
    const double up = f(probe);
    probe[j] = x[j] - h;
    const double down = f(probe);
    probe[j] = x[j];
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw Error("fd_gradient_check: non-finite function value");
    }
    const double fd = (up - down) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - g[j]) / std::max(1.0, std::abs(g[j])));
  }
  return worst;
}

}  // namespace compresim
