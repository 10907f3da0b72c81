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

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace compresim {

/// Dense real vector: models, gradients, and messages all share this type.
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Library error. Every precondition violation surfaces as one of these.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

bool all_finite(const RealVector& x);

/// Coordinate-wise mean of equally sized vectors, summed in index order.
/// Every algorithm aggregates through this so that equivalent runs stay
/// bit-identical.
RealVector mean_of(std::span<const RealVector> xs);

// ---------------------------------------------------------------------------
// Randomness streams
// ---------------------------------------------------------------------------

enum class StreamKind : std::uint32_t {
  worker_oracle = 1,
  worker_compressor = 2,
  server_compressor = 3,
  broadcast = 4,
  data_gen = 5,
  probe = 6,
};

struct StreamId {
  StreamKind kind;
  std::uint64_t index = 0;
};

/// Seeded random stream. The engine state is derived by hashing
/// (seed, kind, index), so adding a stream never perturbs another one.
///
/// Only integer draws of std::mt19937_64 are used; uniforms and normals are
/// built here so draws are identical across standard library vendors.
class RngStream {
 public:
  RngStream(std::uint64_t seed, StreamId id);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, n). Rejection keeps it exactly unbiased.
  std::uint64_t uniform_index(std::uint64_t n);
  /// Standard normal via Box-Muller (two uniforms per call, no caching).
  double normal();
  bool bernoulli(double p);

  /// Number of raw 64-bit words consumed so far.
  std::uint64_t draw_index() const { return draws_; }
  std::uint64_t seed() const { return seed_; }
  StreamId id() const { return id_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  StreamId id_;
  std::uint64_t draws_ = 0;
};

std::uint64_t derive_seed(std::uint64_t seed, StreamId id);

RealVector normal_vector(RngStream& rng, int d);

// ---------------------------------------------------------------------------
// Coordinate progress
// ---------------------------------------------------------------------------

/// 1-based index of the last coordinate with |x_j| > zero_tol, 0 if none.
int prog(const RealVector& x, double zero_tol = 0.0);

/// max of prog over a nonempty collection.
int prog_set(std::span<const RealVector> xs, double zero_tol = 0.0);

// ---------------------------------------------------------------------------
// Finite-difference gradient checking
// ---------------------------------------------------------------------------

using ScalarFn = std::function<double(const RealVector&)>;
using GradientFn = std::function<RealVector(const RealVector&)>;

/// Central differences against an analytic gradient. Returns
/// max_j |fd_j - g_j| / max(1, |g_j|).
double fd_gradient_check(const ScalarFn& f, const GradientFn& grad, const RealVector& x,
                         double h = 1e-5);

}  // namespace compresim
