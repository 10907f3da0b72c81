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

#include "compresim/problems.hpp"

#include <algorithm>
#include <cmath>

namespace compresim {

namespace {

// Largest eigenvalue of a symmetric positive semidefinite matrix.
double power_iteration(const Eigen::MatrixXd& S, int max_iter = 2000, double tol = 1e-13) {
  RealVector v = RealVector::Ones(S.rows()) / std::sqrt(static_cast<double>(S.rows()));
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    RealVector w = S * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    const double next = v.dot(w);
    v = w / norm;
    if (std::abs(next - lambda) <= tol * std::abs(next)) return next;
    lambda = next;
  }
  return lambda;
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_worker(const Problem& p, int worker) {
  if (worker < 0 || worker >= p.workers()) {
    throw Error("worker index " + std::to_string(worker) + " out of range");
  }
}

void check_x(const Problem& p, const RealVector& x) {
  if (x.size() != p.dim()) throw Error(p.name() + ": dimension mismatch");
}

// Exact per-sample variance of one-row gradients at x, max over workers.
double finite_sum_variance(const Problem& p, const RealVector& x) {
  double worst = 0.0;
  for (int i = 0; i < p.workers(); ++i) {
    const RealVector g = p.local_grad(i, x);
    const std::size_t M = p.samples(i);
    double acc = 0.0;
    for (std::size_t m = 0; m < M; ++m) acc += (p.sample_grad(i, m, x) - g).squaredNorm();
    worst = std::max(worst, acc / static_cast<double>(M));
  }
  return worst;
}

}  // namespace

double Problem::global_value(const RealVector& x) const {
  double acc = 0.0;
  for (int i = 0; i < workers(); ++i) acc += local_value(i, x);
  return acc / workers();
}

RealVector Problem::global_grad(const RealVector& x) const {
  std::vector<RealVector> gs;
  gs.reserve(static_cast<std::size_t>(workers()));
  for (int i = 0; i < workers(); ++i) gs.push_back(local_grad(i, x));
  return mean_of(gs);
}

RealVector Problem::sample_grad(int, std::size_t, const RealVector&) const {
  throw Error(name() + " has no finite-sum structure");
}

// ---------------------------------------------------------------------------
// Least squares
// ---------------------------------------------------------------------------

LeastSquaresProblem::LeastSquaresProblem(std::vector<RealMatrix> A, std::vector<RealVector> b)
    : A_(std::move(A)), b_(std::move(b)) {
  if (A_.empty() || A_.size() != b_.size()) throw Error("least_squares: need one (A_i, b_i) per worker");
  d_ = static_cast<int>(A_.front().cols());
  const auto n = static_cast<double>(A_.size());
  H_mean_ = Eigen::MatrixXd::Zero(d_, d_);
  c_mean_ = RealVector::Zero(d_);
  for (std::size_t i = 0; i < A_.size(); ++i) {
    if (A_[i].cols() != d_ || A_[i].rows() != b_[i].size() || A_[i].rows() == 0) {
      throw Error("least_squares: inconsistent shapes for worker " + std::to_string(i));
    }
    const double M = static_cast<double>(A_[i].rows());
    H_.push_back(A_[i].transpose() * A_[i] / M);
    c_.push_back(A_[i].transpose() * b_[i] / M);
    bb_.push_back(b_[i].squaredNorm() / (2.0 * M));
    H_mean_ += H_.back();
    c_mean_ += c_.back();
    bb_mean_ += bb_.back();
  }
  H_mean_ /= n;
  c_mean_ /= n;
  bb_mean_ /= n;

  x0_ = RealVector::Zero(d_);
  constants_.L = smoothness_bound();
  constants_.L_analytic = true;
  const RealVector xs = minimizer();
  constants_.Delta = global_value(x0_) - global_value(xs);
  constants_.Delta_analytic = true;
  constants_.sigma2 = finite_sum_variance(*this, x0_);
}

double LeastSquaresProblem::local_value(int worker, const RealVector& x) const {
  check_worker(*this, worker);
  check_x(*this, x);
  const auto i = static_cast<std::size_t>(worker);
  return (A_[i] * x - b_[i]).squaredNorm() / (2.0 * static_cast<double>(A_[i].rows()));
}

RealVector LeastSquaresProblem::local_grad(int worker, const RealVector& x) const {
  check_worker(*this, worker);
  check_x(*this, x);
  const auto i = static_cast<std::size_t>(worker);
  return H_[i] * x - c_[i];
}

double LeastSquaresProblem::global_value(const RealVector& x) const {
  check_x(*this, x);
  return 0.5 * x.dot(H_mean_ * x) - c_mean_.dot(x) + bb_mean_;
}

RealVector LeastSquaresProblem::global_grad(const RealVector& x) const {
  check_x(*this, x);
  return H_mean_ * x - c_mean_;
}

std::size_t LeastSquaresProblem::samples(int worker) const {
  check_worker(*this, worker);
  return static_cast<std::size_t>(A_[static_cast<std::size_t>(worker)].rows());
}

RealVector LeastSquaresProblem::sample_grad(int worker, std::size_t m, const RealVector& x) const {
  const auto& A = A_[static_cast<std::size_t>(worker)];
  const auto row = A.row(static_cast<Eigen::Index>(m));
  const double r = row.dot(x) - b_[static_cast<std::size_t>(worker)][static_cast<Eigen::Index>(m)];
  return row.transpose() * r;
}

double LeastSquaresProblem::smoothness_bound() const {
  double L = 0.0;
  for (const auto& H : H_) L = std::max(L, power_iteration(H));
  return L;
}

RealVector LeastSquaresProblem::minimizer() const { return H_mean_.ldlt().solve(c_mean_); }

// ---------------------------------------------------------------------------
// Logistic regression
// ---------------------------------------------------------------------------

LogisticProblem::LogisticProblem(std::vector<RealMatrix> features, std::vector<RealVector> labels)
    : H_(std::move(features)), y_(std::move(labels)) {
  if (H_.empty() || H_.size() != y_.size()) throw Error("logistic: need one (H_i, y_i) per worker");
  d_ = static_cast<int>(H_.front().cols());
  Eigen::Index rows = 0;
  for (std::size_t i = 0; i < H_.size(); ++i) {
    if (H_[i].cols() != d_ || H_[i].rows() != y_[i].size() || H_[i].rows() == 0) {
      throw Error("logistic: inconsistent shapes for worker " + std::to_string(i));
    }
    for (Eigen::Index m = 0; m < y_[i].size(); ++m) {
      if (y_[i][m] != 1.0 && y_[i][m] != -1.0) throw Error("logistic: labels must be +1 or -1");
    }
    rows += H_[i].rows();
  }
  // The global objective weights every worker equally, so a stacked copy is
  // only used when all workers hold the same number of samples.
  H_all_.resize(rows, d_);
  y_all_.resize(rows);
  Eigen::Index at = 0;
  for (std::size_t i = 0; i < H_.size(); ++i) {
    H_all_.middleRows(at, H_[i].rows()) = H_[i];
    y_all_.segment(at, H_[i].rows()) = y_[i];
    at += H_[i].rows();
  }

  x0_ = RealVector::Zero(d_);
  constants_.L = smoothness_bound();
  constants_.L_analytic = true;
  // f >= 0, so f(x0) bounds f(x0) - f*.
  constants_.Delta = global_value(x0_);
  constants_.Delta_analytic = false;
  constants_.sigma2 = finite_sum_variance(*this, x0_);
}

double LogisticProblem::local_value(int worker, const RealVector& x) const {
  check_worker(*this, worker);
  check_x(*this, x);
  const auto i = static_cast<std::size_t>(worker);
  const RealVector z = H_[i] * x;
  double acc = 0.0;
  for (Eigen::Index m = 0; m < z.size(); ++m) acc += softplus(-y_[i][m] * z[m]);
  return acc / static_cast<double>(z.size());
}

RealVector LogisticProblem::local_grad(int worker, const RealVector& x) const {
  check_worker(*this, worker);
  check_x(*this, x);
  const auto i = static_cast<std::size_t>(worker);
  const RealVector z = H_[i] * x;
  RealVector w(z.size());
  for (Eigen::Index m = 0; m < z.size(); ++m) w[m] = -y_[i][m] * sigmoid(-y_[i][m] * z[m]);
  return H_[i].transpose() * w / static_cast<double>(z.size());
}

namespace {

bool equal_sizes(const std::vector<RealMatrix>& H) {
  return std::all_of(H.begin(), H.end(), [&](const RealMatrix& m) { return m.rows() == H.front().rows(); });
}

}  // namespace

double LogisticProblem::global_value(const RealVector& x) const {
  if (!equal_sizes(H_)) return Problem::global_value(x);
  check_x(*this, x);
  const RealVector z = H_all_ * x;
  double acc = 0.0;
  for (Eigen::Index m = 0; m < z.size(); ++m) acc += softplus(-y_all_[m] * z[m]);
  return acc / static_cast<double>(z.size());
}

RealVector LogisticProblem::global_grad(const RealVector& x) const {
  if (!equal_sizes(H_)) return Problem::global_grad(x);
  check_x(*this, x);
  const RealVector z = H_all_ * x;
  RealVector w(z.size());
  for (Eigen::Index m = 0; m < z.size(); ++m) w[m] = -y_all_[m] * sigmoid(-y_all_[m] * z[m]);
  return H_all_.transpose() * w / static_cast<double>(z.size());
}

std::size_t LogisticProblem::samples(int worker) const {
  check_worker(*this, worker);
  return static_cast<std::size_t>(H_[static_cast<std::size_t>(worker)].rows());
}

RealVector LogisticProblem::sample_grad(int worker, std::size_t m, const RealVector& x) const {
  const auto i = static_cast<std::size_t>(worker);
  const auto row = H_[i].row(static_cast<Eigen::Index>(m));
  const double y = y_[i][static_cast<Eigen::Index>(m)];
  return row.transpose() * (-y * sigmoid(-y * row.dot(x)));
}

double LogisticProblem::smoothness_bound() const {
  double L = 0.0;
  for (const auto& H : H_) {
    const Eigen::MatrixXd G = H.transpose() * H;
    L = std::max(L, power_iteration(G) / (4.0 * static_cast<double>(H.rows())));
  }
  return L;
}

// ---------------------------------------------------------------------------
// Zero-chain instances
// ---------------------------------------------------------------------------

ChainAssignment parse_chain_assignment(const std::string& name) {
  if (name == "homogeneous_h" || name == "homogeneous") return ChainAssignment::homogeneous_h;
  if (name == "split_h1_h2" || name == "split") return ChainAssignment::split_h1_h2;
  throw Error("unknown zero_chain assignment '" + name + "'");
}

ZeroChainProblem::ZeroChainProblem(ZeroChainOptions options) : opts_(options) {
  if (!(opts_.lambda > 0.0)) throw Error("zero_chain: lambda must be positive");
  if (opts_.d < 2) throw Error("zero_chain: d must be >= 2");
  if (opts_.n < 1) throw Error("zero_chain: n must be >= 1");
  if (!(opts_.L > 0.0)) throw Error("zero_chain: L must be positive");
  if (opts_.assignment == ChainAssignment::split_h1_h2 && opts_.n % 2 != 0) {
    throw Error("zero_chain: split_h1_h2 needs an even number of workers");
  }
  x0_ = RealVector::Zero(opts_.d);
  const double range = opts_.L * opts_.lambda * opts_.lambda * chain::kDelta0 * opts_.d / chain::kL0;
  const double Delta = opts_.Delta.value_or(range);
  condition_holds_ = opts_.d * opts_.lambda * opts_.lambda <=
                     chain::kL0 * Delta / (opts_.L * chain::kDelta0);
  constants_.L = opts_.L;
  constants_.L_analytic = true;
  constants_.Delta = Delta;
  constants_.Delta_analytic = true;
  if (opts_.assignment == ChainAssignment::homogeneous_h) {
    constants_.b2 = 0.0;
    constants_.b2_analytic = true;
  }
}

chain::Component ZeroChainProblem::component(int worker) const {
  check_worker(*this, worker);
  if (opts_.assignment == ChainAssignment::homogeneous_h) return chain::Component::full;
  return worker < opts_.n / 2 ? chain::Component::even_links : chain::Component::odd_links;
}

double ZeroChainProblem::local_value(int worker, const RealVector& x) const {
  check_x(*this, x);
  const double scale = opts_.L * opts_.lambda * opts_.lambda / chain::kL0;
  return scale * chain::value(component(worker), x / opts_.lambda);
}

RealVector ZeroChainProblem::local_grad(int worker, const RealVector& x) const {
  check_x(*this, x);
  const double scale = opts_.L * opts_.lambda / chain::kL0;
  return scale * chain::gradient(component(worker), x / opts_.lambda);
}

double ZeroChainProblem::global_value(const RealVector& x) const {
  if (opts_.assignment == ChainAssignment::homogeneous_h) return local_value(0, x);
  return 0.5 * (local_value(0, x) + local_value(opts_.n - 1, x));
}

RealVector ZeroChainProblem::global_grad(const RealVector& x) const {
  if (opts_.assignment == ChainAssignment::homogeneous_h) return local_grad(0, x);
  return 0.5 * (local_grad(0, x) + local_grad(opts_.n - 1, x));
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

std::unique_ptr<LeastSquaresProblem> gen_least_squares(std::uint64_t seed,
                                                       LeastSquaresOptions o) {
  if (o.d < 1 || o.n < 1 || o.M < 1 || o.noise_variance < 0.0) {
    throw Error("least_squares: d, n, M must be positive and noise_variance >= 0");
  }
  const double noise_sd = std::sqrt(o.noise_variance);
  std::vector<RealMatrix> A;
  std::vector<RealVector> b;
  std::vector<RealVector> xs;
  for (int i = 0; i < o.n; ++i) {
    RngStream rng(seed, {StreamKind::data_gen, static_cast<std::uint64_t>(i)});
    RealVector x_star = normal_vector(rng, o.d);
    RealMatrix Ai(o.M, o.d);
    for (int m = 0; m < o.M; ++m) {
      for (int j = 0; j < o.d; ++j) Ai(m, j) = rng.normal();
    }
    RealVector bi = Ai * x_star;
    for (int m = 0; m < o.M; ++m) bi[m] += noise_sd * rng.normal();
    A.push_back(std::move(Ai));
    b.push_back(std::move(bi));
    xs.push_back(std::move(x_star));
  }
  auto p = std::make_unique<LeastSquaresProblem>(std::move(A), std::move(b));
  p->set_local_solutions(std::move(xs));
  RngStream probe(seed, {StreamKind::probe, 0});
  p->mutable_constants().b2 = estimate_b2(*p, 11, probe);
  return p;
}

std::unique_ptr<LogisticProblem> gen_logistic(std::uint64_t seed, LogisticOptions o) {
  if (o.d < 1 || o.n < 1 || o.M < 1) throw Error("logistic: d, n, M must be positive");
  std::vector<RealMatrix> H;
  std::vector<RealVector> y;
  for (int i = 0; i < o.n; ++i) {
    RngStream rng(seed, {StreamKind::data_gen, static_cast<std::uint64_t>(i)});
    const RealVector x_star = normal_vector(rng, o.d);
    RealMatrix Hi(o.M, o.d);
    RealVector yi(o.M);
    for (int m = 0; m < o.M; ++m) {
      for (int j = 0; j < o.d; ++j) Hi(m, j) = rng.normal();
      const double prob = sigmoid(Hi.row(m).dot(x_star));
      yi[m] = rng.uniform() < prob ? 1.0 : -1.0;
    }
    H.push_back(std::move(Hi));
    y.push_back(std::move(yi));
  }
  auto p = std::make_unique<LogisticProblem>(std::move(H), std::move(y));
  RngStream probe(seed, {StreamKind::probe, 0});
  p->mutable_constants().b2 = estimate_b2(*p, 11, probe);
  return p;
}

std::unique_ptr<ZeroChainProblem> gen_zero_chain(const ZeroChainOptions& options) {
  return std::make_unique<ZeroChainProblem>(options);
}

}  // namespace compresim
