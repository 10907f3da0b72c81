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

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "compresim/core.hpp"

namespace compresim {

// ---------------------------------------------------------------------------
// Zero-chain building blocks
// ---------------------------------------------------------------------------

namespace chain {

/// Universal constants of the scaled chain: range, smoothness, gradient bound.
inline constexpr double kDelta0 = 12.0;
inline constexpr double kL0 = 152.0;
inline constexpr double kGInf = 23.0;

/// 0 for z <= 1/2, exp(1 - 1/(2z-1)^2) otherwise.
double psi(double z);
double psi_prime(double z);
/// sqrt(e) * integral_{-inf}^{z} exp(-t^2/2) dt.
double phi(double z);
double phi_prime(double z);

enum class Component { full, even_links, odd_links };

/// h (full), h1 (first term plus even links, doubled) or h2 (odd links,
/// doubled). The average of the two halves is h.
double value(Component c, const RealVector& x);
RealVector gradient(Component c, const RealVector& x);

}  // namespace chain

// ---------------------------------------------------------------------------
// Problems
// ---------------------------------------------------------------------------

/// Smoothness, suboptimality, noise and dissimilarity bounds. Each entry is
/// either analytic or estimated; `*_analytic` records which.
struct ProblemConstants {
  double L = 1.0;
  double Delta = 1.0;
  double sigma2 = 0.0;
  double b2 = 0.0;
  bool L_analytic = false;
  bool Delta_analytic = false;
  bool b2_analytic = false;
};

/// A distributed objective f = (1/n) sum_i f_i.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  virtual int workers() const = 0;

  virtual double local_value(int worker, const RealVector& x) const = 0;
  virtual RealVector local_grad(int worker, const RealVector& x) const = 0;

  virtual double global_value(const RealVector& x) const;
  virtual RealVector global_grad(const RealVector& x) const;

  /// Finite-sum structure for minibatch oracles; 0 when there is none.
  virtual std::size_t samples(int /*worker*/) const { return 0; }
  virtual RealVector sample_grad(int worker, std::size_t m, const RealVector& x) const;
  bool data_driven() const { return samples(0) > 0; }

  /// Closed-form gradients (required by the masked adversarial oracle).
  virtual bool analytic_gradient() const { return false; }

  const ProblemConstants& constants() const { return constants_; }
  ProblemConstants& mutable_constants() { return constants_; }
  const RealVector& x0() const { return x0_; }

 protected:
  ProblemConstants constants_;
  RealVector x0_;
};

/// Per-worker least squares f_i(x) = ||A_i x - b_i||^2 / (2M).
class LeastSquaresProblem final : public Problem {
 public:
  LeastSquaresProblem(std::vector<RealMatrix> A, std::vector<RealVector> b);

  std::string name() const override { return "least_squares"; }
  int dim() const override { return d_; }
  int workers() const override { return static_cast<int>(A_.size()); }
  double local_value(int worker, const RealVector& x) const override;
  RealVector local_grad(int worker, const RealVector& x) const override;
  double global_value(const RealVector& x) const override;
  RealVector global_grad(const RealVector& x) const override;
  std::size_t samples(int worker) const override;
  RealVector sample_grad(int worker, std::size_t m, const RealVector& x) const override;

  /// max_i lambda_max(A_i^T A_i) / M via power iteration.
  double smoothness_bound() const;
  /// Global minimizer and f*.
  RealVector minimizer() const;
  const std::vector<RealVector>& local_solutions() const { return local_solutions_; }
  void set_local_solutions(std::vector<RealVector> xs) { local_solutions_ = std::move(xs); }

 private:
  int d_;
  std::vector<RealMatrix> A_;
  std::vector<RealVector> b_;
  // Cached normal equations: grad f_i(x) = H_i x - c_i.
  std::vector<Eigen::MatrixXd> H_;
  std::vector<RealVector> c_;
  std::vector<double> bb_;  // ||b_i||^2 / (2M)
  Eigen::MatrixXd H_mean_;
  RealVector c_mean_;
  double bb_mean_ = 0.0;
  std::vector<RealVector> local_solutions_;
};

/// Per-worker logistic loss f_i(x) = (1/M) sum_m ln(1 + exp(-y h^T x)).
class LogisticProblem final : public Problem {
 public:
  LogisticProblem(std::vector<RealMatrix> features, std::vector<RealVector> labels);

  std::string name() const override { return "logistic"; }
  int dim() const override { return d_; }
  int workers() const override { return static_cast<int>(H_.size()); }
  double local_value(int worker, const RealVector& x) const override;
  RealVector local_grad(int worker, const RealVector& x) const override;
  double global_value(const RealVector& x) const override;
  RealVector global_grad(const RealVector& x) const override;
  std::size_t samples(int worker) const override;
  RealVector sample_grad(int worker, std::size_t m, const RealVector& x) const override;

  /// max_i lambda_max(H_i^T H_i) / (4M).
  double smoothness_bound() const;

 private:
  int d_;
  std::vector<RealMatrix> H_;
  std::vector<RealVector> y_;
  RealMatrix H_all_;
  RealVector y_all_;
};

enum class ChainAssignment { homogeneous_h, split_h1_h2 };

ChainAssignment parse_chain_assignment(const std::string& name);

struct ZeroChainOptions {
  double lambda = 1.0;
  int d = 10;
  ChainAssignment assignment = ChainAssignment::homogeneous_h;
  int n = 2;
  double L = 1.0;
  /// Target suboptimality; when unset it defaults to the chain's own bound
  /// L lambda^2 Delta0 d / L0.
  std::optional<double> Delta;
};

/// f_i(x) = (L lambda^2 / L0) h_c(x / lambda) with h_c = h, or h1 for the
/// first half of the workers and h2 for the rest.
class ZeroChainProblem final : public Problem {
 public:
  explicit ZeroChainProblem(ZeroChainOptions options);

  std::string name() const override { return "zero_chain"; }
  int dim() const override { return opts_.d; }
  int workers() const override { return opts_.n; }
  double local_value(int worker, const RealVector& x) const override;
  RealVector local_grad(int worker, const RealVector& x) const override;
  double global_value(const RealVector& x) const override;
  RealVector global_grad(const RealVector& x) const override;
  bool analytic_gradient() const override { return true; }

  chain::Component component(int worker) const;
  const ZeroChainOptions& options() const { return opts_; }
  /// Whether d lambda^2 <= L0 Delta / (L Delta0) holds for the target Delta.
  bool suboptimality_condition_holds() const { return condition_holds_; }
  /// L lambda / L0, the gradient norm floor when the last coordinate is 0.
  double gradient_floor() const { return opts_.L * opts_.lambda / chain::kL0; }

 private:
  ZeroChainOptions opts_;
  bool condition_holds_ = true;
};

struct LeastSquaresOptions {
  int d = 30;
  int n = 32;
  int M = 1000;
  double noise_variance = 0.01;
};

struct LogisticOptions {
  int d = 30;
  int n = 32;
  int M = 1000;
};

/// Synthetic least squares: x_i* ~ N(0, I), A_i ~ N(0,1) entries,
/// b_i = A_i x_i* + N(0, noise_variance). Constants filled in.
std::unique_ptr<LeastSquaresProblem> gen_least_squares(std::uint64_t seed,
                                                       LeastSquaresOptions options = {});
/// Synthetic logistic regression with labels drawn from the local model.
std::unique_ptr<LogisticProblem> gen_logistic(std::uint64_t seed, LogisticOptions options = {});
std::unique_ptr<ZeroChainProblem> gen_zero_chain(const ZeroChainOptions& options);

// ---------------------------------------------------------------------------
// Stochastic gradient oracles
// ---------------------------------------------------------------------------

enum class OracleKind { minibatch, bernoulli_masked_fullgrad, exact };

struct OracleSpec {
  OracleKind kind = OracleKind::minibatch;
  int batch = 1;
  double p = 1.0;

  static OracleSpec exact() { return {OracleKind::exact, 1, 1.0}; }
  static OracleSpec minibatch(int batch = 1) { return {OracleKind::minibatch, batch, 1.0}; }
  static OracleSpec masked(double p) { return {OracleKind::bernoulli_masked_fullgrad, 1, p}; }
};

OracleKind parse_oracle_kind(const std::string& name);
std::string to_string(OracleKind kind);

/// Randomness consumed by one query, for adversary bookkeeping.
struct OracleTrace {
  std::optional<bool> zeta;
};

/// One stochastic gradient of worker `worker` at x.
///
/// masked: zeta ~ Bernoulli(p) drawn once; coordinates j <= prog(x) are
/// exact, later coordinates are scaled by zeta / p.
RealVector query_oracle(const Problem& problem, const OracleSpec& oracle, int worker,
                        const RealVector& x, RngStream& rng, OracleTrace* trace = nullptr);

void validate_oracle(const Problem& problem, const OracleSpec& oracle);

// ---------------------------------------------------------------------------
// Constant estimators
// ---------------------------------------------------------------------------

/// x0 plus (n_probe_points - 1) standard normal points.
std::vector<RealVector> probe_points(const Problem& problem, int n_probe_points, RngStream& rng);

/// max over probes of (1/n) sum_i ||grad f_i - grad f||^2.
double estimate_b2(const Problem& problem, int n_probe_points, RngStream& rng);
/// max over probes and workers of the oracle variance E||O - grad f_i||^2.
/// Finite-sum oracles are enumerated exactly; the masked oracle uses its
/// two-point law.
double estimate_sigma2(const Problem& problem, const OracleSpec& oracle, int n_probe_points,
                       RngStream& rng);
/// max over probe pairs and workers of ||grad f_i(x) - grad f_i(y)|| / ||x - y||.
double estimate_L_probe(const Problem& problem, int n_probe_points, RngStream& rng);
/// Analytic L when the problem carries one, otherwise the probe estimate.
double estimate_L(const Problem& problem, int n_probe_points, RngStream& rng);

}  // namespace compresim
