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

#include "compresim/algorithms.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "compresim/fcc.hpp"

namespace compresim {

std::string to_string(AlgorithmName name) {
  switch (name) {
    case AlgorithmName::neolithic: return "neolithic";
    case AlgorithmName::psgd: return "psgd";
    case AlgorithmName::mem_sgd: return "mem_sgd";
    case AlgorithmName::double_squeeze: return "double_squeeze";
    case AlgorithmName::ef21_sgd: return "ef21_sgd";
    case AlgorithmName::qsgd: return "qsgd";
  }
  return "unknown";
}

AlgorithmName parse_algorithm_name(const std::string& name) {
  for (auto a : {AlgorithmName::neolithic, AlgorithmName::psgd, AlgorithmName::mem_sgd,
                 AlgorithmName::double_squeeze, AlgorithmName::ef21_sgd, AlgorithmName::qsgd}) {
    if (name == to_string(a)) return a;
  }
  throw Error("unknown algorithm '" + name + "'");
}

// ---------------------------------------------------------------------------
// Parameter selection
// ---------------------------------------------------------------------------

int select_R(double delta, long T, double b2, double sigma2, double Delta, double L) {
  if (!(delta > 0.0 && delta <= 1.0)) throw Error("select_R: delta must lie in (0, 1]");
  if (T < 1 || !(Delta > 0.0) || !(L > 0.0)) throw Error("select_R: T, Delta, L must be positive");
  if (b2 < 0.0 || sigma2 < 0.0) throw Error("select_R: b2 and sigma2 must be >= 0");
  const double spread = std::max(b2, sigma2 * delta);
  double log_term = std::log(8.0);
  if (spread > 0.0) {
    log_term = std::max(log_term, std::log(delta * static_cast<double>(T) * spread / (Delta * L)));
  }
  return static_cast<int>(std::ceil(log_term / delta));
}

double theta_of(double delta, int R) { return 4.0 * std::pow(1.0 - delta, R); }

double select_gamma_neolithic(double L, double sigma, long K, int n, int R, double Delta,
                              double theta, double b2) {
  if (!(theta < 1.0)) throw Error("R too small for contraction (theta >= 1)");
  if (!(L > 0.0) || !(Delta > 0.0) || n < 1 || R < 1 || K < 0 || sigma < 0.0 || b2 < 0.0 ||
      theta < 0.0) {
    throw Error("select_gamma_neolithic: invalid arguments");
  }
  const double k1 = static_cast<double>(K) + 1.0;
  const double noise = sigma * std::sqrt(k1 * L / (2.0 * n * R * Delta));
  const double drift = std::cbrt(32.0 * k1 * L * L * theta * (b2 + sigma * sigma / R) /
                                 (3.0 * (1.0 - theta) * Delta));
  const double gamma = 1.0 / (11.0 * L + noise + drift);
  if (gamma > 1.0 / (2.0 * L)) throw Error("select_gamma_neolithic: gamma exceeds 1/(2L)");
  if (theta > 0.0 && gamma > std::sqrt((1.0 - theta) / theta) / (11.0 * L)) {
    throw Error("select_gamma_neolithic: gamma exceeds the error-feedback limit");
  }
  return gamma;
}

namespace {

bool uses_error_feedback(AlgorithmName a) {
  return a == AlgorithmName::neolithic || a == AlgorithmName::mem_sgd ||
         a == AlgorithmName::double_squeeze || a == AlgorithmName::ef21_sgd;
}

bool bidirectional(AlgorithmName a) {
  return a == AlgorithmName::neolithic || a == AlgorithmName::double_squeeze;
}

CompressorSpec make_contractive(const CompressorSpec& spec, int d) {
  if (spec.is_contractive()) return spec;
  return scale_unbiased_to_contractive(spec, d);
}

double contraction(const CompressorSpec& spec, int d) {
  if (spec.is_contractive()) return spec.delta(d);
  return 1.0 / (1.0 + spec.omega(d));
}

}  // namespace

ResolvedParams resolve_parameters(const Problem& problem, const AlgorithmConfig& config) {
  const int d = problem.dim();
  const AlgorithmName a = config.name;
  if (config.budget_T < 1) throw Error("budget_T must be >= 1");
  if (config.log_every < 1) throw Error("log_every must be >= 1");

  ResolvedParams p;
  p.worker_compressor = config.worker_compressor;
  p.server_compressor = config.server_compressor;
  if (a == AlgorithmName::psgd) {
    p.worker_compressor = CompressorSpec::identity();
    p.server_compressor = CompressorSpec::identity();
  }
  const bool server_identity = p.server_compressor.kind == CompressorKind::identity;
  if (!bidirectional(a) && !server_identity) {
    if (a == AlgorithmName::ef21_sgd) throw Error("EF21-SGD is unidirectional");
    throw Error(to_string(a) + " is unidirectional; server compressor must be identity");
  }
  if (a == AlgorithmName::qsgd && !p.worker_compressor.is_unbiased()) {
    throw Error("QSGD requires unbiased compressor");
  }
  if (uses_error_feedback(a)) {
    p.worker_compressor = make_contractive(p.worker_compressor, d);
    p.server_compressor = make_contractive(p.server_compressor, d);
  }

  p.delta = contraction(p.worker_compressor, d);
  if (a == AlgorithmName::neolithic) {
    p.delta = std::min(p.delta, contraction(p.server_compressor, d));
  }

  const auto& c = problem.constants();
  p.R = 1;
  if (a == AlgorithmName::neolithic) {
    if (config.R.mode == RConfig::Mode::auto_theory) {
      p.R = select_R(p.delta, config.budget_T, c.b2, c.sigma2, c.Delta, c.L);
    } else {
      if (config.R.value < 1) throw Error("R must be >= 1");
      p.R = config.R.value;
    }
    p.theta = theta_of(p.delta, p.R);
  }
  p.K = config.budget_T / p.R;
  if (p.K < 1) {
    throw Error("budget T=" + std::to_string(config.budget_T) + " is smaller than R=" +
                std::to_string(p.R));
  }
  p.discarded_rounds = config.budget_T - p.K * p.R;

  if (config.gamma.mode == GammaConfig::Mode::auto_theory) {
    p.gamma0 = select_gamma_neolithic(c.L, std::sqrt(c.sigma2), p.K, problem.workers(), p.R,
                                      c.Delta, p.theta, c.b2);
  } else {
    if (!(config.gamma.value > 0.0)) throw Error("gamma.value must be positive");
    p.gamma0 = config.gamma.value;
  }
  if (config.gamma.decay_every < 0 || !(config.gamma.decay_factor > 0.0)) {
    throw Error("gamma decay needs decay_every >= 0 and decay_factor > 0");
  }
  return p;
}

double step_size(const GammaConfig& gamma, double gamma0, long round) {
  if (gamma.decay_every <= 0 || gamma.decay_factor == 1.0) return gamma0;
  const long stairs = round / gamma.decay_every;
  return gamma0 / std::pow(gamma.decay_factor, static_cast<double>(stairs));
}

void CommLedger::add_uplink(const WireCost& c) {
  up_scalars += c.scalars;
  up_indices += c.indices;
  up_bits += c.bits;
}

void CommLedger::add_downlink(const WireCost& c) {
  down_scalars += c.scalars;
  down_indices += c.indices;
  down_bits += c.bits;
}

// ---------------------------------------------------------------------------
// Shared simulation plumbing
// ---------------------------------------------------------------------------

namespace {

class Runner {
 public:
  Runner(const Problem& problem, const OracleSpec& oracle, const AlgorithmConfig& config,
         std::uint64_t seed, RunObserver* observer)
      : problem_(problem),
        oracle_(oracle),
        observer_(observer),
        n_(problem.workers()),
        d_(problem.dim()),
        start_(std::chrono::steady_clock::now()) {
    validate_oracle(problem, oracle);
    rec_.config = config;
    rec_.seed = seed;
    rec_.params = resolve_parameters(problem, config);
    rec_.ledger = CommLedger(n_);
    copies_.assign(static_cast<std::size_t>(n_), problem.x0());
    for (int i = 0; i < n_; ++i) {
      oracle_rng_.emplace_back(seed, StreamId{StreamKind::worker_oracle, static_cast<std::uint64_t>(i)});
    }
    const auto& wspec = rec_.params.worker_compressor;
    shared_ = wspec.mode == RandomnessMode::shared_broadcast;
    for (int i = 0; i < n_; ++i) {
      const StreamId id = shared_ ? StreamId{StreamKind::broadcast, 0}
                                  : StreamId{StreamKind::worker_compressor, static_cast<std::uint64_t>(i)};
      workers_.emplace_back(wspec, d_, RngStream(seed, id), config.cost);
    }
    const auto& sspec = rec_.params.server_compressor;
    const StreamId sid = sspec.mode == RandomnessMode::shared_broadcast
                             ? StreamId{StreamKind::broadcast, 1}
                             : StreamId{StreamKind::server_compressor, 0};
    server_.emplace(sspec, d_, RngStream(seed, sid), config.cost);
    planned_rounds_ = rec_.params.K * rec_.params.R;
    log(0);
  }

  int n() const { return n_; }
  int d() const { return d_; }
  const ResolvedParams& params() const { return rec_.params; }
  double gamma(long round) const {
    return step_size(rec_.config.gamma, rec_.params.gamma0, round);
  }
  CompressorState& worker_compressor(int i) { return workers_[static_cast<std::size_t>(i)]; }
  CompressorState& server_compressor() { return *server_; }
  RunDiagnostics& diag() { return rec_.diagnostics; }
  RunObserver* observer() { return observer_; }
  const RealVector& x() const { return copies_.front(); }
  const CostModel& cost() const { return rec_.config.cost; }
  CommLedger& ledger() { return rec_.ledger; }
  bool stopped() const { return rec_.diverged; }

  /// One oracle call of worker i at its own model copy.
  RealVector query(int i, long query_round) {
    OracleTrace trace;
    const auto& xi = copies_[static_cast<std::size_t>(i)];
    RealVector g = query_oracle(problem_, oracle_, i, xi, oracle_rng_[static_cast<std::size_t>(i)],
                                &trace);
    ++rec_.ledger.grad_queries[static_cast<std::size_t>(i)];
    if (observer_) observer_->on_oracle_query(query_round, i, xi, trace);
    return g;
  }

  void uplink(long comm_round, int i, const RealVector& pre, const CompressorState& c) {
    if (observer_) observer_->on_uplink(comm_round, i, pre, c.last_selection());
  }

  void count_rounds(long rounds) {
    for (auto& r : rec_.ledger.comm_rounds) r += static_cast<std::uint64_t>(rounds);
  }

  /// Unidirectional downlink: the server broadcasts d uncompressed scalars.
  void dense_downlink() { rec_.ledger.add_downlink(dense_cost(d_, cost())); }

  void check_shared_lockstep() {
    if (!shared_) return;
    const auto first = workers_.front().draw_index();
    for (const auto& w : workers_) {
      if (w.draw_index() != first) ++rec_.diagnostics.shared_draw_mismatches;
    }
  }

  /// Every worker applies x <- x - scale * step to its own copy.
  void apply(double scale, const RealVector& step, long round_after) {
    for (auto& x : copies_) x -= scale * step;
    double gap = 0.0;
    for (const auto& x : copies_) gap = std::max(gap, (x - copies_.front()).cwiseAbs().maxCoeff());
    rec_.diagnostics.model_copy_max_diff = std::max(rec_.diagnostics.model_copy_max_diff, gap);
    rounds_done_ = round_after;
    if (!all_finite(copies_.front())) {
      rec_.diverged = true;
      return;
    }
    if (observer_) observer_->on_iterate(round_after, copies_.front());
    const long le = rec_.config.log_every;
    if (round_after == planned_rounds_ || round_after / le != last_logged_ / le) log(round_after);
  }

  RunRecord finish() {
    if (!rec_.diverged && (rec_.series.empty() || rec_.series.back().round != rounds_done_)) {
      log(rounds_done_);
    }
    rec_.final_x = copies_.front();
    rec_.rounds_executed = rounds_done_;
    rec_.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    return std::move(rec_);
  }

 private:
  void log(long round) {
    SeriesPoint pt;
    pt.round = round;
    pt.f = problem_.global_value(copies_.front());
    pt.grad_norm_sq = problem_.global_grad(copies_.front()).squaredNorm();
    pt.ledger = rec_.ledger;
    last_logged_ = round;
    if (!std::isfinite(pt.f) || !std::isfinite(pt.grad_norm_sq)) {
      rec_.diverged = true;
      return;
    }
    rec_.series.push_back(std::move(pt));
  }

  const Problem& problem_;
  OracleSpec oracle_;
  RunObserver* observer_;
  int n_;
  int d_;
  std::chrono::steady_clock::time_point start_;
  RunRecord rec_;
  std::vector<RealVector> copies_;
  std::vector<RngStream> oracle_rng_;
  std::vector<CompressorState> workers_;
  std::optional<CompressorState> server_;
  bool shared_ = false;
  long planned_rounds_ = 0;
  long rounds_done_ = 0;
  long last_logged_ = 0;
};

void require(const AlgorithmConfig& config, AlgorithmName expected) {
  if (config.name != expected) {
    throw Error("config names " + to_string(config.name) + ", expected " + to_string(expected));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Algorithms
// ---------------------------------------------------------------------------

RunRecord run_psgd(const Problem& problem, const OracleSpec& oracle, const AlgorithmConfig& config,
                   std::uint64_t seed, RunObserver* observer) {
  require(config, AlgorithmName::psgd);
  Runner run(problem, oracle, config, seed, observer);
  const int n = run.n();
  std::vector<RealVector> grads(static_cast<std::size_t>(n));
  for (long t = 0; t < run.params().K && !run.stopped(); ++t) {
    const double gamma = run.gamma(t);
    for (int i = 0; i < n; ++i) {
      grads[static_cast<std::size_t>(i)] = run.query(i, t);
      run.ledger().add_uplink(dense_cost(run.d(), run.cost()));
    }
    run.dense_downlink();
    run.count_rounds(1);
    run.apply(gamma, mean_of(grads), t + 1);
  }
  return run.finish();
}

RunRecord run_neolithic(const Problem& problem, const OracleSpec& oracle,
                        const AlgorithmConfig& config, std::uint64_t seed,
                        RunObserver* observer) {
  require(config, AlgorithmName::neolithic);
  Runner run(problem, oracle, config, seed, observer);
  const int n = run.n();
  const int d = run.d();
  const int R = run.params().R;
  const auto un = static_cast<std::size_t>(n);

  std::vector<RealVector> er_w(un, RealVector::Zero(d));
  RealVector er_s = RealVector::Zero(d);
  std::vector<RealVector> g_hat(un);
  std::vector<RealVector> returned(un);
  RealVector omega = RealVector::Zero(d);

  for (long k = 0; k < run.params().K && !run.stopped(); ++k) {
    const long round0 = k * R;
    const double gamma = run.gamma(round0);

    for (int i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      RealVector acc = RealVector::Zero(d);
      for (int r = 0; r < R; ++r) acc += run.query(i, round0 + r);
      acc /= static_cast<double>(R);
      g_hat[ui] = std::move(acc);

      const RealVector g_tilde = g_hat[ui] + er_w[ui];
      FccTranscript up = fcc(g_tilde, run.worker_compressor(i), R,
                             [&](int r, const RealVector& residual, const CompressorState& c) {
                               run.uplink(round0 + r, i, residual, c);
                             });
      er_w[ui] = g_tilde - up.returned;
      returned[ui] = std::move(up.returned);
      run.ledger().add_uplink(up.total_cost);
    }
    run.check_shared_lockstep();

    const RealVector g_server = mean_of(returned) + er_s;
    FccTranscript down = fcc(g_server, run.server_compressor(), R);
    er_s = g_server - down.returned;
    run.ledger().add_downlink(down.total_cost);
    run.count_rounds(R);

    const RealVector omega_next = er_s + mean_of(er_w);
    const RealVector x_prev = run.x();
    run.apply(gamma, down.returned, round0 + R);
    const RealVector residual =
        run.x() - x_prev + gamma * mean_of(g_hat) + gamma * omega - gamma * omega_next;
    run.diag().recursion_residual_max =
        std::max(run.diag().recursion_residual_max, residual.norm());
    omega = omega_next;
  }
  double werr = 0.0;
  for (const auto& e : er_w) werr = std::max(werr, e.norm());
  run.diag().worker_error_norm = werr;
  run.diag().server_error_norm = er_s.norm();
  return run.finish();
}

RunRecord run_mem_sgd(const Problem& problem, const OracleSpec& oracle,
                      const AlgorithmConfig& config, std::uint64_t seed, RunObserver* observer) {
  require(config, AlgorithmName::mem_sgd);
  Runner run(problem, oracle, config, seed, observer);
  const int n = run.n();
  const int d = run.d();
  const auto un = static_cast<std::size_t>(n);
  std::vector<RealVector> er(un, RealVector::Zero(d));
  std::vector<RealVector> er_sum(un, RealVector::Zero(d));
  std::vector<RealVector> sent(un);

  for (long t = 0; t < run.params().K && !run.stopped(); ++t) {
    const double gamma = run.gamma(t);
    for (int i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const RealVector g_hat = run.query(i, t);
      const RealVector p = gamma * g_hat + er[ui];
      Compressed c = run.worker_compressor(i).compress(p);
      run.uplink(t, i, p, run.worker_compressor(i));
      er[ui] = p - c.value;
      er_sum[ui] += gamma * g_hat - c.value;
      run.diag().error_identity_max =
          std::max(run.diag().error_identity_max, (er[ui] - er_sum[ui]).cwiseAbs().maxCoeff());
      sent[ui] = std::move(c.value);
      run.ledger().add_uplink(c.cost);
    }
    run.check_shared_lockstep();
    run.dense_downlink();
    run.count_rounds(1);
    run.apply(1.0, mean_of(sent), t + 1);
  }
  double werr = 0.0;
  for (const auto& e : er) werr = std::max(werr, e.norm());
  run.diag().worker_error_norm = werr;
  return run.finish();
}

RunRecord run_double_squeeze(const Problem& problem, const OracleSpec& oracle,
                             const AlgorithmConfig& config, std::uint64_t seed,
                             RunObserver* observer) {
  require(config, AlgorithmName::double_squeeze);
  Runner run(problem, oracle, config, seed, observer);
  const int n = run.n();
  const int d = run.d();
  const auto un = static_cast<std::size_t>(n);
  std::vector<RealVector> err_w(un, RealVector::Zero(d));
  RealVector err_s = RealVector::Zero(d);
  std::vector<RealVector> sent(un);

  for (long t = 0; t < run.params().K && !run.stopped(); ++t) {
    const double gamma = run.gamma(t);
    for (int i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const RealVector v = run.query(i, t) + err_w[ui];
      Compressed c = run.worker_compressor(i).compress(v);
      run.uplink(t, i, v, run.worker_compressor(i));
      err_w[ui] = v - c.value;
      sent[ui] = std::move(c.value);
      run.ledger().add_uplink(c.cost);
    }
    run.check_shared_lockstep();
    const RealVector v = mean_of(sent) + err_s;
    Compressed q = run.server_compressor().compress(v);
    err_s = v - q.value;
    run.ledger().add_downlink(q.cost);
    run.count_rounds(1);
    run.apply(gamma, q.value, t + 1);
  }
  double werr = 0.0;
  for (const auto& e : err_w) werr = std::max(werr, e.norm());
  run.diag().worker_error_norm = werr;
  run.diag().server_error_norm = err_s.norm();
  return run.finish();
}

RunRecord run_ef21_sgd(const Problem& problem, const OracleSpec& oracle,
                       const AlgorithmConfig& config, std::uint64_t seed, RunObserver* observer) {
  require(config, AlgorithmName::ef21_sgd);
  Runner run(problem, oracle, config, seed, observer);
  const int n = run.n();
  const int d = run.d();
  const auto un = static_cast<std::size_t>(n);
  std::vector<RealVector> g_w(un, RealVector::Zero(d));
  RealVector g_tracked = RealVector::Zero(d);

  for (long t = 0; t < run.params().K && !run.stopped(); ++t) {
    const double gamma = run.gamma(t);
    RealVector delta_sum = RealVector::Zero(d);
    for (int i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const RealVector g_hat = run.query(i, t);
      const RealVector before = g_w[ui];
      const WireCost cost = run.worker_compressor(i).absorb(g_w[ui], g_hat);
      run.uplink(t, i, g_hat - before, run.worker_compressor(i));
      delta_sum += g_w[ui] - before;
      run.ledger().add_uplink(cost);
    }
    run.check_shared_lockstep();
    // The server mirrors every g_i from the received increments.
    g_tracked += delta_sum / static_cast<double>(n);
    const RealVector g = mean_of(g_w);
    run.diag().aggregate_identity_max =
        std::max(run.diag().aggregate_identity_max, (g_tracked - g).cwiseAbs().maxCoeff());
    run.dense_downlink();
    run.count_rounds(1);
    run.apply(gamma, g, t + 1);
  }
  return run.finish();
}

RunRecord run_qsgd(const Problem& problem, const OracleSpec& oracle, const AlgorithmConfig& config,
                   std::uint64_t seed, RunObserver* observer) {
  require(config, AlgorithmName::qsgd);
  Runner run(problem, oracle, config, seed, observer);
  const int n = run.n();
  std::vector<RealVector> sent(static_cast<std::size_t>(n));
  for (long t = 0; t < run.params().K && !run.stopped(); ++t) {
    const double gamma = run.gamma(t);
    for (int i = 0; i < n; ++i) {
      const RealVector g_hat = run.query(i, t);
      Compressed c = run.worker_compressor(i).compress(g_hat);
      run.uplink(t, i, g_hat, run.worker_compressor(i));
      sent[static_cast<std::size_t>(i)] = std::move(c.value);
      run.ledger().add_uplink(c.cost);
    }
    run.check_shared_lockstep();
    run.dense_downlink();
    run.count_rounds(1);
    run.apply(gamma, mean_of(sent), t + 1);
  }
  return run.finish();
}

RunRecord run_algorithm(const Problem& problem, const OracleSpec& oracle,
                        const AlgorithmConfig& config, std::uint64_t seed, RunObserver* observer) {
  switch (config.name) {
    case AlgorithmName::neolithic: return run_neolithic(problem, oracle, config, seed, observer);
    case AlgorithmName::psgd: return run_psgd(problem, oracle, config, seed, observer);
    case AlgorithmName::mem_sgd: return run_mem_sgd(problem, oracle, config, seed, observer);
    case AlgorithmName::double_squeeze:
      return run_double_squeeze(problem, oracle, config, seed, observer);
    case AlgorithmName::ef21_sgd: return run_ef21_sgd(problem, oracle, config, seed, observer);
    case AlgorithmName::qsgd: return run_qsgd(problem, oracle, config, seed, observer);
  }
  throw Error("unknown algorithm");
}

}  // namespace compresim
