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

#include "compresim/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "compresim/algorithms.hpp"
#include "compresim/compressors.hpp"
#include "compresim/fcc.hpp"
#include "compresim/problems.hpp"

namespace compresim {

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.passed; });
}

void VerifyReport::add(std::string name, bool ok, std::string detail) {
  checks.push_back({std::move(name), ok, std::move(detail)});
}

void print_report(std::ostream& out, const VerifyReport& r) {
  for (const auto& c : r.checks) {
    out << (c.passed ? "[PASS] " : "[FAIL] ") << r.suite << '/' << c.name << ": " << c.detail
        << '\n';
  }
  out << fmt::format("{} {} ({} checks, {:.2f} s)\n", r.passed() ? "PASS" : "FAIL", r.suite,
                     r.checks.size(), r.seconds);
}

namespace {

class Timer {
 public:
  explicit Timer(VerifyReport& r) : r_(r), start_(std::chrono::steady_clock::now()) {}
  ~Timer() {
    r_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  VerifyReport& r_;
  std::chrono::steady_clock::time_point start_;
};

constexpr int kInputs = 50;
constexpr int kDraws = 20000;
// Max spectral norm of the Hessian of 2*(psi(-a)phi(-b) - psi(a)phi(b)), rounded up.
constexpr double kSplitLinkSmoothness = 268.0;

struct KindCase {
  std::string name;
  CompressorSpec spec;
};

// Worst-case statistics of one compressor over many inputs.
struct DrawStats {
  double worst_z = 0.0;          // max |mean_j - x_j| / SE_j over coordinates and inputs
  double worst_ratio = 0.0;      // max over inputs of mean ||C(x)-x||^2 / ||x||^2
  double worst_ratio_se = 0.0;   // standard error of that mean
  double worst_excess_z = 0.0;   // max over inputs of (mean ratio - omega) / SE
  double pooled_ratio = 0.0;     // mean of the per-draw ratio over all draws
  double pooled_ratio_se = 0.0;  // its standard error
  bool support_ok = true;        // sparsifier zeros are exact
};

// Exact Var[C(x)_j] of the unbiased kinds.
double coordinate_variance(const CompressorSpec& spec, const RealVector& x, int j) {
  const int d = static_cast<int>(x.size());
  switch (spec.kind) {
    case CompressorKind::rand_k_scaled:
      return x[j] * x[j] * (static_cast<double>(d) / spec.k - 1.0);
    case CompressorKind::stoch_quant: {
      const double norm = x.norm();
      if (norm == 0.0) return 0.0;
      const double r = spec.levels * std::abs(x[j]) / norm;
      const double p = r - std::floor(r);
      const double step = norm / spec.levels;
      return step * step * p * (1.0 - p);
    }
    default:
      return 0.0;
  }
}

DrawStats draw_stats(const CompressorSpec& spec, int d, std::uint64_t seed, int inputs, int draws,
                     double omega = 0.0) {
  CompressorState state(spec, d, RngStream(seed, {StreamKind::worker_compressor, 0}));
  RngStream input_rng(seed, {StreamKind::probe, 0});
  DrawStats s;
  double pooled = 0.0, pooled_sq = 0.0;
  const bool sparse = spec.base_kind() == CompressorKind::rand_k ||
                      spec.base_kind() == CompressorKind::rand_k_scaled ||
                      spec.base_kind() == CompressorKind::top_k;
  for (int v = 0; v < inputs; ++v) {
    const RealVector x = normal_vector(input_rng, d);
    const double xx = x.squaredNorm();
    RealVector sum = RealVector::Zero(d);
    RealVector sum_sq = RealVector::Zero(d);
    double ratio_sum = 0.0, ratio_sq = 0.0;
    for (int k = 0; k < draws; ++k) {
      const RealVector y = state.compress(x).value;
      sum += y;
      sum_sq += y.cwiseAbs2();
      const double ratio = (y - x).squaredNorm() / xx;
      ratio_sum += ratio;
      ratio_sq += ratio * ratio;
      pooled += ratio;
      pooled_sq += ratio * ratio;
      if (sparse) {
        const auto& sel = state.last_selection();
        for (int j = 0; j < d; ++j) {
          if (!std::binary_search(sel.begin(), sel.end(), j) && y[j] != 0.0) s.support_ok = false;
        }
      }
    }
    const double rm = ratio_sum / draws;
    const double rse =
        std::sqrt(std::max(0.0, (ratio_sq - draws * rm * rm) / (draws - 1)) / draws);
    if (rm > s.worst_ratio) {
      s.worst_ratio = rm;
      s.worst_ratio_se = rse;
    }
    if (rse > 0.0) s.worst_excess_z = std::max(s.worst_excess_z, (rm - omega) / rse);
    if (!spec.is_unbiased()) continue;
    for (int j = 0; j < d; ++j) {
      const double m = sum[j] / draws;
      double var = std::max(0.0, (sum_sq[j] - draws * m * m) / (draws - 1));
      // A rare level can go unsampled and leave the empirical variance at 0.
      if (var == 0.0) var = coordinate_variance(spec, x, j);
      const double se = std::sqrt(var / draws);
      const double gap = std::abs(m - x[j]);
      const double z = se > 0.0 ? gap / se : (gap <= 1e-12 * (1.0 + std::abs(x[j])) ? 0.0 : 1e300);
      s.worst_z = std::max(s.worst_z, z);
    }
  }
  const double total = static_cast<double>(inputs) * draws;
  s.pooled_ratio = pooled / total;
  const double var = std::max(0.0, (pooled_sq - total * s.pooled_ratio * s.pooled_ratio) / (total - 1));
  s.pooled_ratio_se = std::sqrt(var / total);
  return s;
}

RealVector truncated_point(RngStream& rng, int d, int keep, double scale) {
  RealVector x = RealVector::Zero(d);
  for (int j = 0; j < keep; ++j) {
    double v = scale * rng.normal();
    // Nonzero by construction so prog(x) == keep.
    if (v == 0.0) v = 1.0;
    x[j] = v;
  }
  return x;
}

}  // namespace

VerifyReport verify_compressors(std::uint64_t seed) {
  VerifyReport r;
  r.suite = "compressors";
  Timer timer(r);
  const int d = 64;
  const std::vector<KindCase> cases = {
      {"identity", CompressorSpec::identity()},
      {"rand_k(k=1)", CompressorSpec::rand_k(1)},
      {"rand_k(k=4)", CompressorSpec::rand_k(4)},
      {"rand_k_scaled(k=1)", CompressorSpec::rand_k_scaled(1)},
      {"rand_k_scaled(k=4)", CompressorSpec::rand_k_scaled(4)},
      {"top_k(k=4)", CompressorSpec::top_k(4)},
      {"stoch_quant(s=1)", CompressorSpec::stoch_quant(1)},
      {"stoch_quant(s=4)", CompressorSpec::stoch_quant(4)},
      {"wrapped rand_k_scaled(k=4)", scale_unbiased_to_contractive(CompressorSpec::rand_k_scaled(4), d)},
      {"wrapped stoch_quant(s=4)", scale_unbiased_to_contractive(CompressorSpec::stoch_quant(4), d)},
  };
  for (const auto& c : cases) {
    const double omega = c.spec.is_unbiased() ? c.spec.omega(d) : 0.0;
    const DrawStats s = draw_stats(c.spec, d, seed, kInputs, kDraws, omega);
    if (c.spec.is_unbiased()) {
      r.add(c.name + " unbiased", s.worst_z <= 4.0,
            fmt::format("max |mean - x| = {:.3f} SE (limit 4)", s.worst_z));
      r.add(c.name + " variance", s.worst_excess_z <= 4.0,
            fmt::format("max E||C(x)-x||^2/||x||^2 = {:.5f} (SE {:.3f}), omega = {:.5f}, "
                        "max excess {:.2f} SE (limit 4)",
                        s.worst_ratio, s.worst_ratio_se, omega, s.worst_excess_z));
    }
    if (c.spec.is_contractive()) {
      const double bound = (1.0 - c.spec.delta(d)) * 1.02;
      r.add(c.name + " contraction", s.worst_ratio <= bound + 1e-12,
            fmt::format("max E||C(x)-x||^2/||x||^2 = {:.5f} <= {:.5f}", s.worst_ratio, bound));
    }
    if (c.spec.kind == CompressorKind::rand_k) {
      const double expect = 1.0 - static_cast<double>(c.spec.k) / d;
      const double gap = std::abs(s.pooled_ratio - expect);
      r.add(c.name + " exact contraction", gap <= 3.0 * s.pooled_ratio_se,
            fmt::format("pooled ratio {:.6f} vs {:.6f} ({:.2f} SE, limit 3)", s.pooled_ratio,
                        expect, s.pooled_ratio_se > 0 ? gap / s.pooled_ratio_se : 0.0));
    }
    if (c.spec.kind == CompressorKind::top_k) {
      // Deterministic: every draw must satisfy the bound.
      RngStream in(seed, {StreamKind::probe, 7});
      CompressorState st(c.spec, d, RngStream(seed, {StreamKind::worker_compressor, 1}));
      double worst = 0.0;
      for (int v = 0; v < 1000; ++v) {
        const RealVector x = normal_vector(in, d);
        worst = std::max(worst, (st.compress(x).value - x).squaredNorm() / x.squaredNorm());
      }
      const double bound = 1.0 - c.spec.delta(d);
      r.add(c.name + " per-draw contraction", worst <= bound,
            fmt::format("max ||C(x)-x||^2/||x||^2 = {:.5f} <= {:.5f}", worst, bound));
    }
    r.add(c.name + " support", s.support_ok, s.support_ok ? "unselected coordinates are 0.0" : "nonzero off support");
  }

  // Shared randomness: two endpoints on one broadcast stream agree.
  {
    const RngStream shared(seed, {StreamKind::broadcast, 0});
    CompressorState a(CompressorSpec::rand_k(3, RandomnessMode::shared_broadcast), d, shared);
    CompressorState b(CompressorSpec::rand_k(3, RandomnessMode::shared_broadcast), d, shared);
    RngStream in(seed, {StreamKind::probe, 3});
    int agree = 0;
    for (int t = 0; t < 1000; ++t) {
      a.compress(normal_vector(in, d));
      b.compress(normal_vector(in, d));
      if (a.last_selection() == b.last_selection() && a.draw_index() == b.draw_index()) ++agree;
    }
    r.add("shared_broadcast agreement", agree == 1000, fmt::format("{}/1000 identical index sets", agree));
  }
  return r;
}

VerifyReport verify_wrapper_closure(std::uint64_t seed) {
  VerifyReport r;
  r.suite = "wrapper_closure";
  Timer timer(r);
  const int d = 4;
  const CompressorSpec inner = CompressorSpec::rand_k_scaled(1);
  const CompressorSpec wrapped = scale_unbiased_to_contractive(inner, d);
  r.add("omega", inner.omega(d) == 3.0, fmt::format("omega = {}", inner.omega(d)));
  r.add("scale", wrapped.scale == 0.25, fmt::format("scale = {}", wrapped.scale));
  r.add("delta", wrapped.delta(d) == 0.25, fmt::format("delta = {}", wrapped.delta(d)));

  const DrawStats s = draw_stats(wrapped, d, seed, kInputs, kDraws);
  r.add("contraction", s.worst_ratio <= 0.75 * 1.02,
        fmt::format("max E||C(x)-x||^2/||x||^2 = {:.5f} <= {:.5f}", s.worst_ratio, 0.75 * 1.02));

  // Same stream: the wrapper and plain rand-1 must pick the same coordinate
  // and return the same bits.
  CompressorState w(wrapped, d, RngStream(seed, {StreamKind::worker_compressor, 9}));
  CompressorState u(CompressorSpec::rand_k(1), d, RngStream(seed, {StreamKind::worker_compressor, 9}));
  RngStream in(seed, {StreamKind::probe, 9});
  long mismatches = 0;
  const long total = static_cast<long>(kInputs) * kDraws;
  for (long t = 0; t < total; ++t) {
    const RealVector x = normal_vector(in, d);
    const RealVector a = w.compress(x).value;
    const RealVector b = u.compress(x).value;
    for (int j = 0; j < d; ++j) {
      if (a[j] != b[j]) {
        ++mismatches;
        break;
      }
    }
  }
  r.add("equals unscaled rand-1", mismatches == 0,
        fmt::format("{} of {} draws differ", mismatches, total));
  return r;
}

VerifyReport verify_fcc(std::uint64_t seed) {
  VerifyReport r;
  r.suite = "fcc";
  Timer timer(r);
  const int d = 10;
  const int trials = 50000;
  const RealVector ones = RealVector::Ones(d);
  const FccErrorCurve curve = fcc_error_curve(ones, CompressorSpec::rand_k(1), 40, trials, seed);
  for (int R : {1, 5, 10, 20, 40}) {
    const double expect = 10.0 * std::pow(0.9, R);
    const double se = curve.stddev[R] / std::sqrt(static_cast<double>(trials));
    const double gap = std::abs(curve.mean[R] - expect);
    r.add(fmt::format("rand-1 R={}", R), gap <= 3.0 * se,
          fmt::format("mean {:.5f} vs 10*0.9^R = {:.5f} ({:.2f} SE, limit 3)", curve.mean[R], expect,
                      se > 0 ? gap / se : 0.0));
  }

  // top-1 is deterministic: every transcript must meet the bound.
  {
    CompressorState top(CompressorSpec::top_k(1), d, RngStream(seed, {StreamKind::worker_compressor, 1}));
    bool ok = true;
    double worst_margin = -1e300;
    for (int t = 0; t < trials; ++t) {
      RealVector v = RealVector::Zero(d);
      for (int R = 1; R <= 40; ++R) {
        v += top.compress(ones - v).value;
        if (R == 1 || R == 5 || R == 10 || R == 20 || R == 40) {
          const double err = (v - ones).squaredNorm();
          const double bound = std::pow(0.9, R) * 10.0;
          worst_margin = std::max(worst_margin, err - bound);
          if (err > bound * (1.0 + 1e-12)) ok = false;
        }
      }
    }
    r.add("top-1 per-trial bound", ok, fmt::format("max(error - bound) = {:.3g}", worst_margin));
  }

  // Other contractive kinds stay under (1 - delta)^R with 5% slack.
  {
    RngStream in(seed, {StreamKind::probe, 4});
    const RealVector v = normal_vector(in, d);
    const std::vector<std::pair<std::string, CompressorSpec>> kinds = {
        {"rand_k(k=3)", CompressorSpec::rand_k(3)},
        {"top_k(k=2)", CompressorSpec::top_k(2)},
        {"wrapped stoch_quant(s=2)", scale_unbiased_to_contractive(CompressorSpec::stoch_quant(2), d)},
    };
    for (const auto& [name, spec] : kinds) {
      const FccErrorCurve c = fcc_error_curve(v, spec, 40, 4000, seed + 1);
      // Deep rounds are rare-event estimates, so each R gets 3 SE on top of the slack.
      double worst = 0.0;
      bool ok = true;
      for (int R = 1; R <= 40; ++R) {
        const double bound = std::pow(1.0 - spec.delta(d), R) * v.squaredNorm();
        const double se = c.stddev[R] / std::sqrt(static_cast<double>(c.trials));
        worst = std::max(worst, c.mean[R] / bound);
        if (c.mean[R] > 1.05 * bound + 3.0 * se) ok = false;
      }
      r.add(name + " decay", ok,
            fmt::format("max mean/bound over R=1..40 = {:.4f} (limit 1.05 + 3 SE)", worst));
    }
  }

  // Sum identity and the R = 1 reduction.
  {
    RngStream in(seed, {StreamKind::probe, 5});
    CompressorState st(CompressorSpec::rand_k(2), d, RngStream(seed, {StreamKind::worker_compressor, 2}));
    bool sum_ok = true;
    for (int t = 0; t < 200; ++t) {
      const FccTranscript tr = fcc(normal_vector(in, d), st, 7);
      RealVector acc = RealVector::Zero(d);
      for (const auto& c : tr.chunks) acc += c;
      if (acc != tr.returned || static_cast<int>(tr.chunks.size()) != 7) sum_ok = false;
    }
    r.add("sum identity", sum_ok, "returned == ordered sum of chunks");
    CompressorState a(CompressorSpec::rand_k(2), d, RngStream(seed, {StreamKind::worker_compressor, 3}));
    CompressorState b(CompressorSpec::rand_k(2), d, RngStream(seed, {StreamKind::worker_compressor, 3}));
    const RealVector x = normal_vector(in, d);
    const FccTranscript one = fcc(x, a, 1);
    r.add("R=1 reduction", one.chunks.front() == b.compress(x).value, "single chunk equals compress(v)");
  }
  return r;
}

VerifyReport verify_zero_chain(std::uint64_t seed) {
  using chain::Component;
  VerifyReport r;
  r.suite = "zero_chain";
  Timer timer(r);
  const int d = 20;
  RngStream rng(seed, {StreamKind::probe, 11});

  int chain_bad = 0, parity_bad = 0, odd_seen = 0, even_seen = 0, low_bad = 0;
  double split_gap = 0.0, low_min = 1e300;
  for (int t = 0; t < 1000; ++t) {
    const int keep = static_cast<int>(rng.uniform_index(d + 1));
    const RealVector x = truncated_point(rng, d, keep, 1.5);
    const int p = prog(x);
    if (prog(chain::gradient(Component::full, x)) > p + 1) ++chain_bad;
    for (auto c : {Component::even_links, Component::odd_links}) {
      if (prog(chain::gradient(c, x)) > p + 1) ++chain_bad;
    }
    if (p % 2 == 1) {
      ++odd_seen;
      if (prog(chain::gradient(Component::even_links, x)) > p) ++parity_bad;
    } else {
      ++even_seen;
      if (prog(chain::gradient(Component::odd_links, x)) > p) ++parity_bad;
    }
    const double h = chain::value(Component::full, x);
    const double avg = 0.5 * (chain::value(Component::even_links, x) + chain::value(Component::odd_links, x));
    split_gap = std::max(split_gap, std::abs(avg - h) / std::max(1.0, std::abs(h)));
    const RealVector gavg = 0.5 * (chain::gradient(Component::even_links, x) +
                                   chain::gradient(Component::odd_links, x));
    split_gap = std::max(split_gap, (gavg - chain::gradient(Component::full, x)).cwiseAbs().maxCoeff());

    // Last coordinate forced to zero.
    RealVector z = truncated_point(rng, d, d, 1.5);
    z[d - 1] = 0.0;
    for (const RealVector* pt : {&x, static_cast<const RealVector*>(&z)}) {
      if ((*pt)[d - 1] != 0.0) continue;
      const double inf = chain::gradient(Component::full, *pt).cwiseAbs().maxCoeff();
      low_min = std::min(low_min, inf);
      if (inf < 1.0) ++low_bad;
    }
  }
  r.add("zero-chain", chain_bad == 0, fmt::format("{} violations of prog(grad) <= prog(x)+1 (h, h1, h2)", chain_bad));
  r.add("parity stalling", parity_bad == 0 && odd_seen > 0 && even_seen > 0,
        fmt::format("{} violations; {} odd and {} even points", parity_bad, odd_seen, even_seen));
  r.add("split average", split_gap <= 1e-12, fmt::format("max |(h1+h2)/2 - h| = {:.3g}", split_gap));
  r.add("gradient floor", low_bad == 0, fmt::format("min ||grad h||_inf with x_d = 0 is {:.4f} (>= 1)", low_min));

  double gmax = 0.0;
  for (int t = 0; t < 10000; ++t) {
    RealVector x(d);
    for (int j = 0; j < d; ++j) x[j] = -10.0 + 20.0 * rng.uniform();
    gmax = std::max(gmax, chain::gradient(Component::full, x).cwiseAbs().maxCoeff());
  }
  r.add("gradient bound", gmax <= chain::kGInf, fmt::format("max ||grad h||_inf = {:.4f} <= 23", gmax));

  for (auto c : {Component::full, Component::even_links, Component::odd_links}) {
    double worst = 0.0;
    for (int t = 0; t < 10000; ++t) {
      const RealVector x = truncated_point(rng, d, d, 1.5);
      const double step = std::pow(10.0, -3.0 + 3.0 * rng.uniform());
      const RealVector y = x + step * normal_vector(rng, d);
      const double dx = (x - y).norm();
      if (dx == 0.0) continue;
      worst = std::max(worst, (chain::gradient(c, x) - chain::gradient(c, y)).norm() / dx);
    }
    const char* name = c == Component::full ? "h" : (c == Component::even_links ? "h1" : "h2");
    // A weight-2 link alone has Hessian norm up to 2 * 133.66, so h1 and h2
    // are only checked against that constant.
    const double limit = c == Component::full ? chain::kL0 : kSplitLinkSmoothness;
    r.add(fmt::format("smoothness {}", name), worst <= limit,
          fmt::format("max gradient ratio {:.3f} <= {}", worst, limit));
  }

  {
    double hmin = 1e300, hmax = -1e300;
    for (int t = 0; t < 20000; ++t) {
      RealVector x(d);
      for (int j = 0; j < d; ++j) x[j] = -3.0 + 6.0 * rng.uniform();
      const double h = chain::value(Component::full, x);
      hmin = std::min(hmin, h);
      hmax = std::max(hmax, h);
    }
    const double h0 = chain::value(Component::full, RealVector::Zero(d));
    const double spread = std::max(h0, hmax) - hmin;
    r.add("range bound", spread <= chain::kDelta0 * d,
          fmt::format("max h - min h over sample = {:.3f} <= {}", spread, chain::kDelta0 * d));
  }

  {
    ZeroChainOptions o;
    o.d = d;
    o.n = 4;
    o.lambda = 0.7;
    o.L = 2.0;
    const ZeroChainProblem homo(o);
    o.assignment = ChainAssignment::split_h1_h2;
    const ZeroChainProblem split(o);
    double gap = 0.0;
    int local_bad = 0;
    for (int t = 0; t < 100; ++t) {
      const RealVector x = truncated_point(rng, d, static_cast<int>(rng.uniform_index(d + 1)), 1.0);
      const double fh = homo.global_value(x);
      gap = std::max(gap, std::abs(split.global_value(x) - fh) / std::max(1.0, std::abs(fh)));
      for (int i = 0; i < o.n; ++i) {
        if (prog(split.local_grad(i, x)) > prog(x) + 1) ++local_bad;
      }
    }
    r.add("split problem equals homogeneous", gap <= 1e-12, fmt::format("max relative gap {:.3g}", gap));
    r.add("split workers zero-chain", local_bad == 0, fmt::format("{} violations", local_bad));
  }
  return r;
}

VerifyReport verify_gradients(std::uint64_t seed, const std::string& only) {
  if (only != "all" && only != "least_squares" && only != "logistic" && only != "zero_chain") {
    throw Error("unknown problem '" + only + "' (least_squares, logistic, zero_chain, all)");
  }
  const auto want = [&](const char* name) { return only == "all" || only == name; };
  VerifyReport r;
  r.suite = only == "all" ? "gradients" : "gradients:" + only;
  Timer timer(r);
  RngStream rng(seed, {StreamKind::probe, 21});
  const int points = 20;

  auto check_problem = [&](const Problem& p, const std::string& name) {
    double worst = 0.0, mean_gap = 0.0;
    for (int t = 0; t < points; ++t) {
      const RealVector x = normal_vector(rng, p.dim());
      for (int i = 0; i < p.workers(); ++i) {
        worst = std::max(worst, fd_gradient_check([&](const RealVector& y) { return p.local_value(i, y); },
                                                  [&](const RealVector& y) { return p.local_grad(i, y); }, x));
      }
      worst = std::max(worst, fd_gradient_check([&](const RealVector& y) { return p.global_value(y); },
                                                [&](const RealVector& y) { return p.global_grad(y); }, x));
      const RealVector g = p.global_grad(x);
      std::vector<RealVector> locals;
      for (int i = 0; i < p.workers(); ++i) locals.push_back(p.local_grad(i, x));
      mean_gap = std::max(mean_gap, (mean_of(locals) - g).norm() / std::max(1e-300, g.norm()));
    }
    r.add(name + " finite differences", worst <= 1e-5, fmt::format("max relative error {:.3g} <= 1e-5", worst));
    r.add(name + " global = mean of locals", mean_gap <= 1e-12, fmt::format("relative gap {:.3g}", mean_gap));
  };

  if (want("least_squares")) check_problem(*gen_least_squares(seed), "least_squares");
  if (want("logistic")) check_problem(*gen_logistic(seed), "logistic");
  if (!want("zero_chain")) return r;

  const int d = 12;
  for (auto c : {chain::Component::full, chain::Component::even_links, chain::Component::odd_links}) {
    double worst = 0.0;
    for (int t = 0; t < points; ++t) {
      const RealVector x = 1.5 * normal_vector(rng, d);
      worst = std::max(worst, fd_gradient_check([&](const RealVector& y) { return chain::value(c, y); },
                                                [&](const RealVector& y) { return chain::gradient(c, y); }, x));
    }
    const char* name = c == chain::Component::full ? "h" : (c == chain::Component::even_links ? "h1" : "h2");
    r.add(fmt::format("{} finite differences", name), worst <= 1e-5,
          fmt::format("max relative error {:.3g} <= 1e-5", worst));
  }
  {
    ZeroChainOptions o;
    o.d = d;
    o.n = 2;
    o.lambda = 0.5;
    o.assignment = ChainAssignment::split_h1_h2;
    check_problem(*gen_zero_chain(o), "zero_chain(split)");
  }
  return r;
}

VerifyReport verify_recursion(std::uint64_t seed) {
  VerifyReport r;
  r.suite = "recursion";
  Timer timer(r);
  const auto problem = gen_least_squares(seed);
  AlgorithmConfig cfg;
  cfg.name = AlgorithmName::neolithic;
  cfg.R.value = 4;
  cfg.gamma.value = 0.02;
  cfg.worker_compressor = CompressorSpec::rand_k(1);
  cfg.server_compressor = CompressorSpec::rand_k(1);
  cfg.budget_T = 2000L * 4;
  cfg.log_every = 400;
  const RunRecord rec = run_neolithic(*problem, OracleSpec::minibatch(1), cfg, seed);
  r.add("iterations", rec.params.K == 2000 && !rec.diverged,
        fmt::format("K = {}, diverged = {}", rec.params.K, rec.diverged));
  r.add("recursion residual", rec.diagnostics.recursion_residual_max <= 1e-9,
        fmt::format("max residual {:.3g} <= 1e-9", rec.diagnostics.recursion_residual_max));
  r.add("model copies", rec.diagnostics.model_copy_max_diff == 0.0,
        fmt::format("max copy gap {:.3g}", rec.diagnostics.model_copy_max_diff));
  const auto& l = rec.ledger;
  bool fair = true;
  for (std::size_t i = 0; i < l.grad_queries.size(); ++i) {
    fair = fair && l.grad_queries[i] == 8000 && l.comm_rounds[i] == 8000;
  }
  r.add("budget fairness", fair, "queries == rounds == K*R per worker");
  return r;
}

const std::vector<std::string>& verify_suite_names() {
  static const std::vector<std::string> names = {"compressors", "fcc", "zero_chain", "gradients",
                                                 "recursion"};
  return names;
}

VerifyReport verify_suite(const std::string& which, std::uint64_t seed) {
  if (which == "compressors") {
    VerifyReport r = verify_compressors(seed);
    const VerifyReport w = verify_wrapper_closure(seed);
    for (const auto& c : w.checks) r.checks.push_back({"closure " + c.name, c.passed, c.detail});
    r.seconds += w.seconds;
    return r;
  }
  if (which == "fcc") return verify_fcc(seed);
  if (which == "zero_chain") return verify_zero_chain(seed);
  if (which == "gradients") return verify_gradients(seed);
  if (which == "recursion") return verify_recursion(seed);
  throw Error("unknown verify suite '" + which + "'");
}

}  // namespace compresim
