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

#include "compresim/compressors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

namespace compresim {

std::string_view to_string(CompressorKind kind) {
  switch (kind) {
    case CompressorKind::identity: return "identity";
    case CompressorKind::rand_k: return "rand_k";
    case CompressorKind::rand_k_scaled: return "rand_k_scaled";
    case CompressorKind::top_k: return "top_k";
    case CompressorKind::stoch_quant: return "stoch_quant";
    case CompressorKind::scaled_wrapper: return "scaled_contractive_wrapper";
  }
  return "unknown";
}

std::string_view to_string(RandomnessMode mode) {
  return mode == RandomnessMode::independent ? "independent" : "shared_broadcast";
}

CompressorKind parse_compressor_kind(std::string_view name) {
  for (auto kind : {CompressorKind::identity, CompressorKind::rand_k, CompressorKind::rand_k_scaled,
                    CompressorKind::top_k, CompressorKind::stoch_quant,
                    CompressorKind::scaled_wrapper}) {
    if (name == to_string(kind)) return kind;
  }
  if (name == "scaled_wrapper") return CompressorKind::scaled_wrapper;
  throw Error("unknown compressor kind '" + std::string(name) + "'");
}

RandomnessMode parse_randomness_mode(std::string_view name) {
  if (name == "independent") return RandomnessMode::independent;
  if (name == "shared_broadcast" || name == "shared") return RandomnessMode::shared_broadcast;
  throw Error("unknown randomness_mode '" + std::string(name) + "'");
}

CompressorSpec CompressorSpec::rand_k(int k, RandomnessMode mode) {
  CompressorSpec s;
  s.kind = CompressorKind::rand_k;
  s.k = k;
  s.mode = mode;
  return s;
}

CompressorSpec CompressorSpec::rand_k_scaled(int k, RandomnessMode mode) {
  CompressorSpec s = rand_k(k, mode);
  s.kind = CompressorKind::rand_k_scaled;
  return s;
}

CompressorSpec CompressorSpec::top_k(int k) {
  CompressorSpec s;
  s.kind = CompressorKind::top_k;
  s.k = k;
  return s;
}

CompressorSpec CompressorSpec::stoch_quant(int levels) {
  CompressorSpec s;
  s.kind = CompressorKind::stoch_quant;
  s.levels = levels;
  return s;
}

bool CompressorSpec::is_unbiased() const {
  switch (kind) {
    case CompressorKind::identity:
    case CompressorKind::rand_k_scaled:
    case CompressorKind::stoch_quant:
      return true;
    default:
      return false;
  }
}

bool CompressorSpec::is_contractive() const {
  switch (kind) {
    case CompressorKind::identity:
    case CompressorKind::rand_k:
    case CompressorKind::top_k:
    case CompressorKind::scaled_wrapper:
      return true;
    default:
      return false;
  }
}

namespace {

double unbiased_omega(CompressorKind kind, int k, int levels, int d) {
  switch (kind) {
    case CompressorKind::identity: return 0.0;
    case CompressorKind::rand_k_scaled: return static_cast<double>(d) / k - 1.0;
    case CompressorKind::stoch_quant: {
      const double s = levels;
      return std::min(d / (s * s), std::sqrt(static_cast<double>(d)) / s);
    }
    default:
      throw Error("compressor kind '" + std::string(to_string(kind)) + "' is not unbiased");
  }
}

}  // namespace

double CompressorSpec::omega(int d) const {
  if (!is_unbiased()) {
    throw Error("compressor kind '" + std::string(to_string(kind)) + "' has no omega");
  }
  return unbiased_omega(kind, k, levels, d);
}

double CompressorSpec::delta(int d) const {
  switch (kind) {
    case CompressorKind::identity: return 1.0;
    case CompressorKind::rand_k:
    case CompressorKind::top_k:
      return static_cast<double>(k) / d;
    case CompressorKind::scaled_wrapper:
      return 1.0 / (1.0 + unbiased_omega(inner, k, levels, d));
    default:
      throw Error("compressor kind '" + std::string(to_string(kind)) + "' is not contractive");
  }
}

CompressorSpec scale_unbiased_to_contractive(const CompressorSpec& spec, int d) {
  const double omega = spec.omega(d);
  CompressorSpec out = spec;
  out.kind = CompressorKind::scaled_wrapper;
  out.inner = spec.kind;
  out.scale = 1.0 / (1.0 + omega);
  return out;
}

WireCost dense_cost(int d, const CostModel& cost) {
  WireCost c;
  c.scalars = static_cast<std::uint64_t>(d);
  c.bits = static_cast<std::uint64_t>(d) * static_cast<std::uint64_t>(cost.value_bits);
  return c;
}

CompressorState::CompressorState(CompressorSpec spec, int d, RngStream rng, CostModel cost)
    : spec_(spec), d_(d), rng_(std::move(rng)), cost_(cost) {
  if (d <= 0) throw Error("compressor dimension must be positive");
  const auto base = spec_.base_kind();
  if (base == CompressorKind::rand_k || base == CompressorKind::rand_k_scaled ||
      base == CompressorKind::top_k) {
    if (spec_.k < 1 || spec_.k > d) {
      throw Error("compressor k=" + std::to_string(spec_.k) + " outside [1, d=" +
                  std::to_string(d) + "]");
    }
  }
  if (base == CompressorKind::stoch_quant && spec_.levels < 1) {
    throw Error("stoch_quant needs levels >= 1");
  }
  if (spec_.kind == CompressorKind::scaled_wrapper &&
      (spec_.inner == CompressorKind::scaled_wrapper || !(spec_.scale > 0.0))) {
    throw Error("scaled wrapper needs an unbiased inner kind and a positive scale");
  }
  perm_.resize(static_cast<std::size_t>(d));
  std::iota(perm_.begin(), perm_.end(), 0);
}

void CompressorState::select_random(int k) {
  // Partial Fisher-Yates over a persistent permutation: any starting
  // arrangement yields a uniform k-subset.
  for (int i = 0; i < k; ++i) {
    const auto j = i + static_cast<int>(rng_.uniform_index(static_cast<std::uint64_t>(d_ - i)));
    std::swap(perm_[i], perm_[j]);
  }
  selection_.assign(perm_.begin(), perm_.begin() + k);
  std::sort(selection_.begin(), selection_.end());
}

void CompressorState::select_top(const RealVector& x, int k) {
  std::vector<int> idx(static_cast<std::size_t>(d_));
  std::iota(idx.begin(), idx.end(), 0);
  // Larger magnitude first; ties go to the lower index.
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [&](int a, int b) {
    const double ma = std::abs(x[a]);
    const double mb = std::abs(x[b]);
    return ma > mb || (ma == mb && a < b);
  });
  selection_.assign(idx.begin(), idx.begin() + k);
  std::sort(selection_.begin(), selection_.end());
}

WireCost CompressorState::sparse_cost(int k) const {
  WireCost c;
  c.scalars = static_cast<std::uint64_t>(k);
  c.indices = static_cast<std::uint64_t>(k);
  c.bits = static_cast<std::uint64_t>(k) *
           static_cast<std::uint64_t>(cost_.value_bits + cost_.index_bits);
  return c;
}

Compressed CompressorState::compress(const RealVector& x) {
  if (x.size() != d_) {
    throw Error("compress: dimension mismatch (got " + std::to_string(x.size()) + ", expected " +
                std::to_string(d_) + ")");
  }
  Compressed out{RealVector::Zero(d_), {}};
  const double wrap = spec_.kind == CompressorKind::scaled_wrapper ? spec_.scale : 1.0;
  switch (spec_.base_kind()) {
    case CompressorKind::identity:
      selection_.clear();
      out.value = x;
      if (wrap != 1.0) out.value *= wrap;
      out.cost = dense_cost(d_, cost_);
      break;
    case CompressorKind::rand_k:
    case CompressorKind::rand_k_scaled: {
      select_random(spec_.k);
      const double factor =
          spec_.base_kind() == CompressorKind::rand_k_scaled ? static_cast<double>(d_) / spec_.k
                                                             : 1.0;
      for (int j : selection_) {
        double v = x[j];
        if (factor != 1.0) v *= factor;
        if (wrap != 1.0) v *= wrap;
        out.value[j] = v;
      }
      out.cost = sparse_cost(spec_.k);
      break;
    }
    case CompressorKind::top_k:
      select_top(x, spec_.k);
      for (int j : selection_) out.value[j] = x[j];
      out.cost = sparse_cost(spec_.k);
      break;
    case CompressorKind::stoch_quant: {
      selection_.clear();
      const double norm = x.norm();
      const double s = spec_.levels;
      if (norm == 0.0) {
        out.cost.scalars = 1;
        out.cost.bits = static_cast<std::uint64_t>(cost_.norm_bits);
        break;
      }
      for (int j = 0; j < d_; ++j) {
        const double r = s * std::abs(x[j]) / norm;
        const double lower = std::floor(r);
        const double level = rng_.uniform() < (r - lower) ? lower + 1.0 : lower;
        double v = norm * (level / s);
        if (x[j] < 0.0) v = -v;
        if (wrap != 1.0) v *= wrap;
        out.value[j] = v;
      }
      const auto level_bits =
          static_cast<std::uint64_t>(std::bit_width(static_cast<unsigned>(spec_.levels - 1)));
      out.cost.scalars = 1;
      out.cost.bits = static_cast<std::uint64_t>(cost_.norm_bits) +
                      static_cast<std::uint64_t>(d_) * (level_bits + 1);
      break;
    }
    case CompressorKind::scaled_wrapper:
      throw Error("nested scaled wrapper");
  }
  return out;
}

WireCost CompressorState::absorb(RealVector& base, const RealVector& target) {
  if (base.size() != d_ || target.size() != d_) throw Error("absorb: dimension mismatch");
  switch (spec_.kind) {
    case CompressorKind::identity:
      base = target;
      return dense_cost(d_, cost_);
    case CompressorKind::rand_k:
      select_random(spec_.k);
      for (int j : selection_) base[j] = target[j];
      return sparse_cost(spec_.k);
    case CompressorKind::top_k:
      select_top(target - base, spec_.k);
      for (int j : selection_) base[j] = target[j];
      return sparse_cost(spec_.k);
    default: {
      Compressed c = compress(target - base);
      base += c.value;
      return c.cost;
    }
  }
}

ContractEstimate estimate_contract_params(CompressorState& state, const VectorSampler& sampler,
                                          RngStream& sample_rng, int n_samples, int n_vectors) {
  if (n_samples < 1000) throw Error("estimate_contract_params: n_samples must be >= 1000");
  ContractEstimate est;
  est.omega_hat = 0.0;
  for (int v = 0; v < n_vectors; ++v) {
    const RealVector x = sampler(sample_rng);
    const double sq = x.squaredNorm();
    if (sq == 0.0) continue;
    RealVector sum = RealVector::Zero(x.size());
    double err = 0.0;
    for (int s = 0; s < n_samples; ++s) {
      const RealVector y = state.compress(x).value;
      sum += y;
      err += (y - x).squaredNorm();
    }
    const double ratio = err / n_samples / sq;
    est.omega_hat = std::max(est.omega_hat, ratio);
    est.max_bias = std::max(est.max_bias, (sum / n_samples - x).norm() / std::sqrt(sq));
    ++est.samples_used;
  }
  est.delta_hat = 1.0 - est.omega_hat;
  return est;
}

}  // namespace compresim
