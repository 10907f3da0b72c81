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
#include <string>
#include <string_view>
#include <vector>

#include "compresim/core.hpp"

namespace compresim {

enum class CompressorKind {
  identity,
  rand_k,         // k uniform coordinates, unscaled (contractive, delta = k/d)
  rand_k_scaled,  // rand_k times d/k (unbiased, omega = d/k - 1)
  top_k,          // k largest magnitudes (contractive, delta = k/d)
  stoch_quant,    // s-level stochastic quantizer (unbiased)
  scaled_wrapper, // unbiased inner compressor scaled by 1/(1+omega)
};

enum class RandomnessMode { independent, shared_broadcast };

std::string_view to_string(CompressorKind kind);
std::string_view to_string(RandomnessMode mode);
CompressorKind parse_compressor_kind(std::string_view name);
RandomnessMode parse_randomness_mode(std::string_view name);

/// Declarative description of one compression operator.
///
/// For `scaled_wrapper`, `inner` names the wrapped unbiased kind and `k`,
/// `levels`, `mode` configure that inner operator.
struct CompressorSpec {
  CompressorKind kind = CompressorKind::identity;
  int k = 1;
  int levels = 1;
  double scale = 1.0;
  RandomnessMode mode = RandomnessMode::independent;
  CompressorKind inner = CompressorKind::identity;

  static CompressorSpec identity() { return {}; }
  static CompressorSpec rand_k(int k, RandomnessMode mode = RandomnessMode::independent);
  static CompressorSpec rand_k_scaled(int k, RandomnessMode mode = RandomnessMode::independent);
  static CompressorSpec top_k(int k);
  static CompressorSpec stoch_quant(int levels);

  /// The kind that actually draws coordinates or levels.
  CompressorKind base_kind() const {
    return kind == CompressorKind::scaled_wrapper ? inner : kind;
  }
  bool is_unbiased() const;
  bool is_contractive() const;
  /// Variance parameter for unbiased kinds (0 for identity).
  double omega(int d) const;
  /// Contraction parameter for contractive kinds.
  double delta(int d) const;

  bool operator==(const CompressorSpec&) const = default;
};

/// Unbiased C with variance omega becomes
/// 1/(1+omega)-contractive once scaled by 1/(1+omega).
CompressorSpec scale_unbiased_to_contractive(const CompressorSpec& spec, int d);

/// Bit widths used to price messages.
struct CostModel {
  int value_bits = 64;
  int index_bits = 32;
  int norm_bits = 32;
};

/// Transmission cost of one message.
struct WireCost {
  std::uint64_t scalars = 0;
  std::uint64_t indices = 0;
  std::uint64_t bits = 0;

  WireCost& operator+=(const WireCost& o) {
    scalars += o.scalars;
    indices += o.indices;
    bits += o.bits;
    return *this;
  }
  bool operator==(const WireCost&) const = default;
};

/// Cost of sending d uncompressed scalars.
WireCost dense_cost(int d, const CostModel& cost = {});

struct Compressed {
  RealVector value;
  WireCost cost;
};

/// A compression operator bound to a dimension and a randomness stream.
/// Single owner; the stream advances with every call.
class CompressorState {
 public:
  CompressorState(CompressorSpec spec, int d, RngStream rng, CostModel cost = {});

  Compressed compress(const RealVector& x);

  /// base <- base + C(target - base), the error-feedback state refresh.
  ///
  /// For unscaled coordinate selectors (identity, rand_k, top_k) the
  /// transmitted coordinates carry target - base exactly, so the refreshed
  /// coordinates are written as target directly. This is the correctly
  /// rounded result of the same expression.
  WireCost absorb(RealVector& base, const RealVector& target);

  /// 0-based coordinates kept by the last sparsifier call, ascending.
  const std::vector<int>& last_selection() const { return selection_; }
  std::uint64_t draw_index() const { return rng_.draw_index(); }
  const CompressorSpec& spec() const { return spec_; }
  int dim() const { return d_; }

 private:
  void select_random(int k);
  void select_top(const RealVector& x, int k);
  WireCost sparse_cost(int k) const;

  CompressorSpec spec_;
  int d_;
  RngStream rng_;
  CostModel cost_;
  std::vector<int> perm_;
  std::vector<int> selection_;
};

/// Empirical check of the class parameters of a compressor.
struct ContractEstimate {
  double omega_hat = 0.0;  // max over samples of mean ||C(x)-x||^2 / ||x||^2
  double delta_hat = 1.0;  // 1 - omega_hat
  double max_bias = 0.0;   // max over samples of ||mean C(x) - x|| / ||x||
  int samples_used = 0;
};

using VectorSampler = std::function<RealVector(RngStream&)>;

/// Compresses each of `n_vectors` sampled test vectors `n_samples` times
/// (n_samples >= 1000). Zero test vectors are skipped.
ContractEstimate estimate_contract_params(CompressorState& state, const VectorSampler& sampler,
                                          RngStream& sample_rng, int n_samples,
                                          int n_vectors = 8);

}  // namespace compresim
