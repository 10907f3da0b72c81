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

#include <functional>
#include <optional>
#include <vector>

#include "compresim/compressors.hpp"
#include "compresim/core.hpp"

namespace compresim {

/// Result of one fast-compressed-communication exchange.
///
/// `returned` is accumulated chunk by chunk starting from zero, so it equals
/// the ordered sum of `chunks` exactly.
struct FccTranscript {
  std::vector<RealVector> chunks;
  RealVector returned;
  WireCost total_cost;
  int rounds = 0;
  /// First round r whose input residual was exactly zero, if any.
  std::optional<int> first_zero_residual_round;
};

/// Called after each round with the round number, the residual that was
/// compressed and the compressor (whose last_selection() is that round's).
using FccRoundHook =
    std::function<void(int round, const RealVector& residual, const CompressorState& compressor)>;

/// R rounds of compressing what has not been sent yet:
///   c_r = C(v_star - v_r),  v_{r+1} = v_r + c_r,  v_0 = 0.
/// Runs all R rounds even if the residual reaches zero.
FccTranscript fcc(const RealVector& v_star, CompressorState& compressor, int rounds,
                  const FccRoundHook& hook = {});

/// Monte-Carlo mean of ||v_R - v_star||^2 for R = 0..r_max over n_trials
/// independent transcripts (entry 0 is ||v_star||^2). Also returns the
/// per-R sample standard deviation.
struct FccErrorCurve {
  std::vector<double> mean;
  std::vector<double> stddev;
  int trials = 0;
};

FccErrorCurve fcc_error_curve(const RealVector& v_star, const CompressorSpec& spec, int r_max,
                              int n_trials, std::uint64_t seed);

}  // namespace compresim
