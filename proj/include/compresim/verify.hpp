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
#include <iosfwd>
#include <string>
#include <vector>

namespace compresim {

struct VerifyCheck {
  std::string name;
  bool passed = false;
  std::string detail;  // measured value against its threshold
};

struct VerifyReport {
  std::string suite;
  std::vector<VerifyCheck> checks;
  double seconds = 0.0;

  bool passed() const;
  void add(std::string name, bool ok, std::string detail);
};

/// compressors: class parameters and unbiasedness of every kind (d = 64,
///   50 inputs, 20,000 draws each) plus the scaled-wrapper closure on d = 4.
/// fcc: error decay of the residual protocol.
/// zero_chain: chain, parity, gradient-bound, split and smoothness properties.
/// gradients: finite-difference checks of every analytic gradient.
/// recursion: NEOLITHIC error-compensation identity on a least-squares run.
VerifyReport verify_suite(const std::string& which, std::uint64_t seed = 0);
const std::vector<std::string>& verify_suite_names();

VerifyReport verify_compressors(std::uint64_t seed);
VerifyReport verify_wrapper_closure(std::uint64_t seed);
VerifyReport verify_fcc(std::uint64_t seed);
VerifyReport verify_zero_chain(std::uint64_t seed);
/// `only` restricts the check to least_squares, logistic or zero_chain.
VerifyReport verify_gradients(std::uint64_t seed, const std::string& only = "all");
VerifyReport verify_recursion(std::uint64_t seed);

void print_report(std::ostream& out, const VerifyReport& report);

}  // namespace compresim
