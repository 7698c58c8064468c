// Copyright 2026 The swq Authors
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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "swq/qlin.hpp"
#include "swq/random.hpp"
#include "swq/tomo/process.hpp"

namespace swq {

/// F_ave = (d F_proc + 1) / (d + 1) at d = 2.
inline double average_fidelity_from_process(double f_proc) {
  if (!(f_proc >= 0.0 && f_proc <= 1.0)) {
    throw ContractViolation("average_fidelity_from_process: f_proc must lie in [0, 1]");
  }
  return (2.0 * f_proc + 1.0) / 3.0;
}

struct AverageFidelity {
  double haar_mean = 0.0;
  double haar_std_error = 0.0;
  double cardinal_mean = 0.0;
  int samples = 0;
};

/// Fidelity of the (trace-normalized) channel output to the ideal output
/// for a pure input.
inline double channel_state_fidelity(const ProcessMatrix& chi, const ComplexMatrix& ideal,
                                     const ComplexVector& psi) {
  const ComplexMatrix rho = psi * psi.adjoint();
  const ComplexMatrix out = chi.apply(rho);
  const double tr = out.trace().real();
  if (!(tr > 1e-15)) throw NumericalError("channel output has vanishing trace");
  const ComplexVector target = ideal * psi;
  return (target.adjoint() * out * target)(0, 0).real() / tr;
}

namespace detail {
inline constexpr int kFidelityChunk = 4096;
}

/// Haar-random pure-input average, plus the six-cardinal-point mean.
/// Samples are drawn in fixed-size chunks, each from its own substream, so
/// the result does not depend on the thread count.
inline AverageFidelity monte_carlo_average_fidelity(const ProcessMatrix& chi, const ComplexMatrix& ideal,
                                                    int samples, std::uint64_t seed) {
  if (samples < 1) throw ContractViolation("monte_carlo_average_fidelity: samples must be >= 1");
  if (!is_unitary(ideal, 1e-9) || ideal.rows() != 2) {
    throw ContractViolation("monte_carlo_average_fidelity: ideal must be a 2x2 unitary");
  }
  const int chunks = (samples + detail::kFidelityChunk - 1) / detail::kFidelityChunk;
  struct Partial {
    double sum = 0.0;
    double sum_sq = 0.0;
  };
  const auto parts = parallel_map<Partial>(static_cast<std::size_t>(chunks), [&](std::size_t c) {
    auto rng = make_engine(derive_seed(seed, "haar", c));
    const int begin = static_cast<int>(c) * detail::kFidelityChunk;
    const int end = std::min(samples, begin + detail::kFidelityChunk);
    Partial p;
    for (int k = begin; k < end; ++k) {
      const double f = channel_state_fidelity(chi, ideal, haar_random_state(2, rng).amplitudes());
      p.sum += f;
      p.sum_sq += f * f;
    }
    return p;
  });
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const auto& p : parts) {
    sum += p.sum;
    sum_sq += p.sum_sq;
  }
  AverageFidelity out;
  out.samples = samples;
  out.haar_mean = sum / samples;
  if (samples > 1) {
    const double var = std::max(0.0, (sum_sq - samples * out.haar_mean * out.haar_mean) / (samples - 1));
    out.haar_std_error = std::sqrt(var / samples);
  }
  double card = 0.0;
  for (Cardinal c : kCardinals) card += channel_state_fidelity(chi, ideal, cardinal_state(c).amplitudes());
  out.cardinal_mean = card / 6.0;
  return out;
}

}  // namespace swq
