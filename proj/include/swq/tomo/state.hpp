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

// Single-qubit state tomography: linear inversion, maximum likelihood under
// the positivity constraint, and Poisson bootstrap error bars.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "swq/json_io.hpp"
#include "swq/qlin.hpp"
#include "swq/random.hpp"
#include "swq/tomo/counts.hpp"
#include "swq/tomo/factor.hpp"
#include "swq/tomo/optimize.hpp"

namespace swq {

/// Keeps log-likelihood terms finite when a predicted probability is zero.
inline constexpr double kLikelihoodEpsilon = 1e-9;

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, ComplexMatrix best, json diagnostics)
      : NumericalError(what), best_(std::move(best)), diagnostics_(std::move(diagnostics)) {}
  const ComplexMatrix& best_so_far() const { return best_; }
  const json& diagnostics() const { return diagnostics_; }

 private:
  ComplexMatrix best_;
  json diagnostics_;
};

struct LinearInversionResult {
  ComplexMatrix rho;       // unit trace, Hermitian, possibly indefinite
  StokesVector stokes;     // raw estimates, may leave the Bloch ball
  double min_eigenvalue = 0.0;
  bool physical = true;
};

/// s_i = (n+ - n-)/(n+ + n-), rho = (I + s.sigma)/2.
inline LinearInversionResult linear_inversion(const TomographyInput& input) {
  input.validate();
  auto s_of = [&](Basis b) {
    const auto& r = input[b];
    return static_cast<double>(r.n_plus - r.n_minus) / static_cast<double>(r.total());
  };
  LinearInversionResult out;
  out.stokes = {s_of(Basis::X), s_of(Basis::Y), s_of(Basis::Z)};
  out.rho = 0.5 * (pauli::identity() + out.stokes.x * pauli::x() + out.stokes.y * pauli::y() +
                   out.stokes.z * pauli::z());
  out.min_eigenvalue = 0.5 * (1.0 - out.stokes.norm());
  out.physical = out.min_eigenvalue >= -1e-12;
  return out;
}

/// Binomial log-likelihood sum n log(p + eps), without the combinatorial constant.
inline double log_likelihood(const ComplexMatrix& rho, const TomographyInput& input) {
  double ll = 0.0;
  for (const auto& r : input.records()) {
    const double s = (rho * basis_pauli(r.basis)).trace().real();
    const double pp = std::clamp(0.5 * (1.0 + s), 0.0, 1.0);
    ll += static_cast<double>(r.n_plus) * std::log(pp + kLikelihoodEpsilon) +
          static_cast<double>(r.n_minus) * std::log(1.0 - pp + kLikelihoodEpsilon);
  }
  return ll;
}

struct MleOptions {
  OptimizerOptions optimizer;
  /// Start from a random factor instead of the projected linear inversion.
  std::optional<std::uint64_t> random_start_seed;
};

struct StateEstimate {
  DensityMatrix rho;
  double log_likelihood = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;
  std::string stop_reason;

  json diagnostics() const {
    return json{{"iterations", iterations},
                {"final_gradient_norm", gradient_norm},
                {"stop_reason", stop_reason},
                {"log_likelihood", log_likelihood}};
  }
};

namespace detail {

/// Negative log-likelihood per count and its gradient in factor coordinates.
class StateObjective {
 public:
  explicit StateObjective(const TomographyInput& input) : input_(input) {
    scale_ = 1.0 / static_cast<double>(input.total());
  }

  double operator()(const Eigen::VectorXd& x, Eigen::VectorXd* grad) const {
    const ComplexMatrix a = factor::gram(x, 2);
    const double tr = a.trace().real();
    if (!(tr > 1e-300)) return std::numeric_limits<double>::infinity();
    const ComplexMatrix rho = a / tr;
    double f = 0.0;
    ComplexMatrix g = ComplexMatrix::Zero(2, 2);  // d f / d rho
    for (const auto& r : input_.records()) {
      const ComplexMatrix& sigma = basis_pauli(r.basis);
      const double s = (rho * sigma).trace().real();
      const double pp = 0.5 * (1.0 + s) + kLikelihoodEpsilon;
      const double pm = 0.5 * (1.0 - s) + kLikelihoodEpsilon;
      const double np = static_cast<double>(r.n_plus);
      const double nm = static_cast<double>(r.n_minus);
      f -= scale_ * (np * std::log(pp) + nm * std::log(pm));
      g -= scale_ * 0.5 * (np / pp - nm / pm) * sigma;
    }
    // rho ignores the scale of T; the penalty pins tr(T^dagger T) to 1.
    f += (tr - 1.0) * (tr - 1.0);
    if (grad) {
      const double g_rho = (g * rho).trace().real();
      const ComplexMatrix m = (g - g_rho * pauli::identity()) / tr + 2.0 * (tr - 1.0) * pauli::identity();
      *grad = factor::chain(x, 2, m);
    }
    return f;
  }

 private:
  const TomographyInput& input_;
  double scale_ = 1.0;
};

}  // namespace detail

/// Maximum-likelihood density matrix, rho = T^dagger T / tr(T^dagger T).
inline StateEstimate mle_state(const TomographyInput& input, const MleOptions& opts = {}) {
  input.validate();
  Eigen::VectorXd x0;
  if (opts.random_start_seed) {
    auto rng = make_engine(*opts.random_start_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    x0.resize(4);
    for (int k = 0; k < 4; ++k) x0(k) = normal(rng);
    x0(0) = std::abs(x0(0)) + 0.1;
    x0(1) = std::abs(x0(1)) + 0.1;
  } else {
    const auto lin = linear_inversion(input);
    const DensityMatrix projected = DensityMatrix::project(lin.rho);
    const ComplexMatrix start = 0.9 * projected.matrix() + 0.05 * pauli::identity();
    x0 = factor::from_matrix(start);
  }
  const detail::StateObjective objective(input);
  const auto res = minimize_bfgs(objective, x0, opts.optimizer);
  const ComplexMatrix a = factor::gram(res.x, 2);
  const ComplexMatrix rho = a / a.trace().real();
  if (!res.converged) {
    throw ConvergenceError("mle_state: optimizer did not converge", rho,
                           json{{"iterations", res.iterations},
                                {"final_gradient_norm", res.gradient_norm},
                                {"stop_reason", res.stop_reason}});
  }
  StateEstimate est{DensityMatrix::project(rho), log_likelihood(rho, input), res.iterations,
                    res.gradient_norm, res.stop_reason};
  return est;
}

/// Poisson draw of every count with the observed value as mean; bases that
/// come out empty are redrawn.
inline TomographyInput poisson_resample(const TomographyInput& input, std::mt19937_64& rng) {
  std::vector<MeasurementRecord> recs;
  for (const auto& r : input.records()) {
    MeasurementRecord out{r.basis, 0, 0};
    for (int attempt = 0; attempt < 1000 && out.total() == 0; ++attempt) {
      out.n_plus = r.n_plus > 0 ? std::poisson_distribution<std::int64_t>(static_cast<double>(r.n_plus))(rng) : 0;
      out.n_minus = r.n_minus > 0 ? std::poisson_distribution<std::int64_t>(static_cast<double>(r.n_minus))(rng) : 0;
    }
    if (out.total() == 0) out = r;
    recs.push_back(out);
  }
  return TomographyInput(recs);
}

struct BootstrapResult {
  double fidelity_std = 0.0;
  double fidelity_mean = 0.0;
  int resamples = 0;
};

/// Spread of the fidelity between resampled MLE estimates and `reference`
/// (normally the point estimate). Resample k uses substream k of `seed`.
inline BootstrapResult bootstrap_state_error(const TomographyInput& input, const DensityMatrix& reference,
                                             int resamples, std::uint64_t seed) {
  if (resamples < 2) throw ContractViolation("bootstrap_state_error: at least two resamples required");
  const auto fids = parallel_map<double>(static_cast<std::size_t>(resamples), [&](std::size_t k) {
    auto rng = make_engine(substream_seed(seed, k));
    const TomographyInput sample = poisson_resample(input, rng);
    return state_fidelity(mle_state(sample).rho, reference);
  });
  double mean = 0.0;
  for (double f : fids) mean += f;
  mean /= static_cast<double>(fids.size());
  double var = 0.0;
  for (double f : fids) var += (f - mean) * (f - mean);
  var /= static_cast<double>(fids.size() - 1);
  return {std::sqrt(var), mean, resamples};
}

inline BootstrapResult bootstrap_state_error(const TomographyInput& input, int resamples = 200,
                                             std::uint64_t seed = 0) {
  return bootstrap_state_error(input, mle_state(input).rho, resamples, seed);
}

}  // namespace swq
