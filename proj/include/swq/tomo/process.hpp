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

// Single-qubit process tomography in the Pauli chi representation,
//   E(rho) = sum_ij chi_ij sigma_i rho sigma_j^dagger,
// fitted by maximum likelihood over six cardinal input states. The default
// fit is completely positive only, because the data are post-selected on
// detected photons; a trace-preserving fit is available on request.

#include <array>
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
#include "swq/tomo/state.hpp"

namespace swq {

enum class Cardinal { Down = 0, Up, D, A, R, L };

inline constexpr std::array<Cardinal, 6> kCardinals{Cardinal::Down, Cardinal::Up, Cardinal::D,
                                                     Cardinal::A,    Cardinal::R,  Cardinal::L};

inline std::string cardinal_name(Cardinal c) {
  static const std::array<const char*, 6> names{"down", "up", "D", "A", "R", "L"};
  return names[static_cast<int>(c)];
}

inline Cardinal cardinal_from_string(const std::string& s) {
  for (Cardinal c : kCardinals) {
    if (cardinal_name(c) == s) return c;
  }
  throw ContractViolation("unknown cardinal label '" + s + "'");
}

inline PureState cardinal_state(Cardinal c) {
  switch (c) {
    case Cardinal::Down: return spinwave::down();
    case Cardinal::Up: return spinwave::up();
    case Cardinal::D: return spinwave::diag();
    case Cardinal::A: return spinwave::anti();
    case Cardinal::R: return spinwave::right();
    case Cardinal::L: return spinwave::left();
  }
  throw ContractViolation("cardinal_state: bad label");
}

/// (theta, phi) with cardinal_state(c) = cos(theta)|down> + sin(theta) e^{i phi}|up>.
inline std::pair<double, double> cardinal_angles(Cardinal c) {
  switch (c) {
    case Cardinal::Down: return {0.0, 0.0};
    case Cardinal::Up: return {kPi / 2, 0.0};
    case Cardinal::D: return {kPi / 4, 0.0};
    case Cardinal::A: return {kPi / 4, kPi};
    case Cardinal::R: return {kPi / 4, kPi / 2};
    case Cardinal::L: return {kPi / 4, -kPi / 2};
  }
  throw ContractViolation("cardinal_angles: bad label");
}

/// Pauli-basis process matrix. Hermitian and positive semidefinite.
class ProcessMatrix {
 public:
  ProcessMatrix() : chi_(ComplexMatrix::Zero(4, 4)) { chi_(0, 0) = 1.0; }

  explicit ProcessMatrix(const ComplexMatrix& chi) : chi_(chi) {
    if (chi_.rows() != 4 || chi_.cols() != 4) throw ContractViolation("ProcessMatrix: 4x4 required");
    if (!is_hermitian(chi_, 1e-9)) throw ContractViolation("ProcessMatrix: not Hermitian");
    chi_ = 0.5 * (chi_ + chi_.adjoint());
    if (hermitian_eig(chi_, 1e-9).values.minCoeff() < -1e-8) {
      throw ContractViolation("ProcessMatrix: not positive semidefinite");
    }
  }

  const ComplexMatrix& matrix() const { return chi_; }
  double trace() const { return chi_.trace().real(); }

  /// sum_ij chi_ij sigma_j^dagger sigma_i; the identity for trace-preserving maps.
  ComplexMatrix tp_operator() const {
    ComplexMatrix out = ComplexMatrix::Zero(2, 2);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) out += chi_(i, j) * pauli::basis(j).adjoint() * pauli::basis(i);
    }
    return out;
  }

  double tp_residual() const { return max_abs(tp_operator() - pauli::identity()); }

  ComplexMatrix apply(const ComplexMatrix& rho) const {
    ComplexMatrix out = ComplexMatrix::Zero(2, 2);
    for (int i = 0; i < 4; ++i) {
      const ComplexMatrix left = pauli::basis(i) * rho;
      for (int j = 0; j < 4; ++j) {
        if (chi_(i, j) != cplx{0.0, 0.0}) out += chi_(i, j) * left * pauli::basis(j).adjoint();
      }
    }
    return out;
  }

 private:
  ComplexMatrix chi_;
};

inline ComplexVector pauli_coefficients(const ComplexMatrix& op) {
  ComplexVector u(4);
  for (int i = 0; i < 4; ++i) u(i) = (pauli::basis(i).adjoint() * op).trace() / 2.0;
  return u;
}

inline ProcessMatrix chi_from_kraus(const std::vector<ComplexMatrix>& kraus) {
  ComplexMatrix chi = ComplexMatrix::Zero(4, 4);
  for (const auto& k : kraus) {
    const ComplexVector u = pauli_coefficients(k);
    chi += u * u.adjoint();
  }
  return ProcessMatrix(chi);
}

inline ProcessMatrix chi_from_unitary(const ComplexMatrix& u) { return chi_from_kraus({u}); }

/// Columns are vec(sigma_m) in the (output, input) index order of the Choi matrix.
inline ComplexMatrix choi_basis() {
  ComplexMatrix b(4, 4);
  for (int m = 0; m < 4; ++m) {
    const ComplexMatrix s = pauli::basis(m);
    for (int a = 0; a < 2; ++a) {
      for (int i = 0; i < 2; ++i) b(2 * a + i, m) = s(a, i);
    }
  }
  return b;
}

/// J = sum_ij E(|i><j|) (x) |i><j|, output index major.
inline ComplexMatrix chi_to_choi(const ComplexMatrix& chi) {
  const ComplexMatrix b = choi_basis();
  return b * chi * b.adjoint();
}

inline ComplexMatrix choi_to_chi(const ComplexMatrix& choi) {
  const ComplexMatrix b = choi_basis();
  return b.adjoint() * choi * b / 4.0;
}

/// Kraus operators of a Haar-random channel with `env_dim` environment
/// dimensions (Stinespring isometry taken from a Haar unitary).
inline std::vector<ComplexMatrix> random_channel_kraus(int env_dim, std::mt19937_64& rng) {
  const ComplexMatrix u = haar_random_unitary(2 * env_dim, rng);
  std::vector<ComplexMatrix> kraus;
  for (int e = 0; e < env_dim; ++e) kraus.push_back(u.block(2 * e, 0, 2, 2));
  return kraus;
}

/// tr(chi1 chi2) for trace-one process matrices.
inline double process_fidelity(const ProcessMatrix& a, const ProcessMatrix& b) {
  if (std::abs(a.trace() - 1.0) > 1e-6 || std::abs(b.trace() - 1.0) > 1e-6) {
    throw ContractViolation("process_fidelity: process matrices must have unit trace");
  }
  return (a.matrix() * b.matrix()).trace().real();
}

struct ProcessDatum {
  DensityMatrix input;
  TomographyInput output;
};

/// Output tomography for each of the six cardinal inputs.
class ProcessTomographySet {
 public:
  ProcessTomographySet() = default;

  void set(Cardinal c, TomographyInput t) {
    data_[static_cast<int>(c)] = std::move(t);
    present_[static_cast<int>(c)] = true;
  }
  bool has(Cardinal c) const { return present_[static_cast<int>(c)]; }
  const TomographyInput& at(Cardinal c) const {
    if (!has(c)) throw ContractViolation("ProcessTomographySet: missing input " + cardinal_name(c));
    return data_[static_cast<int>(c)];
  }

  void validate() const {
    for (Cardinal c : kCardinals) at(c).validate();
  }

  std::vector<ProcessDatum> data() const {
    validate();
    std::vector<ProcessDatum> out;
    for (Cardinal c : kCardinals) out.push_back({DensityMatrix::from_pure(cardinal_state(c)), at(c)});
    return out;
  }

  static ProcessTomographySet from_labeled(const std::vector<LabeledCounts>& counts) {
    ProcessTomographySet set;
    for (const auto& item : counts) set.set(cardinal_from_string(item.label), item.input);
    set.validate();
    return set;
  }

 private:
  std::array<TomographyInput, 6> data_{};
  std::array<bool, 6> present_{};
};

struct ProcessEstimate {
  ProcessMatrix chi;
  double log_likelihood = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;
  std::string stop_reason;
  bool trace_preserving = false;
  double tp_residual = 0.0;
  double min_output_trace = 1.0;  // range of tr E(rho) over pure inputs
  double max_output_trace = 1.0;
  std::vector<std::string> warnings;

  json diagnostics() const {
    return json{{"iterations", iterations},         {"final_gradient_norm", gradient_norm},
                {"stop_reason", stop_reason},       {"log_likelihood", log_likelihood},
                {"trace_preserving", trace_preserving}, {"tp_residual", tp_residual},
                {"min_output_trace", min_output_trace}, {"max_output_trace", max_output_trace},
                {"warnings", warnings}};
  }
};

struct QptOptions {
  OptimizerOptions optimizer;
  std::optional<std::uint64_t> random_start_seed;
};

namespace detail {

/// K with tr(chi K) = tr(E(rho) P) for E given by chi.
inline ComplexMatrix response_matrix(const ComplexMatrix& rho, const ComplexMatrix& projector) {
  ComplexMatrix k(4, 4);
  for (int j = 0; j < 4; ++j) {
    for (int i = 0; i < 4; ++i) {
      k(j, i) = (pauli::basis(j).adjoint() * projector * pauli::basis(i) * rho).trace();
    }
  }
  return k;
}

class ProcessObjective {
 public:
  ProcessObjective(const std::vector<ProcessDatum>& data, bool tp) : tp_(tp) {
    std::int64_t total = 0;
    for (const auto& d : data) {
      Term term;
      term.norm = response_matrix(d.input.matrix(), pauli::identity());
      for (const auto& r : d.output.records()) {
        term.outcomes.push_back({response_matrix(d.input.matrix(), outcome_projector(r.basis, +1)),
                                 static_cast<double>(r.n_plus)});
        term.outcomes.push_back({response_matrix(d.input.matrix(), outcome_projector(r.basis, -1)),
                                 static_cast<double>(r.n_minus)});
      }
      total += d.output.total();
      terms_.push_back(std::move(term));
    }
    scale_ = 1.0 / static_cast<double>(total);
  }

  /// chi from packed factor coordinates; empty matrix if degenerate.
  ComplexMatrix chi(const Eigen::VectorXd& x) const {
    const ComplexMatrix a = factor::gram(x, 4);
    if (!tp_) {
      const double tr = a.trace().real();
      if (!(tr > 1e-300)) return {};
      return a / tr;
    }
    // a is a Choi matrix here; rescale the input side so that tr_out J = I.
    ComplexMatrix y = ComplexMatrix::Zero(2, 2);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) y(i, j) = a(i, j) + a(2 + i, 2 + j);
    }
    const auto eig = hermitian_eig(0.5 * (y + y.adjoint()), 1e-6);
    if (!(eig.values.minCoeff() > 1e-14 * std::max(1.0, eig.values.maxCoeff()))) return {};
    Eigen::VectorXd inv_sqrt = eig.values.cwiseSqrt().cwiseInverse();
    const ComplexMatrix y_is = eig.vectors * inv_sqrt.cast<cplx>().asDiagonal() * eig.vectors.adjoint();
    ComplexMatrix lift = ComplexMatrix::Zero(4, 4);
    lift.topLeftCorner(2, 2) = y_is;
    lift.bottomRightCorner(2, 2) = y_is;
    const ComplexMatrix choi = lift * a * lift.adjoint();
    return choi_to_chi(choi);
  }

  double value_of_chi(const ComplexMatrix& chi, ComplexMatrix* grad_chi) const {
    double f = 0.0;
    if (grad_chi) *grad_chi = ComplexMatrix::Zero(4, 4);
    for (const auto& t : terms_) {
      const double nk = (chi * t.norm).trace().real();
      if (!(nk > 1e-300)) return std::numeric_limits<double>::infinity();
      for (const auto& o : t.outcomes) {
        const double p = std::max(0.0, (chi * o.k).trace().real() / nk);
        f -= scale_ * o.count * std::log(p + kLikelihoodEpsilon);
        if (grad_chi && o.count != 0.0) {
          *grad_chi -= scale_ * o.count / (p + kLikelihoodEpsilon) * (o.k - p * t.norm) / nk;
        }
      }
    }
    return f;
  }

  double operator()(const Eigen::VectorXd& x, Eigen::VectorXd* grad) const {
    if (tp_) {
      // The Choi factor has a free scale; pin tr(M) to 2 (its TP value).
      auto value = [&](const Eigen::VectorXd& z) {
        const ComplexMatrix c = chi(z);
        if (c.size() == 0) return std::numeric_limits<double>::infinity();
        const double excess = factor::gram(z, 4).trace().real() - 2.0;
        return value_of_chi(c, nullptr) + excess * excess;
      };
      const double f = value(x);
      if (grad && std::isfinite(f)) *grad = numeric_gradient(value, x);
      return f;
    }
    const ComplexMatrix a = factor::gram(x, 4);
    const double tr = a.trace().real();
    if (!(tr > 1e-300)) return std::numeric_limits<double>::infinity();
    const ComplexMatrix c = a / tr;
    ComplexMatrix g;
    const double f = value_of_chi(c, grad ? &g : nullptr) + (tr - 1.0) * (tr - 1.0);
    if (grad && std::isfinite(f)) {
      const ComplexMatrix gh = 0.5 * (g + g.adjoint());
      const double g_chi = (gh * c).trace().real();
      const ComplexMatrix m = (gh - g_chi * ComplexMatrix::Identity(4, 4)) / tr +
                              2.0 * (tr - 1.0) * ComplexMatrix::Identity(4, 4);
      *grad = factor::chain(x, 4, m);
    }
    return f;
  }

  double log_likelihood(const ComplexMatrix& chi) const { return -value_of_chi(chi, nullptr) / scale_; }

 private:
  struct Outcome {
    ComplexMatrix k;
    double count = 0.0;
  };
  struct Term {
    ComplexMatrix norm;
    std::vector<Outcome> outcomes;
  };
  std::vector<Term> terms_;
  double scale_ = 1.0;
  bool tp_ = false;
};

/// Rank of the input states as vectors in operator space.
inline int input_rank(const std::vector<ProcessDatum>& data) {
  Eigen::MatrixXd v(4, static_cast<Eigen::Index>(data.size()));
  for (std::size_t k = 0; k < data.size(); ++k) {
    const ComplexVector c = pauli_coefficients(data[k].input.matrix());
    for (int i = 0; i < 4; ++i) v(i, static_cast<Eigen::Index>(k)) = c(i).real();
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(v);
  lu.setThreshold(1e-9);
  return static_cast<int>(lu.rank());
}

}  // namespace detail

/// Least-squares chi from linear-inversion output states, assuming
/// E(rho_k) = rho_hat_k. Hermitian and unit trace but not necessarily
/// positive: the unconstrained reference fit.
inline ComplexMatrix qpt_linear(const std::vector<ProcessDatum>& data) {
  // Real coordinates of a Hermitian 4x4: 4 diagonal + 12 off-diagonal.
  std::vector<ComplexMatrix> herm_basis;
  for (int i = 0; i < 4; ++i) {
    ComplexMatrix e = ComplexMatrix::Zero(4, 4);
    e(i, i) = 1.0;
    herm_basis.push_back(e);
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      ComplexMatrix re = ComplexMatrix::Zero(4, 4);
      re(i, j) = re(j, i) = 1.0;
      ComplexMatrix im = ComplexMatrix::Zero(4, 4);
      im(i, j) = kI;
      im(j, i) = -kI;
      herm_basis.push_back(re);
      herm_basis.push_back(im);
    }
  }
  const auto rows = static_cast<Eigen::Index>(4 * data.size());
  Eigen::MatrixXd a(rows, 16);
  Eigen::VectorXd b(rows);
  for (std::size_t k = 0; k < data.size(); ++k) {
    const ComplexMatrix rho_hat = linear_inversion(data[k].output).rho;
    const ComplexVector target = pauli_coefficients(rho_hat);
    for (int p = 0; p < 16; ++p) {
      ComplexMatrix out = ComplexMatrix::Zero(2, 2);
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
          const cplx c = herm_basis[p](i, j);
          if (c != cplx{0.0, 0.0}) {
            out += c * pauli::basis(i) * data[k].input.matrix() * pauli::basis(j).adjoint();
          }
        }
      }
      const ComplexVector col = pauli_coefficients(out);
      for (int i = 0; i < 4; ++i) a(static_cast<Eigen::Index>(4 * k) + i, p) = col(i).real();
    }
    for (int i = 0; i < 4; ++i) b(static_cast<Eigen::Index>(4 * k) + i) = target(i).real();
  }
  const Eigen::VectorXd coeff = a.completeOrthogonalDecomposition().solve(b);
  ComplexMatrix chi = ComplexMatrix::Zero(4, 4);
  for (int p = 0; p < 16; ++p) chi += coeff(p) * herm_basis[p];
  const double tr = chi.trace().real();
  if (std::abs(tr) > 1e-12) chi /= tr;
  return chi;
}

/// Maximum-likelihood process matrix for arbitrary (known) input states.
inline ProcessEstimate qpt_mle(const std::vector<ProcessDatum>& data, bool enforce_tp,
                               const QptOptions& opts = {}) {
  if (data.empty()) throw ContractViolation("qpt_mle: no data");
  for (const auto& d : data) {
    if (d.input.dim() != 2) throw ContractViolation("qpt_mle: qubit inputs required");
    d.output.validate();
  }
  ProcessEstimate est;
  if (detail::input_rank(data) < 4) {
    est.warnings.push_back("ill-conditioned: input states do not span the operator space");
  }

  ComplexMatrix projected = qpt_linear(data);
  {
    const auto eig = hermitian_eig(0.5 * (projected + projected.adjoint()), 1e-6);
    Eigen::VectorXd vals = eig.values.cwiseMax(0.0);
    if (vals.sum() <= 0.0) vals.setConstant(0.25);
    vals /= vals.sum();
    projected = eig.vectors * vals.cast<cplx>().asDiagonal() * eig.vectors.adjoint();
  }

  Eigen::VectorXd x0;
  if (opts.random_start_seed) {
    auto rng = make_engine(*opts.random_start_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    x0.resize(16);
    for (int k = 0; k < 16; ++k) x0(k) = normal(rng);
    for (int k = 0; k < 4; ++k) x0(k) = std::abs(x0(k)) + 0.1;
  } else {
    const ComplexMatrix start = 0.9 * projected + 0.1 * ComplexMatrix::Identity(4, 4) / 4.0;
    // The TP path factors the Choi matrix rather than chi.
    x0 = factor::from_matrix(enforce_tp ? chi_to_choi(start) : start);
  }

  const detail::ProcessObjective objective(data, enforce_tp);
  const auto res = minimize_bfgs(objective, x0, opts.optimizer);
  ComplexMatrix chi = objective.chi(res.x);
  if (chi.size() == 0) throw NumericalError("qpt_mle: degenerate optimum");
  chi = 0.5 * (chi + chi.adjoint());
  if (!res.converged) {
    throw ConvergenceError("qpt_mle: optimizer did not converge", chi,
                           json{{"iterations", res.iterations},
                                {"final_gradient_norm", res.gradient_norm},
                                {"stop_reason", res.stop_reason}});
  }
  // Keep the projected linear inversion when it beats the BFGS optimum.
  const bool projected_ok = !enforce_tp || ProcessMatrix(projected).tp_residual() <= 1e-7;
  if (projected_ok && objective.log_likelihood(projected) > objective.log_likelihood(chi)) {
    chi = projected;
    est.stop_reason = "linear_inversion";
  }
  est.chi = ProcessMatrix(chi);
  est.log_likelihood = objective.log_likelihood(chi);
  est.iterations = res.iterations;
  est.gradient_norm = res.gradient_norm;
  if (est.stop_reason.empty()) est.stop_reason = res.stop_reason;
  est.trace_preserving = enforce_tp;
  est.tp_residual = est.chi.tp_residual();
  const auto tp_eig = hermitian_eig(est.chi.tp_operator(), 1e-8);
  est.min_output_trace = tp_eig.values.minCoeff();
  est.max_output_trace = tp_eig.values.maxCoeff();
  return est;
}

inline ProcessEstimate qpt_mle(const ProcessTomographySet& set, bool enforce_tp,
                               const QptOptions& opts = {}) {
  return qpt_mle(set.data(), enforce_tp, opts);
}

}  // namespace swq
