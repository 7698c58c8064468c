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

// Small dense complex linear algebra and single-qubit state primitives.
//
// Every matrix function of a Hermitian argument (exponential, square root)
// goes through one eigendecomposition; at dimension <= 4 that is exact to
// machine precision and needs no series truncation.

#include <Eigen/Dense>

#include <algorithm>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace swq {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

/// Default validation tolerance for Hermiticity, unitarity and positivity.
inline constexpr double kTol = 1e-10;

/// A caller broke a documented precondition.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not produce a trustworthy answer.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool is_square(const ComplexMatrix& m) { return m.rows() == m.cols(); }

inline bool is_hermitian(const ComplexMatrix& m, double tol = kTol) {
  return is_square(m) && max_abs(m - m.adjoint()) <= tol;
}

inline bool is_unitary(const ComplexMatrix& m, double tol = kTol) {
  if (!is_square(m)) return false;
  const auto n = m.rows();
  return max_abs(m.adjoint() * m - ComplexMatrix::Identity(n, n)) <= tol;
}

struct HermitianEig {
  Eigen::VectorXd values;  // ascending
  ComplexMatrix vectors;   // columns are eigenvectors
};

inline HermitianEig hermitian_eig(const ComplexMatrix& m, double tol = kTol) {
  if (!is_hermitian(m, tol)) {
    throw ContractViolation("hermitian_eig: matrix is not Hermitian");
  }
  // Symmetrise so that the solver sees an exactly Hermitian matrix.
  const ComplexMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("hermitian_eig: eigensolver failed");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline bool is_psd(const ComplexMatrix& m, double tol = kTol) {
  if (!is_hermitian(m, tol)) return false;
  return hermitian_eig(m, tol).values.minCoeff() >= -tol;
}

/// U = exp(-i h t) for Hermitian h given in angular-frequency units.
inline ComplexMatrix matrix_exp_i(const ComplexMatrix& h, double t) {
  if (!is_hermitian(h, kTol * std::max(1.0, max_abs(h)))) {
    throw ContractViolation("matrix_exp_i: generator is not Hermitian");
  }
  const auto eig = hermitian_eig(h, kTol * std::max(1.0, max_abs(h)));
  ComplexVector phases(eig.values.size());
  for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
    phases(k) = std::exp(-kI * eig.values(k) * t);
  }
  return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

/// Principal square root of a positive semidefinite matrix. Eigenvalues in
/// [-1e-8, 0) are treated as round-off and clipped to zero.
inline ComplexMatrix matrix_sqrt_psd(const ComplexMatrix& m) {
  const auto eig = hermitian_eig(m, 1e-9);
  if (eig.values.minCoeff() < -1e-8) {
    throw ContractViolation("matrix_sqrt_psd: matrix has a negative eigenvalue");
  }
  Eigen::VectorXd roots = eig.values.cwiseMax(0.0).cwiseSqrt();
  return eig.vectors * roots.cast<cplx>().asDiagonal() * eig.vectors.adjoint();
}

/// Smallest max-norm distance between u and e^{i a} v over global phases a.
inline double phase_invariant_distance(const ComplexMatrix& u, const ComplexMatrix& v) {
  if (u.rows() != v.rows() || u.cols() != v.cols()) {
    throw ContractViolation("phase_invariant_distance: shape mismatch");
  }
  const cplx overlap = (v.adjoint() * u).trace();
  const cplx phase = std::abs(overlap) > 1e-300 ? overlap / std::abs(overlap) : cplx{1.0, 0.0};
  return max_abs(u - phase * v);
}

/// |tr(U^dagger V)| / d, equal to one iff U and V agree up to a global phase.
inline double gate_overlap(const ComplexMatrix& u, const ComplexMatrix& v) {
  return std::abs((u.adjoint() * v).trace()) / static_cast<double>(u.rows());
}

namespace pauli {

inline ComplexMatrix identity() { return ComplexMatrix::Identity(2, 2); }
inline ComplexMatrix x() { ComplexMatrix m(2, 2); m << 0, 1, 1, 0; return m; }
inline ComplexMatrix y() { ComplexMatrix m(2, 2); m << 0, -kI, kI, 0; return m; }
inline ComplexMatrix z() { ComplexMatrix m(2, 2); m << 1, 0, 0, -1; return m; }

/// sigma_0 = I, sigma_1 = X, sigma_2 = Y, sigma_3 = Z.
inline ComplexMatrix basis(int index) {
  switch (index) {
    case 0: return identity();
    case 1: return x();
    case 2: return y();
    case 3: return z();
    default: throw ContractViolation("pauli::basis: index must be 0..3");
  }
}

}  // namespace pauli

class PureState {
 public:
  PureState() = default;

  /// Validates the norm; use normalized() for unnormalised input.
  explicit PureState(ComplexVector amplitudes, double tol = 1e-12)
      : amps_(std::move(amplitudes)) {
    if (amps_.size() < 1) throw ContractViolation("PureState: empty amplitude vector");
    if (std::abs(amps_.squaredNorm() - 1.0) > tol) {
      throw ContractViolation("PureState: amplitudes are not normalised");
    }
  }

  static PureState normalized(const ComplexVector& v) {
    const double n = v.norm();
    if (!(n > 1e-300)) throw ContractViolation("PureState: zero vector");
    return PureState(v / n);
  }

  int dim() const { return static_cast<int>(amps_.size()); }
  const ComplexVector& amplitudes() const { return amps_; }
  cplx operator[](int k) const { return amps_(k); }

 private:
  ComplexVector amps_;
};

/// Bloch-sphere coordinates, s_i = tr(rho sigma_i).
struct StokesVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  double component(int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
};

/// Hermitian, positive semidefinite, unit trace; dimension 2, 3 or 4.
class DensityMatrix {
 public:
  DensityMatrix() : m_(ComplexMatrix::Identity(2, 2) * 0.5) {}

  explicit DensityMatrix(const ComplexMatrix& m, double tol = kTol) : m_(m) {
    if (!is_square(m_) || m_.rows() < 2 || m_.rows() > 4) {
      throw ContractViolation("DensityMatrix: dimension must be 2, 3 or 4");
    }
    if (!is_hermitian(m_, tol)) throw ContractViolation("DensityMatrix: not Hermitian");
    if (std::abs(m_.trace() - cplx{1.0, 0.0}) > tol) {
      throw ContractViolation("DensityMatrix: trace differs from one");
    }
    if (hermitian_eig(m_, tol).values.minCoeff() < -tol) {
      throw ContractViolation("DensityMatrix: negative eigenvalue");
    }
    m_ = 0.5 * (m_ + m_.adjoint());
  }

  static DensityMatrix from_pure(const PureState& psi) {
    return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
  }

  static DensityMatrix maximally_mixed(int dim) {
    return DensityMatrix(ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim));
  }

  static DensityMatrix from_stokes(const StokesVector& s) {
    if (s.norm() > 1.0 + 1e-9) throw ContractViolation("from_stokes: |s| > 1");
    ComplexMatrix m = 0.5 * (pauli::identity() + s.x * pauli::x() + s.y * pauli::y() +
                             s.z * pauli::z());
    return DensityMatrix(m);
  }

  /// Normalises trace and clips negative eigenvalues; for estimates that are
  /// physical up to round-off or need projection onto the state space.
  static DensityMatrix project(const ComplexMatrix& m) {
    const ComplexMatrix h = 0.5 * (m + m.adjoint());
    const auto eig = hermitian_eig(h);
    Eigen::VectorXd vals = eig.values.cwiseMax(0.0);
    const double total = vals.sum();
    if (!(total > 0.0)) throw NumericalError("DensityMatrix::project: no positive weight");
    vals /= total;
    ComplexMatrix out = eig.vectors * vals.cast<cplx>().asDiagonal() * eig.vectors.adjoint();
    return DensityMatrix(out);
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  const ComplexMatrix& matrix() const { return m_; }
  cplx operator()(int r, int c) const { return m_(r, c); }
  double purity() const { return (m_ * m_).trace().real(); }

 private:
  ComplexMatrix m_;
};

/// Uhlmann fidelity {tr sqrt(sqrt(r1) r2 sqrt(r1))}^2.
inline double state_fidelity(const DensityMatrix& rho1, const DensityMatrix& rho2) {
  if (rho1.dim() != rho2.dim()) throw ContractViolation("state_fidelity: dimension mismatch");
  const ComplexMatrix s = matrix_sqrt_psd(rho1.matrix());
  const ComplexMatrix inner = s * rho2.matrix() * s;
  const auto eig = hermitian_eig(0.5 * (inner + inner.adjoint()), 1e-9);
  // Eigenvalues below 1e-14 are round-off from rank-deficient inputs.
  double root_sum = 0.0;
  for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
    if (eig.values(k) > 1e-14) root_sum += std::sqrt(eig.values(k));
  }
  return std::clamp(root_sum * root_sum, 0.0, 1.0);
}

/// Qubit closed form F = tr(r1 r2) + 2 sqrt(det r1 det r2).
inline double qubit_fidelity(const ComplexMatrix& r1, const ComplexMatrix& r2) {
  const double overlap = (r1 * r2).trace().real();
  const double d1 = std::max(0.0, r1.determinant().real());
  const double d2 = std::max(0.0, r2.determinant().real());
  return std::clamp(overlap + 2.0 * std::sqrt(d1 * d2), 0.0, 1.0);
}

inline StokesVector stokes_from_rho(const DensityMatrix& rho) {
  if (rho.dim() != 2) throw ContractViolation("stokes_from_rho: qubit density matrix required");
  const ComplexMatrix& m = rho.matrix();
  return {(m * pauli::x()).trace().real(), (m * pauli::y()).trace().real(),
          (m * pauli::z()).trace().real()};
}

/// Haar-distributed pure state from normalised complex Gaussians.
inline PureState haar_random_state(int dim, std::mt19937_64& rng) {
  if (dim < 2) throw ContractViolation("haar_random_state: dim must be >= 2");
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexVector v(dim);
  for (int k = 0; k < dim; ++k) {
    const double re = normal(rng);
    const double im = normal(rng);
    v(k) = cplx{re, im};
  }
  return PureState::normalized(v);
}

inline PureState haar_random_state(int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return haar_random_state(dim, rng);
}

/// Haar unitary via QR of a Ginibre matrix with the phase fix of Mezzadri.
inline ComplexMatrix haar_random_unitary(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix g(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(r, c) = cplx{re, im};
    }
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(dim, dim);
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < dim; ++k) {
    const cplx d = r(k, k);
    q.col(k) *= std::abs(d) > 0 ? d / std::abs(d) : cplx{1.0, 0.0};
  }
  return q;
}

/// Random Hermitian matrix with entries of order one.
inline ComplexMatrix random_hermitian(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix g(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(r, c) = cplx{re, im};
    }
  }
  return 0.5 * (g + g.adjoint());
}

// Spinwave qubit basis. |s_down> is the +z pole, |s_up> the -z pole.
namespace spinwave {

inline ComplexVector ket(cplx down, cplx up) {
  ComplexVector v(2);
  v << down, up;
  return v;
}

inline PureState down() { return PureState(ket(1.0, 0.0)); }
inline PureState up() { return PureState(ket(0.0, 1.0)); }
inline PureState diag() { return PureState(ket(1.0, 1.0) / std::sqrt(2.0)); }
inline PureState anti() { return PureState(ket(1.0, -1.0) / std::sqrt(2.0)); }
inline PureState right() { return PureState(ket(1.0, kI) / std::sqrt(2.0)); }
inline PureState left() { return PureState(ket(1.0, -kI) / std::sqrt(2.0)); }

/// cos(theta)|s_down> + sin(theta) e^{i phi}|s_up>.
inline PureState superposition(double theta, double phi) {
  return PureState::normalized(ket(std::cos(theta), std::sin(theta) * std::exp(kI * phi)));
}

}  // namespace spinwave

}  // namespace swq
