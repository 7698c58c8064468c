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

// Unconstrained parameterisation of positive semidefinite matrices:
// A = T^dagger T with T lower triangular, packed as d^2 reals (the real
// diagonal first, then real/imaginary parts of the strict lower triangle
// in row-major order).

#include <Eigen/Dense>

#include "swq/qlin.hpp"

namespace swq::factor {

inline ComplexMatrix unpack(const Eigen::VectorXd& x, int d) {
  ComplexMatrix t = ComplexMatrix::Zero(d, d);
  Eigen::Index k = 0;
  for (int i = 0; i < d; ++i) t(i, i) = x(k++);
  for (int i = 1; i < d; ++i) {
    for (int j = 0; j < i; ++j) {
      t(i, j) = cplx{x(k), x(k + 1)};
      k += 2;
    }
  }
  return t;
}

/// Packs the lower triangle of a complex matrix (diagonal real parts only).
inline Eigen::VectorXd pack(const ComplexMatrix& t) {
  const int d = static_cast<int>(t.rows());
  Eigen::VectorXd x(d * d);
  Eigen::Index k = 0;
  for (int i = 0; i < d; ++i) x(k++) = t(i, i).real();
  for (int i = 1; i < d; ++i) {
    for (int j = 0; j < i; ++j) {
      x(k++) = t(i, j).real();
      x(k++) = t(i, j).imag();
    }
  }
  return x;
}

inline ComplexMatrix gram(const Eigen::VectorXd& x, int d) {
  const ComplexMatrix t = unpack(x, d);
  return t.adjoint() * t;
}

/// Gradient with respect to the packed parameters of f(A), A = T^dagger T,
/// given M with df = tr(M dA) for Hermitian M: d f / d T = 2 T M.
inline Eigen::VectorXd chain(const Eigen::VectorXd& x, int d, const ComplexMatrix& m) {
  const ComplexMatrix t = unpack(x, d);
  const ComplexMatrix tm = 2.0 * t * m;
  Eigen::VectorXd g(d * d);
  Eigen::Index k = 0;
  for (int i = 0; i < d; ++i) g(k++) = tm(i, i).real();
  for (int i = 1; i < d; ++i) {
    for (int j = 0; j < i; ++j) {
      g(k++) = tm(i, j).real();
      g(k++) = tm(i, j).imag();
    }
  }
  return g;
}

/// Lower-triangular T with T^dagger T = a for positive definite a.
inline Eigen::VectorXd from_matrix(const ComplexMatrix& a) {
  const int d = static_cast<int>(a.rows());
  // Reverse the index order so that an ordinary Cholesky factor gives the
  // T^dagger T form with T lower triangular.
  ComplexMatrix flip = ComplexMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i) flip(i, d - 1 - i) = 1.0;
  const ComplexMatrix reversed = flip * a * flip;
  Eigen::LLT<ComplexMatrix> llt(0.5 * (reversed + reversed.adjoint()));
  if (llt.info() != Eigen::Success) throw NumericalError("factor::from_matrix: not positive definite");
  const ComplexMatrix l = llt.matrixL();
  ComplexMatrix t = flip * l.adjoint() * flip;
  // Make the diagonal real and non-negative by rephasing rows.
  for (int i = 0; i < d; ++i) {
    const cplx di = t(i, i);
    if (std::abs(di) > 0) t.row(i) *= std::conj(di) / std::abs(di);
  }
  return pack(t);
}

}  // namespace swq::factor
