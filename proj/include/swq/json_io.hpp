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

// Complex matrices travel as nested arrays of [re, im] pairs, row-major.

#include <json.hpp>

#include <cmath>
#include <string>

#include "swq/qlin.hpp"

namespace swq {

using json = nlohmann::json;

inline json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline cplx complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) {
    throw ContractViolation("complex value must be a [re, im] pair");
  }
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

inline json matrix_to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline ComplexMatrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ContractViolation("matrix must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.at(0).size());
  ComplexMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j.at(r);
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ContractViolation("matrix rows must have equal length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = complex_from_json(row.at(c));
  }
  return m;
}

inline json vector_to_json(const ComplexVector& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(complex_to_json(v(k)));
  return out;
}

inline json stokes_to_json(const StokesVector& s) { return json::array({s.x, s.y, s.z}); }

/// Replaces non-finite numbers so that reports stay valid JSON; callers flag
/// the affected quantity separately.
inline double finite_or(double value, double fallback) {
  return std::isfinite(value) ? value : fallback;
}

}  // namespace swq
