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

// Photon-counting records in the three Pauli analysis bases, the binomial
// forward model, and the CSV interchange format
//   input_label,basis,n_plus,n_minus

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "swq/qlin.hpp"
#include "swq/random.hpp"

namespace swq {

enum class Basis { X = 0, Y = 1, Z = 2 };

inline constexpr std::array<Basis, 3> kBases{Basis::X, Basis::Y, Basis::Z};

inline char basis_name(Basis b) { return "XYZ"[static_cast<int>(b)]; }

inline Basis basis_from_string(const std::string& s) {
  if (s == "X" || s == "x") return Basis::X;
  if (s == "Y" || s == "y") return Basis::Y;
  if (s == "Z" || s == "z") return Basis::Z;
  throw ContractViolation("unknown measurement basis '" + s + "'");
}

inline ComplexMatrix basis_pauli(Basis b) { return pauli::basis(static_cast<int>(b) + 1); }

/// Projector onto the +1 (sign > 0) or -1 eigenspace of the basis Pauli.
inline ComplexMatrix outcome_projector(Basis b, int sign) {
  return 0.5 * (pauli::identity() + static_cast<double>(sign) * basis_pauli(b));
}

struct MeasurementRecord {
  Basis basis = Basis::Z;
  std::int64_t n_plus = 0;
  std::int64_t n_minus = 0;

  std::int64_t total() const { return n_plus + n_minus; }
};

/// One record per basis X, Y, Z, each with at least one count.
class TomographyInput {
 public:
  TomographyInput() = default;

  explicit TomographyInput(const std::vector<MeasurementRecord>& records) {
    std::array<bool, 3> seen{false, false, false};
    for (const auto& r : records) {
      const int k = static_cast<int>(r.basis);
      if (seen[k]) throw ContractViolation("TomographyInput: duplicate basis");
      seen[k] = true;
      records_[k] = r;
    }
    for (bool s : seen) {
      if (!s) throw ContractViolation("TomographyInput: all three bases are required");
    }
    validate();
  }

  void validate() const {
    for (const auto& r : records_) {
      if (r.n_plus < 0 || r.n_minus < 0) throw ContractViolation("TomographyInput: negative counts");
      if (r.total() <= 0) {
        throw ContractViolation(std::string("TomographyInput: zero counts in basis ") +
                                basis_name(r.basis));
      }
    }
  }

  const MeasurementRecord& operator[](Basis b) const { return records_[static_cast<int>(b)]; }
  const std::array<MeasurementRecord, 3>& records() const { return records_; }
  std::int64_t total() const {
    return records_[0].total() + records_[1].total() + records_[2].total();
  }

 private:
  std::array<MeasurementRecord, 3> records_{
      MeasurementRecord{Basis::X, 0, 0}, MeasurementRecord{Basis::Y, 0, 0},
      MeasurementRecord{Basis::Z, 0, 0}};
};

enum class CountModel {
  Binomial,  // n_plus ~ Binomial(n_total, p_plus)
  Expected,  // n_plus = round(n_total p_plus), the large-N limit
};

/// Probability of the + outcome with a fraction `background` of detections
/// replaced by uncorrelated 50/50 clicks.
inline double plus_probability(const DensityMatrix& rho, Basis basis, double background) {
  if (rho.dim() != 2) throw ContractViolation("plus_probability: qubit state required");
  const double s = (rho.matrix() * basis_pauli(basis)).trace().real();
  const double p = (1.0 - background) * 0.5 * (1.0 + s) + 0.5 * background;
  return std::clamp(p, 0.0, 1.0);
}

inline MeasurementRecord simulate_counts(const DensityMatrix& rho, Basis basis, std::int64_t n_total,
                                         double background, std::uint64_t seed,
                                         CountModel model = CountModel::Binomial) {
  if (n_total < 1) throw ContractViolation("simulate_counts: n_total must be >= 1");
  if (!(background >= 0.0 && background <= 1.0)) {
    throw ContractViolation("simulate_counts: background fraction must lie in [0, 1]");
  }
  const double p = plus_probability(rho, basis, background);
  MeasurementRecord rec{basis, 0, 0};
  if (model == CountModel::Expected) {
    rec.n_plus = std::llround(static_cast<double>(n_total) * p);
  } else {
    auto rng = make_engine(seed);
    std::binomial_distribution<std::int64_t> draw(n_total, p);
    rec.n_plus = draw(rng);
  }
  rec.n_minus = n_total - rec.n_plus;
  return rec;
}

/// Counts in all three bases; basis b uses child stream b of `seed`.
inline TomographyInput simulate_tomography(const DensityMatrix& rho, std::int64_t n_per_basis,
                                           double background, std::uint64_t seed,
                                           CountModel model = CountModel::Binomial) {
  std::vector<MeasurementRecord> recs;
  for (Basis b : kBases) {
    recs.push_back(simulate_counts(rho, b, n_per_basis, background,
                                   derive_seed(seed, "basis", static_cast<std::uint64_t>(b)), model));
  }
  return TomographyInput(recs);
}

struct LabeledCounts {
  std::string label;
  TomographyInput input;
};

inline void write_counts_csv(std::ostream& os, const std::vector<LabeledCounts>& data) {
  os << "input_label,basis,n_plus,n_minus\n";
  for (const auto& item : data) {
    for (const auto& r : item.input.records()) {
      os << item.label << ',' << basis_name(r.basis) << ',' << r.n_plus << ',' << r.n_minus << '\n';
    }
  }
}

/// Reads the CSV format back, grouping rows by label in first-seen order.
inline std::vector<LabeledCounts> read_counts_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ContractViolation("counts CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "input_label,basis,n_plus,n_minus") {
    throw ContractViolation("counts CSV: unexpected header '" + line + "'");
  }
  std::vector<std::string> order;
  std::vector<std::vector<MeasurementRecord>> groups;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string label, basis, plus, minus;
    if (!std::getline(ss, label, ',') || !std::getline(ss, basis, ',') ||
        !std::getline(ss, plus, ',') || !std::getline(ss, minus, ',')) {
      throw ContractViolation("counts CSV: malformed row at line " + std::to_string(line_no));
    }
    MeasurementRecord rec;
    rec.basis = basis_from_string(basis);
    try {
      rec.n_plus = std::stoll(plus);
      rec.n_minus = std::stoll(minus);
    } catch (const std::exception&) {
      throw ContractViolation("counts CSV: bad count at line " + std::to_string(line_no));
    }
    std::size_t k = 0;
    while (k < order.size() && order[k] != label) ++k;
    if (k == order.size()) {
      order.push_back(label);
      groups.emplace_back();
    }
    groups[k].push_back(rec);
  }
  std::vector<LabeledCounts> out;
  for (std::size_t k = 0; k < order.size(); ++k) out.push_back({order[k], TomographyInput(groups[k])});
  return out;
}

}  // namespace swq
