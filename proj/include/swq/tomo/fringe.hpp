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

// Fringe analysis: each outcome's coincidence counts are fitted with
// a + b cos(k angle) + c sin(k angle) by linear least squares.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "swq/json_io.hpp"
#include "swq/qlin.hpp"

namespace swq {

struct FringePoint {
  double angle = 0.0;
  double n_plus = 0.0;
  double n_minus = 0.0;
};

struct FringeFit {
  double offset = 0.0;
  double amplitude = 0.0;
  double phase = 0.0;
  double max = 0.0;
  double min = 0.0;
  double visibility = 0.0;
  double max_min_ratio = 0.0;
  bool ratio_capped = false;
  double reduced_chi2 = 0.0;
};

struct FringeResult {
  FringeFit plus;
  FringeFit minus;
  double visibility = 0.0;     // smaller of the two outcomes
  double max_min_ratio = 0.0;  // smaller of the two outcomes
  bool ratio_capped = false;
  std::vector<std::string> warnings;
};

struct FringeOptions {
  double frequency = 1.0;  // fringe cycles per radian of sweep angle
  double ratio_cap = 1e6;
  double chi2_threshold = 10.0;  // reduced chi^2 (binomial weights) above which data are flagged
};

namespace detail {

/// Binomial variance of the fitted count, floored at one count.
inline double fringe_variance(double model, double total) {
  if (!(total > 0.0)) return 1.0;
  const double p = std::clamp(model / total, 0.0, 1.0);
  return std::max(1.0, total * p * (1.0 - p));
}

/// Sinusoid fit by iteratively reweighted least squares; the weights are
/// binomial variances of the current model given the per-point totals.
inline FringeFit fit_fringe(const std::vector<double>& angles, const std::vector<double>& counts,
                            const std::vector<double>& totals, const FringeOptions& opts) {
  const auto n = static_cast<Eigen::Index>(angles.size());
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = opts.frequency * angles[static_cast<std::size_t>(i)];
    a(i, 0) = 1.0;
    a(i, 1) = std::cos(t);
    a(i, 2) = std::sin(t);
    y(i) = counts[static_cast<std::size_t>(i)];
  }
  Eigen::Vector3d coef = a.colPivHouseholderQr().solve(y);
  for (int pass = 0; pass < 3; ++pass) {
    const Eigen::VectorXd model = a * coef;
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      w(i) = 1.0 / std::sqrt(fringe_variance(model(i), totals[static_cast<std::size_t>(i)]));
    }
    coef = (w.asDiagonal() * a).colPivHouseholderQr().solve(w.asDiagonal() * y);
  }
  FringeFit fit;
  fit.offset = coef(0);
  fit.amplitude = std::hypot(coef(1), coef(2));
  fit.phase = std::atan2(coef(2), coef(1));
  fit.max = fit.offset + fit.amplitude;
  fit.min = std::max(0.0, fit.offset - fit.amplitude);
  fit.visibility = fit.max + fit.min > 0.0 ? (fit.max - fit.min) / (fit.max + fit.min) : 0.0;
  if (fit.min * opts.ratio_cap <= fit.max) {
    fit.max_min_ratio = opts.ratio_cap;
    fit.ratio_capped = true;
  } else {
    fit.max_min_ratio = fit.max / fit.min;
  }
  const Eigen::VectorXd model = a * coef;
  double chi2 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = y(i) - model(i);
    chi2 += r * r / fringe_variance(model(i), totals[static_cast<std::size_t>(i)]);
  }
  fit.reduced_chi2 = n > 3 ? chi2 / static_cast<double>(n - 3) : 0.0;
  return fit;
}

}  // namespace detail

inline FringeResult fringe_analysis(const std::vector<FringePoint>& sweep, const FringeOptions& opts = {}) {
  if (sweep.size() < 4) throw ContractViolation("fringe_analysis: at least 4 sweep points required");
  if (!(opts.frequency > 0.0)) throw ContractViolation("fringe_analysis: frequency must be positive");
  std::vector<double> angles, plus, minus, totals;
  for (const auto& p : sweep) {
    if (!(p.n_plus >= 0.0 && p.n_minus >= 0.0)) throw ContractViolation("fringe_analysis: negative counts");
    angles.push_back(p.angle);
    plus.push_back(p.n_plus);
    minus.push_back(p.n_minus);
    totals.push_back(p.n_plus + p.n_minus);
  }
  const auto [lo, hi] = std::minmax_element(angles.begin(), angles.end());
  // An evenly spaced grid that omits the endpoint still covers a full period.
  const double span = (*hi - *lo) * static_cast<double>(angles.size()) / static_cast<double>(angles.size() - 1);
  if (span * opts.frequency < 2.0 * kPi - 1e-9) {
    throw ContractViolation("fringe_analysis: sweep must span at least one period");
  }
  FringeResult r;
  r.plus = detail::fit_fringe(angles, plus, totals, opts);
  r.minus = detail::fit_fringe(angles, minus, totals, opts);
  r.visibility = std::min(r.plus.visibility, r.minus.visibility);
  r.max_min_ratio = std::min(r.plus.max_min_ratio, r.minus.max_min_ratio);
  r.ratio_capped = r.plus.ratio_capped && r.minus.ratio_capped;
  if (r.plus.reduced_chi2 > opts.chi2_threshold || r.minus.reduced_chi2 > opts.chi2_threshold) {
    r.warnings.push_back("non-sinusoidal data");
  }
  return r;
}

inline json fringe_fit_to_json(const FringeFit& f) {
  return json{{"offset", f.offset},
              {"amplitude", f.amplitude},
              {"phase_rad", f.phase},
              {"visibility", f.visibility},
              {"max_min_ratio", f.max_min_ratio},
              {"ratio_capped", f.ratio_capped},
              {"reduced_chi2", f.reduced_chi2}};
}

inline json fringe_to_json(const FringeResult& r) {
  return json{{"plus", fringe_fit_to_json(r.plus)},       {"minus", fringe_fit_to_json(r.minus)},
              {"visibility", r.visibility},               {"max_min_ratio", r.max_min_ratio},
              {"ratio_capped", r.ratio_capped},           {"warnings", r.warnings}};
}

}  // namespace swq
