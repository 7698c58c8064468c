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

// Heralded preparation of the spinwave qubit and its read-out into a signal
// photon.
//
// The write process leaves the atoms and the idler photon in
//   sqrt(2/5)|s_down>|sigma+> - sqrt(3/5)|s_up>|sigma->.
// Detecting the idler behind a polarisation analyser projects the spinwave.
// Circular states are |sigma+-> = (|H> +- i|V>)/sqrt(2); with this choice the
// analyser setting from target_idler_polarization(theta, phi) heralds exactly
// cos(theta)|s_down> + sin(theta) e^{i phi}|s_up>.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "swq/json_io.hpp"
#include "swq/qlin.hpp"
#include "swq/random.hpp"

namespace swq {

/// Polarisation state in the {H, V} basis.
class JonesVector {
 public:
  JonesVector() : h_(1.0), v_(0.0) {}

  JonesVector(cplx h, cplx v, double tol = 1e-12) : h_(h), v_(v) {
    if (std::abs(std::norm(h_) + std::norm(v_) - 1.0) > tol) {
      throw ContractViolation("JonesVector: amplitudes are not normalised");
    }
  }

  static JonesVector normalized(cplx h, cplx v) {
    const double n = std::sqrt(std::norm(h) + std::norm(v));
    if (!(n > 1e-300)) throw ContractViolation("JonesVector: zero vector");
    return JonesVector(h / n, v / n);
  }

  cplx h() const { return h_; }
  cplx v() const { return v_; }
  ComplexVector vec() const {
    ComplexVector out(2);
    out << h_, v_;
    return out;
  }

  /// <this|other>
  cplx inner(const JonesVector& other) const {
    return std::conj(h_) * other.h_ + std::conj(v_) * other.v_;
  }

 private:
  cplx h_;
  cplx v_;
};

namespace polarization {

inline JonesVector horizontal() { return {1.0, 0.0}; }
inline JonesVector vertical() { return {0.0, 1.0}; }
inline JonesVector sigma_plus() { return JonesVector::normalized(1.0, kI); }
inline JonesVector sigma_minus() { return JonesVector::normalized(1.0, -kI); }
inline JonesVector diagonal() { return JonesVector::normalized(1.0, 1.0); }
inline JonesVector antidiagonal() { return JonesVector::normalized(1.0, -1.0); }

}  // namespace polarization

/// Atom-photon amplitudes over (|s_down,s+>, |s_down,s->, |s_up,s+>, |s_up,s->).
class JointState {
 public:
  explicit JointState(ComplexVector amps) : amps_(std::move(amps)) {
    if (amps_.size() != 4 || std::abs(amps_.squaredNorm() - 1.0) > 1e-12) {
      throw ContractViolation("JointState: four normalised amplitudes required");
    }
  }
  const ComplexVector& amplitudes() const { return amps_; }
  cplx amplitude(int spin, int photon) const { return amps_(2 * spin + photon); }

 private:
  ComplexVector amps_;
};

struct HeraldConfig {
  double herald_probability = 3e-3;
  std::int64_t trials = 0;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(herald_probability >= 0.0 && herald_probability <= 1.0)) {
      throw ContractViolation("HeraldConfig: probability must lie in [0, 1]");
    }
    if (trials < 0) throw ContractViolation("HeraldConfig: trials must be >= 0");
  }
};

struct HeraldResult {
  std::int64_t count = 0;
  std::vector<std::int64_t> trial_indices;
};

struct ProjectionResult {
  PureState spinwave;
  double success_probability = 0.0;
};

struct ReadoutResult {
  DensityMatrix signal;  // signal-photon polarisation, {H, V} basis
  double detected_fraction = 0.0;
};

inline JointState atom_photon_state() {
  ComplexVector a = ComplexVector::Zero(4);
  a(0) = std::sqrt(2.0 / 5.0);
  a(3) = -std::sqrt(3.0 / 5.0);
  return JointState(a);
}

/// Idler analyser setting that heralds cos(theta)|s_down> + sin(theta) e^{i phi}|s_up>.
inline JonesVector target_idler_polarization(double theta, double phi) {
  const double a = std::sqrt(3.0 / 5.0) * std::cos(theta);
  const cplx b = std::sqrt(2.0 / 5.0) * std::sin(theta) * std::exp(-kI * phi);
  const cplx h = a - b;
  const cplx v = kI * (a + b);
  const double n = std::sqrt(std::norm(h) + std::norm(v));
  // |h|^2 + |v|^2 = 2(3/5 cos^2 + 2/5 sin^2) >= 4/5
  if (n < 1e-6) throw NumericalError("target_idler_polarization: degenerate analyser state");
  return JonesVector(h / n, v / n);
}

/// Spinwave state left behind when the idler passes analyser `pol`.
inline ProjectionResult project_idler(const JointState& joint, const JonesVector& pol) {
  const cplx to_plus = pol.inner(polarization::sigma_plus());
  const cplx to_minus = pol.inner(polarization::sigma_minus());
  ComplexVector spin(2);
  for (int s = 0; s < 2; ++s) {
    spin(s) = to_plus * joint.amplitude(s, 0) + to_minus * joint.amplitude(s, 1);
  }
  const double p = spin.squaredNorm();
  if (p < 1e-15) throw NumericalError("project_idler: incompatible projection");
  return {PureState(spin / std::sqrt(p)), p};
}

/// Bernoulli heralds with at most one excitation per write pulse. Draws
/// geometric gaps between successes, which is the same process.
inline HeraldResult herald_sampler(const HeraldConfig& cfg) {
  cfg.validate();
  HeraldResult out;
  if (cfg.herald_probability == 0.0 || cfg.trials == 0) return out;
  if (cfg.herald_probability == 1.0) {
    out.count = cfg.trials;
    out.trial_indices.resize(static_cast<std::size_t>(cfg.trials));
    for (std::int64_t k = 0; k < cfg.trials; ++k) out.trial_indices[static_cast<std::size_t>(k)] = k;
    return out;
  }
  auto rng = make_engine(derive_seed(cfg.seed, "herald"));
  std::geometric_distribution<std::int64_t> gap(cfg.herald_probability);
  std::int64_t t = gap(rng);
  while (t < cfg.trials) {
    out.trial_indices.push_back(t);
    t += 1 + gap(rng);
  }
  out.count = static_cast<std::int64_t>(out.trial_indices.size());
  return out;
}

/// SU(2) action of a Poincare-sphere rotation by vector r (angle |r|).
inline JonesVector rotate_polarization(const JonesVector& pol, double rx, double ry, double rz) {
  const double angle = std::sqrt(rx * rx + ry * ry + rz * rz);
  if (angle == 0.0) return pol;
  const ComplexMatrix gen = (rx * pauli::x() + ry * pauli::y() + rz * pauli::z()) / angle;
  const ComplexMatrix u =
      std::cos(angle / 2) * pauli::identity() - kI * std::sin(angle / 2) * gen;
  const ComplexVector out = u * pol.vec();
  return JonesVector::normalized(out(0), out(1));
}

/// Spinwave state heralded with an imperfect idler analyser: each shot
/// rotates the analyser by a Gaussian Poincare vector with per-axis rms
/// sigma/sqrt(3); shots are weighted by their herald probability.
inline DensityMatrix prepare_heralded(const JonesVector& target, double misalignment_sigma, int shots,
                                      std::uint64_t seed) {
  const JointState joint = atom_photon_state();
  if (!(misalignment_sigma >= 0.0)) throw ContractViolation("prepare_heralded: sigma must be >= 0");
  if (misalignment_sigma == 0.0) {
    return DensityMatrix::from_pure(project_idler(joint, target).spinwave);
  }
  if (shots < 1) throw ContractViolation("prepare_heralded: shots must be >= 1");
  const double per_axis = misalignment_sigma / std::sqrt(3.0);
  struct Weighted {
    ComplexMatrix rho;
    double weight = 0.0;
  };
  const auto draws = parallel_map<Weighted>(static_cast<std::size_t>(shots), [&](std::size_t k) {
    auto rng = make_engine(substream_seed(seed, k));
    std::normal_distribution<double> normal(0.0, per_axis);
    const double rx = normal(rng);
    const double ry = normal(rng);
    const double rz = normal(rng);
    const auto proj = project_idler(joint, rotate_polarization(target, rx, ry, rz));
    const ComplexVector& a = proj.spinwave.amplitudes();
    return Weighted{a * a.adjoint() * proj.success_probability, proj.success_probability};
  });
  ComplexMatrix sum = ComplexMatrix::Zero(2, 2);
  double total = 0.0;
  for (const auto& d : draws) {
    sum += d.rho;
    total += d.weight;
  }
  return DensityMatrix::project(sum / total);
}

inline DensityMatrix prepare_heralded(double theta, double phi, double misalignment_sigma,
                                      int shots, std::uint64_t seed) {
  return prepare_heralded(target_idler_polarization(theta, phi), misalignment_sigma, shots, seed);
}

/// Signal polarisation of the read-out photon: |s_down> -> |sigma->,
/// |s_up> -> |sigma+>. |s_aux> is not retrieved; its weight (and any
/// retrieval inefficiency) is reported through detected_fraction and the
/// output is renormalised over the detected subspace.
inline ReadoutResult readout_map(const DensityMatrix& spinwave, double efficiency = 1.0) {
  if (!(efficiency > 0.0 && efficiency <= 1.0)) {
    throw ContractViolation("readout_map: efficiency must lie in (0, 1]");
  }
  const ComplexMatrix qubit = spinwave.matrix().topLeftCorner(2, 2);
  const double retained = qubit.trace().real();
  if (retained < 1e-12) throw NumericalError("readout_map: no retrievable population");
  ComplexMatrix w(2, 2);
  w.col(0) = polarization::sigma_minus().vec();
  w.col(1) = polarization::sigma_plus().vec();
  const ComplexMatrix signal = w * (qubit / retained) * w.adjoint();
  return {DensityMatrix::project(signal), retained * efficiency};
}

/// Inverse of the read-out isometry: signal polarisation back to the spinwave frame.
inline DensityMatrix signal_to_spinwave(const DensityMatrix& signal) {
  ComplexMatrix w(2, 2);
  w.col(0) = polarization::sigma_minus().vec();
  w.col(1) = polarization::sigma_plus().vec();
  return DensityMatrix::project(w.adjoint() * signal.matrix() * w);
}

/// Qubit block of a spinwave state renormalised over the retrievable levels;
/// this is what signal-photon tomography sees.
inline DensityMatrix detected_qubit(const DensityMatrix& spinwave) {
  return signal_to_spinwave(readout_map(spinwave).signal);
}

inline json herald_record_to_json(double theta, double phi, const JonesVector& pol,
                                  double success_probability) {
  return json{{"theta", theta},
              {"phi", phi},
              {"jones", json::array({complex_to_json(pol.h()), complex_to_json(pol.v())})},
              {"success_probability", success_probability}};
}

}  // namespace swq
