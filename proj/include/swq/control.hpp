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

// Single-qubit control of the spinwave qubit: the two elemental rotations
// (Larmor precession about z, Raman pulses about an equatorial axis), their
// ZYZ composition, and Monte Carlo evolution of the three-level system
// (|s_down>, |s_up>, |s_aux>) under shot-to-shot control noise.
//
// Conventions
//   * Qubit basis order (|s_down>, |s_up>); |s_down> is the +z pole.
//   * Larmor hold of length t:  diag(e^{i w_L t}, 1).
//   * Raman pulse of length t:  [[cos a, -i e^{i p} sin a], [-i e^{-i p} sin a, cos a]],
//     a = W_R t / 2, p = Raman phase. p = 0 rotates about +x, p = -pi/2 about +y;
//     in general the axis is (cos p, -sin p, 0).
//   * A target rotation R_n(theta) means exp(-i theta n.sigma), i.e. a Bloch
//     angle of 2 theta. The Larmor matrix equals exp(+i (w_L t / 2) sigma_z) up
//     to a global phase, so compile_rotation inverts the sign of z rotations.
//   * All gate comparisons are modulo global phase.

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "swq/json_io.hpp"
#include "swq/qlin.hpp"
#include "swq/random.hpp"

namespace swq {

enum class PulseKind { LarmorHold, RamanPulse };

inline std::string to_string(PulseKind kind) {
  return kind == PulseKind::LarmorHold ? "LarmorHold" : "RamanPulse";
}

inline PulseKind pulse_kind_from_string(const std::string& s) {
  if (s == "LarmorHold" || s == "larmor") return PulseKind::LarmorHold;
  if (s == "RamanPulse" || s == "raman") return PulseKind::RamanPulse;
  throw ContractViolation("unknown pulse kind '" + s + "'");
}

/// One square control segment. Frequencies are angular (rad/s).
struct PulseSpec {
  PulseKind kind = PulseKind::LarmorHold;
  double duration_s = 0.0;
  double rabi = 0.0;          // W_R, Raman only
  double phase = 0.0;         // Raman phase, rad
  double larmor = 0.0;        // w_L
  double aux_detuning = 0.0;  // two-photon detuning of |s_up> <-> |s_aux>

  void validate() const {
    if (!(duration_s >= 0.0) || !std::isfinite(duration_s)) {
      throw ContractViolation("PulseSpec: duration must be finite and >= 0");
    }
    if (!(rabi >= 0.0) || !std::isfinite(rabi)) {
      throw ContractViolation("PulseSpec: Rabi frequency must be finite and >= 0");
    }
    if (!std::isfinite(phase) || !std::isfinite(larmor) || !std::isfinite(aux_detuning)) {
      throw ContractViolation("PulseSpec: non-finite parameter");
    }
  }

  static PulseSpec larmor_hold(double duration_s, double omega_l) {
    PulseSpec p;
    p.kind = PulseKind::LarmorHold;
    p.duration_s = duration_s;
    p.larmor = omega_l;
    p.validate();
    return p;
  }

  static PulseSpec raman(double duration_s, double omega_r, double phase_r,
                         double aux_detuning = 0.0, double omega_l = 0.0) {
    PulseSpec p;
    p.kind = PulseKind::RamanPulse;
    p.duration_s = duration_s;
    p.rabi = omega_r;
    p.phase = phase_r;
    p.larmor = omega_l;
    p.aux_detuning = aux_detuning;
    p.validate();
    return p;
  }
};

struct RotationSpec {
  std::array<double, 3> axis{0.0, 0.0, 1.0};
  double angle = 0.0;

  void validate() const {
    const double n = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
    if (std::abs(n - 1.0) > 1e-12) throw ContractViolation("RotationSpec: axis must be unit norm");
    if (!std::isfinite(angle)) throw ContractViolation("RotationSpec: angle must be finite");
  }
};

/// Quasi-static imperfections. One draw per shot, constant over the shot.
struct NoiseModel {
  double rabi_fractional_sigma = 0.0;     // Gaussian fractional Raman Rabi error
  double larmor_sigma = 0.0;              // Gaussian Larmor frequency jitter, rad/s
  double background_fraction = 0.0;       // fraction of detections that are uncorrelated clicks
  double idler_misalignment_sigma = 0.0;  // rms idler analyser error on the Poincare sphere, rad
  bool aux_leakage = true;                // Raman pulses couple |s_up> to |s_aux>

  void validate() const {
    if (!(rabi_fractional_sigma >= 0.0) || !(larmor_sigma >= 0.0) ||
        !(background_fraction >= 0.0) || !(idler_misalignment_sigma >= 0.0)) {
      throw ContractViolation("NoiseModel: all magnitudes must be >= 0");
    }
    if (background_fraction > 1.0) throw ContractViolation("NoiseModel: background_fraction > 1");
  }

  bool is_noiseless() const {
    return rabi_fractional_sigma == 0.0 && larmor_sigma == 0.0 && background_fraction == 0.0 &&
           idler_misalignment_sigma == 0.0;
  }

  static NoiseModel ideal() {
    NoiseModel n;
    n.aux_leakage = false;
    return n;
  }
};

/// U = e^{i delta} Rz(alpha) Ry(beta) Rz(gamma), Rz in the Larmor form.
struct EulerAngles {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
};

inline double wrap_two_pi(double a) {
  double r = std::fmod(a, 2.0 * kPi);
  if (r < 0.0) r += 2.0 * kPi;
  if (r >= 2.0 * kPi) r = 0.0;
  return r;
}

inline double wrap_pi(double a) { return wrap_two_pi(a + kPi) - kPi; }

/// Larmor precession for t_l seconds: diag(e^{i w_L t_l}, 1).
inline ComplexMatrix r_z(double t_l, double omega_l) {
  if (!(t_l >= 0.0)) throw ContractViolation("r_z: duration must be >= 0");
  ComplexMatrix m = ComplexMatrix::Identity(2, 2);
  m(0, 0) = std::exp(kI * (omega_l * t_l));
  return m;
}

/// Raman pulse of t_r seconds at Rabi frequency omega_r and phase phi_r.
inline ComplexMatrix r_n(double t_r, double omega_r, double phi_r) {
  if (!(t_r >= 0.0)) throw ContractViolation("r_n: duration must be >= 0");
  const double a = 0.5 * omega_r * t_r;
  ComplexMatrix m(2, 2);
  m(0, 0) = std::cos(a);
  m(0, 1) = -kI * std::exp(kI * phi_r) * std::sin(a);
  m(1, 0) = -kI * std::exp(-kI * phi_r) * std::sin(a);
  m(1, 1) = std::cos(a);
  return m;
}

/// diag(e^{i alpha}, 1).
inline ComplexMatrix larmor_phase(double alpha) {
  ComplexMatrix m = ComplexMatrix::Identity(2, 2);
  m(0, 0) = std::exp(kI * alpha);
  return m;
}

/// exp(-i beta sigma_y / 2): the Raman pulse with phase -pi/2 and area beta.
inline ComplexMatrix r_y(double beta) {
  ComplexMatrix m(2, 2);
  m << std::cos(beta / 2), -std::sin(beta / 2), std::sin(beta / 2), std::cos(beta / 2);
  return m;
}

inline ComplexMatrix zyz_compose(const EulerAngles& e) {
  return std::exp(kI * e.delta) * larmor_phase(e.alpha) * r_y(e.beta) * larmor_phase(e.gamma);
}

/// Euler angles with beta in [0, pi]; alpha, gamma, delta in (-pi, pi].
/// Degenerate cases put the free z angle into alpha (gamma = 0).
inline EulerAngles zyz_decompose(const ComplexMatrix& u) {
  if (u.rows() != 2 || u.cols() != 2 || !is_unitary(u, 1e-9)) {
    throw ContractViolation("zyz_decompose: 2x2 unitary required");
  }
  constexpr double kSmall = 1e-12;
  const double c = std::abs(u(1, 1));
  const double s = std::abs(u(1, 0));
  EulerAngles e;
  e.beta = 2.0 * std::atan2(s, c);
  // u(0,0) = e^{i(d+a+g)} cos, u(0,1) = -e^{i(d+a)} sin,
  // u(1,0) = e^{i(d+g)} sin,   u(1,1) = e^{i d} cos.
  if (s <= kSmall) {
    e.delta = std::arg(u(1, 1));
    e.alpha = std::arg(u(0, 0)) - e.delta;
    e.gamma = 0.0;
  } else if (c <= kSmall) {
    e.gamma = 0.0;
    e.delta = std::arg(u(1, 0));
    e.alpha = std::arg(-u(0, 1)) - e.delta;
  } else {
    e.delta = std::arg(u(1, 1));
    e.gamma = std::arg(u(1, 0)) - e.delta;
    e.alpha = std::arg(-u(0, 1)) - e.delta;
  }
  e.alpha = wrap_pi(e.alpha);
  e.gamma = wrap_pi(e.gamma);
  e.delta = wrap_pi(e.delta);
  if (std::abs(e.alpha) < 1e-15) e.alpha = 0.0;
  if (std::abs(e.gamma) < 1e-15) e.gamma = 0.0;
  if (std::abs(e.delta) < 1e-15) e.delta = 0.0;
  return e;
}

/// exp(-i angle n.sigma).
inline ComplexMatrix rotation_unitary(const RotationSpec& spec) {
  spec.validate();
  const auto& n = spec.axis;
  const ComplexMatrix ns = n[0] * pauli::x() + n[1] * pauli::y() + n[2] * pauli::z();
  return std::cos(spec.angle) * pauli::identity() - kI * std::sin(spec.angle) * ns;
}

/// Axis and angle of a 2x2 unitary up to global phase, angle in [0, pi].
inline RotationSpec rotation_from_unitary(const ComplexMatrix& u) {
  if (u.rows() != 2 || u.cols() != 2 || !is_unitary(u, 1e-9)) {
    throw ContractViolation("rotation_from_unitary: 2x2 unitary required");
  }
  const ComplexMatrix v = u / std::sqrt(u.determinant());
  // v = c I - i s n.sigma with real c, s n
  const double c = 0.5 * v.trace().real();
  std::array<double, 3> sn{};
  for (int k = 0; k < 3; ++k) sn[k] = (0.5 * kI * (v * pauli::basis(k + 1)).trace()).real();
  const double s = std::sqrt(sn[0] * sn[0] + sn[1] * sn[1] + sn[2] * sn[2]);
  if (s < 1e-15) return RotationSpec{{0.0, 0.0, 1.0}, 0.0};
  return RotationSpec{{sn[0] / s, sn[1] / s, sn[2] / s}, std::atan2(s, c)};
}

/// Ideal two-level propagator of a pulse sequence (first pulse acts first).
inline ComplexMatrix sequence_unitary(const std::vector<PulseSpec>& pulses) {
  ComplexMatrix u = pauli::identity();
  for (const auto& p : pulses) {
    p.validate();
    const ComplexMatrix step = p.kind == PulseKind::LarmorHold ? r_z(p.duration_s, p.larmor)
                                                               : r_n(p.duration_s, p.rabi, p.phase);
    u = step * u;
  }
  return u;
}

/// Pulses realising a Larmor-form z phase alpha, i.e. diag(e^{i alpha}, 1).
inline PulseSpec larmor_for_phase(double alpha, double omega_l) {
  return PulseSpec::larmor_hold(wrap_two_pi(alpha) / omega_l, omega_l);
}

/// Compiles exp(-i angle n.sigma) into Larmor holds and Raman pulses.
///
/// Pure z axes become one Larmor hold, equatorial axes one Raman pulse with
/// phase -atan2(n_y, n_x); anything else becomes the Z-Y-Z triple
/// Larmor(gamma), Raman(-pi/2, beta), Larmor(alpha) in time order. Larmor
/// durations are reduced modulo 2 pi / w_L and Raman areas to [0, 2 pi).
inline std::vector<PulseSpec> compile_rotation(const RotationSpec& spec, double omega_r,
                                               double omega_l, double aux_detuning = 0.0) {
  spec.validate();
  if (!(omega_r > 0.0) || !(omega_l > 0.0)) {
    throw ContractViolation("compile_rotation: Rabi and Larmor frequencies must be > 0");
  }
  const auto& n = spec.axis;
  // exp(-i (theta + pi) n.sigma) = -exp(-i theta n.sigma)
  const double theta = std::fmod(std::fmod(spec.angle, kPi) + kPi, kPi);
  std::vector<PulseSpec> out;
  if (theta < 1e-15) return out;

  constexpr double kAxisTol = 1e-12;
  if (std::abs(n[2]) >= 1.0 - kAxisTol) {
    // exp(-i t sigma_z) ~ diag(e^{-2 i t}, 1)
    const double alpha = -2.0 * theta * (n[2] > 0 ? 1.0 : -1.0);
    out.push_back(larmor_for_phase(alpha, omega_l));
    return out;
  }
  if (std::abs(n[2]) <= kAxisTol) {
    const double phase = -std::atan2(n[1], n[0]);
    out.push_back(PulseSpec::raman(2.0 * theta / omega_r, omega_r, phase, aux_detuning, omega_l));
    return out;
  }
  const EulerAngles e = zyz_decompose(rotation_unitary({n, theta}));
  out.push_back(larmor_for_phase(e.gamma, omega_l));
  out.push_back(PulseSpec::raman(e.beta / omega_r, omega_r, -kPi / 2, aux_detuning, omega_l));
  out.push_back(larmor_for_phase(e.alpha, omega_l));
  return out;
}

// ---------------------------------------------------------------------------
// Three-level dynamics, basis (|s_down>, |s_up>, |s_aux>).

/// Effective two-photon Hamiltonian of a Raman pulse. The qubit pair is
/// resonant (light shift cancels the Zeeman splitting); |s_up> <-> |s_aux> is
/// driven at the same Rabi frequency and phase with detuning aux_detuning.
inline ComplexMatrix qutrit_hamiltonian(const PulseSpec& pulse, bool aux_coupling = true) {
  pulse.validate();
  if (pulse.kind != PulseKind::RamanPulse) {
    throw ContractViolation("qutrit_hamiltonian: Raman pulse required");
  }
  const cplx coupling = 0.5 * pulse.rabi * std::exp(kI * pulse.phase);
  ComplexMatrix h = ComplexMatrix::Zero(3, 3);
  h(0, 1) = coupling;
  h(1, 0) = std::conj(coupling);
  if (aux_coupling) {
    h(1, 2) = coupling;
    h(2, 1) = std::conj(coupling);
  }
  h(2, 2) = pulse.aux_detuning;
  return h;
}

/// Larmor precession of the three sublevels. Zeeman energy is linear in m_F:
/// |s_down> (m=-2) gains e^{+i w t} relative to |s_up> (m=0), so |s_aux>
/// (m=+2) gains e^{-i w t}.
inline ComplexMatrix qutrit_larmor(double duration_s, double omega_l) {
  if (!(duration_s >= 0.0)) throw ContractViolation("qutrit_larmor: duration must be >= 0");
  ComplexMatrix u = ComplexMatrix::Zero(3, 3);
  u(0, 0) = std::exp(kI * omega_l * duration_s);
  u(1, 1) = 1.0;
  u(2, 2) = std::exp(-kI * omega_l * duration_s);
  return u;
}

inline ComplexMatrix qutrit_propagator(const PulseSpec& pulse, bool aux_coupling = true) {
  if (pulse.kind == PulseKind::LarmorHold) return qutrit_larmor(pulse.duration_s, pulse.larmor);
  return matrix_exp_i(qutrit_hamiltonian(pulse, aux_coupling), pulse.duration_s);
}

/// Embeds a qubit density matrix into the three-level space with an empty |s_aux>.
inline DensityMatrix embed_qutrit(const DensityMatrix& qubit) {
  if (qubit.dim() != 2) throw ContractViolation("embed_qutrit: qubit state required");
  ComplexMatrix m = ComplexMatrix::Zero(3, 3);
  m.topLeftCorner(2, 2) = qubit.matrix();
  return DensityMatrix(m);
}

/// Per-shot propagator of a pulse list with Rabi scale and Larmor offset applied.
inline ComplexMatrix shot_propagator(const std::vector<PulseSpec>& pulses, double rabi_scale,
                                     double larmor_offset, bool aux_coupling) {
  ComplexMatrix u = ComplexMatrix::Identity(3, 3);
  for (PulseSpec p : pulses) {
    if (p.kind == PulseKind::LarmorHold) {
      p.larmor += larmor_offset;
    } else {
      p.rabi *= rabi_scale;
    }
    u = qutrit_propagator(p, aux_coupling) * u;
  }
  return u;
}

/// Shot-averaged evolution of a three-level state. Shot k draws its Rabi
/// scale and Larmor offset from substream k of `seed`, so the result does not
/// depend on thread count.
inline DensityMatrix evolve(const DensityMatrix& state, const std::vector<PulseSpec>& pulses,
                            const NoiseModel& noise, int shots, std::uint64_t seed) {
  if (state.dim() != 3) throw ContractViolation("evolve: three-level state required");
  if (shots < 1) throw ContractViolation("evolve: shots must be >= 1");
  noise.validate();
  for (const auto& p : pulses) p.validate();
  if (pulses.empty()) return state;

  const bool quiet = noise.rabi_fractional_sigma == 0.0 && noise.larmor_sigma == 0.0;
  if (quiet) {
    const ComplexMatrix u = shot_propagator(pulses, 1.0, 0.0, noise.aux_leakage);
    return DensityMatrix::project(u * state.matrix() * u.adjoint());
  }
  const auto per_shot = parallel_map<ComplexMatrix>(static_cast<std::size_t>(shots), [&](std::size_t k) {
    auto rng = make_engine(substream_seed(seed, k));
    std::normal_distribution<double> normal(0.0, 1.0);
    const double rabi_scale = std::max(0.0, 1.0 + noise.rabi_fractional_sigma * normal(rng));
    const double larmor_offset = noise.larmor_sigma * normal(rng);
    const ComplexMatrix u = shot_propagator(pulses, rabi_scale, larmor_offset, noise.aux_leakage);
    return ComplexMatrix(u * state.matrix() * u.adjoint());
  });
  ComplexMatrix sum = ComplexMatrix::Zero(3, 3);
  for (const auto& m : per_shot) sum += m;
  return DensityMatrix::project(sum / static_cast<double>(shots));
}

/// Peak |s_aux> population over [0, t_max] for a constant Raman drive,
/// sampled on `steps` + 1 equally spaced times.
inline double peak_aux_population(const PulseSpec& pulse, const PureState& initial, double t_max,
                                  int steps, bool qubit_coupling = true) {
  if (initial.dim() != 3) throw ContractViolation("peak_aux_population: three-level state required");
  ComplexMatrix h = qutrit_hamiltonian(pulse, true);
  if (!qubit_coupling) {
    h(0, 1) = 0.0;
    h(1, 0) = 0.0;
  }
  const auto eig = hermitian_eig(h);
  const ComplexVector coeff = eig.vectors.adjoint() * initial.amplitudes();
  double peak = 0.0;
  for (int k = 0; k <= steps; ++k) {
    const double t = t_max * static_cast<double>(k) / steps;
    cplx amp = 0.0;
    for (int j = 0; j < 3; ++j) amp += eig.vectors(2, j) * coeff(j) * std::exp(-kI * eig.values(j) * t);
    peak = std::max(peak, std::norm(amp));
  }
  return peak;
}

inline json pulse_to_json(const PulseSpec& p) {
  return json{{"kind", to_string(p.kind)},     {"duration_s", p.duration_s},
              {"rabi_rad_s", p.rabi},          {"phase_rad", p.phase},
              {"larmor_rad_s", p.larmor},      {"aux_detuning_rad_s", p.aux_detuning}};
}

inline PulseSpec pulse_from_json(const json& j) {
  PulseSpec p;
  p.kind = pulse_kind_from_string(j.at("kind").get<std::string>());
  p.duration_s = j.at("duration_s").get<double>();
  p.rabi = j.value("rabi_rad_s", 0.0);
  p.phase = j.value("phase_rad", 0.0);
  p.larmor = j.value("larmor_rad_s", 0.0);
  p.aux_detuning = j.value("aux_detuning_rad_s", 0.0);
  p.validate();
  return p;
}

inline json schedule_to_json(const std::vector<PulseSpec>& pulses) {
  json out = json::array();
  for (const auto& p : pulses) out.push_back(pulse_to_json(p));
  return out;
}

inline std::vector<PulseSpec> schedule_from_json(const json& j) {
  if (!j.is_array()) throw ContractViolation("pulse schedule must be a JSON array");
  std::vector<PulseSpec> out;
  for (const auto& item : j) out.push_back(pulse_from_json(item));
  return out;
}

}  // namespace swq
