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

// Effective Raman parameters from beam and field settings. The laser sits
// between the two excited hyperfine levels of the line; each ground
// sublevel couples to both through the CG table in the atomic data file.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <regex>
#include <string>
#include <tuple>
#include <vector>

#include "swq/json_io.hpp"
#include "swq/qlin.hpp"

#ifndef SWQ_DATA_DIR
#define SWQ_DATA_DIR "data"
#endif

namespace swq {

namespace units {
inline constexpr double kHbar = 1.054571817e-34;
inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kEpsilon0 = 8.8541878128e-12;
inline constexpr double kGaussPerTesla = 1e4;
inline constexpr double kTwoPi = 2.0 * kPi;
inline double khz(double f) { return kTwoPi * f * 1e3; }
inline double to_khz(double w) { return w / kTwoPi / 1e3; }
}  // namespace units

struct BeamParams {
  double power = 7e-3;     // W
  double waist = 1.9e-3;   // m, 1/e^2 intensity radius
  double detuning = 0.0;   // rad/s from the excited-level midpoint
  double pol_plus_amp = std::sqrt(1.0 / 7.0);
  double pol_minus_amp = std::sqrt(6.0 / 7.0);
  double pol_rel_phase = 0.0;

  void validate() const {
    if (!(power >= 0.0) || !std::isfinite(power)) throw ContractViolation("BeamParams: power must be >= 0");
    if (!(waist > 0.0) || !std::isfinite(waist)) throw ContractViolation("BeamParams: waist must be > 0");
    if (!std::isfinite(detuning) || !std::isfinite(pol_rel_phase)) {
      throw ContractViolation("BeamParams: non-finite detuning or phase");
    }
    if (std::abs(pol_plus_amp * pol_plus_amp + pol_minus_amp * pol_minus_amp - 1.0) > 1e-12) {
      throw ContractViolation("BeamParams: polarization amplitudes must be normalized");
    }
  }

  double peak_intensity() const { return 2.0 * power / (kPi * waist * waist); }
  double peak_field() const {
    return std::sqrt(2.0 * peak_intensity() / (units::kSpeedOfLight * units::kEpsilon0));
  }
};

struct CgEntry {
  int f = 2;
  int m = 0;
  int f_excited = 1;
  int q = 0;  // absorbed photon polarization, m' = m + q
  double amp = 0.0;
};

struct AtomicData {
  std::string line;
  double dipole = 0.0;              // C m, reduced <J||er||J'>
  double excited_splitting = 0.0;   // rad/s, F'=2 above F'=1
  double ground_splitting = 0.0;    // rad/s
  double gamma = 0.0;               // rad/s per tesla
  int ground_f = 2;
  int down_m = -2;
  int up_m = 0;
  int aux_m = 2;
  std::vector<CgEntry> cg_table;

  /// Amplitude for absorbing a q photon from (ground_f, m) into F'; 0 if forbidden.
  double cg(int m, int f_excited, int q) const {
    for (const auto& e : cg_table) {
      if (e.f == ground_f && e.m == m && e.f_excited == f_excited && e.q == q) return e.amp;
    }
    return 0.0;
  }

  static AtomicData from_json(const json& j) {
    AtomicData a;
    try {
      a.line = j.at("line").get<std::string>();
      a.dipole = j.at("dipole_Cm").get<double>();
      a.excited_splitting = units::kTwoPi * j.at("hyperfine_splittings_Hz").at("excited").get<double>();
      a.ground_splitting = units::kTwoPi * j.at("hyperfine_splittings_Hz").at("ground").get<double>();
      a.gamma = units::kTwoPi * j.at("gamma_Hz_per_G").get<double>() * units::kGaussPerTesla;
      const auto& lv = j.at("qubit_levels");
      a.ground_f = lv.at("ground_F").get<int>();
      a.down_m = lv.at("down_m").get<int>();
      a.up_m = lv.at("up_m").get<int>();
      a.aux_m = lv.at("aux_m").get<int>();
      for (const auto& e : j.at("cg_table")) {
        a.cg_table.push_back({e.at("F").get<int>(), e.at("m").get<int>(), e.at("Fp").get<int>(),
                              e.at("q").get<int>(), e.at("amp").get<double>()});
      }
    } catch (const json::exception& e) {
      throw ContractViolation(std::string("atomic data: ") + e.what());
    }
    if (!(a.dipole > 0.0) || !(a.excited_splitting > 0.0)) {
      throw ContractViolation("atomic data: dipole and excited splitting must be positive");
    }
    return a;
  }

  static AtomicData load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ContractViolation("atomic data file not found: " + path);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw ContractViolation("atomic data: " + std::string(e.what()));
    }
    return from_json(j);
  }

  static std::string default_path() { return std::string(SWQ_DATA_DIR) + "/rb87_d1.json"; }
  static AtomicData rb87_d1() { return load(default_path()); }
};

/// Zeeman splitting between the qubit levels, rad/s. Default coefficient
/// 2 pi x 1.4 MHz/G.
inline double zeeman_splitting(double b0_tesla, double gamma = units::kTwoPi * 1.4e6 * units::kGaussPerTesla) {
  if (!(b0_tesla >= 0.0)) throw ContractViolation("zeeman_splitting: b0 must be >= 0");
  return gamma * b0_tesla;
}

inline double zeeman_splitting(double b0_tesla, const AtomicData& atoms) {
  return zeeman_splitting(b0_tesla, atoms.gamma);
}

struct Transition {
  int m = 0;
  int f_excited = 1;
  int q = 1;
};

/// Parses labels of the form "m=-2,F'=1,sigma+" (q from sigma+, sigma-, pi).
inline Transition parse_transition(const std::string& label) {
  static const std::regex re(R"(^\s*m\s*=\s*([+-]?\d)\s*,\s*F'\s*=\s*(\d)\s*,\s*(sigma\+|sigma-|pi)\s*$)");
  std::smatch mt;
  if (!std::regex_match(label, mt, re)) throw ContractViolation("unknown transition label '" + label + "'");
  Transition t;
  t.m = std::stoi(mt[1].str());
  t.f_excited = std::stoi(mt[2].str());
  const std::string pol = mt[3].str();
  t.q = pol == "sigma+" ? 1 : (pol == "sigma-" ? -1 : 0);
  return t;
}

namespace detail {

inline double pol_amp(const BeamParams& beam, int q) {
  if (q == 1) return beam.pol_plus_amp;
  if (q == -1) return beam.pol_minus_amp;
  return 0.0;
}

/// Laser minus atomic resonance for each excited level.
inline double excited_detuning(const BeamParams& beam, const AtomicData& atoms, int f_excited) {
  const double half = atoms.excited_splitting / 2.0;
  const double delta = f_excited == 1 ? beam.detuning + half : beam.detuning - half;
  if (std::abs(delta) < 1e-9 * atoms.excited_splitting) {
    throw ContractViolation("detuning is resonant with excited level F'=" + std::to_string(f_excited));
  }
  return delta;
}

inline std::vector<int> excited_levels(const AtomicData& atoms) {
  std::vector<int> out;
  for (const auto& e : atoms.cg_table) {
    if (std::find(out.begin(), out.end(), e.f_excited) == out.end()) out.push_back(e.f_excited);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

/// Single-photon Rabi frequency for one Zeeman transition, rad/s (signed by
/// the CG amplitude).
inline double single_beam_rabi(const BeamParams& beam, const AtomicData& atoms, const Transition& t) {
  beam.validate();
  if (t.f_excited != 1 && t.f_excited != 2) throw ContractViolation("single_beam_rabi: unknown excited level");
  if (t.q < -1 || t.q > 1) throw ContractViolation("single_beam_rabi: unknown polarization");
  return atoms.dipole * beam.peak_field() * detail::pol_amp(beam, t.q) * atoms.cg(t.m, t.f_excited, t.q) /
         units::kHbar;
}

inline double single_beam_rabi(const BeamParams& beam, const AtomicData& atoms, const std::string& label) {
  return single_beam_rabi(beam, atoms, parse_transition(label));
}

/// sigma+ absorption then sigma- emission, m -> m + 2, summed over both
/// excited levels with their signed detunings.
inline double two_photon_rabi_between(const BeamParams& beam, const AtomicData& atoms, int m) {
  double total = 0.0;
  for (int fe : {1, 2}) {
    const double delta = detail::excited_detuning(beam, atoms, fe);
    const double up = single_beam_rabi(beam, atoms, Transition{m, fe, 1});
    const double down = single_beam_rabi(beam, atoms, Transition{m + 2, fe, -1});
    total += up * down / (2.0 * delta);
  }
  return total;
}

struct TwoPhotonRabi {
  double rabi_qubit = 0.0;  // |down> <-> |up>
  double rabi_aux = 0.0;    // |up> <-> |aux>
};

/// Magnitudes of the effective Raman Rabi frequencies, rad/s.
inline TwoPhotonRabi two_photon_rabi(const BeamParams& beam, const AtomicData& atoms) {
  return {std::abs(two_photon_rabi_between(beam, atoms, atoms.down_m)),
          std::abs(two_photon_rabi_between(beam, atoms, atoms.up_m))};
}

inline double stark_shift(const BeamParams& beam, const AtomicData& atoms, int m) {
  double shift = 0.0;
  for (int fe : detail::excited_levels(atoms)) {
    const double delta = detail::excited_detuning(beam, atoms, fe);
    for (int q : {1, -1}) {
      const double rabi = single_beam_rabi(beam, atoms, Transition{m, fe, q});
      shift += rabi * rabi / (4.0 * delta);
    }
  }
  return shift;
}

struct StarkShifts {
  double down = 0.0;
  double up = 0.0;
  double aux = 0.0;
};

inline StarkShifts ac_stark_shifts(const BeamParams& beam, const AtomicData& atoms) {
  return {stark_shift(beam, atoms, atoms.down_m), stark_shift(beam, atoms, atoms.up_m),
          stark_shift(beam, atoms, atoms.aux_m)};
}

struct EffectiveParams {
  double rabi_qubit = 0.0;
  double rabi_aux = 0.0;
  double stark_down = 0.0;
  double stark_up = 0.0;
  double stark_aux = 0.0;
  double zeeman_down_up = 0.0;
  double aux_splitting = 0.0;

  /// Residual qubit two-photon detuning: Zeeman minus differential Stark.
  double qubit_detuning() const { return zeeman_down_up - (stark_down - stark_up); }

  double aux_splitting_identity_residual() const {
    return aux_splitting - (zeeman_down_up + (stark_aux - stark_up));
  }

  json to_json() const {
    auto k = [](double w) { return units::to_khz(w); };
    return json{{"rabi_qubit_rad_s", rabi_qubit},         {"rabi_aux_rad_s", rabi_aux},
                {"stark_down_rad_s", stark_down},         {"stark_up_rad_s", stark_up},
                {"stark_aux_rad_s", stark_aux},           {"zeeman_down_up_rad_s", zeeman_down_up},
                {"aux_splitting_rad_s", aux_splitting},   {"qubit_detuning_rad_s", qubit_detuning()},
                {"kHz",
                 {{"rabi_qubit", k(rabi_qubit)},
                  {"rabi_aux", k(rabi_aux)},
                  {"stark_down", k(stark_down)},
                  {"stark_up", k(stark_up)},
                  {"stark_aux", k(stark_aux)},
                  {"zeeman_down_up", k(zeeman_down_up)},
                  {"aux_splitting", k(aux_splitting)},
                  {"qubit_detuning", k(qubit_detuning())}}}};
  }

  static EffectiveParams from_json(const json& j) {
    EffectiveParams p;
    p.rabi_qubit = j.at("rabi_qubit_rad_s").get<double>();
    p.rabi_aux = j.at("rabi_aux_rad_s").get<double>();
    p.stark_down = j.value("stark_down_rad_s", 0.0);
    p.stark_up = j.value("stark_up_rad_s", 0.0);
    p.stark_aux = j.value("stark_aux_rad_s", 0.0);
    p.zeeman_down_up = j.at("zeeman_down_up_rad_s").get<double>();
    p.aux_splitting = j.at("aux_splitting_rad_s").get<double>();
    return p;
  }
};

inline EffectiveParams effective_params(const BeamParams& beam, const AtomicData& atoms, double b0_tesla) {
  const auto rabi = two_photon_rabi(beam, atoms);
  const auto stark = ac_stark_shifts(beam, atoms);
  EffectiveParams p;
  p.rabi_qubit = rabi.rabi_qubit;
  p.rabi_aux = rabi.rabi_aux;
  p.stark_down = stark.down;
  p.stark_up = stark.up;
  p.stark_aux = stark.aux;
  p.zeeman_down_up = zeeman_splitting(b0_tesla, atoms);
  p.aux_splitting = p.zeeman_down_up + (p.stark_aux - p.stark_up);
  return p;
}

inline json beam_to_json(const BeamParams& b) {
  return json{{"power_W", b.power},
              {"waist_m", b.waist},
              {"detuning_rad_s", b.detuning},
              {"pol_plus_amp", b.pol_plus_amp},
              {"pol_minus_amp", b.pol_minus_amp},
              {"pol_rel_phase_rad", b.pol_rel_phase}};
}

inline BeamParams beam_from_json(const json& j) {
  BeamParams b;
  b.power = j.value("power_W", b.power);
  b.waist = j.value("waist_m", b.waist);
  b.detuning = j.value("detuning_rad_s", b.detuning);
  b.pol_plus_amp = j.value("pol_plus_amp", b.pol_plus_amp);
  b.pol_minus_amp = j.value("pol_minus_amp", b.pol_minus_amp);
  b.pol_rel_phase = j.value("pol_rel_phase_rad", b.pol_rel_phase);
  b.validate();
  return b;
}

}  // namespace swq
