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

// Experiment recipes: herald -> rotate -> read out -> tomograph, with
// configuration parsing and JSON/CSV reports. Everything is a pure function
// of the configuration, so a report regenerated from its echoed config is
// byte-identical.

#include <chrono>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "swq/control.hpp"
#include "swq/herald.hpp"
#include "swq/json_io.hpp"
#include "swq/levels.hpp"
#include "swq/qlin.hpp"
#include "swq/random.hpp"
#include "swq/tomo.hpp"

#ifndef SWQ_PRESET_DIR
#define SWQ_PRESET_DIR "presets"
#endif
#ifndef SWQ_VERSION
#define SWQ_VERSION "0.0.0"
#endif

namespace swq {

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitConvergence = 2, kExitAnchor = 3 };

// ---------------------------------------------------------------- noise I/O

inline json noise_to_json(const NoiseModel& n) {
  return json{{"rabi_fractional_sigma", n.rabi_fractional_sigma},
              {"larmor_sigma_rad_s", n.larmor_sigma},
              {"background_fraction", n.background_fraction},
              {"idler_misalignment_sigma_rad", n.idler_misalignment_sigma},
              {"aux_leakage", n.aux_leakage}};
}

inline NoiseModel noise_from_json(const json& j) {
  static const std::set<std::string> keys{"rabi_fractional_sigma", "larmor_sigma_rad_s", "background_fraction",
                                          "idler_misalignment_sigma_rad", "aux_leakage"};
  for (const auto& [k, v] : j.items()) {
    if (!keys.count(k)) throw ContractViolation("noise: unknown key '" + k + "'");
  }
  NoiseModel n;
  n.rabi_fractional_sigma = j.value("rabi_fractional_sigma", 0.0);
  n.larmor_sigma = j.value("larmor_sigma_rad_s", 0.0);
  n.background_fraction = j.value("background_fraction", 0.0);
  n.idler_misalignment_sigma = j.value("idler_misalignment_sigma_rad", 0.0);
  n.aux_leakage = j.value("aux_leakage", true);
  n.validate();
  return n;
}

inline std::string preset_path(const std::string& name) {
  std::string file = name;
  for (char& c : file) {
    if (c == '-') c = '_';
  }
  return std::string(SWQ_PRESET_DIR) + "/" + file + ".json";
}

inline NoiseModel load_noise_preset(const std::string& name) {
  if (name == "none") return NoiseModel::ideal();
  if (name != "paper-noise") throw ContractViolation("unknown noise preset '" + name + "'");
  std::ifstream in(preset_path(name));
  if (!in) throw ContractViolation("noise preset file not found: " + preset_path(name));
  try {
    json j;
    in >> j;
    return noise_from_json(j.at("noise"));
  } catch (const json::exception& e) {
    throw ContractViolation("noise preset: " + std::string(e.what()));
  }
}

// ------------------------------------------------------------------ config

enum class Recipe { PrepareSix, RotationSweep, ArbitraryAxis, QptGates, Fringe, StarkReport };

inline std::string to_string(Recipe r) {
  switch (r) {
    case Recipe::PrepareSix: return "prepare_six";
    case Recipe::RotationSweep: return "rotation_sweep";
    case Recipe::ArbitraryAxis: return "arbitrary_axis";
    case Recipe::QptGates: return "qpt_gates";
    case Recipe::Fringe: return "fringe";
    case Recipe::StarkReport: return "stark_report";
  }
  return "?";
}

inline Recipe recipe_from_string(const std::string& s) {
  for (Recipe r : {Recipe::PrepareSix, Recipe::RotationSweep, Recipe::ArbitraryAxis, Recipe::QptGates,
                   Recipe::Fringe, Recipe::StarkReport}) {
    if (to_string(r) == s) return r;
  }
  throw ContractViolation("unknown recipe '" + s + "'");
}

/// Control constants used by the recipes.
struct PhysicalSetup {
  double rabi = units::khz(190.0);
  double larmor = units::khz(180.0);
  double aux_detuning = units::khz(560.0);
};

struct InitialState {
  bool idler_h = false;  // herald with the idler analyser at |H>
  double theta = 0.0;
  double phi = 0.0;
};

struct ExperimentConfig {
  Recipe recipe = Recipe::PrepareSix;
  std::uint64_t seed = 1;
  std::int64_t shots_per_basis = 5000;
  CountModel counts_model = CountModel::Binomial;
  std::string noise_preset = "paper-noise";  // empty when noise is given inline
  NoiseModel noise;
  int noise_samples = 256;
  int bootstrap_resamples = 200;
  int monte_carlo_samples = 10000;
  PhysicalSetup physical;
  std::optional<BeamParams> beam;
  double b0_tesla = 180.0 / 1400.0 / units::kGaussPerTesla;
  std::string atomic_data_path;
  std::vector<double> angle_grid;
  std::string axis = "x";
  std::array<double, 3> axis_vector{1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)};
  std::optional<InitialState> initial;
  bool enforce_tp = false;
  std::string output_path;
  bool timing = false;

  bool is_sweep() const {
    return recipe == Recipe::RotationSweep || recipe == Recipe::ArbitraryAxis || recipe == Recipe::Fringe;
  }

  void validate() const {
    if (shots_per_basis < 1) throw ContractViolation("config: shots_per_basis must be >= 1");
    if (noise_samples < 1) throw ContractViolation("config: noise_samples must be >= 1");
    if (bootstrap_resamples < 2) throw ContractViolation("config: bootstrap_resamples must be >= 2");
    if (monte_carlo_samples < 1) throw ContractViolation("config: monte_carlo_samples must be >= 1");
    noise.validate();
    if (!(physical.rabi > 0.0) || !(physical.larmor > 0.0) || !std::isfinite(physical.aux_detuning)) {
      throw ContractViolation("config: physical rabi and larmor must be positive");
    }
    if (is_sweep() && angle_grid.empty()) throw ContractViolation("config: angle_grid must be non-empty");
    for (double a : angle_grid) {
      if (!std::isfinite(a)) throw ContractViolation("config: non-finite angle in angle_grid");
    }
    if (recipe == Recipe::RotationSweep && axis != "x" && axis != "y" && axis != "z" && axis != "n") {
      throw ContractViolation("config: axis must be one of x, y, z, n");
    }
    const double n = std::sqrt(axis_vector[0] * axis_vector[0] + axis_vector[1] * axis_vector[1] +
                               axis_vector[2] * axis_vector[2]);
    if (std::abs(n - 1.0) > 1e-9) throw ContractViolation("config: axis_vector must be unit norm");
    if (beam) beam->validate();
    if (!(b0_tesla >= 0.0)) throw ContractViolation("config: b0_tesla must be >= 0");
  }
};

inline std::vector<double> default_angle_grid(Recipe r) {
  std::vector<double> grid;
  if (r == Recipe::Fringe) {
    for (int k = 0; k < 24; ++k) grid.push_back(2.0 * kPi * k / 24.0);
  } else {
    for (int k = 0; k < 12; ++k) grid.push_back(kPi * k / 12.0);
  }
  return grid;
}

/// Parses and validates a configuration. `preset_override`, when set,
/// replaces any noise given in the file.
inline ExperimentConfig config_from_json(const json& j, const std::optional<std::string>& preset_override = {}) {
  if (!j.is_object()) throw ContractViolation("config: top level must be an object");
  static const std::set<std::string> keys{
      "schema_version", "recipe",      "seed",        "shots_per_basis",     "counts_model",
      "noise",          "noise_samples", "bootstrap_resamples", "monte_carlo_samples", "physical",
      "angle_grid",     "axis",        "axis_vector", "initial_state",       "enforce_tp",
      "output_path",    "timing"};
  for (const auto& [k, v] : j.items()) {
    if (!keys.count(k)) throw ContractViolation("config: unknown key '" + k + "'");
  }
  ExperimentConfig c;
  try {
    if (!j.contains("schema_version")) throw ContractViolation("config: schema_version is mandatory");
    if (j.at("schema_version").get<int>() != kSchemaVersion) {
      throw ContractViolation("config: unsupported schema_version");
    }
    c.recipe = recipe_from_string(j.at("recipe").get<std::string>());
    c.seed = j.value("seed", c.seed);
    c.shots_per_basis = j.value("shots_per_basis", c.shots_per_basis);
    const std::string model = j.value("counts_model", std::string("binomial"));
    if (model == "binomial") {
      c.counts_model = CountModel::Binomial;
    } else if (model == "expected") {
      c.counts_model = CountModel::Expected;
    } else {
      throw ContractViolation("config: counts_model must be 'binomial' or 'expected'");
    }
    if (j.contains("noise")) {
      const json& n = j.at("noise");
      if (n.is_string()) {
        c.noise_preset = n.get<std::string>();
      } else if (n.is_object() && n.contains("preset")) {
        if (n.size() != 1) throw ContractViolation("config: noise preset cannot be mixed with fields");
        c.noise_preset = n.at("preset").get<std::string>();
      } else {
        c.noise_preset.clear();
        c.noise = noise_from_json(n);
      }
    }
    if (preset_override) c.noise_preset = *preset_override;
    if (!c.noise_preset.empty()) c.noise = load_noise_preset(c.noise_preset);
    c.noise_samples = j.value("noise_samples", c.noise_samples);
    c.bootstrap_resamples = j.value("bootstrap_resamples", c.bootstrap_resamples);
    c.monte_carlo_samples = j.value("monte_carlo_samples", c.monte_carlo_samples);
    if (j.contains("physical")) {
      const json& p = j.at("physical");
      if (p.contains("effective")) {
        const json& e = p.at("effective");
        c.physical.rabi = e.value("rabi_rad_s", c.physical.rabi);
        c.physical.larmor = e.value("larmor_rad_s", c.physical.larmor);
        c.physical.aux_detuning = e.value("aux_detuning_rad_s", c.physical.aux_detuning);
      }
      if (p.contains("beam")) c.beam = beam_from_json(p.at("beam"));
      c.b0_tesla = p.value("b0_tesla", c.b0_tesla);
      c.atomic_data_path = p.value("atomic_data", std::string());
    }
    c.angle_grid = j.contains("angle_grid") ? j.at("angle_grid").get<std::vector<double>>()
                                            : default_angle_grid(c.recipe);
    c.axis = j.value("axis", c.recipe == Recipe::ArbitraryAxis ? std::string("n") : std::string("x"));
    if (c.recipe == Recipe::ArbitraryAxis && c.axis != "n") {
      throw ContractViolation("config: arbitrary_axis uses axis 'n'");
    }
    if (j.contains("axis_vector")) {
      const auto v = j.at("axis_vector").get<std::vector<double>>();
      if (v.size() != 3) throw ContractViolation("config: axis_vector needs three components");
      const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
      if (!(n > 0.0)) throw ContractViolation("config: axis_vector must be non-zero");
      c.axis_vector = {v[0] / n, v[1] / n, v[2] / n};
    }
    if (j.contains("initial_state")) {
      const json& s = j.at("initial_state");
      InitialState init;
      if (s.contains("idler")) {
        if (s.at("idler").get<std::string>() != "H") throw ContractViolation("config: idler must be 'H'");
        init.idler_h = true;
      } else {
        init.theta = s.at("theta").get<double>();
        init.phi = s.value("phi", 0.0);
      }
      c.initial = init;
    }
    c.enforce_tp = j.value("enforce_tp", false);
    c.output_path = j.value("output_path", std::string());
    c.timing = j.value("timing", false);
  } catch (const json::exception& e) {
    throw ContractViolation("config: " + std::string(e.what()));
  }
  c.validate();
  return c;
}

/// Normalized echo; parsing the echo reproduces the same configuration.
inline json config_to_json(const ExperimentConfig& c) {
  json j{{"schema_version", kSchemaVersion},
         {"recipe", to_string(c.recipe)},
         {"seed", c.seed},
         {"shots_per_basis", c.shots_per_basis},
         {"counts_model", c.counts_model == CountModel::Binomial ? "binomial" : "expected"},
         {"noise", noise_to_json(c.noise)},
         {"noise_samples", c.noise_samples},
         {"bootstrap_resamples", c.bootstrap_resamples},
         {"monte_carlo_samples", c.monte_carlo_samples},
         {"angle_grid", c.angle_grid},
         {"axis", c.axis},
         {"axis_vector", c.axis_vector},
         {"enforce_tp", c.enforce_tp},
         {"output_path", c.output_path},
         {"timing", c.timing}};
  json phys{{"effective",
             {{"rabi_rad_s", c.physical.rabi},
              {"larmor_rad_s", c.physical.larmor},
              {"aux_detuning_rad_s", c.physical.aux_detuning}}},
            {"b0_tesla", c.b0_tesla}};
  if (c.beam) phys["beam"] = beam_to_json(*c.beam);
  if (!c.atomic_data_path.empty()) phys["atomic_data"] = c.atomic_data_path;
  j["physical"] = phys;
  if (c.initial) {
    j["initial_state"] = c.initial->idler_h ? json{{"idler", "H"}}
                                            : json{{"theta", c.initial->theta}, {"phi", c.initial->phi}};
  }
  return j;
}

// ------------------------------------------------------------------ report

struct RunReport {
  json body;
  std::string sweep_csv;              // sweep recipes only
  std::vector<LabeledCounts> counts;  // raw simulated counts
  int exit_code = kExitOk;
};

namespace detail {

inline double clamp_unit(double f) { return std::clamp(f, 0.0, 1.0); }

inline void require_finite(const json& j, const std::string& path) {
  if (j.is_number_float() && !std::isfinite(j.get<double>())) {
    throw NumericalError("report contains a non-finite value at " + path);
  }
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) require_finite(v, path + "/" + k);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) require_finite(j[i], path + "/" + std::to_string(i));
  }
}

inline json state_json(const DensityMatrix& rho) {
  return json{{"rho", matrix_to_json(rho.matrix())}, {"stokes", stokes_to_json(stokes_from_rho(rho))}};
}

inline std::string csv_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

/// Prepare, evolve and detect: the spinwave state seen by signal tomography.
class Pipeline {
 public:
  explicit Pipeline(const ExperimentConfig& cfg) : cfg_(cfg) {}

  const ExperimentConfig& config() const { return cfg_; }

  DensityMatrix prepare(const InitialState& init, std::uint64_t seed) const {
    const JonesVector pol = init.idler_h ? polarization::horizontal()
                                         : target_idler_polarization(init.theta, init.phi);
    return prepare_heralded(pol, cfg_.noise.idler_misalignment_sigma, cfg_.noise_samples, seed);
  }

  DensityMatrix run(const DensityMatrix& prepared, const std::vector<PulseSpec>& pulses, std::uint64_t seed,
                    double* detected_fraction = nullptr) const {
    const DensityMatrix out = evolve(embed_qutrit(prepared), pulses, cfg_.noise, cfg_.noise_samples, seed);
    const ReadoutResult r = readout_map(out);
    if (detected_fraction) *detected_fraction = r.detected_fraction;
    return signal_to_spinwave(r.signal);
  }

  TomographyInput measure(const DensityMatrix& rho, std::uint64_t seed) const {
    return simulate_tomography(rho, cfg_.shots_per_basis, cfg_.noise.background_fraction, seed,
                               cfg_.counts_model);
  }

  std::vector<PulseSpec> compile(const RotationSpec& spec) const {
    return compile_rotation(spec, cfg_.physical.rabi, cfg_.physical.larmor, cfg_.physical.aux_detuning);
  }

  /// MLE plus bootstrap spread of the fidelity to `reference`.
  struct Estimate {
    StateEstimate mle;
    double fidelity = 0.0;
    BootstrapResult bootstrap;
  };

  Estimate reconstruct(const TomographyInput& counts, const DensityMatrix& reference, std::uint64_t seed) const {
    Estimate e;
    e.mle = mle_state(counts);
    e.fidelity = clamp_unit(state_fidelity(e.mle.rho, reference));
    e.bootstrap = bootstrap_state_error(counts, reference, cfg_.bootstrap_resamples, seed);
    return e;
  }

 private:
  const ExperimentConfig& cfg_;
};

inline RotationSpec axis_rotation(const ExperimentConfig& cfg, double angle) {
  RotationSpec spec;
  spec.angle = angle;
  if (cfg.axis == "x") {
    spec.axis = {1.0, 0.0, 0.0};
  } else if (cfg.axis == "y") {
    spec.axis = {0.0, 1.0, 0.0};
  } else if (cfg.axis == "z") {
    spec.axis = {0.0, 0.0, 1.0};
  } else {
    spec.axis = cfg.axis_vector;
  }
  return spec;
}

inline InitialState default_initial(const ExperimentConfig& cfg) {
  if (cfg.initial) return *cfg.initial;
  InitialState s;
  if (cfg.recipe == Recipe::ArbitraryAxis || (cfg.recipe == Recipe::RotationSweep && cfg.axis == "n")) {
    s.theta = 3.0 * kPi / 8.0;
  } else if (cfg.recipe == Recipe::RotationSweep && cfg.axis == "z") {
    s.idler_h = true;
  }
  return s;
}

inline DensityMatrix ideal_initial(const InitialState& s) {
  if (s.idler_h) return DensityMatrix::from_pure(project_idler(atom_photon_state(), polarization::horizontal()).spinwave);
  return DensityMatrix::from_pure(spinwave::superposition(s.theta, s.phi));
}

inline DensityMatrix apply_unitary(const ComplexMatrix& u, const DensityMatrix& rho) {
  return DensityMatrix::project(u * rho.matrix() * u.adjoint());
}

}  // namespace detail

// ----------------------------------------------------------------- recipes

inline RunReport run_prepare_six(const ExperimentConfig& cfg) {
  const detail::Pipeline pipe(cfg);
  RunReport rep;
  json items = json::array();
  double sum = 0.0;
  for (std::size_t k = 0; k < kCardinals.size(); ++k) {
    const Cardinal c = kCardinals[k];
    const auto [theta, phi] = cardinal_angles(c);
    InitialState init;
    init.theta = theta;
    init.phi = phi;
    const DensityMatrix target = DensityMatrix::from_pure(cardinal_state(c));
    const DensityMatrix prepared = pipe.prepare(init, derive_seed(cfg.seed, "prepare", k));
    const DensityMatrix seen = pipe.run(prepared, {}, derive_seed(cfg.seed, "evolve", k));
    const TomographyInput counts = pipe.measure(seen, derive_seed(cfg.seed, "counts", k));
    const auto est = pipe.reconstruct(counts, target, derive_seed(cfg.seed, "bootstrap", k));
    rep.counts.push_back({cardinal_name(c), counts});
    sum += est.fidelity;
    items.push_back(json{{"label", cardinal_name(c)},
                         {"target", detail::state_json(target)},
                         {"estimate", detail::state_json(est.mle.rho)},
                         {"fidelity", est.fidelity},
                         {"fidelity_std", est.bootstrap.fidelity_std},
                         {"optimizer", est.mle.diagnostics()}});
  }
  rep.body["results"] = {{"states", items}};
  rep.body["summary"] = {{"mean_fidelity", sum / 6.0}};
  return rep;
}

inline RunReport run_rotation_sweep(const ExperimentConfig& cfg) {
  const detail::Pipeline pipe(cfg);
  RunReport rep;
  const InitialState init = detail::default_initial(cfg);
  const DensityMatrix ideal_init = detail::ideal_initial(init);

  // The initial state is measured once; targets are the ideal rotation
  // applied to that estimate.
  const DensityMatrix prepared = pipe.prepare(init, derive_seed(cfg.seed, "prepare", 0));
  const DensityMatrix seen0 = pipe.run(prepared, {}, derive_seed(cfg.seed, "evolve-initial", 0));
  const TomographyInput init_counts = pipe.measure(seen0, derive_seed(cfg.seed, "counts-initial", 0));
  const auto init_est = pipe.reconstruct(init_counts, ideal_init, derive_seed(cfg.seed, "bootstrap-initial", 0));
  rep.counts.push_back({"initial", init_counts});

  std::ostringstream csv;
  csv << "angle_rad,s_x,s_y,s_z,fidelity,fidelity_std\n";
  json points = json::array();
  double sum = 0.0;
  double sum_ideal = 0.0;
  for (std::size_t k = 0; k < cfg.angle_grid.size(); ++k) {
    const double angle = cfg.angle_grid[k];
    const RotationSpec spec = detail::axis_rotation(cfg, angle);
    const ComplexMatrix u = rotation_unitary(spec);
    const auto pulses = pipe.compile(spec);
    double detected = 1.0;
    const DensityMatrix seen = pipe.run(prepared, pulses, derive_seed(cfg.seed, "evolve", k), &detected);
    const TomographyInput counts = pipe.measure(seen, derive_seed(cfg.seed, "counts", k));
    const DensityMatrix reference = detail::apply_unitary(u, init_est.mle.rho);
    const auto est = pipe.reconstruct(counts, reference, derive_seed(cfg.seed, "bootstrap", k));
    const DensityMatrix ideal_out = detail::apply_unitary(u, ideal_init);
    const double f_ideal = detail::clamp_unit(state_fidelity(est.mle.rho, ideal_out));
    const StokesVector s = stokes_from_rho(est.mle.rho);
    rep.counts.push_back({"angle_" + std::to_string(k), counts});
    sum += est.fidelity;
    sum_ideal += f_ideal;
    csv << detail::csv_number(angle) << ',' << detail::csv_number(s.x) << ',' << detail::csv_number(s.y) << ','
        << detail::csv_number(s.z) << ',' << detail::csv_number(est.fidelity) << ','
        << detail::csv_number(est.bootstrap.fidelity_std) << '\n';
    points.push_back(json{{"angle_rad", angle},
                          {"pulses", schedule_to_json(pulses)},
                          {"estimate", detail::state_json(est.mle.rho)},
                          {"theory_stokes", stokes_to_json(stokes_from_rho(ideal_out))},
                          {"fidelity", est.fidelity},
                          {"fidelity_std", est.bootstrap.fidelity_std},
                          {"fidelity_to_ideal_target", f_ideal},
                          {"detected_fraction", detected}});
  }
  const double n = static_cast<double>(cfg.angle_grid.size());
  rep.body["results"] = {{"axis", cfg.axis},
                         {"axis_vector", detail::axis_rotation(cfg, 0.0).axis},
                         {"initial",
                          {{"ideal", detail::state_json(ideal_init)},
                           {"estimate", detail::state_json(init_est.mle.rho)},
                           {"fidelity", init_est.fidelity},
                           {"fidelity_std", init_est.bootstrap.fidelity_std}}},
                         {"points", points}};
  rep.body["summary"] = {{"mean_fidelity", sum / n}, {"mean_fidelity_to_ideal_target", sum_ideal / n}};
  rep.sweep_csv = csv.str();
  return rep;
}

/// Pulse sequence for a named gate. The Hadamard is a Z-axis pi rotation
/// followed in time by a Y-axis pi/2 rotation: H ~ R_y(pi/2) Z.
inline std::vector<PulseSpec> gate_pulses(const std::string& gate, const PhysicalSetup& phys) {
  auto compile = [&](std::array<double, 3> axis, double angle) {
    return compile_rotation(RotationSpec{axis, angle}, phys.rabi, phys.larmor, phys.aux_detuning);
  };
  if (gate == "X") return compile({1.0, 0.0, 0.0}, kPi / 2);
  if (gate == "Y") return compile({0.0, 1.0, 0.0}, kPi / 2);
  if (gate == "Z") return compile({0.0, 0.0, 1.0}, kPi / 2);
  if (gate == "H") {
    auto pulses = compile({0.0, 0.0, 1.0}, kPi / 2);
    const auto ry = compile({0.0, 1.0, 0.0}, kPi / 4);
    pulses.insert(pulses.end(), ry.begin(), ry.end());
    return pulses;
  }
  throw ContractViolation("unknown gate '" + gate + "'");
}

inline ComplexMatrix gate_unitary(const std::string& gate) {
  if (gate == "X") return pauli::x();
  if (gate == "Y") return pauli::y();
  if (gate == "Z") return pauli::z();
  if (gate == "H") return (pauli::x() + pauli::z()) / std::sqrt(2.0);
  throw ContractViolation("unknown gate '" + gate + "'");
}

inline RunReport run_qpt_gates(const ExperimentConfig& cfg) {
  const detail::Pipeline pipe(cfg);
  RunReport rep;

  // Input states are prepared and measured once and shared by all gates.
  std::vector<DensityMatrix> prepared;
  std::vector<DensityMatrix> input_estimates;
  std::vector<double> input_std;
  json inputs = json::array();
  for (std::size_t k = 0; k < kCardinals.size(); ++k) {
    const Cardinal c = kCardinals[k];
    const auto [theta, phi] = cardinal_angles(c);
    InitialState init;
    init.theta = theta;
    init.phi = phi;
    prepared.push_back(pipe.prepare(init, derive_seed(cfg.seed, "prepare", k)));
    const DensityMatrix seen = pipe.run(prepared.back(), {}, derive_seed(cfg.seed, "evolve-input", k));
    const TomographyInput counts = pipe.measure(seen, derive_seed(cfg.seed, "counts-input", k));
    const DensityMatrix target = DensityMatrix::from_pure(cardinal_state(c));
    const auto est = pipe.reconstruct(counts, target, derive_seed(cfg.seed, "bootstrap-input", k));
    input_estimates.push_back(est.mle.rho);
    rep.counts.push_back({"input/" + cardinal_name(c), counts});
    inputs.push_back(json{{"label", cardinal_name(c)}, {"fidelity", est.fidelity}});
  }

  const std::vector<std::string> gates{"X", "Y", "Z", "H"};
  json gate_items = json::array();
  double sum_proc = 0.0;
  bool all_consistent = true;
  for (std::size_t g = 0; g < gates.size(); ++g) {
    const std::string& name = gates[g];
    const ComplexMatrix u = gate_unitary(name);
    const auto pulses = gate_pulses(name, cfg.physical);
    const double compile_error = phase_invariant_distance(sequence_unitary(pulses), u);
    if (compile_error > 1e-9) throw NumericalError("gate " + name + " compiled incorrectly");

    ProcessTomographySet set;
    double measured_sum = 0.0;
    double measured_var = 0.0;
    for (std::size_t k = 0; k < kCardinals.size(); ++k) {
      const Cardinal c = kCardinals[k];
      const std::uint64_t idx = g * 16 + k;
      const DensityMatrix seen = pipe.run(prepared[k], pulses, derive_seed(cfg.seed, "evolve", idx));
      const TomographyInput counts = pipe.measure(seen, derive_seed(cfg.seed, "counts", idx));
      set.set(c, counts);
      rep.counts.push_back({name + "/" + cardinal_name(c), counts});
      const DensityMatrix reference = detail::apply_unitary(u, input_estimates[k]);
      const auto est = pipe.reconstruct(counts, reference, derive_seed(cfg.seed, "bootstrap", idx));
      measured_sum += est.fidelity;
      measured_var += est.bootstrap.fidelity_std * est.bootstrap.fidelity_std;
    }
    const ProcessEstimate fit = qpt_mle(set, cfg.enforce_tp);
    const ProcessMatrix ideal = chi_from_unitary(u);
    const double f_proc = detail::clamp_unit(process_fidelity(fit.chi, ideal));
    const ComplexMatrix chi_lin = qpt_linear(set.data());
    const double f_proc_lin = (chi_lin * ideal.matrix()).trace().real();
    const double f_ave_formula = average_fidelity_from_process(f_proc);
    const auto mc = monte_carlo_average_fidelity(fit.chi, u, cfg.monte_carlo_samples,
                                                 derive_seed(cfg.seed, "haar", g));
    const double f_ave_measured = measured_sum / 6.0;
    const double sigma = std::sqrt(measured_var) / 6.0;
    const bool consistent = f_ave_measured >= f_ave_formula - 3.0 * sigma;
    all_consistent = all_consistent && consistent;
    sum_proc += f_proc;
    gate_items.push_back(json{{"gate", name},
                              {"pulses", schedule_to_json(pulses)},
                              {"chi", matrix_to_json(fit.chi.matrix())},
                              {"chi_ideal", matrix_to_json(ideal.matrix())},
                              {"process_fidelity", f_proc},
                              {"process_fidelity_unconstrained", f_proc_lin},
                              {"average_fidelity_formula", f_ave_formula},
                              {"average_fidelity_monte_carlo", detail::clamp_unit(mc.haar_mean)},
                              {"average_fidelity_monte_carlo_std_error", mc.haar_std_error},
                              {"average_fidelity_cardinal", detail::clamp_unit(mc.cardinal_mean)},
                              {"average_fidelity_measured", f_ave_measured},
                              {"average_fidelity_measured_std", sigma},
                              {"measured_not_below_formula", consistent},
                              {"fit", fit.diagnostics()}});
  }
  rep.body["results"] = {{"inputs", inputs}, {"gates", gate_items}};
  rep.body["summary"] = {{"mean_process_fidelity", sum_proc / static_cast<double>(gates.size())},
                         {"measured_average_fidelity_not_below_formula", all_consistent}};
  return rep;
}

inline RunReport run_fringe(const ExperimentConfig& cfg) {
  const detail::Pipeline pipe(cfg);
  RunReport rep;
  struct Arm {
    std::string label;
    InitialState init;
    double raman_phase;
  };
  // The |H>-heralded state lies near the x axis, so it is swept about y.
  InitialState down;
  InitialState h_state;
  h_state.idler_h = true;
  const std::vector<Arm> arms{{"down", down, 0.0}, {"idler_H", h_state, -kPi / 2}};
  std::ostringstream csv;
  csv << "initial,angle_rad,n_plus,n_minus\n";
  json results = json::array();
  double worst_ratio = std::numeric_limits<double>::infinity();
  double worst_visibility = 1.0;
  for (std::size_t a = 0; a < arms.size(); ++a) {
    const Arm& arm = arms[a];
    const DensityMatrix prepared = pipe.prepare(arm.init, derive_seed(cfg.seed, "prepare", a));
    std::vector<FringePoint> points;
    for (std::size_t k = 0; k < cfg.angle_grid.size(); ++k) {
      const double area = cfg.angle_grid[k];
      std::vector<PulseSpec> pulses;
      if (area > 0.0) {
        pulses.push_back(PulseSpec::raman(area / cfg.physical.rabi, cfg.physical.rabi, arm.raman_phase,
                                          cfg.physical.aux_detuning, cfg.physical.larmor));
      }
      const std::uint64_t idx = a * 1024 + k;
      const DensityMatrix seen = pipe.run(prepared, pulses, derive_seed(cfg.seed, "evolve", idx));
      const MeasurementRecord rec =
          simulate_counts(seen, Basis::Z, cfg.shots_per_basis, cfg.noise.background_fraction,
                          derive_seed(cfg.seed, "counts", idx), cfg.counts_model);
      points.push_back({area, static_cast<double>(rec.n_plus), static_cast<double>(rec.n_minus)});
      csv << arm.label << ',' << detail::csv_number(area) << ',' << rec.n_plus << ',' << rec.n_minus << '\n';
    }
    const FringeResult fr = fringe_analysis(points);
    worst_ratio = std::min(worst_ratio, fr.max_min_ratio);
    worst_visibility = std::min(worst_visibility, fr.visibility);
    json item = fringe_to_json(fr);
    item["initial"] = arm.label;
    item["raman_phase_rad"] = arm.raman_phase;
    results.push_back(item);
  }
  rep.body["results"] = {{"fringes", results}};
  rep.body["summary"] = {{"min_max_min_ratio", worst_ratio}, {"min_visibility", worst_visibility}};
  rep.sweep_csv = csv.str();
  return rep;
}

struct Anchor {
  std::string name;
  double value_khz;
  double paper_khz;
  double low_khz;
  double high_khz;
  bool pass() const { return value_khz >= low_khz && value_khz <= high_khz; }
};

inline std::vector<Anchor> stark_anchors(const EffectiveParams& p) {
  auto band = [](const std::string& name, double value, double paper) {
    const double a = 0.75 * paper;
    const double b = 1.25 * paper;
    return Anchor{name, value, paper, std::min(a, b), std::max(a, b)};
  };
  using units::to_khz;
  std::vector<Anchor> out{band("stark_down", to_khz(p.stark_down), 40.0),
                          band("stark_up", to_khz(p.stark_up), -140.0),
                          band("stark_aux", to_khz(p.stark_aux), 240.0),
                          band("differential_stark_down_minus_up", to_khz(p.stark_down - p.stark_up), 180.0),
                          band("aux_splitting", to_khz(p.aux_splitting), 560.0),
                          band("rabi_qubit", to_khz(p.rabi_qubit), 240.0),
                          band("rabi_aux", to_khz(p.rabi_aux), 240.0),
                          Anchor{"qubit_detuning", to_khz(p.qubit_detuning()), 0.0, -45.0, 45.0}};
  // Measured 190 kHz must sit within [0.6, 1.1] of the theory value.
  const double theory = to_khz(p.rabi_qubit);
  out.push_back(Anchor{"measured_rabi_190", 190.0, 190.0, 0.6 * theory, 1.1 * theory});
  return out;
}

inline RunReport run_stark_report(const ExperimentConfig& cfg) {
  RunReport rep;
  const AtomicData atoms =
      AtomicData::load(cfg.atomic_data_path.empty() ? AtomicData::default_path() : cfg.atomic_data_path);
  const BeamParams beam = cfg.beam.value_or(BeamParams{});
  const EffectiveParams p = effective_params(beam, atoms, cfg.b0_tesla);
  json anchors = json::array();
  bool all_pass = true;
  for (const auto& a : stark_anchors(p)) {
    all_pass = all_pass && a.pass();
    anchors.push_back(json{{"name", a.name},
                           {"value_kHz", a.value_khz},
                           {"paper_kHz", a.paper_khz},
                           {"band_kHz", {a.low_khz, a.high_khz}},
                           {"pass", a.pass()}});
  }
  json leakage;
  if (p.rabi_aux > 0.0) {
    const double omega = p.rabi_aux;
    const double delta = p.aux_splitting;
    const PulseSpec pulse = PulseSpec::raman(0.0, omega, 0.0, delta);
    // 40 qubit Rabi periods covers the slow beat between the two couplings.
    const double t_max = 80.0 * kPi / omega;
    const PureState up3(ComplexVector::Unit(3, 1));
    const PureState down3(ComplexVector::Unit(3, 0));
    leakage = {{"two_level_formula", omega * omega / (omega * omega + delta * delta)},
               {"three_level_peak_from_up", peak_aux_population(pulse, up3, t_max, 400000)},
               {"three_level_peak_from_down", peak_aux_population(pulse, down3, t_max, 400000)},
               {"paper_estimate", 0.01},
               {"flag", "computed leakage exceeds the paper's ~1% estimate"}};
  }
  rep.body["results"] = {{"atomic_data", atoms.line},
                         {"beam", beam_to_json(beam)},
                         {"b0_tesla", cfg.b0_tesla},
                         {"effective", p.to_json()},
                         {"aux_splitting_identity_residual_rad_s", p.aux_splitting_identity_residual()},
                         {"anchors", anchors},
                         {"leakage", leakage}};
  rep.body["summary"] = {{"all_anchors_pass", all_pass}};
  rep.exit_code = all_pass ? kExitOk : kExitAnchor;
  return rep;
}

/// Runs a recipe and wraps the result with the config echo and provenance.
inline RunReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  RunReport rep;
  switch (cfg.recipe) {
    case Recipe::PrepareSix: rep = run_prepare_six(cfg); break;
    case Recipe::RotationSweep:
    case Recipe::ArbitraryAxis: rep = run_rotation_sweep(cfg); break;
    case Recipe::QptGates: rep = run_qpt_gates(cfg); break;
    case Recipe::Fringe: rep = run_fringe(cfg); break;
    case Recipe::StarkReport: rep = run_stark_report(cfg); break;
  }
  rep.body["schema_version"] = kSchemaVersion;
  rep.body["recipe"] = to_string(cfg.recipe);
  rep.body["config"] = config_to_json(cfg);
  json prov{{"seed", cfg.seed},
            {"swq_version", SWQ_VERSION},
            {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                  "." + std::to_string(EIGEN_MINOR_VERSION)},
            {"json_version", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                 std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                 std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  if (cfg.timing) {
    prov["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  rep.body["provenance"] = prov;
  detail::require_finite(rep.body, "");
  return rep;
}

/// Schedule replay: evolve an initial state through a pulse list.
inline json run_schedule(const std::vector<PulseSpec>& pulses, const InitialState& init, const NoiseModel& noise,
                         int noise_samples, std::uint64_t seed) {
  const DensityMatrix start = detail::ideal_initial(init);
  const DensityMatrix out = evolve(embed_qutrit(start), pulses, noise, noise_samples, derive_seed(seed, "evolve"));
  const ReadoutResult r = readout_map(out);
  const DensityMatrix qubit = signal_to_spinwave(r.signal);
  json j{{"schema_version", kSchemaVersion},
         {"schedule", schedule_to_json(pulses)},
         {"noise", noise_to_json(noise)},
         {"initial", detail::state_json(start)},
         {"final_three_level", matrix_to_json(out.matrix())},
         {"aux_population", out.matrix()(2, 2).real()},
         {"detected_fraction", r.detected_fraction},
         {"detected_qubit", detail::state_json(qubit)},
         {"ideal_unitary", matrix_to_json(sequence_unitary(pulses))}};
  detail::require_finite(j, "");
  return j;
}

/// State MLE for every label in a counts file; if all six cardinal labels
/// are present the process matrix is fitted as well.
inline json reconstruct_counts(const std::vector<LabeledCounts>& data, int resamples, std::uint64_t seed,
                               bool enforce_tp) {
  json states = json::array();
  std::set<std::string> labels;
  for (std::size_t k = 0; k < data.size(); ++k) {
    const auto& item = data[k];
    labels.insert(item.label);
    const auto lin = linear_inversion(item.input);
    const auto est = mle_state(item.input);
    const auto boot = bootstrap_state_error(item.input, est.rho, resamples, derive_seed(seed, "bootstrap", k));
    states.push_back(json{{"label", item.label},
                          {"linear_inversion",
                           {{"rho", matrix_to_json(lin.rho)},
                            {"min_eigenvalue", lin.min_eigenvalue},
                            {"physical", lin.physical}}},
                          {"mle", detail::state_json(est.rho)},
                          {"bootstrap_fidelity_std", boot.fidelity_std},
                          {"optimizer", est.diagnostics()}});
  }
  json out{{"schema_version", kSchemaVersion}, {"states", states}};
  bool all_cardinal = data.size() == kCardinals.size();
  for (Cardinal c : kCardinals) all_cardinal = all_cardinal && labels.count(cardinal_name(c));
  if (all_cardinal) {
    const auto set = ProcessTomographySet::from_labeled(data);
    const auto fit = qpt_mle(set, enforce_tp);
    out["process"] = {{"chi", matrix_to_json(fit.chi.matrix())},
                      {"chi_unconstrained", matrix_to_json(qpt_linear(set.data()))},
                      {"fit", fit.diagnostics()}};
  }
  detail::require_finite(out, "");
  return out;
}

}  // namespace swq
