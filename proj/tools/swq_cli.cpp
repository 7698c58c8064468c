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

// swq: command-line front end for the experiment recipes.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "swq/experiment.hpp"

namespace {

using swq::json;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::string> preset;
  unsigned threads = 1;
  bool timing = false;
  std::string axis;
  std::string counts_path;
  std::string schedule_path;
  int resamples = 200;
  bool enforce_tp = false;
};

json error_json(const std::string& kind, const std::string& message, const json& diagnostics = nullptr) {
  json e{{"error", {{"kind", kind}, {"message", message}}}};
  if (!diagnostics.is_null()) e["error"]["diagnostics"] = diagnostics;
  return e;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw swq::ContractViolation("cannot open " + path);
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw swq::ContractViolation(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw swq::ContractViolation("cannot write " + path);
  out << text;
}

std::string sibling(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

void emit(const json& body, const std::string& out) {
  const std::string text = body.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text(out, text);
  }
}

int run_recipe(const std::string& recipe, const Options& o) {
  json raw = o.config_path.empty() ? json{{"schema_version", swq::kSchemaVersion}, {"recipe", recipe}}
                                   : read_json_file(o.config_path);
  if (!raw.contains("recipe")) raw["recipe"] = recipe;
  if (raw.at("recipe") != recipe) {
    throw swq::ContractViolation("config recipe '" + raw.at("recipe").dump() + "' does not match subcommand " +
                                 recipe);
  }
  if (!o.axis.empty()) raw["axis"] = o.axis;
  if (o.seed) raw["seed"] = *o.seed;
  if (o.timing) raw["timing"] = true;
  const swq::ExperimentConfig cfg = swq::config_from_json(raw, o.preset);
  const swq::RunReport rep = swq::run_experiment(cfg);
  const std::string out = o.out.empty() ? cfg.output_path : o.out;
  emit(rep.body, out);
  if (!out.empty()) {
    if (!rep.sweep_csv.empty()) write_text(sibling(out, "_sweep.csv"), rep.sweep_csv);
    if (!rep.counts.empty()) {
      std::ostringstream os;
      swq::write_counts_csv(os, rep.counts);
      write_text(sibling(out, "_counts.csv"), os.str());
    }
  }
  return rep.exit_code;
}

int run_reconstruct(const Options& o) {
  std::ifstream in(o.counts_path);
  if (!in) throw swq::ContractViolation("cannot open " + o.counts_path);
  const auto data = swq::read_counts_csv(in);
  emit(swq::reconstruct_counts(data, o.resamples, o.seed.value_or(1), o.enforce_tp), o.out);
  return swq::kExitOk;
}

int run_schedule_cmd(const Options& o) {
  const json j = read_json_file(o.schedule_path);
  const json& list = j.is_array() ? j : j.at("schedule");
  const auto pulses = swq::schedule_from_json(list);
  swq::InitialState init;
  if (j.is_object() && j.contains("initial_state")) {
    init.theta = j.at("initial_state").at("theta").get<double>();
    init.phi = j.at("initial_state").value("phi", 0.0);
  }
  const swq::NoiseModel noise = swq::load_noise_preset(o.preset.value_or("none"));
  const int samples = j.is_object() ? j.value("noise_samples", 256) : 256;
  emit(swq::run_schedule(pulses, init, noise, samples, o.seed.value_or(1)), o.out);
  return swq::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spinwave qubit simulator and tomography toolkit"};
  app.set_version_flag("--version", std::string(SWQ_VERSION));
  app.require_subcommand(1);
  Options o;
  std::string preset;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "Root seed (overrides the config)");
    sub->add_option("--out", o.out, "Report path (JSON); CSV files are written alongside");
    sub->add_option("--preset", preset, "Noise preset")->check(CLI::IsMember({"paper-noise", "none"}));
    sub->add_option("--threads", o.threads, "Worker threads (results do not depend on this)")
        ->check(CLI::Range(1u, 256u));
  };
  for (const char* name : {"prepare_six", "rotation_sweep", "arbitrary_axis", "qpt_gates", "fringe", "stark_report"}) {
    auto* sub = app.add_subcommand(name, std::string("Run the ") + name + " recipe");
    sub->add_option("--config", o.config_path, "Experiment config (JSON)")->check(CLI::ExistingFile);
    sub->add_flag("--timing", o.timing, "Record wall time in the report");
    if (std::string(name) == "rotation_sweep") {
      sub->add_option("--axis", o.axis, "Rotation axis")->check(CLI::IsMember({"x", "y", "z", "n"}));
    }
    add_common(sub);
  }
  auto* rec = app.add_subcommand("reconstruct", "MLE reconstruction from a counts CSV");
  rec->add_option("--counts", o.counts_path, "CSV with input_label,basis,n_plus,n_minus")
      ->required()
      ->check(CLI::ExistingFile);
  rec->add_option("--resamples", o.resamples, "Bootstrap resamples")->check(CLI::Range(2, 100000));
  rec->add_flag("--enforce-tp", o.enforce_tp, "Trace-preserving process fit");
  add_common(rec);
  auto* sched = app.add_subcommand("run_schedule", "Evolve a state through a pulse schedule");
  sched->add_option("--schedule", o.schedule_path, "Schedule JSON")->required()->check(CLI::ExistingFile);
  add_common(sched);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : swq::kExitConfig;
  }
  if (!preset.empty()) o.preset = preset;
  swq::set_thread_count(o.threads);

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    if (cmd == "reconstruct") return run_reconstruct(o);
    if (cmd == "run_schedule") return run_schedule_cmd(o);
    return run_recipe(cmd, o);
  } catch (const swq::ConvergenceError& e) {
    std::cout << error_json("convergence", e.what(), e.diagnostics()).dump(2) << "\n";
    return swq::kExitConvergence;
  } catch (const swq::ContractViolation& e) {
    std::cout << error_json("config", e.what()).dump(2) << "\n";
    return swq::kExitConfig;
  } catch (const swq::NumericalError& e) {
    std::cout << error_json("numerical", e.what()).dump(2) << "\n";
    return swq::kExitConvergence;
  } catch (const json::exception& e) {
    std::cout << error_json("config", e.what()).dump(2) << "\n";
    return swq::kExitConfig;
  }
}
