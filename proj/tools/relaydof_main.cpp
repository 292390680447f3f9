/*
 * Copyright 2026 The relaydof Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "relaydof/experiment.hpp"

namespace {

constexpr int kExitConfigError = 64;

struct Flags {
  std::string config_path;
  std::string scheme = "y";
  int users = 0;
  int antennas = 0;
  int relays = 0;
  double snr_start = 50.0, snr_stop = 90.0, snr_step = 5.0;
  int trials = 200;
  std::uint64_t seed = 1;
  double hmin = relaydof::kDefaultHMin, hmax = relaydof::kDefaultHMax;
  std::string out = ".";
  bool genie_relay = false;
  int threads = 0;
};

void add_common_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_path,
                  "JSON config file; explicit flags override its values");
  cmd->add_option("--scheme", f.scheme,
                  "one of: y, ic, ic_align, ic_af, x, dist_ic, dist_y");
  cmd->add_option("--k", f.users, "number of users (scheme default if 0)");
  cmd->add_option("--n", f.antennas, "relay antennas (scheme default if 0)");
  cmd->add_option("--relays", f.relays, "distributed relay count");
  cmd->add_option("--snr-start", f.snr_start, "grid start [dB]");
  cmd->add_option("--snr-stop", f.snr_stop, "grid stop [dB]");
  cmd->add_option("--snr-step", f.snr_step, "grid step [dB]");
  cmd->add_option("--trials", f.trials, "Monte Carlo trials");
  cmd->add_option("--seed", f.seed, "base RNG seed");
  cmd->add_option("--hmin", f.hmin, "minimum channel magnitude");
  cmd->add_option("--hmax", f.hmax, "maximum channel magnitude");
  cmd->add_option("--out", f.out, "output directory (sweep)");
  cmd->add_flag("--genie-relay", f.genie_relay,
                "relay forwards exact symbols (no forwarded noise)");
  cmd->add_option("--threads", f.threads,
                  "worker cap (RELAYDOF_THREADS also applies)");
}

relaydof::ExperimentConfig build_config(const CLI::App* cmd, const Flags& f) {
  relaydof::ExperimentConfig cfg;
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) {
      throw relaydof::ConfigError("cannot open config file: " + f.config_path);
    }
    relaydof::json j;
    in >> j;
    if (j.contains("scheme")) cfg.scheme = j["scheme"].get<std::string>();
    if (j.contains("k")) cfg.users = j["k"].get<int>();
    if (j.contains("n")) cfg.relay_antennas = j["n"].get<int>();
    if (j.contains("relays")) cfg.relays = j["relays"].get<int>();
    if (j.contains("snr_start")) cfg.snr_start_db = j["snr_start"].get<double>();
    if (j.contains("snr_stop")) cfg.snr_stop_db = j["snr_stop"].get<double>();
    if (j.contains("snr_step")) cfg.snr_step_db = j["snr_step"].get<double>();
    if (j.contains("trials")) cfg.trials = j["trials"].get<int>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("hmin")) cfg.h_min = j["hmin"].get<double>();
    if (j.contains("hmax")) cfg.h_max = j["hmax"].get<double>();
    if (j.contains("out")) cfg.out_dir = j["out"].get<std::string>();
    if (j.contains("genie_relay")) cfg.genie_relay = j["genie_relay"].get<bool>();
    if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
  }
  auto given = [&](const std::string& name) { return cmd->count(name) > 0; };
  if (given("--scheme")) cfg.scheme = f.scheme;
  if (given("--k")) cfg.users = f.users;
  if (given("--n")) cfg.relay_antennas = f.antennas;
  if (given("--relays")) cfg.relays = f.relays;
  if (given("--snr-start")) cfg.snr_start_db = f.snr_start;
  if (given("--snr-stop")) cfg.snr_stop_db = f.snr_stop;
  if (given("--snr-step")) cfg.snr_step_db = f.snr_step;
  if (given("--trials")) cfg.trials = f.trials;
  if (given("--seed")) cfg.seed = f.seed;
  if (given("--hmin")) cfg.h_min = f.hmin;
  if (given("--hmax")) cfg.h_max = f.hmax;
  if (given("--out")) cfg.out_dir = f.out;
  if (given("--genie-relay")) cfg.genie_relay = f.genie_relay;
  if (given("--threads")) cfg.threads = f.threads;
  if (f.config_path.empty() && !given("--scheme")) cfg.scheme = f.scheme;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "relaydof: multi-way relay exchange schemes: verification, sum-rate "
      "sweeps, and the cut-set time-sharing bound"};
  app.require_subcommand(1);

  Flags vf, sf;
  int lp_users = 0;

  CLI::App* verify = app.add_subcommand(
      "verify", "run noise-off algebraic checks over many realizations");
  add_common_flags(verify, vf);

  CLI::App* sweep = app.add_subcommand(
      "sweep", "estimate the sum-rate slope over an SNR grid; writes "
               "sweep.csv, sweep.svg and dof.json");
  add_common_flags(sweep, sf);

  CLI::App* lp = app.add_subcommand(
      "lp", "solve the six-state cut bound for K users");
  lp->add_option("--k", lp_users, "number of users (K >= 2)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify->parsed()) {
      const relaydof::ExperimentConfig cfg = build_config(verify, vf);
      const relaydof::VerifyReport rep = relaydof::run_verify(cfg);
      relaydof::json j = rep.to_json();
      j["scheme"] = cfg.scheme;
      j["seed"] = cfg.seed;
      std::cout << j.dump(2) << "\n";
      if (!rep.passed) {
        std::cerr << "verify failed: " << rep.first_failure << "\n";
        return 1;
      }
      return 0;
    }
    if (sweep->parsed()) {
      const relaydof::ExperimentConfig cfg = build_config(sweep, sf);
      const relaydof::SweepResult res = relaydof::run_sweep(cfg);
      relaydof::json j = to_json(res.estimate);
      j["scheme"] = cfg.scheme;
      j["nominal_dof"] = res.nominal_dof;
      j["csv"] = res.csv_path;
      j["svg"] = res.svg_path;
      j["json"] = res.json_path;
      std::cout << j.dump(2) << "\n";
      if (!res.estimate.valid) {
        std::cerr << "sweep invalid: aborted trials exceed 1%\n";
        return 2;
      }
      return 0;
    }
    if (lp->parsed()) {
      std::cout << relaydof::run_lp(lp_users).dump(2) << "\n";
      return 0;
    }
  } catch (const relaydof::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const relaydof::BadBandError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 70;
  }
  return 0;
}
