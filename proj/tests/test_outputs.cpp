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

#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "relaydof/experiment.hpp"
#include "relaydof/json_io.hpp"
#include "relaydof/svg.hpp"

using namespace relaydof;

TEST_CASE("channel sets survive a JSON round trip") {
  for (auto topo : {Topology::colocated(4, 3), Topology::distributed(3, 3)}) {
    const ChannelSet a = draw_realization(topo, 5, 123);
    const json j = to_json(a);
    const ChannelSet b = channel_set_from_json(j);
    REQUIRE(b.slot_count == a.slot_count);
    REQUIRE(b.topology.num_users == a.topology.num_users);
    REQUIRE(b.topology.relay_dim == a.topology.relay_dim);
    REQUIRE((b.topology.relay_kind == a.topology.relay_kind));
    CHECK(b.h_min == a.h_min);
    CHECK(b.h_max == a.h_max);
    for (int n = 0; n < a.slot_count; ++n) {
      CHECK((a.slots[n].user_user - b.slots[n].user_user).max_abs() == 0.0);
      for (int k = 0; k < topo.num_users; ++k) {
        CHECK((a.slots[n].uplink[k] - b.slots[n].uplink[k]).max_abs() == 0.0);
        CHECK((a.slots[n].downlink[k] - b.slots[n].downlink[k]).max_abs() ==
              0.0);
      }
    }
  }
}

TEST_CASE("sweep CSV has a header and one row per grid point") {
  DofEstimate est;
  est.snr_grid_db = {50, 55, 60};
  est.mean_rates = {1.0, 2.0, 3.0};
  est.stderr_rates = {0.1, 0.1, 0.1};
  const std::string csv = sweep_csv(est);
  std::istringstream in(csv);
  std::string line;
  int rows = 0;
  REQUIRE(std::getline(in, line));
  CHECK(line == "snr_db,mean_rate,stderr");
  while (std::getline(in, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 3);
}

TEST_CASE("line charts are well-formed XML-ish SVG") {
  const std::string svg = svg_line_chart("t", "x", "y", {1, 2, 3},
                                         {0.5, 0.7, 0.9}, "note");
  CHECK(svg.rfind("<?xml version=\"1.0\"", 0) == 0);
  CHECK(svg.find("<svg xmlns=\"http://www.w3.org/2000/svg\"") !=
        std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
  // every opened tag family is closed or self-closed
  for (const char* tag : {"<text", "<line", "<circle", "<rect"}) {
    std::size_t open = 0, at = 0;
    while ((at = svg.find(tag, at)) != std::string::npos) {
      ++open;
      at += 2;
    }
    CHECK(open > 0);
  }
  CHECK(svg.find('&') == std::string::npos);
}

TEST_CASE("scheme bindings validate their parameter space") {
  ExperimentConfig cfg;
  cfg.scheme = "y";
  cfg.users = 4;
  cfg.relay_antennas = 2;  // below K-1
  CHECK_THROWS_AS(bind_scheme(cfg), ConfigError);

  cfg.relay_antennas = 3;
  CHECK_NOTHROW(bind_scheme(cfg));

  cfg.scheme = "dist_y";
  cfg.users = 0;
  cfg.relay_antennas = 0;
  cfg.relays = 2;
  CHECK_THROWS_AS(bind_scheme(cfg), ConfigError);
  cfg.relays = 3;
  CHECK_NOTHROW(bind_scheme(cfg));

  cfg.scheme = "nope";
  CHECK_THROWS_AS(bind_scheme(cfg), ConfigError);

  cfg.scheme = "x";
  cfg.relays = 0;
  cfg.users = 5;
  CHECK_THROWS_AS(bind_scheme(cfg), ConfigError);
  cfg.users = 0;
  CHECK_NOTHROW(bind_scheme(cfg));
}

TEST_CASE("snr grids validate and enumerate inclusively") {
  ExperimentConfig cfg;
  cfg.snr_start_db = 50;
  cfg.snr_stop_db = 90;
  cfg.snr_step_db = 5;
  CHECK(snr_grid(cfg).size() == 9);
  cfg.snr_step_db = -1;
  CHECK_THROWS_AS(snr_grid(cfg), ConfigError);
  cfg.snr_step_db = 30;
  CHECK_THROWS_AS(snr_grid(cfg), ConfigError);  // only 2 points
}

TEST_CASE("noise-off verification passes for every scheme") {
  for (const char* name :
       {"y", "ic", "ic_align", "ic_af", "x", "dist_ic", "dist_y"}) {
    const std::string scheme = name;
    ExperimentConfig cfg;
    cfg.scheme = scheme;
    cfg.trials = 50;
    cfg.seed = 5;
    const VerifyReport rep = run_verify(cfg);
    INFO("scheme " << scheme << " failed: " << rep.first_failure);
    CHECK(rep.passed);
    CHECK(rep.max_construction_residual < 1e-9);
    CHECK(rep.max_decode_error < 1e-8);
    if (scheme == "dist_y") {
      CHECK(rep.nullspace_dim_counts.count(3) == 1);
    }
  }
}

TEST_CASE("sweeps write the three artifacts") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "relaydof_test_sweep";
  fs::remove_all(dir);
  ExperimentConfig cfg;
  cfg.scheme = "dist_ic";
  cfg.trials = 10;
  cfg.seed = 9;
  cfg.snr_start_db = 50;
  cfg.snr_stop_db = 70;
  cfg.snr_step_db = 10;
  cfg.out_dir = dir.string();
  const SweepResult res = run_sweep(cfg);
  CHECK(fs::exists(res.csv_path));
  CHECK(fs::exists(res.svg_path));
  CHECK(fs::exists(res.json_path));
  std::ifstream jf(res.json_path);
  json j;
  jf >> j;
  CHECK(j["scheme"] == "dist_ic");
  CHECK(j["snr_grid_db"].size() == 3);
  CHECK(j.contains("slope"));
  fs::remove_all(dir);
}
