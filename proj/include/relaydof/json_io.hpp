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

#ifndef RELAYDOF_JSON_IO_HPP
#define RELAYDOF_JSON_IO_HPP

#include <cstdio>
#include <string>

#include <json.hpp>

#include "relaydof/channel.hpp"
#include "relaydof/cmatrix.hpp"
#include "relaydof/dof.hpp"

namespace relaydof {

using json = nlohmann::json;

// complex numbers serialize as [re, im]
inline json to_json(const cxd& z) { return json::array({z.real(), z.imag()}); }

inline cxd complex_from_json(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

inline json to_json(const CMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline CMatrix cmatrix_from_json(const json& j) {
  const std::size_t rows = j.size();
  const std::size_t cols = j.at(0).size();
  CMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t c = 0; c < cols; ++c)
      m(i, c) = complex_from_json(j.at(i).at(c));
  return m;
}

inline json to_json(const ChannelSet& cs) {
  json j;
  j["users"] = cs.topology.num_users;
  j["relay_kind"] =
      cs.topology.relay_kind == RelayKind::colocated ? "colocated"
                                                     : "distributed";
  j["relay_dim"] = cs.topology.relay_dim;
  j["slot_count"] = cs.slot_count;
  j["h_min"] = cs.h_min;
  j["h_max"] = cs.h_max;
  json slots = json::array();
  for (const auto& sc : cs.slots) {
    json s;
    s["user_user"] = to_json(sc.user_user);
    json up = json::array(), down = json::array();
    for (const auto& u : sc.uplink) up.push_back(to_json(u));
    for (const auto& d : sc.downlink) down.push_back(to_json(d));
    s["uplink"] = std::move(up);
    s["downlink"] = std::move(down);
    slots.push_back(std::move(s));
  }
  j["slots"] = std::move(slots);
  return j;
}

inline ChannelSet channel_set_from_json(const json& j) {
  ChannelSet cs;
  const int users = j.at("users").get<int>();
  const int dim = j.at("relay_dim").get<int>();
  cs.topology = j.at("relay_kind").get<std::string>() == "colocated"
                    ? Topology::colocated(users, dim)
                    : Topology::distributed(users, dim);
  cs.slot_count = j.at("slot_count").get<int>();
  cs.h_min = j.at("h_min").get<double>();
  cs.h_max = j.at("h_max").get<double>();
  for (const auto& s : j.at("slots")) {
    SlotChannels sc{cmatrix_from_json(s.at("user_user")), {}, {}};
    for (const auto& u : s.at("uplink")) sc.uplink.push_back(cmatrix_from_json(u));
    for (const auto& d : s.at("downlink"))
      sc.downlink.push_back(cmatrix_from_json(d));
    cs.slots.push_back(std::move(sc));
  }
  return cs;
}

inline json to_json(const DofEstimate& est) {
  json j;
  j["snr_grid_db"] = est.snr_grid_db;
  j["mean_rates"] = est.mean_rates;
  j["stderr_rates"] = est.stderr_rates;
  j["slope"] = est.slope;
  j["slope_stderr"] = est.slope_stderr;
  j["trials"] = est.trials;
  j["aborted_trials"] = est.aborted_trials;
  j["valid"] = est.valid;
  j["seed"] = est.seed;
  return j;
}

/// CSV block for a sweep: header plus one row per grid point, fixed
/// formatting so identical estimates serialize byte-identically.
inline std::string sweep_csv(const DofEstimate& est) {
  std::string out = "snr_db,mean_rate,stderr\n";
  char buf[128];
  for (std::size_t i = 0; i < est.snr_grid_db.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.6g,%.12g,%.12g\n", est.snr_grid_db[i],
                  est.mean_rates[i], est.stderr_rates[i]);
    out += buf;
  }
  return out;
}

}  // namespace relaydof

#endif  // RELAYDOF_JSON_IO_HPP
