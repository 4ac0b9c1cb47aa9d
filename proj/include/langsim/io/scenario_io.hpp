// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Line-delimited scenario records. One JSON object per line; the map is stored
// as its layout plus geometric parameters and rebuilt on load.
//
// Units: positions in metres, headings in radians, speeds in m/s,
// accelerations in m/s^2, yaw rates in rad/s, time step in seconds.

#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "langsim/core/error.hpp"
#include "langsim/synth/scenario.hpp"

namespace langsim {

inline constexpr int kScenarioSchemaVersion = 1;

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson trajectory_to_json(const Trajectory& t) {
  ojson j;
  j["dt_s"] = t.dt();
  j["horizon"] = t.horizon();
  ojson agents = ojson::array();
  for (int i = 0; i < t.agent_count(); ++i) {
    ojson a;
    ojson states = ojson::array();
    ojson actions = ojson::array();
    ojson valid = ojson::array();
    for (int s = 0; s <= t.horizon(); ++s) {
      const AgentState& st = t.state(i, s);
      states.push_back({st.x, st.y, st.heading, st.speed});
      valid.push_back(t.valid(i, s) ? 1 : 0);
    }
    for (int s = 0; s < t.horizon(); ++s) actions.push_back({t.action(i, s).accel, t.action(i, s).yaw_rate});
    a["states"] = std::move(states);
    a["actions"] = std::move(actions);
    a["valid"] = std::move(valid);
    agents.push_back(std::move(a));
  }
  j["agents"] = std::move(agents);
  return j;
}

inline Trajectory trajectory_from_json(const nlohmann::json& j) {
  const int horizon = j.at("horizon").get<int>();
  const auto& agents = j.at("agents");
  Trajectory t(static_cast<int>(agents.size()), horizon, j.at("dt_s").get<double>());
  for (int i = 0; i < t.agent_count(); ++i) {
    const auto& a = agents.at(static_cast<size_t>(i));
    const auto& states = a.at("states");
    const auto& actions = a.at("actions");
    const auto& valid = a.at("valid");
    require_shape(static_cast<int>(states.size()) == horizon + 1 &&
                      static_cast<int>(actions.size()) == horizon &&
                      static_cast<int>(valid.size()) == horizon + 1,
                  "trajectory record: length does not match horizon");
    for (int s = 0; s <= horizon; ++s) {
      const auto& v = states.at(static_cast<size_t>(s));
      t.state(i, s) = {v.at(0).get<double>(), v.at(1).get<double>(), v.at(2).get<double>(),
                       v.at(3).get<double>()};
      t.set_valid(i, s, valid.at(static_cast<size_t>(s)).get<int>() != 0);
    }
    for (int s = 0; s < horizon; ++s) {
      const auto& v = actions.at(static_cast<size_t>(s));
      t.action(i, s) = {v.at(0).get<double>(), v.at(1).get<double>()};
    }
  }
  return t;
}

inline ojson map_params_to_json(const MapParams& p) {
  ojson j;
  j["length_m"] = p.length;
  j["lanes"] = p.lanes;
  j["lane_width_m"] = p.lane_width;
  j["arm_m"] = p.arm;
  j["box_half_m"] = p.box_half;
  j["merge_x_m"] = p.merge_x;
  j["ramp_length_m"] = p.ramp_length;
  j["ramp_angle_rad"] = p.ramp_angle;
  return j;
}

inline MapParams map_params_from_json(const nlohmann::json& j) {
  MapParams p;
  p.length = j.at("length_m").get<double>();
  p.lanes = j.at("lanes").get<int>();
  p.lane_width = j.at("lane_width_m").get<double>();
  p.arm = j.at("arm_m").get<double>();
  p.box_half = j.at("box_half_m").get<double>();
  p.merge_x = j.at("merge_x_m").get<double>();
  p.ramp_length = j.at("ramp_length_m").get<double>();
  p.ramp_angle = j.at("ramp_angle_rad").get<double>();
  return p;
}

}  // namespace detail

inline nlohmann::ordered_json scenario_to_json(const Scenario& sc) {
  using detail::ojson;
  ojson j;
  j["schema"] = kScenarioSchemaVersion;
  j["seed"] = sc.seed;
  j["script"] = to_string(sc.script);
  j["layout"] = to_string(sc.map.layout);
  j["map_params"] = detail::map_params_to_json(sc.map_params);
  j["interest_pair"] = {sc.interest_pair.first, sc.interest_pair.second};
  ojson dims = ojson::array();
  for (const AgentDims& d : sc.agent_dims) dims.push_back({{"length_m", d.length}, {"width_m", d.width}});
  j["agent_dims"] = std::move(dims);
  j["history"] = detail::trajectory_to_json(sc.history);
  j["future"] = detail::trajectory_to_json(sc.future);
  ojson tags = ojson::array();
  for (const auto& agent_tags : sc.labels.tags) {
    ojson at = ojson::array();
    for (const BehaviorTag& t : agent_tags) {
      at.push_back({{"kind", tag_name(t.kind)},
                    {"position", lane_pos_word(t.position)},
                    {"to", lane_pos_word(t.to)}});
    }
    tags.push_back(std::move(at));
  }
  j["tags"] = std::move(tags);
  ojson inter = ojson::array();
  for (const InteractionLabel& l : sc.labels.interactions) {
    inter.push_back({{"actor", l.actor}, {"other", l.other}, {"subtype", subtype_info(l.subtype).description}});
  }
  j["interactions"] = std::move(inter);
  ojson prompts = ojson::array();
  for (const PromptText& p : sc.prompts) {
    prompts.push_back({{"target", p.target_agent}, {"text", p.raw}, {"tokens", p.tokens}});
  }
  j["prompts"] = std::move(prompts);
  return j;
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  try {
    const int schema = j.at("schema").get<int>();
    if (schema != kScenarioSchemaVersion) {
      throw InvalidInput("unsupported scenario schema " + std::to_string(schema));
    }
    Scenario sc;
    sc.seed = j.at("seed").get<std::uint64_t>();
    sc.script = script_from_string(j.at("script").get<std::string>());
    sc.map_params = detail::map_params_from_json(j.at("map_params"));
    sc.map = build_map(layout_from_string(j.at("layout").get<std::string>()), sc.map_params);
    sc.interest_pair = {j.at("interest_pair").at(0).get<int>(), j.at("interest_pair").at(1).get<int>()};
    for (const auto& d : j.at("agent_dims")) {
      sc.agent_dims.push_back({d.at("length_m").get<double>(), d.at("width_m").get<double>()});
    }
    sc.history = detail::trajectory_from_json(j.at("history"));
    sc.future = detail::trajectory_from_json(j.at("future"));
    for (const auto& at : j.at("tags")) {
      std::vector<BehaviorTag> v;
      for (const auto& t : at) {
        v.push_back({tag_from_name(t.at("kind").get<std::string>()),
                     lane_pos_from_word(t.at("position").get<std::string>()),
                     lane_pos_from_word(t.at("to").get<std::string>())});
      }
      sc.labels.tags.push_back(std::move(v));
    }
    for (const auto& l : j.at("interactions")) {
      sc.labels.interactions.push_back(make_interaction(
          l.at("actor").get<int>(), l.at("other").get<int>(),
          subtype_from_description(l.at("subtype").get<std::string>())));
    }
    for (const auto& p : j.at("prompts")) {
      PromptText pt;
      pt.target_agent = p.at("target").get<int>();
      pt.raw = p.at("text").get<std::string>();
      pt.tokens = p.at("tokens").get<std::vector<int>>();
      sc.prompts.push_back(std::move(pt));
    }
    sc.validate();
    return sc;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("scenario record: ") + e.what());
  }
}

inline std::string scenario_to_line(const Scenario& sc) { return scenario_to_json(sc).dump(); }

inline void save_scenarios(const std::string& path, const std::vector<Scenario>& data) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw RuntimeFailure("cannot write " + path);
  for (const Scenario& sc : data) f << scenario_to_line(sc) << '\n';
  if (!f) throw RuntimeFailure("write failed: " + path);
}

inline std::vector<Scenario> load_scenarios(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw RuntimeFailure("cannot read " + path);
  std::vector<Scenario> out;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    out.push_back(scenario_from_json(j));
  }
  return out;
}

}  // namespace langsim
