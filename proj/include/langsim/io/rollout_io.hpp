// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Rollout records (one JSON object per scenario and line) and metric reports.

#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "langsim/eval/metrics.hpp"
#include "langsim/io/scenario_io.hpp"
#include "langsim/sim/rollout.hpp"

namespace langsim {

inline constexpr int kRolloutSchemaVersion = 1;

/// Rollouts of one scenario plus the identifiers needed to pair them back up.
struct RolloutFileRecord {
  int scenario_index = 0;
  SimMode mode = SimMode::Text;
  ScenarioRollouts data;
};

inline nlohmann::ordered_json rollout_to_json(const RolloutFileRecord& r) {
  nlohmann::ordered_json j;
  j["schema"] = kRolloutSchemaVersion;
  j["scenario_index"] = r.scenario_index;
  j["scenario_seed"] = r.data.scenario_seed;
  j["mode"] = to_string(r.mode);
  j["adversary"] = r.data.adversary;
  j["target"] = r.data.target;
  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  for (const RolloutRecord& rec : r.data.rollouts) {
    nlohmann::ordered_json run;
    run["executed"] = detail::trajectory_to_json(rec.executed);
    nlohmann::ordered_json plans = nlohmann::ordered_json::array();
    for (const PlanRecord& p : rec.plans) {
      nlohmann::ordered_json pj;
      pj["t"] = p.t;
      pj["selected"] = p.selected;
      pj["noncollision_costs"] = p.costs;
      std::vector<int> ab(p.guidance_aborted.begin(), p.guidance_aborted.end());
      pj["guidance_aborted"] = ab;
      nlohmann::ordered_json samples = nlohmann::ordered_json::array();
      for (const Trajectory& s : p.samples) samples.push_back(detail::trajectory_to_json(s));
      pj["samples"] = std::move(samples);
      plans.push_back(std::move(pj));
    }
    run["plans"] = std::move(plans);
    runs.push_back(std::move(run));
  }
  j["rollouts"] = std::move(runs);
  return j;
}

inline RolloutFileRecord rollout_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema").get<int>() != kRolloutSchemaVersion) throw InvalidInput("unsupported rollout schema");
    RolloutFileRecord r;
    r.scenario_index = j.at("scenario_index").get<int>();
    r.data.scenario_seed = j.at("scenario_seed").get<std::uint64_t>();
    r.mode = sim_mode_from_string(j.at("mode").get<std::string>());
    r.data.adversary = j.at("adversary").get<int>();
    r.data.target = j.at("target").get<int>();
    for (const auto& run : j.at("rollouts")) {
      RolloutRecord rec;
      rec.executed = detail::trajectory_from_json(run.at("executed"));
      for (const auto& pj : run.at("plans")) {
        PlanRecord p;
        p.t = pj.at("t").get<int>();
        p.selected = pj.at("selected").get<int>();
        p.costs = pj.at("noncollision_costs").get<std::vector<double>>();
        for (int v : pj.at("guidance_aborted").get<std::vector<int>>()) p.guidance_aborted.push_back(v ? 1 : 0);
        for (const auto& s : pj.at("samples")) p.samples.push_back(detail::trajectory_from_json(s));
        rec.plans.push_back(std::move(p));
      }
      r.data.rollouts.push_back(std::move(rec));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("rollout record: ") + e.what());
  }
}

inline std::vector<RolloutFileRecord> load_rollouts(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw RuntimeFailure("cannot read " + path);
  std::vector<RolloutFileRecord> out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput(path + ": " + e.what());
    }
    out.push_back(rollout_from_json(j));
  }
  return out;
}

inline nlohmann::ordered_json report_to_json(const MetricReport& r) {
  nlohmann::ordered_json j;
  j["scenarios"] = r.scenario_count;
  j["rollouts_per_scenario"] = r.sample_count;
  j["composite"] = r.composite;
  j["kinematic"] = r.kinematic;
  j["interactive"] = r.interactive;
  j["map"] = r.map;
  j["min_ade_m"] = r.min_ade;
  j["collision_rate"] = r.collision_rate;
  nlohmann::ordered_json stats = nlohmann::ordered_json::array();
  for (size_t k = 0; k < r.names.size(); ++k) {
    stats.push_back({{"name", r.names[k]}, {"score", r.stat_scores[k]}, {"scenarios", r.stat_counts[k]}});
  }
  j["statistics"] = std::move(stats);
  return j;
}

}  // namespace langsim
