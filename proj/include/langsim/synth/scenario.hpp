// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "langsim/core/error.hpp"
#include "langsim/core/types.hpp"
#include "langsim/language/prompt.hpp"
#include "langsim/synth/map.hpp"

namespace langsim {

inline constexpr int kHistorySteps = 2;
inline constexpr int kFutureSteps = 16;

enum class ScriptKind { Follow, LaneChange, Overtake, Yield, Pass, Merge, HeadOn };

inline constexpr std::array<ScriptKind, 7> kAllScripts = {
    ScriptKind::Follow, ScriptKind::LaneChange, ScriptKind::Overtake, ScriptKind::Yield,
    ScriptKind::Pass,   ScriptKind::Merge,      ScriptKind::HeadOn};

inline std::string to_string(ScriptKind k) {
  switch (k) {
    case ScriptKind::Follow: return "follow";
    case ScriptKind::LaneChange: return "lane_change";
    case ScriptKind::Overtake: return "overtake";
    case ScriptKind::Yield: return "yield";
    case ScriptKind::Pass: return "pass";
    case ScriptKind::Merge: return "merge";
    case ScriptKind::HeadOn: return "head_on";
  }
  return "unknown";
}

inline ScriptKind script_from_string(const std::string& s) {
  for (ScriptKind k : kAllScripts) {
    if (to_string(k) == s) return k;
  }
  throw InvalidInput("unknown script kind: " + s);
}

/// Interaction kind a script is designed to produce (for the interest pair, actor first).
inline InteractionKind expected_kind(ScriptKind k) {
  switch (k) {
    case ScriptKind::Follow: return InteractionKind::FollowingStopping;
    case ScriptKind::LaneChange: return InteractionKind::LaneChange;
    case ScriptKind::Overtake: return InteractionKind::Overtaking;
    case ScriptKind::Yield: return InteractionKind::Yielding;
    case ScriptKind::Pass: return InteractionKind::Passing;
    case ScriptKind::Merge: return InteractionKind::Merging;
    case ScriptKind::HeadOn: return InteractionKind::Passing;
  }
  return InteractionKind::Passing;
}

struct Scenario {
  MapGraph map;
  MapParams map_params;
  Trajectory history{1, kHistorySteps, kDefaultDt};
  Trajectory future{1, kFutureSteps, kDefaultDt};
  std::vector<AgentDims> agent_dims;
  ScenarioLabels labels;
  std::pair<int, int> interest_pair{0, 1};
  std::vector<PromptText> prompts;  // per agent; null for unprompted agents
  ScriptKind script = ScriptKind::Follow;
  std::uint64_t seed = 0;

  int agent_count() const { return history.agent_count(); }

  std::vector<AgentState> current_states() const {
    std::vector<AgentState> s;
    for (int i = 0; i < agent_count(); ++i) s.push_back(history.last_state(i));
    return s;
  }

  void validate() const {
    require(history.agent_count() == future.agent_count(), "Scenario: agent count mismatch");
    require(history.dt() == future.dt(), "Scenario: dt mismatch");
    require(static_cast<int>(agent_dims.size()) == agent_count(), "Scenario: agent_dims size");
    require((agent_count() == 1 || interest_pair.first != interest_pair.second) &&
                interest_pair.first >= 0 &&
                interest_pair.second >= 0 && interest_pair.first < agent_count() &&
                interest_pair.second < agent_count(),
            "Scenario: invalid interest pair");
    for (int i = 0; i < agent_count(); ++i) {
      require(future.state(i, 0) == history.last_state(i),
              "Scenario: future must start at the last history state");
    }
  }
};

}  // namespace langsim
