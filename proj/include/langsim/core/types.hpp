// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Core>

#include "langsim/core/error.hpp"

namespace langsim {

using Vec2 = Eigen::Vector2d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Simulation step used throughout (seconds).
inline constexpr double kDefaultDt = 0.5;

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  double r = std::remainder(a, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

/// Unicycle state: position (m), heading (rad, wrapped), speed (m/s, >= 0).
struct AgentState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double speed = 0.0;

  Vec2 position() const { return {x, y}; }
  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(heading) && std::isfinite(speed);
  }
  bool operator==(const AgentState&) const = default;
};

/// Unicycle control: longitudinal acceleration (m/s^2) and yaw rate (rad/s).
struct Action {
  double accel = 0.0;
  double yaw_rate = 0.0;

  bool finite() const { return std::isfinite(accel) && std::isfinite(yaw_rate); }
  bool operator==(const Action&) const = default;
};

struct ActionBounds {
  double max_accel = 8.0;
  double max_yaw_rate = 1.5;

  Action clamp(const Action& a) const {
    return {std::clamp(a.accel, -max_accel, max_accel),
            std::clamp(a.yaw_rate, -max_yaw_rate, max_yaw_rate)};
  }
};

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;

  static Pose2 of(const AgentState& s) { return {s.x, s.y, s.heading}; }
};

struct AgentDims {
  double length = 4.5;
  double width = 2.0;
  bool operator==(const AgentDims&) const = default;
};

/// Time-indexed joint trajectory: N agents, T steps, (T+1) states and T actions per agent.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(int agents, int horizon, double dt)
      : agents_(agents), horizon_(horizon), dt_(dt) {
    require(agents >= 0 && horizon >= 0, "Trajectory: negative shape");
    require(dt > 0.0 && std::isfinite(dt), "Trajectory: dt must be positive");
    states_.resize(static_cast<size_t>(agents) * (horizon + 1));
    actions_.resize(static_cast<size_t>(agents) * horizon);
    valid_.assign(states_.size(), 1);
  }

  int agent_count() const { return agents_; }
  int horizon() const { return horizon_; }
  double dt() const { return dt_; }

  AgentState& state(int agent, int t) { return states_[state_index(agent, t)]; }
  const AgentState& state(int agent, int t) const { return states_[state_index(agent, t)]; }
  Action& action(int agent, int t) { return actions_[action_index(agent, t)]; }
  const Action& action(int agent, int t) const { return actions_[action_index(agent, t)]; }
  bool valid(int agent, int t) const { return valid_[state_index(agent, t)] != 0; }
  void set_valid(int agent, int t, bool v) { valid_[state_index(agent, t)] = v ? 1 : 0; }

  const AgentState& last_state(int agent) const { return state(agent, horizon_); }

  bool operator==(const Trajectory&) const = default;

 private:
  size_t state_index(int agent, int t) const {
    return static_cast<size_t>(agent) * (horizon_ + 1) + t;
  }
  size_t action_index(int agent, int t) const { return static_cast<size_t>(agent) * horizon_ + t; }

  int agents_ = 0;
  int horizon_ = 0;
  double dt_ = kDefaultDt;
  std::vector<AgentState> states_;
  std::vector<Action> actions_;
  std::vector<std::uint8_t> valid_;
};

}  // namespace langsim
