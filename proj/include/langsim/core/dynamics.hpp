// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Unicycle dynamics, batch rollout, inverse dynamics and the reverse-mode
// adjoint of the rollout (used by guidance and closed-loop training).

#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "langsim/core/error.hpp"
#include "langsim/core/types.hpp"

namespace langsim {

/// Explicit Euler step; position advances with the time-t heading and speed.
inline AgentState step_unicycle(const AgentState& s, const Action& a, double dt) {
  if (!s.finite() || !a.finite() || !std::isfinite(dt)) {
    throw InvalidInput("step_unicycle: non-finite input");
  }
  require(dt > 0.0, "step_unicycle: dt must be positive");
  AgentState n;
  n.x = s.x + s.speed * std::cos(s.heading) * dt;
  n.y = s.y + s.speed * std::sin(s.heading) * dt;
  n.heading = wrap_angle(s.heading + a.yaw_rate * dt);
  n.speed = std::max(0.0, s.speed + a.accel * dt);
  return n;
}

/// Action grid indexed [agent][t].
using ActionGrid = std::vector<std::vector<Action>>;

inline Trajectory rollout(std::span<const AgentState> initial, const ActionGrid& actions,
                          double dt) {
  require_shape(initial.size() == actions.size(), "rollout: agent count mismatch");
  const int n = static_cast<int>(initial.size());
  const int horizon = n == 0 ? 0 : static_cast<int>(actions.front().size());
  for (const auto& row : actions) {
    require_shape(static_cast<int>(row.size()) == horizon, "rollout: ragged action grid");
  }
  Trajectory traj(n, horizon, dt);
  for (int i = 0; i < n; ++i) {
    traj.state(i, 0) = initial[i];
    for (int t = 0; t < horizon; ++t) {
      traj.action(i, t) = actions[i][t];
      traj.state(i, t + 1) = step_unicycle(traj.state(i, t), actions[i][t], dt);
    }
  }
  return traj;
}

/// Recovers the actions that reproduce a state sequence; clamped to `bounds`.
inline std::vector<Action> inverse_dynamics(std::span<const AgentState> states, double dt,
                                            const ActionBounds& bounds = {}) {
  require(dt > 0.0, "inverse_dynamics: dt must be positive");
  std::vector<Action> out;
  if (states.size() < 2) return out;
  out.reserve(states.size() - 1);
  for (size_t t = 0; t + 1 < states.size(); ++t) {
    Action a{(states[t + 1].speed - states[t].speed) / dt,
             wrap_angle(states[t + 1].heading - states[t].heading) / dt};
    out.push_back(bounds.clamp(a));
  }
  return out;
}

/// Gradient of a scalar with respect to one state.
struct StateGrad {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double speed = 0.0;
};

/// Reverse-mode adjoint of `rollout` for one agent.
///
/// `states` are the forward states (T+1), `actions` the applied actions (T),
/// `state_grads` the upstream gradient on every state (T+1; entry 0 is ignored
/// because the initial state is not a function of the actions). Returns dJ/d action.
/// When `initial_grad` is given it receives dJ/d states[0], including state_grads[0].
inline std::vector<Action> rollout_vjp(std::span<const AgentState> states,
                                       std::span<const Action> actions,
                                       std::span<const StateGrad> state_grads, double dt,
                                       StateGrad* initial_grad = nullptr) {
  const size_t horizon = actions.size();
  require_shape(states.size() == horizon + 1 && state_grads.size() == horizon + 1,
                "rollout_vjp: shape mismatch");
  std::vector<Action> grads(horizon);
  StateGrad g = horizon > 0 ? state_grads[horizon] : StateGrad{};
  for (size_t t = horizon; t-- > 0;) {
    const AgentState& s = states[t];
    const double c = std::cos(s.heading);
    const double sn = std::sin(s.heading);
    const bool speed_active = s.speed + actions[t].accel * dt > 0.0;
    grads[t].accel = speed_active ? g.speed * dt : 0.0;
    grads[t].yaw_rate = g.heading * dt;
    StateGrad prev;
    prev.x = g.x;
    prev.y = g.y;
    prev.heading = g.heading + g.x * (-s.speed * sn * dt) + g.y * (s.speed * c * dt);
    prev.speed = g.x * c * dt + g.y * sn * dt + (speed_active ? g.speed : 0.0);
    const StateGrad& up = state_grads[t];
    g = {prev.x + up.x, prev.y + up.y, prev.heading + up.heading, prev.speed + up.speed};
  }
  if (initial_grad != nullptr) {
    *initial_grad = horizon > 0 ? g : (state_grads.empty() ? StateGrad{} : state_grads[0]);
  }
  return grads;
}

}  // namespace langsim
