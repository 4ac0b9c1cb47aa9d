// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>

#include "langsim/core/error.hpp"
#include "langsim/core/types.hpp"

namespace langsim {

inline void check_frame(const Pose2& f) {
  require(std::isfinite(f.x) && std::isfinite(f.y) && std::isfinite(f.heading),
          "frame: non-finite pose");
}

inline Vec2 to_local(const Vec2& p, const Pose2& frame) {
  check_frame(frame);
  require(p.allFinite(), "to_local: non-finite point");
  const double c = std::cos(frame.heading);
  const double s = std::sin(frame.heading);
  const double dx = p.x() - frame.x;
  const double dy = p.y() - frame.y;
  return {c * dx + s * dy, -s * dx + c * dy};
}

inline Vec2 to_global(const Vec2& p, const Pose2& frame) {
  check_frame(frame);
  require(p.allFinite(), "to_global: non-finite point");
  const double c = std::cos(frame.heading);
  const double s = std::sin(frame.heading);
  return {frame.x + c * p.x() - s * p.y(), frame.y + s * p.x() + c * p.y()};
}

/// Rotates a direction vector into the frame (no translation).
inline Vec2 dir_to_local(const Vec2& d, const Pose2& frame) {
  const double c = std::cos(frame.heading);
  const double s = std::sin(frame.heading);
  return {c * d.x() + s * d.y(), -s * d.x() + c * d.y()};
}

inline AgentState to_local(const AgentState& st, const Pose2& frame) {
  require(st.finite(), "to_local: non-finite state");
  const Vec2 p = to_local(st.position(), frame);
  return {p.x(), p.y(), wrap_angle(st.heading - frame.heading), st.speed};
}

inline AgentState to_global(const AgentState& st, const Pose2& frame) {
  require(st.finite(), "to_global: non-finite state");
  const Vec2 p = to_global(Vec2{st.x, st.y}, frame);
  return {p.x(), p.y(), wrap_angle(st.heading + frame.heading), st.speed};
}

inline Pose2 to_local(const Pose2& pose, const Pose2& frame) {
  const Vec2 p = to_local(Vec2{pose.x, pose.y}, frame);
  return {p.x(), p.y(), wrap_angle(pose.heading - frame.heading)};
}

inline Pose2 to_global(const Pose2& pose, const Pose2& frame) {
  const Vec2 p = to_global(Vec2{pose.x, pose.y}, frame);
  return {p.x(), p.y(), wrap_angle(pose.heading + frame.heading)};
}

}  // namespace langsim
