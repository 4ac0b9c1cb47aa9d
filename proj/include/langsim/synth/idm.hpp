// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>

#include "langsim/core/error.hpp"
#include "langsim/core/types.hpp"

namespace langsim {

struct IdmParams {
  double v0 = 15.0;        // desired speed (m/s)
  double headway = 1.5;    // desired time headway (s)
  double a = 1.5;          // maximum acceleration (m/s^2)
  double b = 2.0;          // comfortable deceleration (m/s^2)
  double s0 = 2.0;         // jam distance (m)
  double delta = 4.0;      // acceleration exponent
};

/// Intelligent driver model acceleration, clamped to the action bounds.
/// A non-positive gap returns the emergency brake -max_accel.
inline double idm_accel(double gap, double v, double v_lead, const IdmParams& p,
                        const ActionBounds& bounds = {}) {
  require(std::isfinite(gap) && std::isfinite(v) && std::isfinite(v_lead),
          "idm_accel: non-finite input");
  require(p.v0 > 0.0 && p.a > 0.0 && p.b > 0.0, "idm_accel: invalid parameters");
  if (gap <= 0.0) return -bounds.max_accel;
  const double dv = v - v_lead;
  const double s_star = p.s0 + std::max(0.0, v * p.headway + v * dv / (2.0 * std::sqrt(p.a * p.b)));
  const double acc = p.a * (1.0 - std::pow(v / p.v0, p.delta) - (s_star / gap) * (s_star / gap));
  return std::clamp(acc, -bounds.max_accel, bounds.max_accel);
}

}  // namespace langsim
