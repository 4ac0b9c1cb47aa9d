// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Differentiable interaction costs on unrolled joint trajectories.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "langsim/core/dynamics.hpp"
#include "langsim/core/error.hpp"
#include "langsim/core/types.hpp"

namespace langsim {

/// Agent footprint as equally spaced disks along the length axis.
struct DiskSet {
  std::vector<double> offsets;  // longitudinal offsets of the centres (agent frame)
  double radius = 1.0;
};

inline DiskSet disk_decomposition(double length, double width, int count = 3) {
  require(length > 0.0 && width > 0.0 && count >= 1, "disk_decomposition: invalid dimensions");
  DiskSet d;
  d.radius = 0.5 * width;
  if (length < width || count == 1) {
    d.offsets = {0.0};
    return d;
  }
  const double half = 0.5 * (length - width);
  for (int k = 0; k < count; ++k) d.offsets.push_back(-half + 2.0 * half * k / (count - 1));
  return d;
}

inline std::vector<DiskSet> disk_sets(const std::vector<AgentDims>& dims, int count = 3) {
  std::vector<DiskSet> out;
  out.reserve(dims.size());
  for (const AgentDims& d : dims) out.push_back(disk_decomposition(d.length, d.width, count));
  return out;
}

/// Adversarial collision cost: minus the summed centre distance over t = 1..T.
inline double collision_cost(const Trajectory& traj, int adv, int target) {
  require(adv != target && adv >= 0 && target >= 0 && adv < traj.agent_count() &&
              target < traj.agent_count(),
          "collision_cost: invalid agent ids");
  double j = 0.0;
  for (int t = 1; t <= traj.horizon(); ++t) {
    j -= (traj.state(adv, t).position() - traj.state(target, t).position()).norm();
  }
  return j;
}

/// dJ/d p_adv(t) for t = 0..T (entry 0 is zero); zero where the centres coincide.
inline std::vector<Vec2> collision_cost_grad(const Trajectory& traj, int adv, int target) {
  require(adv != target && adv >= 0 && target >= 0 && adv < traj.agent_count() &&
              target < traj.agent_count(),
          "collision_cost_grad: invalid agent ids");
  std::vector<Vec2> g(static_cast<size_t>(traj.horizon() + 1), Vec2::Zero());
  for (int t = 1; t <= traj.horizon(); ++t) {
    const Vec2 d = traj.state(adv, t).position() - traj.state(target, t).position();
    const double n = d.norm();
    if (n >= 1e-9) g[static_cast<size_t>(t)] = -d / n;
  }
  return g;
}

namespace detail {

struct PairContact {
  double value = 0.0;  // J_pair
  int di = 0;          // arg-min disk indices
  int dj = 0;
  double d = 0.0;
};

inline Vec2 disk_center(const AgentState& s, double offset) {
  return {s.x + offset * std::cos(s.heading), s.y + offset * std::sin(s.heading)};
}

inline PairContact pair_contact(const AgentState& a, const DiskSet& da, const AgentState& b,
                                const DiskSet& db) {
  PairContact c;
  c.d = kInf;
  for (size_t p = 0; p < da.offsets.size(); ++p) {
    const Vec2 ca = disk_center(a, da.offsets[p]);
    for (size_t q = 0; q < db.offsets.size(); ++q) {
      const double d = (ca - disk_center(b, db.offsets[q])).norm();
      if (d < c.d) {
        c.d = d;
        c.di = static_cast<int>(p);
        c.dj = static_cast<int>(q);
      }
    }
  }
  const double r = da.radius + db.radius;
  c.value = c.d <= r ? 1.0 - c.d / r : 0.0;
  return c;
}

}  // namespace detail

/// Overlap penalty between two agents at one instant, in [0, 1].
inline double pairwise_overlap(const AgentState& a, const DiskSet& da, const AgentState& b,
                               const DiskSet& db) {
  return detail::pair_contact(a, da, b, db).value;
}

enum class PairAggregation { Cap, Max };

/// (1/N^2) sum over ordered pairs i != j of min(1, sum_t J_pair), or max(1, .) for the
/// literal variant. Timesteps t_from..T are included.
inline double no_collision_loss(const Trajectory& traj, const std::vector<DiskSet>& disks,
                                PairAggregation agg = PairAggregation::Cap, int t_from = 0) {
  const int n = traj.agent_count();
  require_shape(static_cast<int>(disks.size()) == n, "no_collision_loss: disk set count");
  if (n < 2) return 0.0;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      double s = 0.0;
      for (int t = t_from; t <= traj.horizon(); ++t) {
        if (!traj.valid(i, t) || !traj.valid(j, t)) continue;
        s += detail::pair_contact(traj.state(i, t), disks[i], traj.state(j, t), disks[j]).value;
      }
      total += agg == PairAggregation::Cap ? std::min(1.0, s) : std::max(1.0, s);
    }
  }
  return total / (static_cast<double>(n) * n);
}

/// Gradient of the capped no-collision loss w.r.t. every state (x, y, heading).
/// Saturated pairs (sum > 1) contribute nothing.
inline std::vector<std::vector<StateGrad>> no_collision_loss_grad(
    const Trajectory& traj, const std::vector<DiskSet>& disks, int t_from = 0) {
  const int n = traj.agent_count();
  require_shape(static_cast<int>(disks.size()) == n, "no_collision_loss_grad: disk set count");
  std::vector<std::vector<StateGrad>> g(static_cast<size_t>(n),
                                        std::vector<StateGrad>(traj.horizon() + 1));
  if (n < 2) return g;
  const double scale = 1.0 / (static_cast<double>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      double s = 0.0;
      for (int t = t_from; t <= traj.horizon(); ++t) {
        if (!traj.valid(i, t) || !traj.valid(j, t)) continue;
        s += detail::pair_contact(traj.state(i, t), disks[i], traj.state(j, t), disks[j]).value;
      }
      if (s > 1.0) continue;
      for (int t = t_from; t <= traj.horizon(); ++t) {
        if (!traj.valid(i, t) || !traj.valid(j, t)) continue;
        const AgentState& a = traj.state(i, t);
        const AgentState& b = traj.state(j, t);
        const detail::PairContact c = detail::pair_contact(a, disks[i], b, disks[j]);
        if (c.value <= 0.0 || c.d < 1e-9) continue;
        const double r = disks[i].radius + disks[j].radius;
        const double oa = disks[i].offsets[c.di];
        const double ob = disks[j].offsets[c.dj];
        const Vec2 u = (detail::disk_center(a, oa) - detail::disk_center(b, ob)) / c.d;
        const Vec2 gc = -scale / r * u;  // dJ/d centre of agent i's disk
        StateGrad& ga = g[i][t];
        ga.x += gc.x();
        ga.y += gc.y();
        ga.heading += gc.dot(Vec2(-oa * std::sin(a.heading), oa * std::cos(a.heading)));
        StateGrad& gb = g[j][t];
        gb.x -= gc.x();
        gb.y -= gc.y();
        gb.heading -= gc.dot(Vec2(-ob * std::sin(b.heading), ob * std::cos(b.heading)));
      }
    }
  }
  return g;
}

}  // namespace langsim
