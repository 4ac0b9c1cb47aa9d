// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Per-agent scene features expressed in each agent's own frame.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "langsim/core/frames.hpp"
#include "langsim/core/types.hpp"
#include "langsim/model/ad.hpp"
#include "langsim/model/params.hpp"
#include "langsim/synth/map.hpp"

namespace langsim {

inline constexpr double kPosScale = 20.0;
inline constexpr double kSpeedScale = 10.0;
inline constexpr double kRelClip = 5.0;

struct SceneFeatures {
  ad::Mat features;                // N x F
  ad::Mat rel;                     // (N*N) x 5, row i*N+j: agent j seen from agent i
  std::vector<std::uint8_t> flagged;  // agents without a valid current state
  int agents = 0;
};

namespace detail {

inline double quantize(double v) { return std::round(v * 1e6); }

}  // namespace detail

/// Relative pose of `other` in the frame of `self`.
inline void relative_features(const AgentState& self, const AgentState& other, double* out) {
  const Pose2 f = Pose2::of(self);
  const Vec2 p = to_local(other.position(), f);
  const double dh = wrap_angle(other.heading - self.heading);
  out[0] = std::clamp(p.x() / kPosScale, -kRelClip, kRelClip);
  out[1] = std::clamp(p.y() / kPosScale, -kRelClip, kRelClip);
  out[2] = std::cos(dh);
  out[3] = std::sin(dh);
  out[4] = std::min(p.norm() / kPosScale, kRelClip);
}

/// Builds encoder inputs from the observed window (last state = current).
/// `drop_history[i]` blanks agent i's past states and raises its dropout flag.
inline SceneFeatures scene_features(const Trajectory& history, const std::vector<LanePoint>& lanes,
                                    const ModelConfig& c,
                                    const std::vector<std::uint8_t>* drop_history = nullptr) {
  require_shape(history.horizon() == c.history, "scene_features: history length mismatch");
  const int n = history.agent_count();
  require(n >= 1, "scene_features: no agents");
  if (drop_history != nullptr) {
    require_shape(static_cast<int>(drop_history->size()) == n, "scene_features: dropout mask size");
  }
  const int H = c.history;
  SceneFeatures sf;
  sf.agents = n;
  sf.features = ad::Mat::Zero(n, c.feature_dim());
  sf.rel = ad::Mat::Zero(static_cast<Eigen::Index>(n) * n, ModelConfig::kRelDim);
  sf.flagged.assign(static_cast<size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    if (!history.valid(i, H) || !history.state(i, H).finite()) sf.flagged[i] = 1;
  }

  using Key = std::array<double, 5>;
  std::vector<std::pair<Key, int>> order(lanes.size());
  for (int i = 0; i < n; ++i) {
    if (sf.flagged[i]) continue;
    const AgentState& cur = history.state(i, H);
    const Pose2 frame = Pose2::of(cur);
    auto row = sf.features.row(i);
    int col = 0;
    const bool drop = drop_history != nullptr && (*drop_history)[i] != 0;
    for (int t = 0; t <= H; ++t, col += 5) {
      if ((drop && t < H) || !history.valid(i, t)) continue;
      const AgentState s = to_local(history.state(i, t), frame);
      row[col] = s.x / kPosScale;
      row[col + 1] = s.y / kPosScale;
      row[col + 2] = std::cos(s.heading);
      row[col + 3] = std::sin(s.heading);
      row[col + 4] = s.speed / kSpeedScale;
    }
    row[col++] = drop ? 1.0 : 0.0;

    // Ties are broken in the agent frame so the selection is invariant to rigid motion.
    for (size_t k = 0; k < lanes.size(); ++k) {
      const Vec2 p = to_local(lanes[k].position, frame);
      const Vec2 d = dir_to_local(lanes[k].direction, frame);
      order[k] = {Key{detail::quantize(p.squaredNorm()), detail::quantize(p.x()), detail::quantize(p.y()),
                      detail::quantize(d.x()), detail::quantize(d.y())},
                  static_cast<int>(k)};
    }
    const size_t km = std::min(lanes.size(), static_cast<size_t>(c.k_map));
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(km), order.end());
    for (size_t k = 0; k < km; ++k) {
      const LanePoint& lp = lanes[static_cast<size_t>(order[k].second)];
      const Vec2 p = to_local(lp.position, frame);
      const Vec2 d = dir_to_local(lp.direction, frame);
      row[col + 4 * static_cast<int>(k)] = p.x() / kPosScale;
      row[col + 4 * static_cast<int>(k) + 1] = p.y() / kPosScale;
      row[col + 4 * static_cast<int>(k) + 2] = d.x();
      row[col + 4 * static_cast<int>(k) + 3] = d.y();
    }
    col += 4 * c.k_map;

    std::vector<std::pair<double, int>> nbr;
    for (int j = 0; j < n; ++j) {
      if (j == i || sf.flagged[j]) continue;
      nbr.push_back({(history.state(j, H).position() - cur.position()).squaredNorm(), j});
    }
    std::sort(nbr.begin(), nbr.end());
    for (int k = 0; k < std::min(static_cast<int>(nbr.size()), c.k_nbr); ++k) {
      const AgentState o = to_local(history.state(nbr[k].second, H), frame);
      row[col + 6 * k] = o.x / kPosScale;
      row[col + 6 * k + 1] = o.y / kPosScale;
      row[col + 6 * k + 2] = std::cos(o.heading);
      row[col + 6 * k + 3] = std::sin(o.heading);
      row[col + 6 * k + 4] = o.speed / kSpeedScale;
      row[col + 6 * k + 5] = 1.0;
    }
  }

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (sf.flagged[i] || sf.flagged[j]) continue;
      double r[ModelConfig::kRelDim];
      relative_features(history.state(i, H), history.state(j, H), r);
      for (int q = 0; q < ModelConfig::kRelDim; ++q) sf.rel(i * n + j, q) = r[q];
    }
  }
  return sf;
}

}  // namespace langsim
