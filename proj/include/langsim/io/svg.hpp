// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Top-down SVG scene drawing.

#pragma once

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "langsim/core/geometry.hpp"
#include "langsim/synth/scenario.hpp"

namespace langsim {

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline const char* agent_color(int i) {
  static const char* kColors[] = {"#1f3b8c", "#c0392b", "#27ae60", "#8e44ad", "#d35400", "#16a085", "#7f8c8d"};
  return kColors[i % 7];
}

}  // namespace detail

/// Map polylines, one rectangle group per agent (fading trail over time) and the
/// prompts as a caption. `traj` may be null for a map-only drawing.
inline std::string render_svg(const Scenario& sc, const Trajectory* traj) {
  double lo_x = 1e300, lo_y = 1e300, hi_x = -1e300, hi_y = -1e300;
  auto grow = [&](const Vec2& p) {
    lo_x = std::min(lo_x, p.x());
    lo_y = std::min(lo_y, p.y());
    hi_x = std::max(hi_x, p.x());
    hi_y = std::max(hi_y, p.y());
  };
  for (const Lane& l : sc.map.lanes) {
    for (const Vec2& p : l.centerline) grow(p);
  }
  for (const RoadEdge& e : sc.map.edges) {
    for (const Vec2& p : e.points) grow(p);
  }
  if (lo_x > hi_x) lo_x = lo_y = -10.0, hi_x = hi_y = 10.0;
  const double margin = 5.0;
  const double scale = 4.0;
  const double w = (hi_x - lo_x + 2 * margin) * scale;
  const double h = (hi_y - lo_y + 2 * margin) * scale;
  const double caption_h = 16.0 * (1 + static_cast<double>(sc.prompts.size()));
  auto X = [&](double x) { return detail::fmt((x - lo_x + margin) * scale); };
  auto Y = [&](double y) { return detail::fmt((hi_y - y + margin) * scale); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::fmt(w) << "\" height=\""
    << detail::fmt(h + caption_h) << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  s << "<g id=\"map\">\n";
  for (const RoadEdge& e : sc.map.edges) {
    s << "<polyline fill=\"none\" stroke=\"#333333\" stroke-width=\"2\" points=\"";
    for (const Vec2& p : e.points) s << X(p.x()) << ',' << Y(p.y()) << ' ';
    s << "\"/>\n";
  }
  for (const Lane& l : sc.map.lanes) {
    s << "<polyline fill=\"none\" stroke=\"#bbbbbb\" stroke-dasharray=\"6,4\" stroke-width=\"1\" points=\"";
    for (const Vec2& p : l.centerline) s << X(p.x()) << ',' << Y(p.y()) << ' ';
    s << "\"/>\n";
  }
  s << "</g>\n";
  if (traj != nullptr && traj->agent_count() > 0) {
    const int T = traj->horizon();
    for (int i = 0; i < traj->agent_count(); ++i) {
      s << "<g class=\"agent\" id=\"agent" << i << "\" fill=\"" << detail::agent_color(i) << "\">\n";
      const AgentDims dims = i < static_cast<int>(sc.agent_dims.size()) ? sc.agent_dims[i] : AgentDims{};
      for (int t = 0; t <= T; ++t) {
        if (!traj->valid(i, t)) continue;
        const double opacity = 0.15 + 0.85 * (T == 0 ? 1.0 : static_cast<double>(t) / T);
        const auto c = OrientedBox::of(traj->state(i, t), dims).corners();
        s << "<polygon fill-opacity=\"" << detail::fmt(opacity) << "\" points=\"";
        for (const Vec2& p : c) s << X(p.x()) << ',' << Y(p.y()) << ' ';
        s << "\"/>\n";
      }
      s << "</g>\n";
    }
  }
  s << "<g id=\"caption\" font-family=\"monospace\" font-size=\"12\">\n";
  double y = h + 14.0;
  for (const PromptText& p : sc.prompts) {
    const std::string text = p.is_null() ? "(no prompt)" : p.raw;
    s << "<text x=\"6\" y=\"" << detail::fmt(y) << "\" fill=\"" << detail::agent_color(p.target_agent)
      << "\">agent " << p.target_agent << ": " << detail::xml_escape(text) << "</text>\n";
    y += 16.0;
  }
  s << "</g>\n</svg>\n";
  return s.str();
}

}  // namespace langsim
