// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Closed-vocabulary prompts. Each conditioned agent gets its own sentence in
// which it is called "target agent" and everyone else "other agentN", numbered
// by first appearance.

#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "langsim/core/error.hpp"
#include "langsim/synth/label_types.hpp"

namespace langsim {

inline constexpr int kMaxOtherRoles = 8;

struct PromptText {
  std::vector<int> tokens;  // empty = null prompt
  std::string raw;
  int target_agent = 0;

  bool is_null() const { return tokens.empty(); }
  bool operator==(const PromptText&) const = default;
};

struct ScenarioLabels {
  std::vector<std::vector<BehaviorTag>> tags;  // per agent
  std::vector<InteractionLabel> interactions;

  bool operator==(const ScenarioLabels&) const = default;
};

inline std::string tag_phrase(const BehaviorTag& t) {
  switch (t.kind) {
    case TagKind::Parked: return "parked";
    case TagKind::OffRoad: return "off the road";
    case TagKind::Static: return "static";
    case TagKind::MovingSlowly: return "moving slowly";
    case TagKind::SpeedingUp: return "speeding up";
    case TagKind::SlowingDown: return "slowing down";
    case TagKind::ConstantSpeed: return "moving at a constant speed";
    case TagKind::TurningRight: return "turning right";
    case TagKind::TurningLeft: return "turning left";
    case TagKind::GoingStraight: return "going straight";
    case TagKind::CrossingIntersection: return "crossing the intersection";
    case TagKind::ApproachingIntersection: return "approaching the intersection";
    case TagKind::LanePosition:
      return "in the " + std::string(lane_pos_word(t.position)) + " lane";
    case TagKind::LaneChange:
      return "changing from the " + std::string(lane_pos_word(t.position)) + " lane to the " +
             std::string(lane_pos_word(t.to)) + " lane";
  }
  throw InvalidInput("tag_phrase: unknown tag");
}

inline std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    for (size_t i = 0; i < tokens_.size(); ++i) {
      require(!tokens_[i].empty(), "Vocabulary: empty token");
      require(index_.emplace(tokens_[i], static_cast<int>(i)).second,
              "Vocabulary: duplicate token " + tokens_[i]);
    }
  }

  /// The closed vocabulary covering every sentence compose_prompt can produce.
  static Vocabulary standard() {
    std::vector<std::string> words;
    std::unordered_map<std::string, bool> seen;
    auto add = [&](std::string_view text) {
      for (std::string& w : split_words(text)) {
        if (seen.emplace(w, true).second) words.push_back(std::move(w));
      }
    };
    add("target other agent and is");
    for (int k = 1; k <= kMaxOtherRoles; ++k) add("agent" + std::to_string(k));
    for (const SubtypeInfo& info : kSubtypes) add(info.templ);
    for (TagKind k : kAllTagKinds) {
      BehaviorTag t{k, LanePos::Rightmost, LanePos::Leftmost};
      add(tag_phrase(t));
    }
    for (LanePos p : {LanePos::Rightmost, LanePos::Middle, LanePos::Leftmost}) add(lane_pos_word(p));
    std::vector<std::string> clean;
    for (std::string& w : words) {
      if (w != "{A}" && w != "{B}") clean.push_back(std::move(w));
    }
    return Vocabulary(std::move(clean));
  }

  size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& token(int id) const {
    require(id >= 0 && id < static_cast<int>(tokens_.size()), "Vocabulary: token id out of range");
    return tokens_[static_cast<size_t>(id)];
  }
  bool contains(const std::string& w) const { return index_.count(w) != 0; }
  int id(const std::string& w) const {
    auto it = index_.find(w);
    if (it == index_.end()) throw InvalidInput("token not in vocabulary: " + w);
    return it->second;
  }

  std::vector<int> tokenize(std::string_view raw) const {
    std::vector<int> ids;
    for (const std::string& w : split_words(raw)) ids.push_back(id(w));
    return ids;
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write vocabulary file " + path);
    for (const std::string& t : tokens_) out << t << '\n';
  }

  static Vocabulary load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw RuntimeFailure("cannot read vocabulary file " + path);
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) tokens.push_back(line);
    }
    return Vocabulary(std::move(tokens));
  }

  bool operator==(const Vocabulary& o) const { return tokens_ == o.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

namespace detail {

class RoleNamer {
 public:
  explicit RoleNamer(int target) : target_(target) {}
  std::string operator()(int agent) {
    if (agent == target_) return "target agent";
    auto it = numbers_.find(agent);
    if (it == numbers_.end()) {
      const int n = static_cast<int>(numbers_.size()) + 1;
      require(n <= kMaxOtherRoles, "compose_prompt: too many other agents in one prompt");
      it = numbers_.emplace(agent, n).first;
    }
    return "other agent" + std::to_string(it->second);
  }

 private:
  int target_;
  std::map<int, int> numbers_;
};

inline std::string instantiate(std::string_view templ, const std::string& a, const std::string& b) {
  std::string out(templ);
  auto replace = [&out](const std::string& key, const std::string& value) {
    const size_t pos = out.find(key);
    if (pos != std::string::npos) out.replace(pos, key.size(), value);
  };
  // Both placeholders are resolved by the caller in order of appearance.
  replace("{A}", a);
  replace("{B}", b);
  return out;
}

}  // namespace detail

/// Renders the prompt for `target`: the interaction clauses the target takes
/// part in, followed by the target's behaviour tags. No clauses → null prompt.
inline PromptText compose_prompt(const ScenarioLabels& labels, int target, const Vocabulary& vocab,
                                 bool include_tags = true) {
  const int n = static_cast<int>(labels.tags.size());
  require(target >= 0 && (n == 0 || target < n), "compose_prompt: target agent out of range");
  detail::RoleNamer name(target);
  std::vector<std::string> clauses;
  for (const InteractionLabel& l : labels.interactions) {
    require(l.actor != l.other, "compose_prompt: actor equals other");
    require(n == 0 || (l.actor < n && l.other < n && l.actor >= 0 && l.other >= 0),
            "compose_prompt: label references an invalid agent");
    if (l.actor != target && l.other != target) continue;
    require(subtype_info(l.subtype).kind == l.kind, "compose_prompt: subtype inconsistent with kind");
    const std::string_view templ = subtype_info(l.subtype).templ;
    const bool a_first = templ.find("{A}") < templ.find("{B}");
    std::string ra, rb;
    if (a_first) {
      ra = name(l.actor);
      rb = name(l.other);
    } else {
      rb = name(l.other);
      ra = name(l.actor);
    }
    clauses.push_back(detail::instantiate(templ, ra, rb));
  }
  if (include_tags && target < n && !labels.tags[static_cast<size_t>(target)].empty()) {
    std::string tags = "target agent is ";
    bool first = true;
    for (const BehaviorTag& t : labels.tags[static_cast<size_t>(target)]) {
      if (!first) tags += " and ";
      tags += tag_phrase(t);
      first = false;
    }
    clauses.push_back(std::move(tags));
  }
  PromptText p;
  p.target_agent = target;
  for (size_t i = 0; i < clauses.size(); ++i) {
    if (i > 0) p.raw += " and ";
    p.raw += clauses[i];
  }
  p.tokens = vocab.tokenize(p.raw);
  return p;
}

}  // namespace langsim
