// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "langsim/core/error.hpp"

namespace langsim {

// ---------------------------------------------------------------------------
// Single-agent behaviour tags.

enum class TagKind {
  Parked,
  OffRoad,
  Static,
  MovingSlowly,
  SpeedingUp,
  SlowingDown,
  ConstantSpeed,
  TurningRight,
  TurningLeft,
  GoingStraight,
  CrossingIntersection,
  ApproachingIntersection,
  LanePosition,
  LaneChange,
};

enum class LanePos { Rightmost, Middle, Leftmost };

inline std::string_view lane_pos_word(LanePos p) {
  switch (p) {
    case LanePos::Rightmost: return "rightmost";
    case LanePos::Middle: return "middle";
    case LanePos::Leftmost: return "leftmost";
  }
  return "middle";
}

struct BehaviorTag {
  TagKind kind = TagKind::Static;
  LanePos position = LanePos::Rightmost;  // LanePosition, and LaneChange "from"
  LanePos to = LanePos::Rightmost;        // LaneChange "to"

  bool operator==(const BehaviorTag&) const = default;
};

inline std::string_view tag_name(TagKind k) {
  switch (k) {
    case TagKind::Parked: return "parked";
    case TagKind::OffRoad: return "off_road";
    case TagKind::Static: return "static";
    case TagKind::MovingSlowly: return "moving_slowly";
    case TagKind::SpeedingUp: return "speeding_up";
    case TagKind::SlowingDown: return "slowing_down";
    case TagKind::ConstantSpeed: return "constant_speed";
    case TagKind::TurningRight: return "turning_right";
    case TagKind::TurningLeft: return "turning_left";
    case TagKind::GoingStraight: return "going_straight";
    case TagKind::CrossingIntersection: return "crossing_intersection";
    case TagKind::ApproachingIntersection: return "approaching_intersection";
    case TagKind::LanePosition: return "lane_position";
    case TagKind::LaneChange: return "lane_change";
  }
  return "unknown";
}

inline constexpr std::array<TagKind, 14> kAllTagKinds = {
    TagKind::Parked,        TagKind::OffRoad,       TagKind::Static,
    TagKind::MovingSlowly,  TagKind::SpeedingUp,    TagKind::SlowingDown,
    TagKind::ConstantSpeed, TagKind::TurningRight,  TagKind::TurningLeft,
    TagKind::GoingStraight, TagKind::CrossingIntersection,
    TagKind::ApproachingIntersection, TagKind::LanePosition, TagKind::LaneChange};

inline TagKind tag_from_name(std::string_view s) {
  for (TagKind k : kAllTagKinds) {
    if (tag_name(k) == s) return k;
  }
  throw InvalidInput("unknown behaviour tag: " + std::string(s));
}

inline LanePos lane_pos_from_word(std::string_view s) {
  for (LanePos p : {LanePos::Rightmost, LanePos::Middle, LanePos::Leftmost}) {
    if (lane_pos_word(p) == s) return p;
  }
  throw InvalidInput("unknown lane position: " + std::string(s));
}

// ---------------------------------------------------------------------------
// Agent-agent interactions (vehicle subset of the labelling taxonomy).

enum class InteractionKind { LaneChange, FollowingStopping, Yielding, Passing, Overtaking, Merging };

inline constexpr std::array<InteractionKind, 6> kAllInteractionKinds = {
    InteractionKind::LaneChange, InteractionKind::FollowingStopping, InteractionKind::Yielding,
    InteractionKind::Passing,    InteractionKind::Overtaking,        InteractionKind::Merging};

inline std::string_view kind_name(InteractionKind k) {
  switch (k) {
    case InteractionKind::LaneChange: return "lane_change";
    case InteractionKind::FollowingStopping: return "following_stopping";
    case InteractionKind::Yielding: return "yielding";
    case InteractionKind::Passing: return "passing";
    case InteractionKind::Overtaking: return "overtaking";
    case InteractionKind::Merging: return "merging";
  }
  return "unknown";
}

inline InteractionKind kind_from_name(std::string_view s) {
  for (InteractionKind k : kAllInteractionKinds) {
    if (kind_name(k) == s) return k;
  }
  throw InvalidInput("unknown interaction kind: " + std::string(s));
}

enum class Subtype {
  // LaneChange
  LaneChangeForTurnOrExit,
  LaneChangeForOvertaking,
  LaneChangeAvoidSlowTraffic,
  LaneChangeForMerging,
  LaneChangeWithLeadOrTrail,
  // FollowingStopping
  FollowingLead,
  FollowingSlowLead,
  Tailgating,
  StoppingBehindLead,
  StoppingBehindIntersection,
  // Yielding
  IntersectionYielding,
  YieldingBeforeMerge,
  YieldingToMerging,
  RoundaboutYielding,
  // Passing
  PassingIntersection,
  PassingRoundabout,
  MaintainingSpeed,
  PassingAsLeader,
  // Overtaking
  CarAvoidance,
  StandardOvertaking,
  HighSpeedOvertaking,
  // Merging
  StandardMerge,
  LaneReductionMerge,
  ZipperMerge,
  OnRampMerge,
  LateMerge,
};

struct SubtypeInfo {
  Subtype subtype;
  InteractionKind kind;
  std::string_view description;
  std::string_view templ;  // "{A}" = actor role, "{B}" = other role
};

inline constexpr std::array<SubtypeInfo, 26> kSubtypes = {{
    {Subtype::LaneChangeForTurnOrExit, InteractionKind::LaneChange,
     "Changing lane for turn or exit", "{A} changes lane near {B} to turn or exit"},
    {Subtype::LaneChangeForOvertaking, InteractionKind::LaneChange,
     "Changing lane for overtaking", "{A} changes lane to overtake {B}"},
    {Subtype::LaneChangeAvoidSlowTraffic, InteractionKind::LaneChange,
     "Lane-change for avoiding obstacles or slower traffic",
     "{A} changes lane to avoid the slower {B}"},
    {Subtype::LaneChangeForMerging, InteractionKind::LaneChange, "Lane-change for merging",
     "{A} changes lane to merge near {B}"},
    {Subtype::LaneChangeWithLeadOrTrail, InteractionKind::LaneChange,
     "Changing lane with lead or trail", "{A} changes lane with {B} as lead or trail"},
    {Subtype::FollowingLead, InteractionKind::FollowingStopping, "Following with a lead vehicle",
     "{A} follows {B}"},
    {Subtype::FollowingSlowLead, InteractionKind::FollowingStopping,
     "Following a slow-moving lead", "{A} follows the slow moving {B}"},
    {Subtype::Tailgating, InteractionKind::FollowingStopping, "Tailgating", "{A} tailgates {B}"},
    {Subtype::StoppingBehindLead, InteractionKind::FollowingStopping,
     "Stopping behind a lead vehicle", "{A} stops behind {B}"},
    {Subtype::StoppingBehindIntersection, InteractionKind::FollowingStopping,
     "Stopping behind an intersection", "{A} stops behind {B} before the intersection"},
    {Subtype::IntersectionYielding, InteractionKind::Yielding, "Intersection yielding",
     "{A} yields to {B} at the intersection"},
    {Subtype::YieldingBeforeMerge, InteractionKind::Yielding,
     "Yielding before merging or lane-change", "{A} yields to {B} before merging"},
    {Subtype::YieldingToMerging, InteractionKind::Yielding,
     "Yielding to merging or lane-change cars", "{A} yields to {B} merging into the lane"},
    {Subtype::RoundaboutYielding, InteractionKind::Yielding, "Roundabout yielding",
     "{A} yields to {B} at the roundabout"},
    {Subtype::PassingIntersection, InteractionKind::Passing,
     "Passing through an intersection with yielding vehicles",
     "{A} passes through the intersection while {B} yields"},
    {Subtype::PassingRoundabout, InteractionKind::Passing, "Passing through a roundabout",
     "{A} passes through the roundabout ahead of {B}"},
    {Subtype::MaintainingSpeed, InteractionKind::Passing, "Maintaining speed while driving",
     "{A} maintains speed while passing {B}"},
    {Subtype::PassingAsLeader, InteractionKind::Passing, "Passing as a leading vehicle",
     "{A} passes ahead of {B} as the leading vehicle"},
    {Subtype::CarAvoidance, InteractionKind::Overtaking, "Car avoidance",
     "{A} swerves to avoid {B}"},
    {Subtype::StandardOvertaking, InteractionKind::Overtaking, "Standard overtaking",
     "{A} overtakes {B}"},
    {Subtype::HighSpeedOvertaking, InteractionKind::Overtaking, "High-speed overtaking",
     "{A} overtakes {B} at high speed"},
    {Subtype::StandardMerge, InteractionKind::Merging, "Standard merge",
     "{A} merges onto the main road near {B}"},
    {Subtype::LaneReductionMerge, InteractionKind::Merging, "Lane reduction merge",
     "{A} merges near {B} as the lane ends"},
    {Subtype::ZipperMerge, InteractionKind::Merging, "Zipper merge", "{A} zipper merges with {B}"},
    {Subtype::OnRampMerge, InteractionKind::Merging, "Highway on-ramp accelerating merge",
     "{A} accelerates on the ramp to merge near {B}"},
    {Subtype::LateMerge, InteractionKind::Merging, "Late merge", "{A} merges late near {B}"},
}};

inline const SubtypeInfo& subtype_info(Subtype s) {
  for (const SubtypeInfo& info : kSubtypes) {
    if (info.subtype == s) return info;
  }
  throw InvalidInput("unknown interaction subtype");
}

inline Subtype subtype_from_description(std::string_view d) {
  for (const SubtypeInfo& info : kSubtypes) {
    if (info.description == d) return info.subtype;
  }
  throw InvalidInput("unknown interaction subtype: " + std::string(d));
}

struct InteractionLabel {
  int actor = 0;
  int other = 1;
  InteractionKind kind = InteractionKind::FollowingStopping;
  Subtype subtype = Subtype::FollowingLead;

  bool operator==(const InteractionLabel&) const = default;
};

inline InteractionLabel make_interaction(int actor, int other, Subtype s) {
  require(actor != other, "InteractionLabel: actor and other must differ");
  return {actor, other, subtype_info(s).kind, s};
}

}  // namespace langsim
