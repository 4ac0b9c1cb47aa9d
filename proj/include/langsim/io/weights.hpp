// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Checkpoint container.
//
// Layout (all integers little-endian):
//   "LSWT" | u32 version | u32 header_bytes | header (JSON) | u32 tensor_count |
//   per tensor: u32 name_bytes | name | u32 rows | u32 cols | rows*cols float32 (row-major)

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "langsim/core/error.hpp"
#include "langsim/model/params.hpp"

namespace langsim {

inline constexpr char kWeightsMagic[4] = {'L', 'S', 'W', 'T'};
inline constexpr std::uint32_t kWeightsVersion = 1;

inline nlohmann::ordered_json model_config_to_json(const ModelConfig& c) {
  nlohmann::ordered_json j;
  j["d_model"] = c.d_model;
  j["d_lang"] = c.d_lang;
  j["heads"] = c.heads;
  j["blocks"] = c.blocks;
  j["horizon"] = c.horizon;
  j["history"] = c.history;
  j["step_dim"] = c.step_dim;
  j["k_map"] = c.k_map;
  j["k_nbr"] = c.k_nbr;
  j["max_tokens"] = c.max_tokens;
  j["vocab_size"] = c.vocab_size;
  j["ff_mult"] = c.ff_mult;
  j["lane_spacing"] = c.lane_spacing;
  return j;
}

inline ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
  };
  get("d_model", c.d_model);
  get("d_lang", c.d_lang);
  get("heads", c.heads);
  get("blocks", c.blocks);
  get("horizon", c.horizon);
  get("history", c.history);
  get("step_dim", c.step_dim);
  get("k_map", c.k_map);
  get("k_nbr", c.k_nbr);
  get("max_tokens", c.max_tokens);
  get("vocab_size", c.vocab_size);
  get("ff_mult", c.ff_mult);
  get("lane_spacing", c.lane_spacing);
  c.validate();
  return c;
}

/// Checkpoint metadata carried in the header.
struct CheckpointInfo {
  ModelConfig model;
  int diffusion_steps = 100;  // K the parameters were trained for
  std::string stage = "init"; // init | openloop | retarget | closedloop
};

struct Checkpoint {
  CheckpointInfo info;
  ParamSet params;
};

/// Rounds every parameter to float32 precision (what the container stores).
inline void quantize_to_float(ParamSet& p) {
  for (auto& e : p.entries()) {
    for (Eigen::Index i = 0; i < e.value.size(); ++i) {
      e.value.data()[i] = static_cast<double>(static_cast<float>(e.value.data()[i]));
    }
  }
}

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}

inline std::uint32_t get_u32(const std::string& in, size_t& pos) {
  if (pos + 4 > in.size()) throw RuntimeFailure("weights file truncated");
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + b])) << (8 * b);
  pos += 4;
  return v;
}

}  // namespace detail

inline std::string serialize_checkpoint(const Checkpoint& ck) {
  require(ck.params.all_finite(), "serialize_checkpoint: non-finite parameters");
  nlohmann::ordered_json h;
  h["format"] = "langsim-weights";
  h["model"] = model_config_to_json(ck.info.model);
  h["diffusion_steps"] = ck.info.diffusion_steps;
  h["stage"] = ck.info.stage;
  const std::string header = h.dump();
  std::string out(kWeightsMagic, 4);
  detail::put_u32(out, kWeightsVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(header.size()));
  out += header;
  detail::put_u32(out, static_cast<std::uint32_t>(ck.params.entries().size()));
  for (const auto& e : ck.params.entries()) {
    detail::put_u32(out, static_cast<std::uint32_t>(e.name.size()));
    out += e.name;
    detail::put_u32(out, static_cast<std::uint32_t>(e.value.rows()));
    detail::put_u32(out, static_cast<std::uint32_t>(e.value.cols()));
    for (Eigen::Index i = 0; i < e.value.size(); ++i) {
      detail::put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(e.value.data()[i])));
    }
  }
  return out;
}

inline Checkpoint deserialize_checkpoint(const std::string& in) {
  if (in.size() < 4 || std::memcmp(in.data(), kWeightsMagic, 4) != 0) {
    throw InvalidInput("not a weights file (bad magic)");
  }
  size_t pos = 4;
  const std::uint32_t version = detail::get_u32(in, pos);
  if (version != kWeightsVersion) throw InvalidInput("unsupported weights version " + std::to_string(version));
  const std::uint32_t hlen = detail::get_u32(in, pos);
  if (pos + hlen > in.size()) throw RuntimeFailure("weights file truncated");
  Checkpoint ck;
  try {
    const nlohmann::json h = nlohmann::json::parse(in.substr(pos, hlen));
    ck.info.model = model_config_from_json(h.at("model"));
    ck.info.diffusion_steps = h.at("diffusion_steps").get<int>();
    ck.info.stage = h.at("stage").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("weights header: ") + e.what());
  }
  pos += hlen;
  const std::uint32_t count = detail::get_u32(in, pos);
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::uint32_t nlen = detail::get_u32(in, pos);
    if (pos + nlen > in.size()) throw RuntimeFailure("weights file truncated");
    const std::string name = in.substr(pos, nlen);
    pos += nlen;
    const std::uint32_t rows = detail::get_u32(in, pos);
    const std::uint32_t cols = detail::get_u32(in, pos);
    ad::Mat m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      m.data()[i] = static_cast<double>(std::bit_cast<float>(detail::get_u32(in, pos)));
    }
    ck.params.add(name, std::move(m));
  }
  if (pos != in.size()) throw InvalidInput("weights file has trailing bytes");
  if (!matches_config(ck.params, ck.info.model)) {
    throw InvalidInput("weights file tensors do not match its model config");
  }
  return ck;
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw RuntimeFailure("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw RuntimeFailure("cannot write " + path);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw RuntimeFailure("write failed: " + path);
}

inline void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  write_file(path, serialize_checkpoint(ck));
}

inline Checkpoint load_checkpoint(const std::string& path) { return deserialize_checkpoint(read_file(path)); }

}  // namespace langsim
