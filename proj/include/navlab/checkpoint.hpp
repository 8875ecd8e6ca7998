// Copyright 2026 The navlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "navlab/net.hpp"

namespace navlab {

// Versioned binary checkpoint: magic, format version, NetConfig integers,
// training episode count, then raw little-endian float32 tensors in the
// for_each_tensor order (params, Adam first moments, Adam second moments).
constexpr char kCheckpointMagic[4] = {'N', 'V', 'L', 'C'};
constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  NetParams<float> params;
  AdamState<float> adam;
  std::uint64_t episodes_trained = 0;
};

namespace detail {

inline void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
inline void write_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
inline std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(v)))
    throw std::runtime_error("checkpoint truncated");
  return v;
}
inline std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(v)))
    throw std::runtime_error("checkpoint truncated");
  return v;
}

inline void write_tensors(std::ostream& os, const NetParams<float>& p) {
  for_each_tensor(p, [&](const auto& t) {
    os.write(reinterpret_cast<const char*>(t.data()),
             static_cast<std::streamsize>(t.size() * sizeof(float)));
  });
}

inline void read_tensors(std::istream& is, NetParams<float>& p) {
  for_each_tensor(p, [&](auto& t) {
    if (!is.read(reinterpret_cast<char*>(t.data()),
                 static_cast<std::streamsize>(t.size() * sizeof(float))))
      throw std::runtime_error("checkpoint truncated");
  });
}

}  // namespace detail

inline void checkpoint_save(const Checkpoint& ck, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  os.write(kCheckpointMagic, 4);
  detail::write_u32(os, kCheckpointVersion);
  const NetConfig& c = ck.params.config;
  for (int v : {c.other_obs_dim, c.ego_dim, c.lstm_hidden, c.fc1_width, c.fc2_width,
                c.action_count, c.max_sequence})
    detail::write_u32(os, static_cast<std::uint32_t>(v));
  detail::write_u64(os, ck.episodes_trained);
  detail::write_tensors(os, ck.params);
  detail::write_u64(os, ck.adam.step);
  detail::write_u64(os, ck.adam.rejected);
  detail::write_tensors(os, ck.adam.m);
  detail::write_tensors(os, ck.adam.v);
  if (!os) throw std::runtime_error("checkpoint write failed: " + path);
}

inline Checkpoint checkpoint_load(const std::string& path,
                                  int expected_action_count = static_cast<int>(kActionCount)) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[4] = {};
  if (!is.read(magic, 4) || std::memcmp(magic, kCheckpointMagic, 4) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  const std::uint32_t version = detail::read_u32(is);
  if (version != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  NetConfig cfg;
  cfg.other_obs_dim = static_cast<int>(detail::read_u32(is));
  cfg.ego_dim = static_cast<int>(detail::read_u32(is));
  cfg.lstm_hidden = static_cast<int>(detail::read_u32(is));
  cfg.fc1_width = static_cast<int>(detail::read_u32(is));
  cfg.fc2_width = static_cast<int>(detail::read_u32(is));
  cfg.action_count = static_cast<int>(detail::read_u32(is));
  cfg.max_sequence = static_cast<int>(detail::read_u32(is));
  cfg.validate();
  if (expected_action_count > 0 && cfg.action_count != expected_action_count)
    throw std::runtime_error("checkpoint action_count " + std::to_string(cfg.action_count) +
                             " does not match current action set of " +
                             std::to_string(expected_action_count));

  Checkpoint ck;
  ck.episodes_trained = detail::read_u64(is);
  ck.params = init_params<float>(cfg, 0);  // allocates the right shapes
  detail::read_tensors(is, ck.params);
  ck.adam = AdamState<float>::make(ck.params);
  ck.adam.step = detail::read_u64(is);
  ck.adam.rejected = detail::read_u64(is);
  detail::read_tensors(is, ck.adam.m);
  detail::read_tensors(is, ck.adam.v);
  return ck;
}

}  // namespace navlab
