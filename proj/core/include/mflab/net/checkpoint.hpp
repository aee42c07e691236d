#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "mflab/json_io.hpp"
#include "mflab/net/velocity_net.hpp"
#include "mflab/num/adam.hpp"

namespace mflab::net {

inline constexpr int kCheckpointFormatVersion = 1;

struct TrainingMetadata {
  std::int64_t step = 0;
  std::uint64_t seed = 0;
  std::string config_digest;
  Json config = Json::object();  // full experiment config of the producing run
  Json run_state = Json::object();  // trainer bookkeeping needed for an exact resume
};

struct Checkpoint {
  int format_version = kCheckpointFormatVersion;
  NetDims dims;
  TimeEmbedConfig time_cfg;
  NetMode mode = NetMode::fm;
  num::ParamSet params;
  TrainingMetadata meta;
  std::optional<num::AdamState> optimizer;
};

Checkpoint make_checkpoint(const VelocityNet& net, TrainingMetadata meta,
                           std::optional<num::AdamState> optimizer = std::nullopt);
VelocityNet net_from_checkpoint(const Checkpoint& ckpt);

Json checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const Json& j);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Converts an fm checkpoint into an mf network whose interval and end
/// embeddings are both copies of the pretrained time embedding. The trunk is
/// copied verbatim. Throws ValidationError for an mf checkpoint.
VelocityNet duplicate_time_embedding(const Checkpoint& fm_checkpoint);

}  // namespace mflab::net
