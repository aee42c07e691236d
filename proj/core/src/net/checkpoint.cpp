#include "mflab/net/checkpoint.hpp"

namespace mflab::net {

namespace {

Json dims_to_json(const NetDims& d) {
  return Json{{"data_dim", d.data_dim}, {"cond_dim", d.cond_dim}, {"hidden_dim", d.hidden_dim}, {"depth", d.depth}};
}

Json time_to_json(const TimeEmbedConfig& c) {
  return Json{{"feature_dim", c.feature_dim}, {"min_freq", c.min_freq}, {"max_freq", c.max_freq}};
}

}  // namespace

Checkpoint make_checkpoint(const VelocityNet& net, TrainingMetadata meta, std::optional<num::AdamState> optimizer) {
  Checkpoint c;
  c.dims = net.dims();
  c.time_cfg = net.time_config();
  c.mode = net.mode();
  c.params = net.params();
  c.meta = std::move(meta);
  c.optimizer = std::move(optimizer);
  return c;
}

VelocityNet net_from_checkpoint(const Checkpoint& ckpt) {
  return VelocityNet(ckpt.dims, ckpt.time_cfg, ckpt.mode, ckpt.params);
}

Json checkpoint_to_json(const Checkpoint& ckpt) {
  Json j;
  j["format"] = "mflab.checkpoint";
  j["format_version"] = ckpt.format_version;
  j["mode"] = std::string(to_string(ckpt.mode));
  j["dims"] = dims_to_json(ckpt.dims);
  j["time_embed"] = time_to_json(ckpt.time_cfg);
  j["params"] = params_to_json(ckpt.params);
  j["metadata"] = Json{{"step", ckpt.meta.step},
                       {"mode", std::string(to_string(ckpt.mode))},
                       {"seed", ckpt.meta.seed},
                       {"config_digest", ckpt.meta.config_digest},
                       {"config", ckpt.meta.config},
                       {"run_state", ckpt.meta.run_state}};
  if (ckpt.optimizer) {
    j["optimizer"] = Json{{"kind", "adam"},
                          {"step", ckpt.optimizer->step},
                          {"m", params_to_json(ckpt.optimizer->m)},
                          {"v", params_to_json(ckpt.optimizer->v)}};
  }
  return j;
}

Checkpoint checkpoint_from_json(const Json& j) {
  try {
    if (j.value("format", std::string()) != "mflab.checkpoint") throw ValidationError("not an mflab checkpoint");
    Checkpoint c;
    c.format_version = j.at("format_version").get<int>();
    if (c.format_version != kCheckpointFormatVersion)
      throw ValidationError("unsupported checkpoint format_version " + std::to_string(c.format_version));
    c.mode = parse_mode(j.at("mode").get<std::string>());
    const Json& d = j.at("dims");
    c.dims = NetDims{d.at("data_dim").get<std::size_t>(), d.at("cond_dim").get<std::size_t>(),
                     d.at("hidden_dim").get<std::size_t>(), d.at("depth").get<std::size_t>()};
    const Json& te = j.at("time_embed");
    c.time_cfg = TimeEmbedConfig{te.at("feature_dim").get<std::size_t>(), te.at("min_freq").get<double>(),
                                 te.at("max_freq").get<double>()};
    c.params = params_from_json(j.at("params"), "params");
    const Json& m = j.at("metadata");
    c.meta.step = m.at("step").get<std::int64_t>();
    c.meta.seed = m.at("seed").get<std::uint64_t>();
    c.meta.config_digest = m.at("config_digest").get<std::string>();
    c.meta.config = m.value("config", Json::object());
    c.meta.run_state = m.value("run_state", Json::object());
    if (j.contains("optimizer")) {
      const Json& o = j.at("optimizer");
      num::AdamState s;
      s.step = o.at("step").get<std::int64_t>();
      s.m = params_from_json(o.at("m"), "optimizer.m");
      s.v = params_from_json(o.at("v"), "optimizer.v");
      c.optimizer = std::move(s);
    }
    // Shape validation happens in the VelocityNet constructor.
    (void)net_from_checkpoint(c);
    return c;
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  write_text_file(path, checkpoint_to_json(ckpt).dump() + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return checkpoint_from_json(read_json_file(path)); }

VelocityNet duplicate_time_embedding(const Checkpoint& fm_checkpoint) {
  if (fm_checkpoint.mode != NetMode::fm) {
    throw ValidationError("duplicate_time_embedding: checkpoint was trained in mf mode; an fm checkpoint is required");
  }
  num::ParamSet params;
  for (const auto& [name, t] : fm_checkpoint.params) {
    if (name.starts_with("time_embed.")) {
      const std::string leaf = name.substr(std::string("time_embed").size());
      params.emplace("interval_embed" + leaf, t);
      params.emplace("end_embed" + leaf, t);
    } else {
      params.emplace(name, t);
    }
  }
  return VelocityNet(fm_checkpoint.dims, fm_checkpoint.time_cfg, NetMode::mf, std::move(params));
}

}  // namespace mflab::net
