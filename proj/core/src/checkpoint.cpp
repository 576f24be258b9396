#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include <json.hpp>

#include "bytes.hpp"
#include "kgamc/error.hpp"
#include "kgamc/trainer.hpp"

namespace kgamc::trainer {
namespace {

constexpr char kCheckpointMagic[4] = {'K', 'G', 'M', 'C'};

using json = nlohmann::ordered_json;

json train_config_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},         {"batch_size", c.batch_size},
          {"lr_msnet", c.lr_msnet},     {"lr_rgcn", c.lr_rgcn},
          {"weight_decay", c.weight_decay}, {"step_epochs", c.step_epochs},
          {"step_factor", c.step_factor}, {"lambda", c.lambda},
          {"d", c.d},                   {"seed", c.seed}};
}

json echo(const ModelState<float>& s) {
  const auto& m = s.msnet_config;
  const auto& r = s.rgcn_config;
  return {
      {"class_names", s.class_names},
      {"train", train_config_json(s.train_config)},
      {"msnet",
       {{"in_channels", m.in_channels},
        {"frame_len", m.frame_len},
        {"stem_channels", m.stem_channels},
        {"branch_channels", m.branch_channels},
        {"kernels", m.kernels},
        {"num_blocks", m.num_blocks},
        {"feature_dim", m.feature_dim},
        {"num_classes", m.num_classes}}},
      {"rgcn",
       {{"in_dim", r.in_dim},
        {"hidden_dim", r.hidden_dim},
        {"out_dim", r.out_dim},
        {"projection_dim", r.projection_dim}}},
      {"epoch", s.epoch},
      {"step", s.step},
  };
}

struct Blob {
  nn::Shape shape;
  std::vector<float> data;
};

void write_blob(detail::ByteWriter& w, const std::string& name, const nn::Tensor<float>& t) {
  w.u16(static_cast<std::uint16_t>(name.size()));
  w.bytes(name.data(), name.size());
  w.u8(static_cast<std::uint8_t>(t.rank()));
  for (auto dim : t.shape) w.u32(static_cast<std::uint32_t>(dim));
  for (float v : t.data) w.f32(v);
}

void restore(const std::string& name, nn::Tensor<float>& target,
             std::map<std::string, Blob>& blobs) {
  const auto it = blobs.find(name);
  if (it == blobs.end()) throw CheckpointError("checkpoint lacks tensor '" + name + "'");
  if (it->second.shape != target.shape) {
    throw CheckpointError("tensor '" + name + "' has shape " + nn::to_string(it->second.shape) +
                          ", model expects " + nn::to_string(target.shape));
  }
  target.data = std::move(it->second.data);
  blobs.erase(it);
}

template <typename Fn>
auto config_field(Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad checkpoint config: ") + e.what());
  }
}

}  // namespace

std::string config_json(const ModelState<float>& state) { return echo(state).dump(); }

std::string epoch_json(const EpochRecord& r) {
  auto number = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json j = {{"epoch", r.epoch},
            {"l_ce", number(r.mean.l_ce)},
            {"l_npair", number(r.mean.l_npair)},
            {"l_p", number(r.mean.l_penalty)},
            {"l_total", number(r.mean.l_total)},
            {"lambda", r.mean.lambda},
            {"train_acc", number(r.train_acc)},
            {"test_acc", number(r.test_acc)},
            {"anchor_mean_cos", number(r.anchor_mean_cos)},
            {"lr_msnet", r.lr_msnet},
            {"lr_rgcn", r.lr_rgcn}};
  return j.dump();
}

std::vector<std::uint8_t> serialize_checkpoint(const ModelState<float>& state) {
  std::vector<std::uint8_t> out;
  detail::ByteWriter w(out);
  w.bytes(kCheckpointMagic, 4);
  w.u16(kCheckpointVersion);
  const auto config = config_json(state);
  w.u32(static_cast<std::uint32_t>(config.size()));
  w.bytes(config.data(), config.size());

  const auto mp = state.msnet_parameters();
  const auto rp = state.rgcn_parameters();
  std::uint32_t count = static_cast<std::uint32_t>(3 * (mp.size() + rp.size()));
  if (state.anchors) ++count;
  w.u32(count);
  auto emit = [&](const nn::ParamList<float>& params, const AdamMoments<float>& moments) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      write_blob(w, params[i].name, params[i].var.value());
      write_blob(w, "adam.m." + params[i].name, moments.m.at(i));
      write_blob(w, "adam.v." + params[i].name, moments.v.at(i));
    }
  };
  emit(mp, state.msnet_moments);
  emit(rp, state.rgcn_moments);
  if (state.anchors) write_blob(w, "anchors", *state.anchors);
  return out;
}

ModelState<float> deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
  try {
    detail::ByteReader r(bytes, "KGMC");
    r.need(4);
    if (std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
      throw CheckpointError("not a KGMC checkpoint (bad magic)");
    }
    r.string(4);
    const auto version = r.u16();
    if (version != kCheckpointVersion) {
      throw CheckpointError("unsupported checkpoint version " + std::to_string(version) +
                            " (expected " + std::to_string(kCheckpointVersion) + ")");
    }
    const auto config_text = r.string(r.u32());
    const json j = config_field([&] { return json::parse(config_text); });

    auto [train_cfg, msnet_cfg, rgcn_cfg, names, epoch, step] = config_field([&] {
      TrainConfig t;
      const auto& jt = j.at("train");
      t.epochs = jt.at("epochs");
      t.batch_size = jt.at("batch_size");
      t.lr_msnet = jt.at("lr_msnet");
      t.lr_rgcn = jt.at("lr_rgcn");
      t.weight_decay = jt.at("weight_decay");
      t.step_epochs = jt.at("step_epochs");
      t.step_factor = jt.at("step_factor");
      t.lambda = jt.at("lambda");
      t.d = jt.at("d");
      t.seed = jt.at("seed");
      msnet::MsnetConfig m;
      const auto& jm = j.at("msnet");
      m.in_channels = jm.at("in_channels");
      m.frame_len = jm.at("frame_len");
      m.stem_channels = jm.at("stem_channels");
      m.branch_channels = jm.at("branch_channels");
      m.kernels = jm.at("kernels").get<std::vector<std::size_t>>();
      m.num_blocks = jm.at("num_blocks");
      m.feature_dim = jm.at("feature_dim");
      m.num_classes = jm.at("num_classes");
      rgcn::RgcnConfig g;
      const auto& jg = j.at("rgcn");
      g.in_dim = jg.at("in_dim");
      g.hidden_dim = jg.at("hidden_dim");
      g.out_dim = jg.at("out_dim");
      g.projection_dim = jg.at("projection_dim");
      return std::tuple{t, m, g, j.at("class_names").get<std::vector<std::string>>(),
                        j.at("epoch").get<std::size_t>(), j.at("step").get<std::size_t>()};
    });

    ModelState<float> state;
    try {
      state = ModelState<float>::initialize(train_cfg, msnet_cfg, rgcn_cfg, std::move(names));
    } catch (const ConfigError& e) {
      throw CheckpointError(std::string("inconsistent checkpoint config: ") + e.what());
    }
    state.epoch = epoch;
    state.step = step;

    std::map<std::string, Blob> blobs;
    const auto count = r.u32();
    for (std::uint32_t b = 0; b < count; ++b) {
      const auto name = r.string(r.u16());
      Blob blob;
      const auto rank = r.u8();
      for (std::uint8_t k = 0; k < rank; ++k) blob.shape.push_back(r.u32());
      const auto n = nn::numel(blob.shape);
      r.need(4 * n);
      blob.data.resize(n);
      for (auto& v : blob.data) v = r.f32();
      if (!blobs.emplace(name, std::move(blob)).second) {
        throw CheckpointError("duplicate tensor '" + name + "' in checkpoint");
      }
    }
    if (r.offset() != bytes.size()) {
      throw CheckpointError(std::to_string(bytes.size() - r.offset()) +
                            " trailing bytes after checkpoint tensors");
    }

    auto load = [&](nn::ParamList<float> params, AdamMoments<float>& moments) {
      for (std::size_t i = 0; i < params.size(); ++i) {
        restore(params[i].name, params[i].var.mutable_value(), blobs);
        restore("adam.m." + params[i].name, moments.m[i], blobs);
        restore("adam.v." + params[i].name, moments.v[i], blobs);
      }
    };
    load(state.msnet_parameters(), state.msnet_moments);
    load(state.rgcn_parameters(), state.rgcn_moments);
    if (blobs.contains("anchors")) {
      nn::Tensor<float> anchors({msnet_cfg.num_classes, msnet_cfg.feature_dim});
      restore("anchors", anchors, blobs);
      state.anchors = std::move(anchors);
    }
    if (!blobs.empty()) {
      throw CheckpointError("checkpoint has unexpected tensor '" + blobs.begin()->first + "'");
    }
    return state;
  } catch (const FormatError& e) {
    throw CheckpointError(std::string(e.what()) + " at byte " + std::to_string(e.offset()));
  }
}

void save_checkpoint(const ModelState<float>& state, const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(state);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

ModelState<float> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace kgamc::trainer
