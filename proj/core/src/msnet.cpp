#include "kgamc/msnet.hpp"

#include <random>
#include <string>

#include "kgamc/error.hpp"
#include "kgamc/nn/ops.hpp"
#include "kgamc/parallel.hpp"

namespace kgamc::msnet {
namespace {

constexpr std::size_t kStemKernel = 3;
constexpr std::size_t kStemStride = 2;

template <typename T>
nn::Var<T> conv_weight(std::size_t out, std::size_t in, std::size_t k, std::mt19937_64& rng) {
  return nn::parameter(nn::glorot_uniform<T>({out, in, k}, in * k, out * k, rng));
}

template <typename T>
nn::Var<T> zeros(std::size_t n) {
  return nn::parameter(nn::Tensor<T>({n}));
}

}  // namespace

void MsnetConfig::validate() const {
  if (in_channels == 0 || stem_channels == 0 || branch_channels == 0 || feature_dim == 0 ||
      num_classes == 0 || num_blocks == 0 || kernels.empty()) {
    throw ConfigError("msnet dimensions must be positive");
  }
  std::size_t len = frame_len;
  for (std::size_t b = 0; b < num_blocks; ++b) {
    if (len < 4) {
      throw ConfigError("frame_len " + std::to_string(frame_len) + " too short for " +
                        std::to_string(num_blocks) + " multi-scale blocks");
    }
    len = (len + 1) / 2;
  }
}

template <typename T>
MsnetParams<T> MsnetParams<T>::init(const MsnetConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(derive_seed(seed, 0x4d534e));
  MsnetParams p;
  std::size_t channels = cfg.in_channels;
  for (std::size_t b = 0; b < cfg.num_blocks; ++b) {
    BlockParams<T> block;
    block.stem_w = conv_weight<T>(cfg.stem_channels, channels, kStemKernel, rng);
    block.stem_b = zeros<T>(cfg.stem_channels);
    for (auto k : cfg.kernels) {
      BranchParams<T> br;
      br.reduce_w = conv_weight<T>(cfg.branch_channels, cfg.stem_channels, 1, rng);
      br.reduce_b = zeros<T>(cfg.branch_channels);
      br.conv_w = conv_weight<T>(cfg.branch_channels, cfg.branch_channels, k, rng);
      br.conv_b = zeros<T>(cfg.branch_channels);
      block.branches.push_back(std::move(br));
    }
    p.blocks.push_back(std::move(block));
    channels = cfg.block_out_channels();
  }
  p.fc_w = nn::parameter(nn::glorot_uniform<T>({channels, cfg.feature_dim}, channels,
                                               cfg.feature_dim, rng));
  p.fc_b = zeros<T>(cfg.feature_dim);
  return p;
}

template <typename T>
nn::ParamList<T> MsnetParams<T>::parameters() const {
  nn::ParamList<T> out;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const std::string prefix = "msnet.block" + std::to_string(b + 1) + ".";
    out.push_back({prefix + "stem.weight", blocks[b].stem_w});
    out.push_back({prefix + "stem.bias", blocks[b].stem_b});
    for (std::size_t k = 0; k < blocks[b].branches.size(); ++k) {
      const auto& br = blocks[b].branches[k];
      const std::string bp = prefix + "branch" + std::to_string(k) + ".";
      out.push_back({bp + "reduce.weight", br.reduce_w});
      out.push_back({bp + "reduce.bias", br.reduce_b});
      out.push_back({bp + "conv.weight", br.conv_w});
      out.push_back({bp + "conv.bias", br.conv_b});
    }
  }
  out.push_back({"msnet.fc.weight", fc_w});
  out.push_back({"msnet.fc.bias", fc_b});
  return out;
}

template <typename T>
ClassifierParams<T> ClassifierParams<T>::init(const MsnetConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, 0x434c53));
  ClassifierParams p;
  p.w = nn::parameter(nn::glorot_uniform<T>({cfg.feature_dim, cfg.num_classes}, cfg.feature_dim,
                                            cfg.num_classes, rng));
  p.b = nn::parameter(nn::Tensor<T>({cfg.num_classes}));
  return p;
}

template <typename T>
nn::ParamList<T> ClassifierParams<T>::parameters() const {
  return {{"classifier.weight", w}, {"classifier.bias", b}};
}

template <typename T>
nn::Var<T> multiscale_block(const nn::Var<T>& x, const BlockParams<T>& block) {
  if (x.shape().back() < 4) {
    throw ShapeError("multiscale_block: time axis of " + nn::to_string(x.shape()) +
                     " shorter than 4");
  }
  const auto stem = nn::leaky_relu(nn::conv1d(x, block.stem_w, block.stem_b, kStemStride, true));
  std::vector<nn::Var<T>> outputs;
  outputs.reserve(block.branches.size());
  for (const auto& br : block.branches) {
    const auto reduced = nn::leaky_relu(nn::conv1d(stem, br.reduce_w, br.reduce_b, 1, true));
    outputs.push_back(nn::leaky_relu(nn::conv1d(reduced, br.conv_w, br.conv_b, 1, true)));
  }
  return nn::concat(outputs, 0);
}

template <typename T>
nn::Var<T> msnet_forward(const nn::Var<T>& x, const MsnetParams<T>& params) {
  if (x.shape().size() != 3) {
    throw ShapeError("msnet_forward: expected [C, N, L] input, got " + nn::to_string(x.shape()));
  }
  nn::Var<T> h = x;
  for (const auto& block : params.blocks) h = multiscale_block(h, block);
  const auto pooled = nn::global_avg_pool(h);
  return nn::linear(pooled, params.fc_w, params.fc_b);
}

template <typename T>
nn::Var<T> classify(const nn::Var<T>& features, const ClassifierParams<T>& params) {
  return nn::linear(features, params.w, params.b);
}

template <typename T>
nn::Tensor<T> frames_to_input(std::span<const SignalFrame> frames,
                              std::span<const std::size_t> indices, std::size_t frame_len) {
  const std::size_t n = indices.empty() ? frames.size() : indices.size();
  nn::Tensor<T> x({2, n, frame_len});
  for (std::size_t k = 0; k < n; ++k) {
    const auto& f = frames[indices.empty() ? k : indices[k]];
    if (f.length() != frame_len) {
      throw ShapeError("frame of length " + std::to_string(f.length()) + ", model expects " +
                       std::to_string(frame_len));
    }
    for (std::size_t row = 0; row < 2; ++row) {
      T* dst = x.data.data() + (row * n + k) * frame_len;
      const float* src = f.iq.data() + row * frame_len;
      for (std::size_t t = 0; t < frame_len; ++t) dst[t] = static_cast<T>(src[t]);
    }
  }
  return x;
}

#define KGAMC_INSTANTIATE_MSNET(T)                                                             \
  template struct MsnetParams<T>;                                                              \
  template struct ClassifierParams<T>;                                                         \
  template nn::Var<T> multiscale_block(const nn::Var<T>&, const BlockParams<T>&);              \
  template nn::Var<T> msnet_forward(const nn::Var<T>&, const MsnetParams<T>&);                 \
  template nn::Var<T> classify(const nn::Var<T>&, const ClassifierParams<T>&);                 \
  template nn::Tensor<T> frames_to_input(std::span<const SignalFrame>,                         \
                                         std::span<const std::size_t>, std::size_t);

KGAMC_INSTANTIATE_MSNET(float)
KGAMC_INSTANTIATE_MSNET(double)

}  // namespace kgamc::msnet
