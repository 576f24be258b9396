#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kgamc/dataset.hpp"
#include "kgamc/nn/init.hpp"
#include "kgamc/nn/tensor.hpp"

// Multi-scale 1-D CNN signal feature extractor and the affine classifier head.
namespace kgamc::msnet {

struct MsnetConfig {
  std::size_t in_channels = 2;
  std::size_t frame_len = 128;
  std::size_t stem_channels = 32;
  std::size_t branch_channels = 16;
  std::vector<std::size_t> kernels{1, 3, 5, 7, 9};
  std::size_t num_blocks = 2;
  std::size_t feature_dim = 128;  // d
  std::size_t num_classes = 10;   // M

  std::size_t block_out_channels() const { return kernels.size() * branch_channels; }
  void validate() const;
};

template <typename T>
struct BranchParams {
  nn::Var<T> reduce_w, reduce_b;  // 1x1: stem -> branch channels
  nn::Var<T> conv_w, conv_b;      // k x 1: branch -> branch channels
};

template <typename T>
struct BlockParams {
  nn::Var<T> stem_w, stem_b;  // 3x1, stride 2
  std::vector<BranchParams<T>> branches;
};

template <typename T>
struct MsnetParams {
  std::vector<BlockParams<T>> blocks;
  nn::Var<T> fc_w, fc_b;  // pooled channels -> d

  static MsnetParams init(const MsnetConfig& cfg, std::uint64_t seed);
  nn::ParamList<T> parameters() const;
};

template <typename T>
struct ClassifierParams {
  nn::Var<T> w, b;  // d -> M

  static ClassifierParams init(const MsnetConfig& cfg, std::uint64_t seed);
  nn::ParamList<T> parameters() const;
};

// x [C_in, N, T] -> [K * C_branch, N, ceil(T / 2)]: stride-2 stem, then each
// branch runs 1x1 and kx1 convolutions on the stem output; outputs are
// concatenated over channels. Leaky-ReLU after every convolution.
template <typename T>
nn::Var<T> multiscale_block(const nn::Var<T>& x, const BlockParams<T>& block);

// x [C_in, N, L] -> features [N, d].
template <typename T>
nn::Var<T> msnet_forward(const nn::Var<T>& x, const MsnetParams<T>& params);

// features [N, d] -> logits [N, M], no activation.
template <typename T>
nn::Var<T> classify(const nn::Var<T>& features, const ClassifierParams<T>& params);

// Packs frames[indices] into the [2, N, L] input layout. Empty indices packs all.
template <typename T>
nn::Tensor<T> frames_to_input(std::span<const SignalFrame> frames,
                              std::span<const std::size_t> indices, std::size_t frame_len);

}  // namespace kgamc::msnet
