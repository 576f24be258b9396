#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kgamc/nn/tensor.hpp"

// Differentiable operations. Every op checks shapes (ShapeError names both
// operands) and registers an exact reverse-mode rule.
//
// Convolution activations use a channel-major batch layout [C, N, T]; a
// rank-2 [C, T] input is a single-sample batch. This keeps im2col columns
// contiguous so each conv is one GEMM over the whole batch.
namespace kgamc::nn {

inline constexpr double kLeakySlope = 0.01;
inline constexpr double kNormEpsilon = 1e-12;

template <typename T>
Var<T> constant(Tensor<T> value) {
  return Var<T>(std::move(value), false);
}

template <typename T>
Var<T> parameter(Tensor<T> value) {
  return Var<T>(std::move(value), true);
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> scale(const Var<T>& a, T factor);
template <typename T>
Var<T> reshape(const Var<T>& a, Shape shape);

// [n, k] x [k, m] -> [n, m]
template <typename T>
Var<T> matmul(const Var<T>& a, const Var<T>& b);
// [n, k] x [m, k]^T -> [n, m]
template <typename T>
Var<T> matmul_nt(const Var<T>& a, const Var<T>& b);

// x [N, d_in], W [d_in, d_out], b [d_out] -> [N, d_out]
template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& weight, const Var<T>& bias);

// x [C_in, N, T] (or [C_in, T]), w [C_out, C_in, k], b [C_out].
// Same padding pads ⌊(k-1)/2⌋ left and ⌈(k-1)/2⌉ right, so T' = ⌈T / stride⌉;
// otherwise T' = ⌊(T - k) / stride⌋ + 1.
template <typename T>
Var<T> conv1d(const Var<T>& x, const Var<T>& w, const Var<T>& b, std::size_t stride,
              bool same_padding);

std::size_t conv_output_length(std::size_t length, std::size_t kernel, std::size_t stride,
                               bool same_padding);

template <typename T>
Var<T> leaky_relu(const Var<T>& x, T slope = static_cast<T>(kLeakySlope));
template <typename T>
Var<T> relu(const Var<T>& x);

// Row-wise softmax of [N, M].
template <typename T>
Var<T> softmax(const Var<T>& x);

// Mean over rows of -log softmax(logits)[label]. Fused for stability.
template <typename T>
Var<T> softmax_cross_entropy(const Var<T>& logits, std::span<const int> labels);

// [C, N, T] -> [N, C]; [C, T] -> [C].
template <typename T>
Var<T> global_avg_pool(const Var<T>& x);

// Row-wise x / |x|. Rows with |x| < kNormEpsilon pass through unchanged and
// block the gradient.
template <typename T>
Var<T> l2_normalize(const Var<T>& x);

// Cosine similarity of two [d] vectors -> scalar.
template <typename T>
Var<T> cosine_sim(const Var<T>& u, const Var<T>& v);

// Pairwise cosines of rows: [n, d] x [m, d] -> [n, m]. Zero rows give 0.
template <typename T>
Var<T> cosine_matrix(const Var<T>& a, const Var<T>& b);

template <typename T>
Var<T> concat(const std::vector<Var<T>>& parts, std::size_t axis);

template <typename T>
Var<T> sum(const Var<T>& x);
template <typename T>
Var<T> mean(const Var<T>& x);

// Multiplies row i of [n, d] by weights[i].
template <typename T>
Var<T> scale_rows(const Var<T>& x, std::vector<T> weights);

// Rows of [n, d] picked by index -> [k, d].
template <typename T>
Var<T> select_rows(const Var<T>& x, std::vector<std::size_t> rows);

// Mean of the off-diagonal entries of a square [M, M] matrix, M >= 2.
template <typename T>
Var<T> mean_offdiag(const Var<T>& x);

}  // namespace kgamc::nn
