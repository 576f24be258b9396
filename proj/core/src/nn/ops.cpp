#include "kgamc/nn/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

#include "kgamc/error.hpp"

namespace kgamc::nn {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using CMapMat = Eigen::Map<const RowMat<T>>;

template <typename T>
CMapMat<T> as_matrix(const Tensor<T>& t, std::size_t rows, std::size_t cols) {
  return CMapMat<T>(t.data.data(), static_cast<Eigen::Index>(rows),
                    static_cast<Eigen::Index>(cols));
}

template <typename T>
MapMat<T> as_matrix(Tensor<T>& t, std::size_t rows, std::size_t cols) {
  return MapMat<T>(t.data.data(), static_cast<Eigen::Index>(rows),
                   static_cast<Eigen::Index>(cols));
}

[[noreturn]] void mismatch(const char* op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + to_string(a) + " and " +
                   to_string(b));
}

void require_rank(const char* op, const Shape& s, std::size_t rank) {
  if (s.size() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) +
                     ", got shape " + to_string(s));
  }
}

template <typename T>
Node<T>& parent(Node<T>& n, std::size_t i) {
  return *n.parents[i];
}

// Row-normalized copy plus the norms used; rows below epsilon are copied as-is.
template <typename T>
void normalize_rows(const Tensor<T>& x, std::size_t rows, std::size_t cols, Tensor<T>& out,
                    std::vector<T>& norms) {
  out = Tensor<T>(x.shape);
  norms.assign(rows, T{0});
  for (std::size_t i = 0; i < rows; ++i) {
    const T* src = x.data.data() + i * cols;
    T* dst = out.data.data() + i * cols;
    T acc{0};
    for (std::size_t j = 0; j < cols; ++j) acc += src[j] * src[j];
    const T norm = std::sqrt(acc);
    norms[i] = norm;
    if (norm < static_cast<T>(kNormEpsilon)) {
      std::copy(src, src + cols, dst);
    } else {
      for (std::size_t j = 0; j < cols; ++j) dst[j] = src[j] / norm;
    }
  }
}

struct ConvGeometry {
  std::size_t c_in, batch, length, c_out, kernel, stride, pad_left, out_length;
};

// col[(c*k + j), n*T' + t] = x[c, n, t*stride + j - pad_left], zero outside.
template <typename T>
void im2col(const T* x, const ConvGeometry& g, T* col) {
  const std::size_t cols = g.batch * g.out_length;
  for (std::size_t c = 0; c < g.c_in; ++c) {
    for (std::size_t j = 0; j < g.kernel; ++j) {
      T* row = col + (c * g.kernel + j) * cols;
      for (std::size_t n = 0; n < g.batch; ++n) {
        const T* src = x + (c * g.batch + n) * g.length;
        T* dst = row + n * g.out_length;
        for (std::size_t t = 0; t < g.out_length; ++t) {
          const auto pos = static_cast<std::ptrdiff_t>(t * g.stride + j) -
                           static_cast<std::ptrdiff_t>(g.pad_left);
          dst[t] = (pos >= 0 && pos < static_cast<std::ptrdiff_t>(g.length)) ? src[pos] : T{0};
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* col, const ConvGeometry& g, T* dx) {
  const std::size_t cols = g.batch * g.out_length;
  for (std::size_t c = 0; c < g.c_in; ++c) {
    for (std::size_t j = 0; j < g.kernel; ++j) {
      const T* row = col + (c * g.kernel + j) * cols;
      for (std::size_t n = 0; n < g.batch; ++n) {
        T* dst = dx + (c * g.batch + n) * g.length;
        const T* src = row + n * g.out_length;
        for (std::size_t t = 0; t < g.out_length; ++t) {
          const auto pos = static_cast<std::ptrdiff_t>(t * g.stride + j) -
                           static_cast<std::ptrdiff_t>(g.pad_left);
          if (pos >= 0 && pos < static_cast<std::ptrdiff_t>(g.length)) dst[pos] += src[t];
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  if (a.shape() != b.shape()) mismatch("add", a.shape(), b.shape());
  Tensor<T> out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += b.value().data[i];
  return make_result<T>(std::move(out), {a, b}, [](Node<T>& n) {
    parent(n, 0).accumulate(n.grad);
    parent(n, 1).accumulate(n.grad);
  });
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  if (a.shape() != b.shape()) mismatch("sub", a.shape(), b.shape());
  Tensor<T> out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= b.value().data[i];
  return make_result<T>(std::move(out), {a, b}, [](Node<T>& n) {
    parent(n, 0).accumulate(n.grad);
    Tensor<T> neg = n.grad;
    for (auto& v : neg.data) v = -v;
    parent(n, 1).accumulate(neg);
  });
}

template <typename T>
Var<T> scale(const Var<T>& a, T factor) {
  Tensor<T> out = a.value();
  for (auto& v : out.data) v *= factor;
  return make_result<T>(std::move(out), {a}, [factor](Node<T>& n) {
    Tensor<T> g = n.grad;
    for (auto& v : g.data) v *= factor;
    parent(n, 0).accumulate(g);
  });
}

template <typename T>
Var<T> reshape(const Var<T>& a, Shape shape) {
  if (numel(shape) != a.size()) mismatch("reshape", a.shape(), shape);
  Tensor<T> out(std::move(shape), a.value().data);
  return make_result<T>(std::move(out), {a}, [](Node<T>& n) {
    Tensor<T> g(parent(n, 0).value.shape, n.grad.data);
    parent(n, 0).accumulate(g);
  });
}

template <typename T>
Var<T> matmul(const Var<T>& a, const Var<T>& b) {
  require_rank("matmul", a.shape(), 2);
  require_rank("matmul", b.shape(), 2);
  const std::size_t n = a.shape()[0], k = a.shape()[1], m = b.shape()[1];
  if (b.shape()[0] != k) mismatch("matmul", a.shape(), b.shape());
  Tensor<T> out({n, m});
  as_matrix(out, n, m).noalias() = as_matrix(a.value(), n, k) * as_matrix(b.value(), k, m);
  return make_result<T>(std::move(out), {a, b}, [n, k, m](Node<T>& node) {
    auto& pa = parent(node, 0);
    auto& pb = parent(node, 1);
    const auto g = as_matrix(node.grad, n, m);
    if (pa.requires_grad) {
      as_matrix(pa.grad_buffer(), n, k).noalias() += g * as_matrix(pb.value, k, m).transpose();
    }
    if (pb.requires_grad) {
      as_matrix(pb.grad_buffer(), k, m).noalias() += as_matrix(pa.value, n, k).transpose() * g;
    }
  });
}

template <typename T>
Var<T> matmul_nt(const Var<T>& a, const Var<T>& b) {
  require_rank("matmul_nt", a.shape(), 2);
  require_rank("matmul_nt", b.shape(), 2);
  const std::size_t n = a.shape()[0], k = a.shape()[1], m = b.shape()[0];
  if (b.shape()[1] != k) mismatch("matmul_nt", a.shape(), b.shape());
  Tensor<T> out({n, m});
  as_matrix(out, n, m).noalias() =
      as_matrix(a.value(), n, k) * as_matrix(b.value(), m, k).transpose();
  return make_result<T>(std::move(out), {a, b}, [n, k, m](Node<T>& node) {
    auto& pa = parent(node, 0);
    auto& pb = parent(node, 1);
    const auto g = as_matrix(node.grad, n, m);
    if (pa.requires_grad) {
      as_matrix(pa.grad_buffer(), n, k).noalias() += g * as_matrix(pb.value, m, k);
    }
    if (pb.requires_grad) {
      as_matrix(pb.grad_buffer(), m, k).noalias() += g.transpose() * as_matrix(pa.value, n, k);
    }
  });
}

template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& weight, const Var<T>& bias) {
  require_rank("linear", x.shape(), 2);
  require_rank("linear", weight.shape(), 2);
  const std::size_t n = x.shape()[0], d_in = x.shape()[1], d_out = weight.shape()[1];
  if (weight.shape()[0] != d_in) mismatch("linear", x.shape(), weight.shape());
  if (bias.shape() != Shape{d_out}) mismatch("linear", weight.shape(), bias.shape());
  Tensor<T> out({n, d_out});
  auto y = as_matrix(out, n, d_out);
  y.noalias() = as_matrix(x.value(), n, d_in) * as_matrix(weight.value(), d_in, d_out);
  y.rowwise() += as_matrix(bias.value(), 1, d_out).row(0);
  return make_result<T>(std::move(out), {x, weight, bias}, [n, d_in, d_out](Node<T>& node) {
    auto& px = parent(node, 0);
    auto& pw = parent(node, 1);
    auto& pb = parent(node, 2);
    const auto g = as_matrix(node.grad, n, d_out);
    if (px.requires_grad) {
      as_matrix(px.grad_buffer(), n, d_in).noalias() +=
          g * as_matrix(pw.value, d_in, d_out).transpose();
    }
    if (pw.requires_grad) {
      as_matrix(pw.grad_buffer(), d_in, d_out).noalias() +=
          as_matrix(px.value, n, d_in).transpose() * g;
    }
    if (pb.requires_grad) {
      // Plain loops: Eigen reductions peel by runtime alignment, which breaks bit-determinism.
      T* gb = pb.grad_buffer().data.data();
      const T* gd = node.grad.data.data();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < d_out; ++k) gb[k] += gd[i * d_out + k];
      }
    }
  });
}

std::size_t conv_output_length(std::size_t length, std::size_t kernel, std::size_t stride,
                               bool same_padding) {
  if (stride == 0) throw ShapeError("conv1d: stride must be positive");
  if (same_padding) return (length + stride - 1) / stride;
  if (length < kernel) {
    throw ShapeError("conv1d: input length " + std::to_string(length) +
                     " shorter than kernel " + std::to_string(kernel));
  }
  return (length - kernel) / stride + 1;
}

template <typename T>
Var<T> conv1d(const Var<T>& x, const Var<T>& w, const Var<T>& b, std::size_t stride,
              bool same_padding) {
  const Shape& xs = x.shape();
  if (xs.size() != 2 && xs.size() != 3) {
    throw ShapeError("conv1d: input must be [C, T] or [C, N, T], got " + to_string(xs));
  }
  require_rank("conv1d", w.shape(), 3);
  ConvGeometry g{};
  g.c_in = xs[0];
  g.batch = xs.size() == 3 ? xs[1] : 1;
  g.length = xs.back();
  g.c_out = w.shape()[0];
  g.kernel = w.shape()[2];
  g.stride = stride;
  if (w.shape()[1] != g.c_in) mismatch("conv1d", xs, w.shape());
  if (b.shape() != Shape{g.c_out}) mismatch("conv1d", w.shape(), b.shape());
  if (g.length == 0 || g.kernel == 0) mismatch("conv1d", xs, w.shape());
  g.pad_left = same_padding ? (g.kernel - 1) / 2 : 0;
  g.out_length = conv_output_length(g.length, g.kernel, stride, same_padding);

  const std::size_t rows = g.c_in * g.kernel;
  const std::size_t cols = g.batch * g.out_length;
  std::vector<T> col(rows * cols);
  im2col(x.value().data.data(), g, col.data());

  Shape out_shape = xs.size() == 3 ? Shape{g.c_out, g.batch, g.out_length}
                                   : Shape{g.c_out, g.out_length};
  Tensor<T> out(out_shape);
  auto y = as_matrix(out, g.c_out, cols);
  y.noalias() = as_matrix(w.value(), g.c_out, rows) *
                CMapMat<T>(col.data(), static_cast<Eigen::Index>(rows),
                           static_cast<Eigen::Index>(cols));
  y.colwise() += as_matrix(b.value(), g.c_out, 1).col(0);

  return make_result<T>(std::move(out), {x, w, b}, [g, rows, cols](Node<T>& node) {
    auto& px = parent(node, 0);
    auto& pw = parent(node, 1);
    auto& pb = parent(node, 2);
    const auto gy = as_matrix(node.grad, g.c_out, cols);
    if (pw.requires_grad) {
      std::vector<T> col(rows * cols);
      im2col(px.value.data.data(), g, col.data());
      as_matrix(pw.grad_buffer(), g.c_out, rows).noalias() +=
          gy * CMapMat<T>(col.data(), static_cast<Eigen::Index>(rows),
                          static_cast<Eigen::Index>(cols))
                   .transpose();
    }
    if (pb.requires_grad) {
      T* gb = pb.grad_buffer().data.data();
      const T* gd = node.grad.data.data();
      for (std::size_t o = 0; o < g.c_out; ++o) {
        T acc{0};
        for (std::size_t c = 0; c < cols; ++c) acc += gd[o * cols + c];
        gb[o] += acc;
      }
    }
    if (px.requires_grad) {
      std::vector<T> dcol(rows * cols);
      MapMat<T>(dcol.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols))
          .noalias() = as_matrix(pw.value, g.c_out, rows).transpose() * gy;
      col2im_add(dcol.data(), g, px.grad_buffer().data.data());
    }
  });
}

template <typename T>
Var<T> leaky_relu(const Var<T>& x, T slope) {
  Tensor<T> out = x.value();
  for (auto& v : out.data) v = v >= T{0} ? v : v * slope;
  return make_result<T>(std::move(out), {x}, [slope](Node<T>& n) {
    auto& px = parent(n, 0);
    Tensor<T> g = n.grad;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (px.value.data[i] < T{0}) g.data[i] *= slope;
    }
    px.accumulate(g);
  });
}

template <typename T>
Var<T> relu(const Var<T>& x) {
  return leaky_relu(x, T{0});
}

template <typename T>
Var<T> softmax(const Var<T>& x) {
  require_rank("softmax", x.shape(), 2);
  const std::size_t rows = x.shape()[0], cols = x.shape()[1];
  Tensor<T> out(x.shape());
  for (std::size_t i = 0; i < rows; ++i) {
    const T* src = x.value().data.data() + i * cols;
    T* dst = out.data.data() + i * cols;
    const T peak = *std::max_element(src, src + cols);
    T total{0};
    for (std::size_t j = 0; j < cols; ++j) total += dst[j] = std::exp(src[j] - peak);
    for (std::size_t j = 0; j < cols; ++j) dst[j] /= total;
  }
  return make_result<T>(std::move(out), {x}, [rows, cols](Node<T>& n) {
    // dx = y * (g - <g, y>) per row; the output value is this node's value.
    Tensor<T> dx(n.value.shape);
    for (std::size_t i = 0; i < rows; ++i) {
      const T* y = n.value.data.data() + i * cols;
      const T* g = n.grad.data.data() + i * cols;
      T dot{0};
      for (std::size_t j = 0; j < cols; ++j) dot += g[j] * y[j];
      for (std::size_t j = 0; j < cols; ++j) dx.data[i * cols + j] = y[j] * (g[j] - dot);
    }
    parent(n, 0).accumulate(dx);
  });
}

template <typename T>
Var<T> softmax_cross_entropy(const Var<T>& logits, std::span<const int> labels) {
  require_rank("softmax_cross_entropy", logits.shape(), 2);
  const std::size_t rows = logits.shape()[0], cols = logits.shape()[1];
  if (labels.size() != rows) {
    throw ShapeError("softmax_cross_entropy: " + std::to_string(labels.size()) +
                     " labels for logits of shape " + to_string(logits.shape()));
  }
  if (rows == 0) throw ShapeError("softmax_cross_entropy: empty batch");
  auto probs = std::make_shared<std::vector<T>>(rows * cols);
  auto targets = std::make_shared<std::vector<int>>(labels.begin(), labels.end());
  T total{0};
  for (std::size_t i = 0; i < rows; ++i) {
    const int label = labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= cols) {
      throw ShapeError("softmax_cross_entropy: label " + std::to_string(label) +
                       " out of range for " + std::to_string(cols) + " classes");
    }
    const T* src = logits.value().data.data() + i * cols;
    T* p = probs->data() + i * cols;
    const T peak = *std::max_element(src, src + cols);
    T z{0};
    for (std::size_t j = 0; j < cols; ++j) z += p[j] = std::exp(src[j] - peak);
    for (std::size_t j = 0; j < cols; ++j) p[j] /= z;
    total += std::log(z) + peak - src[label];
  }
  Tensor<T> out({1}, {total / static_cast<T>(rows)});
  return make_result<T>(std::move(out), {logits}, [probs, targets, rows, cols](Node<T>& n) {
    const T scale_factor = n.grad.data[0] / static_cast<T>(rows);
    Tensor<T> dx(Shape{rows, cols}, *probs);
    for (std::size_t i = 0; i < rows; ++i) {
      dx.data[i * cols + static_cast<std::size_t>((*targets)[i])] -= T{1};
    }
    for (auto& v : dx.data) v *= scale_factor;
    parent(n, 0).accumulate(dx);
  });
}

template <typename T>
Var<T> global_avg_pool(const Var<T>& x) {
  const Shape& s = x.shape();
  if (s.size() != 2 && s.size() != 3) {
    throw ShapeError("global_avg_pool: input must be [C, T] or [C, N, T], got " + to_string(s));
  }
  const std::size_t channels = s[0];
  const std::size_t batch = s.size() == 3 ? s[1] : 1;
  const std::size_t length = s.back();
  if (length == 0) throw ShapeError("global_avg_pool: empty time axis");
  Tensor<T> out(s.size() == 3 ? Shape{batch, channels} : Shape{channels});
  const T inv = T{1} / static_cast<T>(length);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t n = 0; n < batch; ++n) {
      const T* src = x.value().data.data() + (c * batch + n) * length;
      T acc{0};
      for (std::size_t t = 0; t < length; ++t) acc += src[t];
      out.data[n * channels + c] = acc * inv;
    }
  }
  return make_result<T>(std::move(out), {x}, [channels, batch, length, inv](Node<T>& node) {
    auto& px = parent(node, 0);
    if (!px.requires_grad) return;
    auto& dx = px.grad_buffer();
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t n = 0; n < batch; ++n) {
        const T g = node.grad.data[n * channels + c] * inv;
        T* dst = dx.data.data() + (c * batch + n) * length;
        for (std::size_t t = 0; t < length; ++t) dst[t] += g;
      }
    }
  });
}

template <typename T>
Var<T> l2_normalize(const Var<T>& x) {
  require_rank("l2_normalize", x.shape(), 2);
  const std::size_t rows = x.shape()[0], cols = x.shape()[1];
  Tensor<T> out;
  std::vector<T> norms;
  normalize_rows(x.value(), rows, cols, out, norms);
  return make_result<T>(std::move(out), {x}, [rows, cols, norms](Node<T>& n) {
    auto& px = parent(n, 0);
    if (!px.requires_grad) return;
    auto& dx = px.grad_buffer();
    for (std::size_t i = 0; i < rows; ++i) {
      if (norms[i] < static_cast<T>(kNormEpsilon)) continue;
      const T* y = n.value.data.data() + i * cols;
      const T* g = n.grad.data.data() + i * cols;
      T dot{0};
      for (std::size_t j = 0; j < cols; ++j) dot += y[j] * g[j];
      T* dst = dx.data.data() + i * cols;
      for (std::size_t j = 0; j < cols; ++j) dst[j] += (g[j] - y[j] * dot) / norms[i];
    }
  });
}

template <typename T>
Var<T> cosine_matrix(const Var<T>& a, const Var<T>& b) {
  require_rank("cosine_matrix", a.shape(), 2);
  require_rank("cosine_matrix", b.shape(), 2);
  if (a.shape()[1] != b.shape()[1]) mismatch("cosine_matrix", a.shape(), b.shape());
  return matmul_nt(l2_normalize(a), l2_normalize(b));
}

template <typename T>
Var<T> cosine_sim(const Var<T>& u, const Var<T>& v) {
  require_rank("cosine_sim", u.shape(), 1);
  if (u.shape() != v.shape()) mismatch("cosine_sim", u.shape(), v.shape());
  const std::size_t d = u.shape()[0];
  return reshape(cosine_matrix(reshape(u, {1, d}), reshape(v, {1, d})), {1});
}

template <typename T>
Var<T> concat(const std::vector<Var<T>>& parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const Shape& first = parts.front().shape();
  if (axis >= first.size()) {
    throw ShapeError("concat: axis " + std::to_string(axis) + " out of range for " +
                     to_string(first));
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= first[i];
  for (std::size_t i = axis + 1; i < first.size(); ++i) inner *= first[i];
  std::vector<std::size_t> widths;
  std::size_t total_axis = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == first.size();
    for (std::size_t i = 0; ok && i < s.size(); ++i) ok = (i == axis) || s[i] == first[i];
    if (!ok) mismatch("concat", first, s);
    widths.push_back(s[axis] * inner);
    total_axis += s[axis];
  }
  Shape out_shape = first;
  out_shape[axis] = total_axis;
  Tensor<T> out(out_shape);
  const std::size_t row = total_axis * inner;
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto& src = parts[p].value().data;
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(src.data() + o * widths[p], widths[p], out.data.data() + o * row + offset);
    }
    offset += widths[p];
  }
  return make_result<T>(std::move(out), parts, [widths, outer, row](Node<T>& n) {
    std::size_t off = 0;
    for (std::size_t p = 0; p < widths.size(); ++p) {
      auto& pp = parent(n, p);
      if (pp.requires_grad) {
        auto& dst = pp.grad_buffer().data;
        for (std::size_t o = 0; o < outer; ++o) {
          const T* src = n.grad.data.data() + o * row + off;
          T* d = dst.data() + o * widths[p];
          for (std::size_t k = 0; k < widths[p]; ++k) d[k] += src[k];
        }
      }
      off += widths[p];
    }
  });
}

template <typename T>
Var<T> sum(const Var<T>& x) {
  T total{0};
  for (auto v : x.value().data) total += v;
  return make_result<T>(Tensor<T>({1}, {total}), {x}, [](Node<T>& n) {
    auto& px = parent(n, 0);
    if (!px.requires_grad) return;
    const T g = n.grad.data[0];
    for (auto& v : px.grad_buffer().data) v += g;
  });
}

template <typename T>
Var<T> mean(const Var<T>& x) {
  if (x.size() == 0) throw ShapeError("mean: empty tensor");
  return scale(sum(x), T{1} / static_cast<T>(x.size()));
}

template <typename T>
Var<T> scale_rows(const Var<T>& x, std::vector<T> weights) {
  require_rank("scale_rows", x.shape(), 2);
  const std::size_t rows = x.shape()[0], cols = x.shape()[1];
  if (weights.size() != rows) mismatch("scale_rows", x.shape(), Shape{weights.size()});
  Tensor<T> out = x.value();
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) out.data[i * cols + j] *= weights[i];
  }
  return make_result<T>(std::move(out), {x}, [w = std::move(weights), cols](Node<T>& n) {
    auto& px = parent(n, 0);
    if (!px.requires_grad) return;
    auto& dx = px.grad_buffer();
    for (std::size_t i = 0; i < w.size(); ++i) {
      for (std::size_t j = 0; j < cols; ++j) dx.data[i * cols + j] += n.grad.data[i * cols + j] * w[i];
    }
  });
}

template <typename T>
Var<T> select_rows(const Var<T>& x, std::vector<std::size_t> rows) {
  require_rank("select_rows", x.shape(), 2);
  const std::size_t n_rows = x.shape()[0], cols = x.shape()[1];
  Tensor<T> out({rows.size(), cols});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= n_rows) {
      throw ShapeError("select_rows: row " + std::to_string(rows[i]) + " out of range for " +
                       to_string(x.shape()));
    }
    std::copy_n(x.value().data.data() + rows[i] * cols, cols, out.data.data() + i * cols);
  }
  return make_result<T>(std::move(out), {x}, [idx = std::move(rows), cols](Node<T>& n) {
    auto& px = parent(n, 0);
    if (!px.requires_grad) return;
    auto& dx = px.grad_buffer();
    for (std::size_t i = 0; i < idx.size(); ++i) {
      for (std::size_t j = 0; j < cols; ++j) dx.data[idx[i] * cols + j] += n.grad.data[i * cols + j];
    }
  });
}

template <typename T>
Var<T> mean_offdiag(const Var<T>& x) {
  require_rank("mean_offdiag", x.shape(), 2);
  const std::size_t m = x.shape()[0];
  if (x.shape()[1] != m || m < 2) {
    throw ShapeError("mean_offdiag: need a square matrix with at least 2 rows, got " +
                     to_string(x.shape()));
  }
  const T inv = T{1} / static_cast<T>(m * (m - 1));
  T total{0};
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i != j) total += x.value().data[i * m + j];
    }
  }
  return make_result<T>(Tensor<T>({1}, {total * inv}), {x}, [m, inv](Node<T>& n) {
    auto& px = parent(n, 0);
    if (!px.requires_grad) return;
    const T g = n.grad.data[0] * inv;
    auto& dx = px.grad_buffer();
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (i != j) dx.data[i * m + j] += g;
      }
    }
  });
}

#define KGAMC_INSTANTIATE_OPS(T)                                                        \
  template Var<T> add(const Var<T>&, const Var<T>&);                                    \
  template Var<T> sub(const Var<T>&, const Var<T>&);                                    \
  template Var<T> scale(const Var<T>&, T);                                              \
  template Var<T> reshape(const Var<T>&, Shape);                                        \
  template Var<T> matmul(const Var<T>&, const Var<T>&);                                 \
  template Var<T> matmul_nt(const Var<T>&, const Var<T>&);                              \
  template Var<T> linear(const Var<T>&, const Var<T>&, const Var<T>&);                  \
  template Var<T> conv1d(const Var<T>&, const Var<T>&, const Var<T>&, std::size_t, bool); \
  template Var<T> leaky_relu(const Var<T>&, T);                                         \
  template Var<T> relu(const Var<T>&);                                                  \
  template Var<T> softmax(const Var<T>&);                                               \
  template Var<T> softmax_cross_entropy(const Var<T>&, std::span<const int>);           \
  template Var<T> global_avg_pool(const Var<T>&);                                       \
  template Var<T> l2_normalize(const Var<T>&);                                          \
  template Var<T> cosine_sim(const Var<T>&, const Var<T>&);                             \
  template Var<T> cosine_matrix(const Var<T>&, const Var<T>&);                          \
  template Var<T> concat(const std::vector<Var<T>>&, std::size_t);                      \
  template Var<T> sum(const Var<T>&);                                                   \
  template Var<T> mean(const Var<T>&);                                                  \
  template Var<T> scale_rows(const Var<T>&, std::vector<T>);                            \
  template Var<T> select_rows(const Var<T>&, std::vector<std::size_t>);                 \
  template Var<T> mean_offdiag(const Var<T>&);

KGAMC_INSTANTIATE_OPS(float)
KGAMC_INSTANTIATE_OPS(double)

}  // namespace kgamc::nn
