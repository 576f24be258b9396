#include "kgamc/loss.hpp"

#include <string>

#include "kgamc/error.hpp"
#include "kgamc/nn/ops.hpp"

namespace kgamc::loss {

template <typename T>
nn::Var<T> npair_loss(const nn::Var<T>& x, const nn::Var<T>& anchors, std::span<const int> labels) {
  if (x.shape().size() != 2 || anchors.shape().size() != 2 || x.shape()[1] != anchors.shape()[1]) {
    throw ShapeError("npair_loss: features " + nn::to_string(x.shape()) + " vs anchors " +
                     nn::to_string(anchors.shape()));
  }
  return nn::softmax_cross_entropy(nn::cosine_matrix(x, anchors), labels);
}

template <typename T>
nn::Var<T> anchor_penalty(const nn::Var<T>& anchors) {
  if (anchors.shape().size() != 2 || anchors.shape()[0] < 2) {
    throw ShapeError("anchor_penalty: need at least 2 anchors, got " +
                     nn::to_string(anchors.shape()));
  }
  return nn::relu(nn::mean_offdiag(nn::cosine_matrix(anchors, anchors)));
}

template <typename T>
nn::Var<T> ce_loss(const nn::Var<T>& logits, std::span<const int> labels) {
  return nn::softmax_cross_entropy(logits, labels);
}

template <typename T>
nn::Var<T> joint_loss(const nn::Var<T>& x, const nn::Var<T>& anchors, const nn::Var<T>& logits,
                      std::span<const int> labels, double lambda, LossBreakdown* breakdown) {
  const auto ce = ce_loss(logits, labels);
  nn::Var<T> np, pen, total;
  if (lambda == 0.0) {
    {
      nn::NoGradGuard guard;
      np = npair_loss(x, anchors, labels);
      pen = anchor_penalty(anchors);
    }
    total = ce;
  } else {
    np = npair_loss(x, anchors, labels);
    pen = anchor_penalty(anchors);
    total = nn::add(ce, nn::scale(nn::add(np, pen), static_cast<T>(lambda)));
  }
  if (breakdown) {
    breakdown->l_ce = static_cast<double>(ce.item());
    breakdown->l_npair = static_cast<double>(np.item());
    breakdown->l_penalty = static_cast<double>(pen.item());
    breakdown->l_total = static_cast<double>(total.item());
    breakdown->lambda = lambda;
  }
  return total;
}

#define KGAMC_INSTANTIATE_LOSS(T)                                                              \
  template nn::Var<T> npair_loss(const nn::Var<T>&, const nn::Var<T>&, std::span<const int>); \
  template nn::Var<T> anchor_penalty(const nn::Var<T>&);                                       \
  template nn::Var<T> ce_loss(const nn::Var<T>&, std::span<const int>);                        \
  template nn::Var<T> joint_loss(const nn::Var<T>&, const nn::Var<T>&, const nn::Var<T>&,      \
                                 std::span<const int>, double, LossBreakdown*);

KGAMC_INSTANTIATE_LOSS(float)
KGAMC_INSTANTIATE_LOSS(double)

}  // namespace kgamc::loss
