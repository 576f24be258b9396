#pragma once

#include <span>

#include "kgamc/nn/tensor.hpp"

// Joint objective: cross-entropy plus a weighted N-pair metric loss over
// feature/anchor cosine similarities and an anchor-separation hinge.
namespace kgamc::loss {

struct LossBreakdown {
  double l_ce = 0;
  double l_npair = 0;
  double l_penalty = 0;
  double l_total = 0;
  double lambda = 0;
};

// Mean cross-entropy of softmax over cosine(x_i, anchor_k) against the label.
template <typename T>
nn::Var<T> npair_loss(const nn::Var<T>& x, const nn::Var<T>& anchors, std::span<const int> labels);

// max(0, mean cosine over ordered anchor pairs l != k).
template <typename T>
nn::Var<T> anchor_penalty(const nn::Var<T>& anchors);

template <typename T>
nn::Var<T> ce_loss(const nn::Var<T>& logits, std::span<const int> labels);


// total = ce + lambda * (npair + penalty). With lambda == 0 the metric terms are
// evaluated for logging only and are kept off the tape.
template <typename T>
nn::Var<T> joint_loss(const nn::Var<T>& x, const nn::Var<T>& anchors, const nn::Var<T>& logits,
                      std::span<const int> labels, double lambda, LossBreakdown* breakdown);

}  // namespace kgamc::loss
