#include "kgamc/rgcn.hpp"

#include <random>
#include <string>

#include "kgamc/error.hpp"
#include "kgamc/nn/ops.hpp"
#include "kgamc/parallel.hpp"

namespace kgamc::rgcn {

template <typename T>
RgcnParams<T> RgcnParams<T>::init(const RgcnConfig& cfg, std::uint64_t seed) {
  if (cfg.in_dim == 0 || cfg.hidden_dim == 0 || cfg.out_dim == 0 || cfg.projection_dim == 0) {
    throw ConfigError("rgcn dimensions must be positive");
  }
  std::mt19937_64 rng(derive_seed(seed, 0x52474e));
  RgcnParams p;
  auto weight = [&](std::size_t in, std::size_t out) {
    return nn::parameter(nn::glorot_uniform<T>({in, out}, in, out, rng));
  };
  auto bias = [](std::size_t n) { return nn::parameter(nn::Tensor<T>({n})); };
  for (auto& w : p.layer1) w = weight(2 * cfg.in_dim, cfg.hidden_dim);
  for (auto& w : p.layer2) w = weight(2 * cfg.hidden_dim, cfg.hidden_dim);
  p.residual_w = weight(cfg.in_dim, cfg.hidden_dim);
  p.residual_b = bias(cfg.hidden_dim);
  p.proj1_w = weight(cfg.hidden_dim, cfg.projection_dim);
  p.proj1_b = bias(cfg.projection_dim);
  p.proj2_w = weight(cfg.projection_dim, cfg.out_dim);
  p.proj2_b = bias(cfg.out_dim);
  return p;
}

template <typename T>
nn::ParamList<T> RgcnParams<T>::parameters() const {
  nn::ParamList<T> out;
  for (std::size_t r = 0; r < mkg::kNumRelations; ++r) {
    out.push_back({"rgcn.layer1." + std::string(mkg::to_string(static_cast<mkg::RelationType>(r))), layer1[r]});
  }
  for (std::size_t r = 0; r < mkg::kNumRelations; ++r) {
    out.push_back({"rgcn.layer2." + std::string(mkg::to_string(static_cast<mkg::RelationType>(r))), layer2[r]});
  }
  out.push_back({"rgcn.residual.weight", residual_w});
  out.push_back({"rgcn.residual.bias", residual_b});
  out.push_back({"rgcn.proj1.weight", proj1_w});
  out.push_back({"rgcn.proj1.bias", proj1_b});
  out.push_back({"rgcn.proj2.weight", proj2_w});
  out.push_back({"rgcn.proj2.bias", proj2_b});
  return out;
}

template <typename T>
GraphOperators<T> GraphOperators<T>::build(const mkg::HeteroGraph& g) {
  GraphOperators ops;
  const std::size_t a = g.num_nodes();
  ops.num_nodes = a;
  std::vector<std::size_t> active(a, 0);
  std::array<std::vector<std::size_t>, mkg::kNumRelations> in_count;
  for (std::size_t r = 0; r < mkg::kNumRelations; ++r) {
    in_count[r].assign(a, 0);
    for (const auto& e : g.edges[r]) ++in_count[r][e.dst];
    nn::Tensor<T> agg({a, a});
    for (const auto& e : g.edges[r]) {
      agg.data[e.dst * a + e.src] += T{1} / static_cast<T>(in_count[r][e.dst]);
    }
    ops.aggregate[r] = nn::constant(std::move(agg));
    for (std::size_t i = 0; i < a; ++i) active[i] += in_count[r][i] > 0;
  }
  for (std::size_t r = 0; r < mkg::kNumRelations; ++r) {
    ops.combine[r].assign(a, T{0});
    for (std::size_t i = 0; i < a; ++i) {
      if (active[i] == 0) {
        ops.combine[r][i] = T{1} / static_cast<T>(mkg::kNumRelations);
      } else if (in_count[r][i] > 0) {
        ops.combine[r][i] = T{1} / static_cast<T>(active[i]);
      }
    }
  }
  return ops;
}

template <typename T>
nn::Var<T> sage_unit(const GraphOperators<T>& ops, const nn::Var<T>& feats,
                     mkg::RelationType relation, const nn::Var<T>& weight) {
  if (feats.shape().size() != 2 || feats.shape()[0] != ops.num_nodes) {
    throw ShapeError("sage_unit: features " + nn::to_string(feats.shape()) + " for " +
                     std::to_string(ops.num_nodes) + " nodes");
  }
  const auto& agg = ops.aggregate[static_cast<std::size_t>(relation)];
  const auto neighbourhood = nn::matmul(agg, feats);
  const auto joined = nn::concat<T>({feats, neighbourhood}, 1);
  return nn::l2_normalize(nn::leaky_relu(nn::matmul(joined, weight)));
}

template <typename T>
nn::Var<T> hetero_layer(const GraphOperators<T>& ops, const nn::Var<T>& feats,
                        const std::array<nn::Var<T>, mkg::kNumRelations>& units) {
  nn::Var<T> out;
  for (std::size_t r = 0; r < mkg::kNumRelations; ++r) {
    const auto unit = sage_unit(ops, feats, static_cast<mkg::RelationType>(r), units[r]);
    const auto weighted = nn::scale_rows(unit, ops.combine[r]);
    out = out.defined() ? nn::add(out, weighted) : weighted;
  }
  return out;
}

template <typename T>
nn::Var<T> rgcn_forward(const GraphOperators<T>& ops, const nn::Var<T>& node_features,
                        const RgcnParams<T>& params) {
  const auto h1 = hetero_layer(ops, node_features, params.layer1);
  const auto h2 = hetero_layer(ops, h1, params.layer2);
  const auto residual = nn::linear(node_features, params.residual_w, params.residual_b);
  const auto z = nn::add(h2, residual);
  const auto hidden = nn::leaky_relu(nn::linear(z, params.proj1_w, params.proj1_b));
  return nn::linear(hidden, params.proj2_w, params.proj2_b);
}

template <typename T>
nn::Var<T> semantic_anchors(const nn::Var<T>& embeddings, const std::vector<std::size_t>& anchor_nodes) {
  return nn::select_rows(embeddings, anchor_nodes);
}

#define KGAMC_INSTANTIATE_RGCN(T)                                                                  \
  template struct RgcnParams<T>;                                                                   \
  template struct GraphOperators<T>;                                                               \
  template nn::Var<T> sage_unit(const GraphOperators<T>&, const nn::Var<T>&, mkg::RelationType,   \
                                const nn::Var<T>&);                                                \
  template nn::Var<T> hetero_layer(const GraphOperators<T>&, const nn::Var<T>&,                   \
                                   const std::array<nn::Var<T>, mkg::kNumRelations>&);             \
  template nn::Var<T> rgcn_forward(const GraphOperators<T>&, const nn::Var<T>&,                   \
                                   const RgcnParams<T>&);                                          \
  template nn::Var<T> semantic_anchors(const nn::Var<T>&, const std::vector<std::size_t>&);

KGAMC_INSTANTIATE_RGCN(float)
KGAMC_INSTANTIATE_RGCN(double)

}  // namespace kgamc::rgcn
