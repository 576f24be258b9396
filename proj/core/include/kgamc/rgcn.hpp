#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "kgamc/mkg.hpp"
#include "kgamc/nn/init.hpp"
#include "kgamc/nn/tensor.hpp"

// Semantic feature extractor over the knowledge graph: two heterogeneous
// GraphSAGE layers (one unit per relation), an affine residual branch from the
// input features, and a two-layer projection head.
namespace kgamc::rgcn {

struct RgcnConfig {
  std::size_t in_dim = 0;  // node feature width b
  std::size_t hidden_dim = 128;
  std::size_t out_dim = 128;  // d
  std::size_t projection_dim = 256;
};

template <typename T>
struct RgcnParams {
  std::array<nn::Var<T>, mkg::kNumRelations> layer1;  // [2 * in_dim, hidden_dim]
  std::array<nn::Var<T>, mkg::kNumRelations> layer2;  // [2 * hidden_dim, hidden_dim]
  nn::Var<T> residual_w, residual_b;                  // in_dim -> hidden_dim
  nn::Var<T> proj1_w, proj1_b;                        // hidden_dim -> projection_dim
  nn::Var<T> proj2_w, proj2_b;                        // projection_dim -> out_dim

  static RgcnParams init(const RgcnConfig& cfg, std::uint64_t seed);
  nn::ParamList<T> parameters() const;
};

// Constant message-passing operators derived from the graph once.
template <typename T>
struct GraphOperators {
  std::size_t num_nodes = 0;
  // Row i averages the in-neighbours of i under the relation; zero row if none.
  std::array<nn::Var<T>, mkg::kNumRelations> aggregate;
  // Weight of each relation's unit output in node i's layer output.
  std::array<std::vector<T>, mkg::kNumRelations> combine;

  static GraphOperators build(const mkg::HeteroGraph& g);
};

// GraphSAGE unit for one relation:
//   out_i = l2_normalize(leaky_relu(concat(h_i, mean_{j in N_r(i)} h_j) W)),
// with a zero neighbourhood mean when i has no in-neighbour under r.
template <typename T>
nn::Var<T> sage_unit(const GraphOperators<T>& ops, const nn::Var<T>& feats,
                     mkg::RelationType relation, const nn::Var<T>& weight);

// Mean of the unit outputs over the relations under which a node has an
// in-neighbour; nodes no relation reaches average all seven units.
template <typename T>
nn::Var<T> hetero_layer(const GraphOperators<T>& ops, const nn::Var<T>& feats,
                        const std::array<nn::Var<T>, mkg::kNumRelations>& units);

// n = projection(hetero(hetero(m)) + residual(m)), a x out_dim.
template <typename T>
nn::Var<T> rgcn_forward(const GraphOperators<T>& ops, const nn::Var<T>& node_features,
                        const RgcnParams<T>& params);

// Rows of the embedding for each class's anchor node, in class order.
template <typename T>
nn::Var<T> semantic_anchors(const nn::Var<T>& embeddings, const std::vector<std::size_t>& anchor_nodes);

}  // namespace kgamc::rgcn
