#pragma once

#include <array>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "kgamc/mkg.hpp"
#include "kgamc/nn/tensor.hpp"

// Independent reference implementations and checking utilities for the tests.
namespace kgamc::testing {

struct GradReport {
  double max_rel_error = 0;
  std::size_t checked = 0;
  std::string worst;  // "input i[k]: analytic a, numeric n"
};

using ScalarFn = std::function<nn::Var<double>(const std::vector<nn::Var<double>>&)>;

// Central differences on every entry of every input against reverse mode.
// Relative error |a - n| / max(|a|, |n|, floor).
GradReport gradcheck(const ScalarFn& f, const std::vector<nn::Tensor<double>>& inputs,
                     double h = 1e-5, double floor = 1e-3);

// Same, for a function of parameters already bound into the closure.
GradReport gradcheck_params(const std::function<nn::Var<double>()>& f,
                            std::vector<nn::Var<double>> params, double h = 1e-5,
                            double floor = 1e-3);

nn::Tensor<double> random_tensor(nn::Shape shape, std::mt19937_64& rng, double scale = 1.0);

// sum(x * r) with a fixed random r: a scalar that exercises every output gradient.
nn::Var<double> random_projection(const nn::Var<double>& x, std::uint64_t seed);

// Random heterogeneous graph, arbitrary types and relations (no ontology).
mkg::HeteroGraph random_graph(std::mt19937_64& rng, std::size_t max_nodes,
                              std::size_t num_relations = mkg::kNumRelations,
                              double edge_probability = 0.15);

// Degree stats by breadth-first search over the undirected edge set.
nn::Tensor<double> features_oracle(const mkg::HeteroGraph& g);
nn::Tensor<double> scaled_features_oracle(const mkg::HeteroGraph& g);

// Per-node loop over edges: relational GraphSAGE units combined by mean over
// the relations reaching the node.
nn::Tensor<double> hetero_layer_oracle(const mkg::HeteroGraph& g, const nn::Tensor<double>& feats,
                                       const std::array<nn::Tensor<double>, mkg::kNumRelations>& w);

// Direct-sum 1-D convolution on [C, N, T] with "same" left padding floor((k-1)/2).
nn::Tensor<double> conv1d_oracle(const nn::Tensor<double>& x, const nn::Tensor<double>& w,
                                 const nn::Tensor<double>& b, std::size_t stride);

double npair_oracle(const nn::Tensor<double>& x, const nn::Tensor<double>& anchors,
                    std::span<const int> labels);
double penalty_oracle(const nn::Tensor<double>& anchors);
double ce_oracle(const nn::Tensor<double>& logits, std::span<const int> labels);

// Textbook scalar Adam with decoupled decay.
struct ScalarAdam {
  double m = 0, v = 0;
  double step(double p, double g, double lr, double wd, int t);
};

}  // namespace kgamc::testing
