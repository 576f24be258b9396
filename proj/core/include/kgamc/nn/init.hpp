#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "kgamc/nn/tensor.hpp"

namespace kgamc::nn {

template <typename T>
struct NamedParam {
  std::string name;
  Var<T> var;
};

template <typename T>
using ParamList = std::vector<NamedParam<T>>;

// Uniform in ±sqrt(6 / (fan_in + fan_out)).
template <typename T>
Tensor<T> glorot_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out,
                         std::mt19937_64& rng);

template <typename T>
void zero_grads(ParamList<T>& params);

template <typename T>
std::size_t parameter_count(const ParamList<T>& params);

}  // namespace kgamc::nn
