#include "kgamc/nn/init.hpp"

#include <cmath>

namespace kgamc::nn {

template <typename T>
Tensor<T> glorot_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out,
                         std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor<T> out(std::move(shape));
  for (auto& v : out.data) v = static_cast<T>(dist(rng));
  return out;
}

template <typename T>
void zero_grads(ParamList<T>& params) {
  for (auto& p : params) p.var.zero_grad();
}

template <typename T>
std::size_t parameter_count(const ParamList<T>& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.var.size();
  return n;
}

template Tensor<float> glorot_uniform(Shape, std::size_t, std::size_t, std::mt19937_64&);
template Tensor<double> glorot_uniform(Shape, std::size_t, std::size_t, std::mt19937_64&);
template void zero_grads(ParamList<float>&);
template void zero_grads(ParamList<double>&);
template std::size_t parameter_count(const ParamList<float>&);
template std::size_t parameter_count(const ParamList<double>&);

}  // namespace kgamc::nn
