#include "kgamc/nn/tensor.hpp"

#include <algorithm>
#include <unordered_set>

#include "kgamc/error.hpp"

namespace kgamc::nn {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string to_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

template <typename T>
Tensor<T>::Tensor(Shape s, T fill) : shape(std::move(s)), data(numel(shape), fill) {}

template <typename T>
Tensor<T>::Tensor(Shape s, std::vector<T> values) : shape(std::move(s)), data(std::move(values)) {
  if (data.size() != numel(shape)) {
    throw ShapeError("tensor data length " + std::to_string(data.size()) +
                     " does not match shape " + to_string(shape));
  }
}

template <typename T>
Tensor<T>& Node<T>::grad_buffer() {
  if (grad.empty()) grad = Tensor<T>(value.shape);
  return grad;
}

template <typename T>
void Node<T>::accumulate(const Tensor<T>& g) {
  if (!requires_grad) return;
  auto& buf = grad_buffer();
  for (std::size_t i = 0; i < buf.data.size(); ++i) buf.data[i] += g.data[i];
}

template <typename T>
Var<T>::Var(Tensor<T> value, bool requires_grad) : node_(std::make_shared<Node<T>>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

template <typename T>
Tensor<T> Var<T>::grad() const {
  if (node_->grad.empty()) return Tensor<T>(node_->value.shape);
  return node_->grad;
}

template <typename T>
void Var<T>::zero_grad() {
  if (node_) node_->grad = Tensor<T>();
}

template <typename T>
T Var<T>::item() const {
  if (node_->value.size() != 1) {
    throw ShapeError("item() on non-scalar tensor of shape " + to_string(shape()));
  }
  return node_->value.data[0];
}

namespace {
thread_local bool tls_grad_enabled = true;
}

NoGradGuard::NoGradGuard() : previous_(tls_grad_enabled) { tls_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { tls_grad_enabled = previous_; }
bool grad_enabled() noexcept { return tls_grad_enabled; }

template <typename T>
Var<T> make_result(Tensor<T> value, const std::vector<Var<T>>& parents,
                   std::function<void(Node<T>&)> backward_fn) {
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  if (tls_grad_enabled) {
    const bool any = std::any_of(parents.begin(), parents.end(),
                                 [](const Var<T>& p) { return p.requires_grad(); });
    if (any) {
      node->requires_grad = true;
      node->parents.reserve(parents.size());
      for (const auto& p : parents) node->parents.push_back(p.node());
      node->backward = std::move(backward_fn);
    }
  }
  return Var<T>(std::move(node));
}

template <typename T>
Var<T> make_result(Tensor<T> value, std::initializer_list<Var<T>> parents,
                   std::function<void(Node<T>&)> backward_fn) {
  return make_result(std::move(value), std::vector<Var<T>>(parents), std::move(backward_fn));
}

template <typename T>
void backward(const Var<T>& loss) {
  if (loss.size() != 1) {
    throw ShapeError("backward() needs a scalar, got shape " + to_string(loss.shape()));
  }
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS gives a topological order (parents before children).
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> seen;
  std::vector<std::pair<Node<T>*, std::size_t>> stack{{loss.node().get(), 0}};
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node<T>* parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) stack.push_back({parent, 0});
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (auto* node : order) {
    if (!node->is_leaf()) node->grad = Tensor<T>();
  }
  loss.node()->grad_buffer().data[0] += T{1};
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* node = *it;
    if (node->is_leaf() || node->grad.empty()) continue;
    node->backward(*node);
  }
  for (auto* node : order) {
    if (!node->is_leaf()) node->grad = Tensor<T>();
  }
}

template struct Tensor<float>;
template struct Tensor<double>;
template struct Node<float>;
template struct Node<double>;
template class Var<float>;
template class Var<double>;
template void backward(const Var<float>&);
template void backward(const Var<double>&);
template Var<float> make_result(Tensor<float>, const std::vector<Var<float>>&,
                                std::function<void(Node<float>&)>);
template Var<double> make_result(Tensor<double>, const std::vector<Var<double>>&,
                                 std::function<void(Node<double>&)>);
template Var<float> make_result(Tensor<float>, std::initializer_list<Var<float>>,
                                std::function<void(Node<float>&)>);
template Var<double> make_result(Tensor<double>, std::initializer_list<Var<double>>,
                                 std::function<void(Node<double>&)>);

}  // namespace kgamc::nn
