#include "vtr/numerics/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace vtr::numerics {

namespace {
thread_local bool g_grad_enabled = true;
}

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_enabled() { return g_grad_enabled; }

template <typename T>
Tensor<T> Tensor<T>::constant(Shape shape, std::vector<T> values) {
  if (shape_numel(shape) != values.size()) {
    throw InvalidInput("tensor: shape " + shape_str(shape) + " does not hold " +
                       std::to_string(values.size()) + " values");
  }
  auto node = std::make_shared<Node<T>>();
  node->shape = std::move(shape);
  node->value.assign(values.begin(), values.end());
  return Tensor(std::move(node));
}

template <typename T>
Tensor<T> Tensor<T>::zeros(Shape shape) {
  auto n = shape_numel(shape);
  return constant(std::move(shape), std::vector<T>(n, T(0)));
}

template <typename T>
Tensor<T> Tensor<T>::full(Shape shape, T value) {
  auto n = shape_numel(shape);
  return constant(std::move(shape), std::vector<T>(n, value));
}

template <typename T>
Tensor<T> Tensor<T>::scalar(T value) {
  return constant({1}, {value});
}

template <typename T>
Tensor<T> Tensor<T>::parameter(Shape shape, std::vector<T> values) {
  Tensor t = constant(std::move(shape), std::move(values));
  t.node_->requires_grad = true;
  return t;
}

template <typename T>
std::size_t Tensor<T>::cols() const {
  return node_->shape.empty() ? 1 : node_->shape.back();
}

template <typename T>
std::size_t Tensor<T>::rows() const {
  auto c = cols();
  return c == 0 ? shape_numel(Shape(node_->shape.begin(), node_->shape.end() - 1))
                : numel() / c;
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1) {
    throw InvalidInput("item: tensor of shape " + shape_str(shape()) + " is not a scalar");
  }
  return node_->value[0];
}

template <typename T>
std::span<const T> Tensor<T>::grad() const {
  return node_->ensure_grad();
}

template <typename T>
void Tensor<T>::zero_grad() {
  std::fill(node_->grad.begin(), node_->grad.end(), T(0));
}

template <typename T>
std::span<T> Tensor<T>::mutable_values() {
  if (!node_->is_leaf) throw InvalidInput("mutable_values: only leaves are mutable");
  return node_->value;
}

template <typename T>
std::span<T> Tensor<T>::mutable_grad() {
  return node_->ensure_grad();
}

template <typename T>
Tensor<T> Tensor<T>::detach() const {
  return constant(shape(), std::vector<T>(node_->value.begin(), node_->value.end()));
}

template <typename T>
Tensor<T> Tensor<T>::reshape(Shape shape) const {
  if (shape_numel(shape) != numel()) {
    throw InvalidInput("reshape: " + shape_str(this->shape()) + " -> " + shape_str(shape));
  }
  return make_result<T>(std::move(shape), node_->value, {*this}, [](Node<T>& self) {
    auto g = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

template <typename T>
Tensor<T> make_result(Shape shape, Buffer<T> values, std::vector<Tensor<T>> inputs,
                      std::function<void(Node<T>&)> backward) {
  auto node = std::make_shared<Node<T>>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->is_leaf = false;
  if (g_grad_enabled) {
    bool any = std::any_of(inputs.begin(), inputs.end(),
                           [](const Tensor<T>& t) { return t.requires_grad(); });
    if (any) {
      node->requires_grad = true;
      node->parents.reserve(inputs.size());
      for (auto& in : inputs) node->parents.push_back(in.node_ptr());
      node->backward = std::move(backward);
    }
  }
  return Tensor<T>(std::move(node));
}

template <typename T>
void backward(const Tensor<T>& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw InvalidInput("backward: loss must be a scalar");
  }
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> seen;
  std::vector<std::pair<Node<T>*, std::size_t>> stack{{loss.node(), 0}};
  seen.insert(loss.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node<T>* p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  loss.node()->ensure_grad()[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* n = *it;
    if (n->backward && !n->grad.empty()) n->backward(*n);
  }
  // Interior gradients are not needed after the sweep.
  for (Node<T>* n : order) {
    if (!n->is_leaf) Buffer<T>().swap(n->grad);
  }
}

template class Tensor<float>;
template class Tensor<double>;
template Tensor<float> make_result(Shape, Buffer<float>, std::vector<Tensor<float>>,
                                   std::function<void(Node<float>&)>);
template Tensor<double> make_result(Shape, Buffer<double>, std::vector<Tensor<double>>,
                                    std::function<void(Node<double>&)>);
template void backward(const Tensor<float>&);
template void backward(const Tensor<double>&);

}  // namespace vtr::numerics
