#pragma once

#include <cstddef>
#include <cstdlib>
#include <new>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vtr::numerics {

/// Raised for malformed shapes, indices or arguments.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Shape = std::vector<std::size_t>;

/// 64-byte aligned storage. Vectorised kernels peel unaligned heads, which
/// changes summation order; fixing the alignment keeps results independent of
/// where the heap put a buffer.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::size_t kAlign = 64;

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  T* allocate(std::size_t n) {
    const std::size_t bytes = (n * sizeof(T) + kAlign - 1) / kAlign * kAlign;
    void* p = std::aligned_alloc(kAlign, bytes == 0 ? kAlign : bytes);
    if (!p) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) { std::free(p); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
};

template <typename T>
using Buffer = std::vector<T, AlignedAllocator<T>>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

template <typename T>
struct Node {
  Shape shape;
  Buffer<T> value;
  Buffer<T> grad;  // empty until first accumulation
  bool requires_grad = false;
  bool is_leaf = true;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into parents' grads.
  std::function<void(Node&)> backward;

  std::span<T> ensure_grad() {
    if (grad.empty()) grad.assign(value.size(), T(0));
    return grad;
  }
};

/// Dense row-major tensor with reverse-mode differentiation.
///
/// All operations treat a tensor as a matrix of `rows() x cols()` where
/// `cols()` is the last extent and `rows()` the product of the leading ones.
/// A tensor is a cheap handle; copies share the same underlying node. Values
/// of non-leaf tensors are never mutated after construction.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;

  static Tensor constant(Shape shape, std::vector<T> values);
  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, T value);
  static Tensor scalar(T value);
  /// Trainable leaf.
  static Tensor parameter(Shape shape, std::vector<T> values);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t numel() const { return node_->value.size(); }
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const T> values() const { return node_->value; }
  T at(std::size_t r, std::size_t c) const { return node_->value[r * cols() + c]; }
  T item() const;

  bool requires_grad() const { return node_->requires_grad; }
  bool is_leaf() const { return node_->is_leaf; }

  /// Gradient slot; all zeros when nothing has been accumulated.
  std::span<const T> grad() const;
  void zero_grad();

  /// In-place access for leaves only (optimizers, initialisers, probes).
  std::span<T> mutable_values();
  std::span<T> mutable_grad();

  Tensor detach() const;
  Tensor reshape(Shape shape) const;

  Node<T>* node() const { return node_.get(); }
  const std::shared_ptr<Node<T>>& node_ptr() const { return node_; }

  explicit Tensor(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<Node<T>> node_;
};

/// While alive on the current thread, new operations record no graph.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

/// Builds an operation result. `backward` is attached only when grad mode is
/// on and at least one input requires a gradient. Custom differentiable ops in
/// other modules are built with this.
template <typename T>
Tensor<T> make_result(Shape shape, Buffer<T> values,
                      std::vector<Tensor<T>> inputs,
                      std::function<void(Node<T>&)> backward);

template <typename T>
Tensor<T> make_result(Shape shape, const std::vector<T>& values, std::vector<Tensor<T>> inputs,
                      std::function<void(Node<T>&)> backward) {
  return make_result(std::move(shape), Buffer<T>(values.begin(), values.end()), std::move(inputs),
                     std::move(backward));
}

/// Reverse sweep from a scalar. Gradients accumulate into every reachable
/// node that requires one; leaves keep theirs afterwards.
template <typename T>
void backward(const Tensor<T>& loss);

}  // namespace vtr::numerics
