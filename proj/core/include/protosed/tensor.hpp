#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace protosed {

using Shape = std::vector<int>;

std::int64_t numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

namespace detail {

/// One node of the eagerly-built reverse-mode graph. Nodes are created in
/// topological order, so a descending walk over `id` is a valid backward
/// schedule.
struct TensorNode {
  Shape shape;
  std::vector<float> data;
  std::vector<float> grad;  // allocated on first write
  bool requires_grad = false;
  std::uint64_t id = 0;
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void()> backprop;  // accumulates this node's grad into parents

  void ensure_grad();
};

struct OpBuilder;

}  // namespace detail

/// Dense row-major float32 tensor with optional gradient buffer. Copies are
/// shallow handles onto a shared node; contents are treated as immutable once
/// the tensor has entered a gradient graph (grad buffers excepted).
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, float value, bool requires_grad = false);
  static Tensor from_data(Shape shape, std::vector<float> data,
                          bool requires_grad = false);
  static Tensor scalar(float value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  int rank() const;
  int dim(int axis) const;
  std::int64_t size() const;
  bool requires_grad() const;

  std::span<const float> data() const;
  /// Mutable view of the payload. Only leaves that are not (yet) part of a
  /// recorded graph may be written through this.
  std::span<float> mutable_data();
  std::span<const float> grad() const;
  float item() const;

  void set_requires_grad(bool on);
  void zero_grad();

  /// Reverse-mode sweep from a scalar loss: seeds d(loss)/d(loss) = 1 and
  /// accumulates gradients into every reachable tensor with requires_grad.
  /// Calling twice without zero_grad accumulates.
  void backward() const;

  /// Deep copy of the payload as a detached leaf (no graph, no grad).
  Tensor clone_detached() const;

 private:
  friend struct detail::OpBuilder;
  explicit Tensor(std::shared_ptr<detail::TensorNode> node)
      : node_(std::move(node)) {}
  std::shared_ptr<detail::TensorNode> node_;
};

/// While alive, ops record no graph (forward values only). Used for eval-mode
/// inference and feature plumbing.
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

/// Named parameter/buffer registry with deterministic (lexicographic)
/// iteration. Parameters are trainable; buffers are persistent state such as
/// batch-norm running statistics.
class ParamStore {
 public:
  Tensor add_parameter(const std::string& name, Tensor t);
  Tensor add_buffer(const std::string& name, Tensor t);

  bool contains(const std::string& name) const;
  Tensor get(const std::string& name) const;
  bool is_parameter(const std::string& name) const;

  /// Trainable entries, lexicographic by name.
  std::vector<std::pair<std::string, Tensor>> parameters() const;
  /// Parameters and buffers together, lexicographic by name.
  std::vector<std::pair<std::string, Tensor>> all() const;

  void zero_grad();
  std::int64_t parameter_count() const;
  std::size_t entry_count() const { return entries_.size(); }

 private:
  struct Entry {
    Tensor tensor;
    bool trainable = false;
  };
  std::map<std::string, Entry> entries_;
};

}  // namespace protosed
