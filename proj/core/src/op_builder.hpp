#pragma once

// Internal glue for defining differentiable ops. Not installed.

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "protosed/tensor.hpp"

namespace protosed::detail {

struct OpBuilder {
  static TensorNode* raw(const Tensor& t) { return t.node_.get(); }

  /// Creates the output tensor of an op. If grad mode is on and any input
  /// requires grad, the output requires grad and keeps all inputs alive as
  /// parents (backprop lambdas may read any input's data).
  static Tensor forward(Shape shape, std::vector<float> data,
                        std::initializer_list<Tensor> inputs) {
    Tensor out = Tensor::from_data(std::move(shape), std::move(data), false);
    bool needs = grad_enabled();
    if (needs) {
      bool any = false;
      for (const Tensor& in : inputs) any = any || in.requires_grad();
      needs = any;
    }
    if (needs) {
      out.node_->requires_grad = true;
      out.node_->parents.reserve(inputs.size());
      for (const Tensor& in : inputs) out.node_->parents.push_back(in.node_);
    }
    return out;
  }

  static Tensor forward(Shape shape, std::vector<float> data,
                        const std::vector<Tensor>& inputs) {
    Tensor out = Tensor::from_data(std::move(shape), std::move(data), false);
    bool needs = grad_enabled();
    if (needs) {
      bool any = false;
      for (const Tensor& in : inputs) any = any || in.requires_grad();
      needs = any;
    }
    if (needs) {
      out.node_->requires_grad = true;
      out.node_->parents.reserve(inputs.size());
      for (const Tensor& in : inputs) out.node_->parents.push_back(in.node_);
    }
    return out;
  }

  /// Installs the backward closure on an output produced by forward().
  /// No-op when the output does not require grad (the closure is dropped).
  template <typename Fn>
  static void set_backprop(Tensor& out, Fn&& fn) {
    if (out.node_->requires_grad) out.node_->backprop = std::forward<Fn>(fn);
  }
};

}  // namespace protosed::detail
