#include "protosed/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace protosed {

namespace {

std::atomic<std::uint64_t> g_next_node_id{1};

thread_local bool g_grad_enabled = true;

std::shared_ptr<detail::TensorNode> new_node(Shape shape,
                                             std::vector<float> data,
                                             bool requires_grad) {
  auto node = std::make_shared<detail::TensorNode>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->requires_grad = requires_grad;
  node->id = g_next_node_id.fetch_add(1, std::memory_order_relaxed);
  return node;
}

}  // namespace

std::int64_t numel(const Shape& shape) {
  std::int64_t n = 1;
  for (int d : shape) n *= d;
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace detail {

void TensorNode::ensure_grad() {
  if (grad.empty()) grad.assign(data.size(), 0.0f);
}

}  // namespace detail

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  for (int d : shape) {
    if (d <= 0) throw std::invalid_argument("Tensor: dimensions must be positive, got " + shape_to_string(shape));
  }
  auto n = static_cast<std::size_t>(numel(shape));
  return Tensor(new_node(std::move(shape), std::vector<float>(n, 0.0f), requires_grad));
}

Tensor Tensor::full(Shape shape, float value, bool requires_grad) {
  Tensor t = zeros(std::move(shape), requires_grad);
  std::fill(t.node_->data.begin(), t.node_->data.end(), value);
  return t;
}

Tensor Tensor::from_data(Shape shape, std::vector<float> data, bool requires_grad) {
  for (int d : shape) {
    if (d <= 0) throw std::invalid_argument("Tensor: dimensions must be positive, got " + shape_to_string(shape));
  }
  if (numel(shape) != static_cast<std::int64_t>(data.size())) {
    throw std::invalid_argument("Tensor: data length " + std::to_string(data.size()) +
                                " does not match shape " + shape_to_string(shape));
  }
  return Tensor(new_node(std::move(shape), std::move(data), requires_grad));
}

Tensor Tensor::scalar(float value, bool requires_grad) {
  return from_data({1}, {value}, requires_grad);
}

const Shape& Tensor::shape() const {
  if (!node_) throw std::logic_error("Tensor: undefined");
  return node_->shape;
}

int Tensor::rank() const { return static_cast<int>(shape().size()); }

int Tensor::dim(int axis) const {
  const Shape& s = shape();
  if (axis < 0 || axis >= static_cast<int>(s.size())) {
    throw std::invalid_argument("Tensor: axis out of range");
  }
  return s[axis];
}

std::int64_t Tensor::size() const { return numel(shape()); }

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

std::span<const float> Tensor::data() const {
  if (!node_) throw std::logic_error("Tensor: undefined");
  return node_->data;
}

std::span<float> Tensor::mutable_data() {
  if (!node_) throw std::logic_error("Tensor: undefined");
  return node_->data;
}

std::span<const float> Tensor::grad() const {
  if (!node_) throw std::logic_error("Tensor: undefined");
  return node_->grad;
}

float Tensor::item() const {
  if (size() != 1) throw std::invalid_argument("Tensor: item() needs a scalar, got " + shape_to_string(shape()));
  return node_->data[0];
}

void Tensor::set_requires_grad(bool on) {
  if (!node_) throw std::logic_error("Tensor: undefined");
  node_->requires_grad = on;
}

void Tensor::zero_grad() {
  if (node_ && !node_->grad.empty()) {
    std::fill(node_->grad.begin(), node_->grad.end(), 0.0f);
  }
}

void Tensor::backward() const {
  if (!node_) throw std::logic_error("Tensor: undefined");
  if (size() != 1) {
    throw std::invalid_argument("backward: loss must be a scalar, got " + shape_to_string(shape()));
  }

  // Collect the reachable subgraph; creation ids give a topological order.
  std::vector<detail::TensorNode*> nodes;
  std::unordered_set<detail::TensorNode*> seen;
  std::vector<detail::TensorNode*> stack{node_.get()};
  seen.insert(node_.get());
  while (!stack.empty()) {
    detail::TensorNode* n = stack.back();
    stack.pop_back();
    nodes.push_back(n);
    for (const auto& p : n->parents) {
      if (seen.insert(p.get()).second) stack.push_back(p.get());
    }
  }
  std::sort(nodes.begin(), nodes.end(),
            [](const detail::TensorNode* a, const detail::TensorNode* b) { return a->id > b->id; });

  node_->ensure_grad();
  node_->grad[0] += 1.0f;
  for (detail::TensorNode* n : nodes) {
    if (n->backprop && !n->grad.empty()) n->backprop();
  }
}

Tensor Tensor::clone_detached() const {
  if (!node_) throw std::logic_error("Tensor: undefined");
  return from_data(node_->shape, node_->data, false);
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }

NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_enabled() { return g_grad_enabled; }

Tensor ParamStore::add_parameter(const std::string& name, Tensor t) {
  if (entries_.count(name)) throw std::invalid_argument("ParamStore: duplicate name '" + name + "'");
  t.set_requires_grad(true);
  entries_[name] = Entry{t, true};
  return t;
}

Tensor ParamStore::add_buffer(const std::string& name, Tensor t) {
  if (entries_.count(name)) throw std::invalid_argument("ParamStore: duplicate name '" + name + "'");
  t.set_requires_grad(false);
  entries_[name] = Entry{t, false};
  return t;
}

bool ParamStore::contains(const std::string& name) const { return entries_.count(name) != 0; }

Tensor ParamStore::get(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::invalid_argument("ParamStore: unknown name '" + name + "'");
  return it->second.tensor;
}

bool ParamStore::is_parameter(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::invalid_argument("ParamStore: unknown name '" + name + "'");
  return it->second.trainable;
}

std::vector<std::pair<std::string, Tensor>> ParamStore::parameters() const {
  std::vector<std::pair<std::string, Tensor>> out;
  for (const auto& [name, entry] : entries_) {
    if (entry.trainable) out.emplace_back(name, entry.tensor);
  }
  return out;
}

std::vector<std::pair<std::string, Tensor>> ParamStore::all() const {
  std::vector<std::pair<std::string, Tensor>> out;
  for (const auto& [name, entry] : entries_) out.emplace_back(name, entry.tensor);
  return out;
}

void ParamStore::zero_grad() {
  for (auto& [name, entry] : entries_) entry.tensor.zero_grad();
}

std::int64_t ParamStore::parameter_count() const {
  std::int64_t n = 0;
  for (const auto& [name, entry] : entries_) {
    if (entry.trainable) n += entry.tensor.size();
  }
  return n;
}

}  // namespace protosed
