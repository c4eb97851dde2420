#include "drama/numerics/tape.h"

#include "drama/util/error.h"

namespace drama::numerics {

const Tensor& Var::value() const { return tape->value(*this); }

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::leaf(Tensor value) {
  Node n;
  n.requires_grad = grad_enabled_ && value.requires_grad();
  n.value = std::move(value);
  n.is_leaf = true;
  return push(std::move(n));
}

Var Tape::constant(Tensor value) {
  value.set_requires_grad(false);
  return leaf(std::move(value));
}

Var Tape::apply(const char* op, std::vector<Var> inputs, ForwardFn forward, BackwardFn backward) {
  Node n;
  n.op = op;
  std::vector<const Tensor*> in;
  in.reserve(inputs.size());
  bool any_grad = false;
  bool any_f32 = false;
  for (const Var& v : inputs) {
    if (v.tape != this) throw ConfigError(std::string(op) + ": input recorded on a different tape");
    const Node& src = nodes_.at(v.id);
    in.push_back(&src.value);
    any_grad = any_grad || src.requires_grad;
    any_f32 = any_f32 || src.value.dtype() == DType::kF32;
    n.inputs.push_back(v.id);
  }
  n.value = forward(in);
  if (any_f32) n.value.set_dtype(DType::kF32);
  n.requires_grad = grad_enabled_ && any_grad && static_cast<bool>(backward);
  n.value.set_requires_grad(n.requires_grad);
  n.forward = std::move(forward);
  if (n.requires_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

std::optional<Tensor> Tape::grad(Var v) const {
  const Node& n = nodes_.at(v.id);
  if (!n.requires_grad) return std::nullopt;
  if (n.grad.empty()) return Tensor(n.value.shape(), 0.0);
  return Tensor(n.value.shape(), n.grad);
}

void Tape::backward(Var root) {
  const Tensor& r = value(root);
  if (r.size() != 1) {
    throw ShapeError("backward: root must be scalar, got shape " + r.shape_str());
  }
  backward(root, Tensor(r.shape(), 1.0));
}

void Tape::backward(Var root, const Tensor& seed) {
  Node& r = nodes_.at(root.id);
  if (seed.shape() != r.value.shape()) {
    throw ShapeError("backward: seed shape " + seed.shape_str() + " does not match root " +
                     r.value.shape_str());
  }
  if (!r.requires_grad) return;
  if (r.grad.empty()) r.grad.assign(r.value.size(), 0.0);
  for (std::size_t i = 0; i < seed.size(); ++i) r.grad[i] += seed[i];

  for (std::size_t idx = root.id + 1; idx-- > 0;) {
    Node& n = nodes_[idx];
    if (n.is_leaf || !n.backward || n.grad.empty()) continue;
    BackwardArgs args;
    args.output = &n.value;
    args.grad_out = n.grad;
    args.inputs.reserve(n.inputs.size());
    args.grad_in.reserve(n.inputs.size());
    for (std::uint32_t in : n.inputs) {
      Node& src = nodes_[in];
      args.inputs.push_back(&src.value);
      if (src.requires_grad) {
        if (src.grad.empty()) src.grad.assign(src.value.size(), 0.0);
        args.grad_in.push_back(src.grad.data());
      } else {
        args.grad_in.push_back(nullptr);
      }
    }
    n.backward(args);
  }
}

void Tape::replay() {
  for (Node& n : nodes_) {
    if (n.is_leaf) continue;
    std::vector<const Tensor*> in;
    in.reserve(n.inputs.size());
    bool any_f32 = false;
    for (std::uint32_t i : n.inputs) {
      in.push_back(&nodes_[i].value);
      any_f32 = any_f32 || nodes_[i].value.dtype() == DType::kF32;
    }
    const bool rg = n.requires_grad;
    n.value = n.forward(in);
    if (any_f32) n.value.set_dtype(DType::kF32);
    n.value.set_requires_grad(rg);
  }
}

void Tape::set_leaf_value(Var leaf, const Tensor& value) {
  Node& n = nodes_.at(leaf.id);
  if (!n.is_leaf) throw ConfigError("set_leaf_value: record is not a leaf");
  if (n.value.shape() != value.shape()) {
    throw ShapeError("set_leaf_value: shape " + value.shape_str() + " vs " + n.value.shape_str());
  }
  const bool rg = n.requires_grad;
  const DType dt = n.value.dtype();
  n.value = value;
  n.value.set_dtype(dt);
  n.value.set_requires_grad(rg);
}

void Tape::zero_grad() {
  for (Node& n : nodes_) n.grad.clear();
}

}  // namespace drama::numerics
