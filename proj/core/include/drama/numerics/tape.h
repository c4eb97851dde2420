#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "drama/numerics/tensor.h"

namespace drama::numerics {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; only valid while
/// its tape is alive.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  double item() const { return value().item(); }
};

struct BackwardArgs {
  std::vector<const Tensor*> inputs;
  const Tensor* output = nullptr;
  std::span<const double> grad_out;
  // One accumulator per input; nullptr where the input needs no gradient.
  std::vector<double*> grad_in;
};

using ForwardFn = std::function<Tensor(const std::vector<const Tensor*>&)>;
using BackwardFn = std::function<void(const BackwardArgs&)>;

/// Reverse-mode tape. Records are appended in evaluation order, so every
/// record's inputs precede it. One tape per training step; destroy it after
/// backward().
class Tape {
 public:
  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Records a leaf. The leaf needs a gradient iff `value.requires_grad()`.
  Var leaf(Tensor value);
  Var constant(Tensor value);

  /// Applies a primitive. `forward` is kept so the tape can be replayed.
  /// `backward` may be empty for non-differentiable ops.
  Var apply(const char* op, std::vector<Var> inputs, ForwardFn forward, BackwardFn backward);

  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  /// Gradient of the last backward() root wrt `v`; nullopt for records that
  /// do not require a gradient.
  std::optional<Tensor> grad(Var v) const;

  /// Accumulates d(root)/d(record) for every record. `root` must be scalar.
  void backward(Var root);
  /// Vector-Jacobian product: seeds the root's adjoint with `seed`.
  void backward(Var root, const Tensor& seed);

  /// Recomputes every non-leaf value from the current leaf values.
  void replay();
  /// Overwrites a leaf's value (shape must match). Call replay() afterwards.
  void set_leaf_value(Var leaf, const Tensor& value);

  void zero_grad();
  bool grad_enabled() const { return grad_enabled_; }
  std::size_t size() const { return nodes_.size(); }
  const char* op_name(Var v) const { return nodes_.at(v.id).op; }
  std::span<const std::uint32_t> inputs_of(Var v) const { return nodes_.at(v.id).inputs; }

 private:
  struct Node {
    Tensor value;
    std::vector<double> grad;
    std::vector<std::uint32_t> inputs;
    ForwardFn forward;
    BackwardFn backward;
    bool requires_grad = false;
    bool is_leaf = false;
    const char* op = "leaf";
  };

  Var push(Node node);

  std::deque<Node> nodes_;  // deque: references stay valid as records are appended
  bool grad_enabled_;
};

}  // namespace drama::numerics
