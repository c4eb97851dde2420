#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "drama/encoder/config.h"
#include "drama/numerics/tape.h"
#include "drama/numerics/tensor.h"

namespace drama::encoder {

using numerics::Tensor;
using numerics::Var;

/// Ordered collection of named tensors. Iteration order is insertion order,
/// which fixes the layout of checkpoints and flattened gradient vectors.
class ParameterSet {
 public:
  void add(std::string name, Tensor t);
  bool contains(std::string_view name) const;
  Tensor& at(std::string_view name);
  const Tensor& at(std::string_view name) const;

  std::size_t size() const { return tensors_.size(); }
  const std::string& name(std::size_t i) const { return names_[i]; }
  Tensor& tensor(std::size_t i) { return tensors_[i]; }
  const Tensor& tensor(std::size_t i) const { return tensors_[i]; }
  std::size_t total_elements() const;

  /// Concatenation of all tensors in order, and its inverse.
  Tensor flatten() const;
  void unflatten(const Tensor& flat);

  bool all_finite() const;
  friend bool operator==(const ParameterSet& a, const ParameterSet& b) {
    return a.names_ == b.names_ && a.tensors_ == b.tensors_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
  std::unordered_map<std::string, std::size_t> index_;
};

std::string layer_key(std::size_t layer, std::string_view part);

/// Seeded initialization: embeddings ~ N(0, 1), projections ~ N(0, 1/fan_in),
/// output projections additionally scaled by 1/sqrt(2 L), norms = 1.
ParameterSet init_parameters(const EncoderConfig& cfg, std::uint64_t seed);

/// Throws ConfigError if any tensor is missing or mis-shaped for `cfg`.
void check_parameters(const EncoderConfig& cfg, const ParameterSet& params);

/// Parameters recorded as leaves on one tape, addressable by name.
class BoundParameters {
 public:
  BoundParameters(numerics::Tape& tape, const ParameterSet& params, bool requires_grad);
  /// Views over consecutive slices of one flat vector laid out like `like`;
  /// used for gradient checks over the whole parameter set.
  static BoundParameters from_flat(Var flat, const ParameterSet& like);
  Var operator[](std::string_view name) const;
  Var at(std::size_t i) const { return vars_[i]; }
  std::size_t size() const { return vars_.size(); }
  numerics::Tape& tape() const { return *tape_; }

  /// Gradients of every parameter in ParameterSet order (zeros where the
  /// root did not depend on a parameter).
  ParameterSet gradients(const ParameterSet& like) const;

 private:
  BoundParameters() = default;
  numerics::Tape* tape_ = nullptr;
  std::vector<Var> vars_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace drama::encoder
