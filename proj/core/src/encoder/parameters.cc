#include "drama/encoder/parameters.h"

#include "drama/numerics/ops.h"

#include <cmath>

#include "drama/util/error.h"
#include "drama/util/rng.h"

namespace drama::encoder {

void ParameterSet::add(std::string name, Tensor t) {
  if (index_.contains(name)) throw ConfigError("duplicate parameter '" + name + "'");
  index_.emplace(name, names_.size());
  names_.push_back(std::move(name));
  tensors_.push_back(std::move(t));
}

bool ParameterSet::contains(std::string_view name) const { return index_.contains(std::string(name)); }

Tensor& ParameterSet::at(std::string_view name) {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw ConfigError("missing parameter '" + std::string(name) + "'");
  return tensors_[it->second];
}

const Tensor& ParameterSet::at(std::string_view name) const {
  return const_cast<ParameterSet*>(this)->at(name);
}

std::size_t ParameterSet::total_elements() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.size();
  return n;
}

Tensor ParameterSet::flatten() const {
  std::vector<double> flat;
  flat.reserve(total_elements());
  for (const auto& t : tensors_) flat.insert(flat.end(), t.data().begin(), t.data().end());
  const std::size_t n = flat.size();
  return Tensor({n}, std::move(flat));
}

void ParameterSet::unflatten(const Tensor& flat) {
  if (flat.size() != total_elements()) {
    throw ShapeError("unflatten: " + std::to_string(flat.size()) + " values for " +
                               std::to_string(total_elements()) + " parameters");
  }
  std::size_t off = 0;
  for (auto& t : tensors_) {
    std::copy_n(flat.data().begin() + static_cast<std::ptrdiff_t>(off), t.size(), t.data().begin());
    off += t.size();
  }
}

bool ParameterSet::all_finite() const {
  for (const auto& t : tensors_)
    if (!t.all_finite()) return false;
  return true;
}

std::string layer_key(std::size_t layer, std::string_view part) {
  return "layers." + std::to_string(layer) + "." + std::string(part);
}

ParameterSet init_parameters(const EncoderConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng = make_rng(seed, "encoder.init");
  auto gaussian = [&](numerics::Shape shape, double stddev) {
    Tensor t(std::move(shape));
    for (double& x : t.data()) x = stddev * normal(rng);
    return t;
  };
  const std::size_t d = cfg.hidden_dim, a = cfg.attn_dim(), I = cfg.intermediate_dim;
  const double out_scale = 1.0 / std::sqrt(2.0 * static_cast<double>(cfg.num_layers));
  ParameterSet p;
  p.add("embed", gaussian({cfg.vocab_size, d}, 1.0));
  for (std::size_t l = 0; l < cfg.num_layers; ++l) {
    const double sd = 1.0 / std::sqrt(static_cast<double>(d));
    p.add(layer_key(l, "attn_norm"), Tensor({d}, 1.0));
    p.add(layer_key(l, "wq"), gaussian({d, a}, sd));
    p.add(layer_key(l, "wk"), gaussian({d, a}, sd));
    p.add(layer_key(l, "wv"), gaussian({d, a}, sd));
    p.add(layer_key(l, "wo"), gaussian({a, d}, out_scale / std::sqrt(static_cast<double>(a))));
    p.add(layer_key(l, "ffn_norm"), Tensor({d}, 1.0));
    p.add(layer_key(l, "w_gate"), gaussian({d, I}, sd));
    p.add(layer_key(l, "w_up"), gaussian({d, I}, sd));
    p.add(layer_key(l, "w_down"), gaussian({I, d}, out_scale / std::sqrt(static_cast<double>(I))));
  }
  p.add("final_norm", Tensor({d}, 1.0));
  return p;
}

void check_parameters(const EncoderConfig& cfg, const ParameterSet& params) {
  const std::size_t d = cfg.hidden_dim, a = cfg.attn_dim(), I = cfg.intermediate_dim;
  auto expect = [&](const std::string& name, numerics::Shape shape) {
    if (!params.contains(name)) throw ConfigError("checkpoint is missing parameter '" + name + "'");
    const auto& got = params.at(name).shape();
    if (got != shape) {
      throw ConfigError("parameter '" + name + "' has shape " + numerics::shape_to_string(got) +
                        ", config implies " + numerics::shape_to_string(shape));
    }
  };
  expect("embed", {cfg.vocab_size, d});
  for (std::size_t l = 0; l < cfg.num_layers; ++l) {
    expect(layer_key(l, "attn_norm"), {d});
    expect(layer_key(l, "wq"), {d, a});
    expect(layer_key(l, "wk"), {d, a});
    expect(layer_key(l, "wv"), {d, a});
    expect(layer_key(l, "wo"), {a, d});
    expect(layer_key(l, "ffn_norm"), {d});
    expect(layer_key(l, "w_gate"), {d, I});
    expect(layer_key(l, "w_up"), {d, I});
    expect(layer_key(l, "w_down"), {I, d});
  }
  expect("final_norm", {d});
  const std::size_t expected = 2 + 9 * cfg.num_layers;
  if (params.size() != expected) {
    throw ConfigError("parameter set holds " + std::to_string(params.size()) + " tensors, config implies " +
                      std::to_string(expected));
  }
}

BoundParameters::BoundParameters(numerics::Tape& tape, const ParameterSet& params, bool requires_grad)
    : tape_(&tape) {
  vars_.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor t = params.tensor(i);
    t.set_requires_grad(requires_grad);
    vars_.push_back(tape.leaf(std::move(t)));
    index_.emplace(params.name(i), i);
  }
}

BoundParameters BoundParameters::from_flat(Var flat, const ParameterSet& like) {
  if (flat.value().size() != like.total_elements()) {
    throw ShapeError("from_flat: " + std::to_string(flat.value().size()) + " values for " +
                     std::to_string(like.total_elements()) + " parameters");
  }
  BoundParameters b;
  b.tape_ = flat.tape;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < like.size(); ++i) {
    const std::size_t n = like.tensor(i).size();
    b.vars_.push_back(numerics::ops::reshape(numerics::ops::slice_cols(flat, offset, n), like.tensor(i).shape()));
    b.index_.emplace(like.name(i), i);
    offset += n;
  }
  return b;
}

Var BoundParameters::operator[](std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw ConfigError("unbound parameter '" + std::string(name) + "'");
  return vars_[it->second];
}

ParameterSet BoundParameters::gradients(const ParameterSet& like) const {
  ParameterSet g;
  for (std::size_t i = 0; i < like.size(); ++i) {
    auto grad = tape_->grad(vars_[i]);
    g.add(like.name(i), grad ? std::move(*grad) : Tensor(like.tensor(i).shape(), 0.0));
  }
  return g;
}

}  // namespace drama::encoder
