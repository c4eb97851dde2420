#include "drama/numerics/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "drama/util/error.h"

namespace drama::numerics {
namespace {

double evaluate(const ScalarFn& fn, const Tensor& x, std::size_t coord) {
  Tape tape(false);
  Tensor leaf = x;
  leaf.set_requires_grad(false);
  const double v = fn(tape, tape.leaf(std::move(leaf))).item();
  if (!std::isfinite(v)) {
    throw NumericError("grad_check: non-finite function value while perturbing coordinate " +
                       std::to_string(coord));
  }
  return v;
}

}  // namespace

GradCheckResult grad_check(const ScalarFn& fn, const Tensor& point, double step,
                           std::span<const std::size_t> coords) {
  if (!(step > 0.0)) throw ConfigError("grad_check: step must be > 0");

  Tape tape(true);
  Tensor x0 = point;
  x0.set_requires_grad(true);
  Var x = tape.leaf(std::move(x0));
  Var root = fn(tape, x);
  if (!std::isfinite(root.item())) throw NumericError("grad_check: non-finite value at the base point");
  tape.backward(root);
  const Tensor analytic = tape.grad(x).value();

  std::vector<std::size_t> all;
  if (coords.empty()) {
    all.resize(point.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    coords = all;
  }

  GradCheckResult res;
  Tensor probe = point;
  for (std::size_t i : coords) {
    if (i >= point.size()) throw ConfigError("grad_check: coordinate " + std::to_string(i) + " out of range");
    if (!std::isfinite(analytic[i])) {
      throw NumericError("grad_check: non-finite analytic gradient at coordinate " + std::to_string(i));
    }
    const double orig = probe[i];
    probe[i] = orig + step;
    const double fp = evaluate(fn, probe, i);
    probe[i] = orig - step;
    const double fm = evaluate(fn, probe, i);
    probe[i] = orig;
    const double fd = (fp - fm) / (2.0 * step);
    const double err = std::abs(analytic[i] - fd) / std::max(1.0, std::abs(fd));
    if (err > res.max_rel_error || res.checked == 0) {
      res.max_rel_error = err;
      res.worst_index = i;
    }
    ++res.checked;
  }
  return res;
}

}  // namespace drama::numerics
