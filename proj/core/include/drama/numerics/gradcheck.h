#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "drama/numerics/tape.h"

namespace drama::numerics {

/// Builds a scalar-valued graph from the leaf `x` recorded on `tape`.
using ScalarFn = std::function<Var(Tape& tape, Var x)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
};

/// Compares the tape gradient of `fn` at `point` with central differences,
///   err_i = |analytic_i - fd_i| / max(1, |fd_i|),
/// and returns the maximum. `coords` restricts the check to a subset of
/// coordinates (all coordinates when empty). Throws NumericError naming
/// the coordinate if any evaluation is non-finite.
GradCheckResult grad_check(const ScalarFn& fn, const Tensor& point, double step,
                           std::span<const std::size_t> coords = {});

}  // namespace drama::numerics
