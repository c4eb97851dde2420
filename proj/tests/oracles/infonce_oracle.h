#pragma once

// Contrastive loss by direct enumeration: cosine from raw dot products,
// softmax denominator summed term by term in long double.

#include <cmath>
#include <vector>

#include "drama/numerics/tensor.h"

namespace drama::oracle {

inline double dot_cos(const numerics::Tensor& a, std::size_t i, const numerics::Tensor& b, std::size_t j) {
  const std::size_t d = a.shape()[1];
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t k = 0; k < d; ++k) {
    ab += a[i * d + k] * b[j * d + k];
    aa += a[i * d + k] * a[i * d + k];
    bb += b[j * d + k] * b[j * d + k];
  }
  return ab / std::sqrt(aa * bb);
}

/// Mean over queries of -log softmax over the whole candidate pool.
inline double enumerate_batch_loss(const numerics::Tensor& q, const numerics::Tensor& c,
                                   const std::vector<std::size_t>& pos, double tau) {
  const std::size_t B = q.shape()[0], P = c.shape()[0];
  double total = 0.0;
  for (std::size_t i = 0; i < B; ++i) {
    long double z = 0.0L;
    for (std::size_t j = 0; j < P; ++j) z += std::exp(static_cast<long double>(dot_cos(q, i, c, j) / tau));
    total += -(dot_cos(q, i, c, pos[i]) / tau - static_cast<double>(std::log(z)));
  }
  return total / static_cast<double>(B);
}

}  // namespace drama::oracle
