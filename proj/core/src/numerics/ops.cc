#include "drama/numerics/ops.h"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "drama/util/error.h"

namespace drama::numerics::ops {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

CMapMat as_mat(const Tensor& t) {
  return CMapMat(t.data().data(), static_cast<Eigen::Index>(t.rows()),
                 static_cast<Eigen::Index>(t.cols()));
}

MapMat as_mat(double* p, std::size_t r, std::size_t c) {
  return MapMat(p, static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}

[[noreturn]] void shape_fail(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + a.shape_str() + " and " +
                   b.shape_str());
}

void require_same(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_fail(op, a, b);
}

Shape matrix_shape(std::size_t r, std::size_t c) { return {r, c}; }

// Elementwise unary op with derivative expressed through (x, y).
template <class F, class D>
Var unary(const char* op, Var a, F f, D dfdx) {
  return a.tape->apply(
      op, {a},
      [f](const std::vector<const Tensor*>& in) {
        Tensor out(in[0]->shape());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = f((*in[0])[i]);
        return out;
      },
      [dfdx](const BackwardArgs& b) {
        if (!b.grad_in[0]) return;
        const Tensor& x = *b.inputs[0];
        const Tensor& y = *b.output;
        for (std::size_t i = 0; i < x.size(); ++i) b.grad_in[0][i] += b.grad_out[i] * dfdx(x[i], y[i]);
      });
}

double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var matmul(Var a, Var b) {
  const Tensor &A = a.value(), &B = b.value();
  if (A.cols() != B.rows()) shape_fail("matmul", A, B);
  return a.tape->apply(
      "matmul", {a, b},
      [](const std::vector<const Tensor*>& in) {
        Tensor out(matrix_shape(in[0]->rows(), in[1]->cols()));
        as_mat(out.data().data(), out.rows(), out.cols()).noalias() = as_mat(*in[0]) * as_mat(*in[1]);
        return out;
      },
      [](const BackwardArgs& b) {
        const Tensor &A = *b.inputs[0], &B = *b.inputs[1];
        CMapMat G(b.grad_out.data(), A.rows(), B.cols());
        if (b.grad_in[0]) as_mat(b.grad_in[0], A.rows(), A.cols()).noalias() += G * as_mat(B).transpose();
        if (b.grad_in[1]) as_mat(b.grad_in[1], B.rows(), B.cols()).noalias() += as_mat(A).transpose() * G;
      });
}

Var matmul_nt(Var a, Var b) {
  const Tensor &A = a.value(), &B = b.value();
  if (A.cols() != B.cols()) shape_fail("matmul_nt", A, B);
  return a.tape->apply(
      "matmul_nt", {a, b},
      [](const std::vector<const Tensor*>& in) {
        Tensor out(matrix_shape(in[0]->rows(), in[1]->rows()));
        as_mat(out.data().data(), out.rows(), out.cols()).noalias() =
            as_mat(*in[0]) * as_mat(*in[1]).transpose();
        return out;
      },
      [](const BackwardArgs& b) {
        const Tensor &A = *b.inputs[0], &B = *b.inputs[1];
        CMapMat G(b.grad_out.data(), A.rows(), B.rows());
        if (b.grad_in[0]) as_mat(b.grad_in[0], A.rows(), A.cols()).noalias() += G * as_mat(B);
        if (b.grad_in[1]) as_mat(b.grad_in[1], B.rows(), B.cols()).noalias() += G.transpose() * as_mat(A);
      });
}

Var transpose(Var a) {
  return a.tape->apply(
      "transpose", {a},
      [](const std::vector<const Tensor*>& in) {
        Tensor out(matrix_shape(in[0]->cols(), in[0]->rows()));
        as_mat(out.data().data(), out.rows(), out.cols()) = as_mat(*in[0]).transpose();
        return out;
      },
      [](const BackwardArgs& b) {
        if (!b.grad_in[0]) return;
        const Tensor& A = *b.inputs[0];
        CMapMat G(b.grad_out.data(), A.cols(), A.rows());
        as_mat(b.grad_in[0], A.rows(), A.cols()) += G.transpose();
      });
}

Var add(Var a, Var b) {
  require_same("add", a.value(), b.value());
  return a.tape->apply(
      "add", {a, b},
      [](const std::vector<const Tensor*>& in) {
        Tensor out = *in[0];
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += (*in[1])[i];
        return out;
      },
      [](const BackwardArgs& b) {
        for (int k = 0; k < 2; ++k) {
          if (!b.grad_in[k]) continue;
          for (std::size_t i = 0; i < b.grad_out.size(); ++i) b.grad_in[k][i] += b.grad_out[i];
        }
      });
}

Var sub(Var a, Var b) {
  require_same("sub", a.value(), b.value());
  return a.tape->apply(
      "sub", {a, b},
      [](const std::vector<const Tensor*>& in) {
        Tensor out = *in[0];
        for (std::size_t i = 0; i < out.size(); ++i) out[i] -= (*in[1])[i];
        return out;
      },
      [](const BackwardArgs& b) {
        if (b.grad_in[0])
          for (std::size_t i = 0; i < b.grad_out.size(); ++i) b.grad_in[0][i] += b.grad_out[i];
        if (b.grad_in[1])
          for (std::size_t i = 0; i < b.grad_out.size(); ++i) b.grad_in[1][i] -= b.grad_out[i];
      });
}

Var mul(Var a, Var b) {
  require_same("mul", a.value(), b.value());
  return a.tape->apply(
      "mul", {a, b},
      [](const std::vector<const Tensor*>& in) {
        Tensor out = *in[0];
        for (std::size_t i = 0; i < out.size(); ++i) out[i] *= (*in[1])[i];
        return out;
      },
      [](const BackwardArgs& b) {
        const Tensor &A = *b.inputs[0], &B = *b.inputs[1];
        if (b.grad_in[0])
          for (std::size_t i = 0; i < A.size(); ++i) b.grad_in[0][i] += b.grad_out[i] * B[i];
        if (b.grad_in[1])
          for (std::size_t i = 0; i < A.size(); ++i) b.grad_in[1][i] += b.grad_out[i] * A[i];
      });
}

Var mul_row(Var a, Var r) {
  const Tensor &A = a.value(), &R = r.value();
  if (R.size() != A.cols()) shape_fail("mul_row", A, R);
  return a.tape->apply(
      "mul_row", {a, r},
      [](const std::vector<const Tensor*>& in) {
        Tensor out = *in[0];
        const std::size_t n = out.cols();
        for (std::size_t i = 0; i < out.size(); ++i) out[i] *= (*in[1])[i % n];
        return out;
      },
      [](const BackwardArgs& b) {
        const Tensor &A = *b.inputs[0], &R = *b.inputs[1];
        const std::size_t n = A.cols();
        if (b.grad_in[0])
          for (std::size_t i = 0; i < A.size(); ++i) b.grad_in[0][i] += b.grad_out[i] * R[i % n];
        if (b.grad_in[1])
          for (std::size_t i = 0; i < A.size(); ++i) b.grad_in[1][i % n] += b.grad_out[i] * A[i];
      });
}

Var mul_scalar(Var a, Var s) {
  if (s.value().size() != 1) shape_fail("mul_scalar", a.value(), s.value());
  return a.tape->apply(
      "mul_scalar", {a, s},
      [](const std::vector<const Tensor*>& in) {
        Tensor out = *in[0];
        const double c = (*in[1])[0];
        for (double& x : out.data()) x *= c;
        return out;
      },
      [](const BackwardArgs& b) {
        const Tensor& A = *b.inputs[0];
        const double c = (*b.inputs[1])[0];
        if (b.grad_in[0])
          for (std::size_t i = 0; i < A.size(); ++i) b.grad_in[0][i] += b.grad_out[i] * c;
        if (b.grad_in[1]) {
          double acc = 0.0;
          for (std::size_t i = 0; i < A.size(); ++i) acc += b.grad_out[i] * A[i];
          b.grad_in[1][0] += acc;
        }
      });
}

Var scale(Var a, double c) {
  return unary("scale", a, [c](double x) { return x * c; }, [c](double, double) { return c; });
}

Var add_scalar(Var a, double c) {
  return unary("add_scalar", a, [c](double x) { return x + c; }, [](double, double) { return 1.0; });
}

Var sum(Var a) {
  return a.tape->apply(
      "sum", {a},
      [](const std::vector<const Tensor*>& in) {
        double acc = 0.0;
        for (double x : in[0]->data()) acc += x;
        return Tensor::scalar(acc);
      },
      [](const BackwardArgs& b) {
        if (!b.grad_in[0]) return;
        for (std::size_t i = 0; i < b.inputs[0]->size(); ++i) b.grad_in[0][i] += b.grad_out[0];
      });
}

Var mean(Var a) { return scale(sum(a), 1.0 / static_cast<double>(a.value().size())); }

Var sigmoid(Var a) {
  return unary("sigmoid", a, sigmoid_scalar, [](double, double y) { return y * (1.0 - y); });
}

Var log(Var a) {
  return unary("log", a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var exp(Var a) {
  return unary("exp", a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var clamp(Var a, double lo, double hi) {
  return unary(
      "clamp", a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
      [lo, hi](double x, double) { return (x > lo && x < hi) ? 1.0 : 0.0; });
}

Var row_softmax(Var a) {
  return a.tape->apply(
      "row_softmax", {a},
      [](const std::vector<const Tensor*>& in) {
        const Tensor& x = *in[0];
        Tensor out(x.shape());
        const std::size_t R = x.rows(), C = x.cols();
        for (std::size_t r = 0; r < R; ++r) {
          const double* xr = &x[r * C];
          double* yr = &out[r * C];
          double mx = -std::numeric_limits<double>::infinity();
          for (std::size_t c = 0; c < C; ++c) mx = std::max(mx, xr[c]);
          if (!std::isfinite(mx)) continue;  // fully masked row stays zero
          double z = 0.0;
          for (std::size_t c = 0; c < C; ++c) z += (yr[c] = std::exp(xr[c] - mx));
          for (std::size_t c = 0; c < C; ++c) yr[c] /= z;
        }
        return out;
      },
      [](const BackwardArgs& b) {
        if (!b.grad_in[0]) return;
        const Tensor& y = *b.output;
        const std::size_t R = y.rows(), C = y.cols();
        for (std::size_t r = 0; r < R; ++r) {
          const double* yr = &y[r * C];
          const double* gr = &b.grad_out[r * C];
          double dot = 0.0;
          for (std::size_t c = 0; c < C; ++c) dot += gr[c] * yr[c];
          for (std::size_t c = 0; c < C; ++c) b.grad_in[0][r * C + c] += yr[c] * (gr[c] - dot);
        }
      });
}

Var masked_fill(Var a, std::vector<std::uint8_t> mask, double fill) {
  if (mask.size() != a.value().size()) {
    throw ShapeError("masked_fill: mask of " + std::to_string(mask.size()) +
                     " entries for tensor of shape " + a.value().shape_str());
  }
  auto m = std::make_shared<const std::vector<std::uint8_t>>(std::move(mask));
  return a.tape->apply(
      "masked_fill", {a},
      [m, fill](const std::vector<const Tensor*>& in) {
        Tensor out = *in[0];
        for (std::size_t i = 0; i < out.size(); ++i)
          if ((*m)[i]) out[i] = fill;
        return out;
      },
      [m](const BackwardArgs& b) {
        if (!b.grad_in[0]) return;
        for (std::size_t i = 0; i < b.grad_out.size(); ++i)
          if (!(*m)[i]) b.grad_in[0][i] += b.grad_out[i];
      });
}

Var rms_normalize(Var x, double eps) {
  return x.tape->apply(
      "rms_normalize", {x},
      [eps](const std::vector<const Tensor*>& in) {
        const Tensor& t = *in[0];
        Tensor out(t.shape());
        const std::size_t R = t.rows(), C = t.cols();
        for (std::size_t r = 0; r < R; ++r) {
          double ss = 0.0;
          for (std::size_t c = 0; c < C; ++c) ss += t[r * C + c] * t[r * C + c];
          const double inv = 1.0 / std::sqrt(ss / static_cast<double>(C) + eps);
          for (std::size_t c = 0; c < C; ++c) out[r * C + c] = t[r * C + c] * inv;
        }
        return out;
      },
      [eps](const BackwardArgs& b) {
        if (!b.grad_in[0]) return;
        const Tensor& t = *b.inputs[0];
        const std::size_t R = t.rows(), C = t.cols();
        const double n = static_cast<double>(C);
        for (std::size_t r = 0; r < R; ++r) {
          double ss = 0.0, gx = 0.0;
          for (std::size_t c = 0; c < C; ++c) {
            ss += t[r * C + c] * t[r * C + c];
            gx += b.grad_out[r * C + c] * t[r * C + c];
          }
          const double inv = 1.0 / std::sqrt(ss / n + eps);
          const double k = inv * inv * inv * gx / n;
          for (std::size_t c = 0; c < C; ++c)
            b.grad_in[0][r * C + c] += inv * b.grad_out[r * C + c] - k * t[r * C + c];
        }
      });
}

Var rms_normalize_counted(Var x, Var count, double eps) {
  if (count.value().size() != 1) shape_fail("rms_normalize_counted", x.value(), count.value());
  return x.tape->apply(
      "rms_normalize_counted", {x, count},
      [eps](const std::vector<const Tensor*>& in) {
        const Tensor& t = *in[0];
        const double n = (*in[1])[0];
        Tensor out(t.shape());
        const std::size_t R = t.rows(), C = t.cols();
        for (std::size_t r = 0; r < R; ++r) {
          double ss = 0.0;
          for (std::size_t c = 0; c < C; ++c) ss += t[r * C + c] * t[r * C + c];
          const double inv = 1.0 / std::sqrt(ss / n + eps);
          for (std::size_t c = 0; c < C; ++c) out[r * C + c] = t[r * C + c] * inv;
        }
        return out;
      },
      [eps](const BackwardArgs& b) {
        const Tensor& t = *b.inputs[0];
        const double n = (*b.inputs[1])[0];
        const std::size_t R = t.rows(), C = t.cols();
        double gcount = 0.0;
        for (std::size_t r = 0; r < R; ++r) {
          double ss = 0.0, gx = 0.0;
          for (std::size_t c = 0; c < C; ++c) {
            ss += t[r * C + c] * t[r * C + c];
            gx += b.grad_out[r * C + c] * t[r * C + c];
          }
          const double inv = 1.0 / std::sqrt(ss / n + eps);
          const double inv3 = inv * inv * inv;
          if (b.grad_in[0]) {
            const double k = inv3 * gx / n;
            for (std::size_t c = 0; c < C; ++c)
              b.grad_in[0][r * C + c] += inv * b.grad_out[r * C + c] - k * t[r * C + c];
          }
          gcount += gx * inv3 * ss / (2.0 * n * n);
        }
        if (b.grad_in[1]) b.grad_in[1][0] += gcount;
      });
}

Var l2_normalize_rows(Var x) {
  return x.tape->apply(
      "l2_normalize_rows", {x},
      [](const std::vector<const Tensor*>& in) {
        const Tensor& t = *in[0];
        Tensor out(t.shape());
        const std::size_t R = t.rows(), C = t.cols();
        for (std::size_t r = 0; r < R; ++r) {
          double ss = 0.0;
          for (std::size_t c = 0; c < C; ++c) ss += t[r * C + c] * t[r * C + c];
          if (!(ss > 0.0)) {
            throw DegenerateEmbeddingError("l2_normalize_rows: row " + std::to_string(r) +
                                           " has zero norm");
          }
          const double inv = 1.0 / std::sqrt(ss);
          for (std::size_t c = 0; c < C; ++c) out[r * C + c] = t[r * C + c] * inv;
        }
        return out;
      },
      [](const BackwardArgs& b) {
        if (!b.grad_in[0]) return;
        const Tensor& t = *b.inputs[0];
        const Tensor& y = *b.output;
        const std::size_t R = t.rows(), C = t.cols();
        for (std::size_t r = 0; r < R; ++r) {
          double ss = 0.0, gy = 0.0;
          for (std::size_t c = 0; c < C; ++c) {
            ss += t[r * C + c] * t[r * C + c];
            gy += b.grad_out[r * C + c] * y[r * C + c];
          }
          const double inv = 1.0 / std::sqrt(ss);
          for (std::size_t c = 0; c < C; ++c)
            b.grad_in[0][r * C + c] += inv * (b.grad_out[r * C + c] - y[r * C + c] * gy);
        }
      });
}

Var gated_linear(Var gate, Var up, Activation act) {
  require_same("gated_linear", gate.value(), up.value());
  auto f = [act](double a) {
    if (act == Activation::kSilu) return a * sigmoid_scalar(a);
    constexpr double k = 0.7978845608028654;  // sqrt(2/pi)
    return 0.5 * a * (1.0 + std::tanh(k * (a + 0.044715 * a * a * a)));
  };
  auto df = [act](double a) {
    if (act == Activation::kSilu) {
      const double s = sigmoid_scalar(a);
      return s * (1.0 + a * (1.0 - s));
    }
    constexpr double k = 0.7978845608028654;
    const double u = k * (a + 0.044715 * a * a * a);
    const double th = std::tanh(u);
    return 0.5 * (1.0 + th) + 0.5 * a * (1.0 - th * th) * k * (1.0 + 3.0 * 0.044715 * a * a);
  };
  return gate.tape->apply(
      "gated_linear", {gate, up},
      [f](const std::vector<const Tensor*>& in) {
        Tensor out(in[0]->shape());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = f((*in[0])[i]) * (*in[1])[i];
        return out;
      },
      [f, df](const BackwardArgs& b) {
        const Tensor &G = *b.inputs[0], &U = *b.inputs[1];
        for (std::size_t i = 0; i < G.size(); ++i) {
          if (b.grad_in[0]) b.grad_in[0][i] += b.grad_out[i] * df(G[i]) * U[i];
          if (b.grad_in[1]) b.grad_in[1][i] += b.grad_out[i] * f(G[i]);
        }
      });
}

Var embedding(Var table, std::vector<std::int32_t> ids) {
  const Tensor& T = table.value();
  if (T.rank() != 2) throw ShapeError("embedding: table must be rank 2, got " + T.shape_str());
  for (auto id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= T.rows()) {
      throw ShapeError("embedding: id " + std::to_string(id) + " out of range for table " +
                       T.shape_str());
    }
  }
  auto idp = std::make_shared<const std::vector<std::int32_t>>(std::move(ids));
  return table.tape->apply(
      "embedding", {table},
      [idp](const std::vector<const Tensor*>& in) {
        const Tensor& t = *in[0];
        const std::size_t d = t.cols();
        Tensor out(matrix_shape(idp->size(), d));
        for (std::size_t r = 0; r < idp->size(); ++r)
          std::copy_n(&t[static_cast<std::size_t>((*idp)[r]) * d], d, &out[r * d]);
        return out;
      },
      [idp](const BackwardArgs& b) {
        if (!b.grad_in[0]) return;
        const std::size_t d = b.inputs[0]->cols();
        for (std::size_t r = 0; r < idp->size(); ++r) {
          double* dst = b.grad_in[0] + static_cast<std::size_t>((*idp)[r]) * d;
          for (std::size_t c = 0; c < d; ++c) dst[c] += b.grad_out[r * d + c];
        }
      });
}

Var slice_cols(Var a, std::size_t start, std::size_t len) {
  const Tensor& A = a.value();
  if (start + len > A.cols() || len == 0) {
    throw ShapeError("slice_cols: [" + std::to_string(start) + ", " + std::to_string(start + len) +
                     ") out of range for " + A.shape_str());
  }
  return a.tape->apply(
      "slice_cols", {a},
      [start, len](const std::vector<const Tensor*>& in) {
        const Tensor& t = *in[0];
        Tensor out(matrix_shape(t.rows(), len));
        for (std::size_t r = 0; r < t.rows(); ++r)
          std::copy_n(&t[r * t.cols() + start], len, &out[r * len]);
        return out;
      },
      [start, len](const BackwardArgs& b) {
        if (!b.grad_in[0]) return;
        const Tensor& t = *b.inputs[0];
        for (std::size_t r = 0; r < t.rows(); ++r)
          for (std::size_t c = 0; c < len; ++c)
            b.grad_in[0][r * t.cols() + start + c] += b.grad_out[r * len + c];
      });
}

Var reshape(Var a, Shape shape) {
  if (element_count(shape) != a.value().size()) {
    throw ShapeError("reshape: " + a.value().shape_str() + " to " + shape_to_string(shape));
  }
  return a.tape->apply(
      "reshape", {a},
      [shape](const std::vector<const Tensor*>& in) {
        Tensor out(shape);
        std::copy(in[0]->data().begin(), in[0]->data().end(), out.data().begin());
        return out;
      },
      [](const BackwardArgs& b) {
        if (!b.grad_in[0]) return;
        for (std::size_t i = 0; i < b.grad_out.size(); ++i) b.grad_in[0][i] += b.grad_out[i];
      });
}

Var slice_rows(Var a, std::size_t start, std::size_t len) {
  const Tensor& A = a.value();
  if (start + len > A.rows() || len == 0) {
    throw ShapeError("slice_rows: [" + std::to_string(start) + ", " + std::to_string(start + len) +
                     ") out of range for " + A.shape_str());
  }
  return a.tape->apply(
      "slice_rows", {a},
      [start, len](const std::vector<const Tensor*>& in) {
        const Tensor& t = *in[0];
        const std::size_t C = t.cols();
        Tensor out(matrix_shape(len, C));
        std::copy_n(&t[start * C], len * C, &out[0]);
        return out;
      },
      [start, len](const BackwardArgs& b) {
        if (!b.grad_in[0]) return;
        const std::size_t C = b.inputs[0]->cols();
        for (std::size_t i = 0; i < len * C; ++i) b.grad_in[0][start * C + i] += b.grad_out[i];
      });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t R = parts[0].value().rows();
  for (const Var& p : parts)
    if (p.value().rows() != R) shape_fail("concat_cols", parts[0].value(), p.value());
  return parts[0].tape->apply(
      "concat_cols", std::vector<Var>(parts.begin(), parts.end()),
      [](const std::vector<const Tensor*>& in) {
        std::size_t C = 0;
        for (auto* t : in) C += t->cols();
        const std::size_t R = in[0]->rows();
        Tensor out(matrix_shape(R, C));
        std::size_t off = 0;
        for (auto* t : in) {
          for (std::size_t r = 0; r < R; ++r) std::copy_n(&(*t)[r * t->cols()], t->cols(), &out[r * C + off]);
          off += t->cols();
        }
        return out;
      },
      [](const BackwardArgs& b) {
        const std::size_t C = b.output->cols(), R = b.output->rows();
        std::size_t off = 0;
        for (std::size_t k = 0; k < b.inputs.size(); ++k) {
          const std::size_t c = b.inputs[k]->cols();
          if (b.grad_in[k])
            for (std::size_t r = 0; r < R; ++r)
              for (std::size_t j = 0; j < c; ++j) b.grad_in[k][r * c + j] += b.grad_out[r * C + off + j];
          off += c;
        }
      });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const std::size_t C = parts[0].value().cols();
  for (const Var& p : parts)
    if (p.value().cols() != C) shape_fail("concat_rows", parts[0].value(), p.value());
  return parts[0].tape->apply(
      "concat_rows", std::vector<Var>(parts.begin(), parts.end()),
      [](const std::vector<const Tensor*>& in) {
        std::size_t R = 0;
        for (auto* t : in) R += t->rows();
        const std::size_t C = in[0]->cols();
        Tensor out(matrix_shape(R, C));
        std::size_t off = 0;
        for (auto* t : in) {
          std::copy(t->data().begin(), t->data().end(), &out[off]);
          off += t->size();
        }
        return out;
      },
      [](const BackwardArgs& b) {
        std::size_t off = 0;
        for (std::size_t k = 0; k < b.inputs.size(); ++k) {
          const std::size_t n = b.inputs[k]->size();
          if (b.grad_in[k])
            for (std::size_t i = 0; i < n; ++i) b.grad_in[k][i] += b.grad_out[off + i];
          off += n;
        }
      });
}

Var rope(Var x, std::size_t head_dim, double theta) {
  const Tensor& X = x.value();
  if (head_dim == 0 || head_dim % 2 != 0 || X.cols() % head_dim != 0) {
    throw ShapeError("rope: head_dim " + std::to_string(head_dim) + " incompatible with " +
                     X.shape_str());
  }
  const std::size_t T = X.rows(), half = head_dim / 2;
  auto tables = std::make_shared<std::vector<double>>(2 * T * half);
  for (std::size_t p = 0; p < T; ++p) {
    for (std::size_t i = 0; i < half; ++i) {
      const double freq = std::pow(theta, -2.0 * static_cast<double>(i) / static_cast<double>(head_dim));
      const double ang = static_cast<double>(p) * freq;
      (*tables)[2 * (p * half + i)] = std::cos(ang);
      (*tables)[2 * (p * half + i) + 1] = std::sin(ang);
    }
  }
  auto rotate = [tables, head_dim, half](const double* src, double* dst, std::size_t T,
                                          std::size_t C, double sign) {
    for (std::size_t p = 0; p < T; ++p) {
      for (std::size_t h0 = 0; h0 < C; h0 += head_dim) {
        const double* s = src + p * C + h0;
        double* d = dst + p * C + h0;
        for (std::size_t i = 0; i < half; ++i) {
          const double c = (*tables)[2 * (p * half + i)];
          const double sn = sign * (*tables)[2 * (p * half + i) + 1];
          const double a = s[i], bb = s[i + half];
          d[i] += a * c - bb * sn;
          d[i + half] += bb * c + a * sn;
        }
      }
    }
  };
  return x.tape->apply(
      "rope", {x},
      [rotate](const std::vector<const Tensor*>& in) {
        Tensor out(in[0]->shape(), 0.0);
        rotate(in[0]->data().data(), out.data().data(), in[0]->rows(), in[0]->cols(), 1.0);
        return out;
      },
      [rotate](const BackwardArgs& b) {
        if (!b.grad_in[0]) return;
        rotate(b.grad_out.data(), b.grad_in[0], b.output->rows(), b.output->cols(), -1.0);
      });
}

Var cross_entropy(Var logits, std::vector<std::int32_t> targets) {
  const Tensor& L = logits.value();
  if (targets.size() != L.rows()) {
    throw ShapeError("cross_entropy: " + std::to_string(targets.size()) + " targets for logits " +
                     L.shape_str());
  }
  std::size_t active = 0;
  for (auto t : targets) {
    if (t >= static_cast<std::int32_t>(L.cols())) {
      throw ShapeError("cross_entropy: target " + std::to_string(t) + " out of range for logits " +
                       L.shape_str());
    }
    if (t >= 0) ++active;
  }
  if (active == 0) throw ShapeError("cross_entropy: no active targets");
  auto tp = std::make_shared<const std::vector<std::int32_t>>(std::move(targets));
  const double inv_n = 1.0 / static_cast<double>(active);
  return logits.tape->apply(
      "cross_entropy", {logits},
      [tp, inv_n](const std::vector<const Tensor*>& in) {
        const Tensor& x = *in[0];
        const std::size_t C = x.cols();
        double loss = 0.0;
        for (std::size_t r = 0; r < x.rows(); ++r) {
          const std::int32_t t = (*tp)[r];
          if (t < 0) continue;
          const double* xr = &x[r * C];
          double mx = xr[0];
          for (std::size_t c = 1; c < C; ++c) mx = std::max(mx, xr[c]);
          double z = 0.0;
          for (std::size_t c = 0; c < C; ++c) z += std::exp(xr[c] - mx);
          loss += (mx + std::log(z)) - xr[t];
        }
        return Tensor::scalar(loss * inv_n);
      },
      [tp, inv_n](const BackwardArgs& b) {
        if (!b.grad_in[0]) return;
        const Tensor& x = *b.inputs[0];
        const std::size_t C = x.cols();
        const double g = b.grad_out[0] * inv_n;
        for (std::size_t r = 0; r < x.rows(); ++r) {
          const std::int32_t t = (*tp)[r];
          if (t < 0) continue;
          const double* xr = &x[r * C];
          double mx = xr[0];
          for (std::size_t c = 1; c < C; ++c) mx = std::max(mx, xr[c]);
          double z = 0.0;
          for (std::size_t c = 0; c < C; ++c) z += std::exp(xr[c] - mx);
          for (std::size_t c = 0; c < C; ++c) b.grad_in[0][r * C + c] += g * std::exp(xr[c] - mx) / z;
          b.grad_in[0][r * C + static_cast<std::size_t>(t)] -= g;
        }
      });
}

}  // namespace drama::numerics::ops
