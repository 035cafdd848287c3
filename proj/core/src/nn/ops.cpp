// Copyright 2026 The tfdiff Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tfdiff/nn/ops.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <string>

#include "tfdiff/error.hpp"

namespace tfd::nn {
namespace {

void require(bool cond, const char* op, const std::string& what) {
  if (!cond) throw InvalidArgument(std::string(op) + ": " + what);
}

std::string shape(const CMatrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0)); }
double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}
double silu(double x) { return x / (1.0 + std::exp(-x)); }
double silu_grad(double x) {
  const double s = 1.0 / (1.0 + std::exp(-x));
  return s * (1.0 + x * (1.0 - s));
}

}  // namespace

Var add(Var a, Var b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "add", shape(a.value()) + " vs " + shape(b.value()));
  return a.graph()->record(a.value() + b.value(), {a, b}, [a, b](Graph& g, const CMatrix& G) {
    g.accumulate(a, G);
    g.accumulate(b, G);
  });
}

Var scale(Var a, double s) {
  return a.graph()->record(s * a.value(), {a}, [a, s](Graph& g, const CMatrix& G) { g.accumulate(a, s * G); });
}

Var matmul(Var a, Var b) {
  require(a.cols() == b.rows(), "matmul", shape(a.value()) + " x " + shape(b.value()));
  return a.graph()->record(a.value() * b.value(), {a, b}, [a, b](Graph& g, const CMatrix& G) {
    if (g.needs_grad(a)) g.accumulate(a, G * b.value().adjoint());
    if (g.needs_grad(b)) g.accumulate(b, a.value().adjoint() * G);
  });
}

Var linear(Var x, Var w) { return matmul(x, w); }

Var linear(Var x, Var w, Var b) {
  require(x.cols() == w.rows(), "linear", shape(x.value()) + " x " + shape(w.value()));
  require(b.rows() == 1 && b.cols() == w.cols(), "linear", "bias " + shape(b.value()));
  CMatrix y = x.value() * w.value();
  y.rowwise() += b.value().row(0);
  return x.graph()->record(std::move(y), {x, w, b}, [x, w, b](Graph& g, const CMatrix& G) {
    if (g.needs_grad(x)) g.accumulate(x, G * w.value().adjoint());
    if (g.needs_grad(w)) g.accumulate(w, x.value().adjoint() * G);
    if (g.needs_grad(b)) g.accumulate(b, G.colwise().sum());
  });
}

Var add_row(Var x, Var row) {
  require(row.rows() == 1 && row.cols() == x.cols(), "add_row", shape(row.value()));
  CMatrix y = x.value();
  y.rowwise() += row.value().row(0);
  return x.graph()->record(std::move(y), {x, row}, [x, row](Graph& g, const CMatrix& G) {
    g.accumulate(x, G);
    if (g.needs_grad(row)) g.accumulate(row, G.colwise().sum());
  });
}

Var mul_row(Var x, Var row) {
  require(row.rows() == 1 && row.cols() == x.cols(), "mul_row", shape(row.value()));
  CMatrix y = x.value() * row.value().row(0).asDiagonal();
  return x.graph()->record(std::move(y), {x, row}, [x, row](Graph& g, const CMatrix& G) {
    if (g.needs_grad(x)) g.accumulate(x, G * row.value().row(0).conjugate().asDiagonal());
    if (g.needs_grad(row)) {
      g.accumulate(row, G.cwiseProduct(x.value().conjugate()).colwise().sum());
    }
  });
}

Var mul_const(Var x, const CMatrix& c) {
  require(c.rows() == x.rows() && c.cols() == x.cols(), "mul_const", shape(c) + " vs " + shape(x.value()));
  return x.graph()->record(x.value().cwiseProduct(c), {x}, [x, c](Graph& g, const CMatrix& G) {
    g.accumulate(x, G.cwiseProduct(c.conjugate()));
  });
}

Var split_activation(Var x, Activation kind) {
  const auto f = kind == Activation::kGelu ? gelu : silu;
  const auto df = kind == Activation::kGelu ? gelu_grad : silu_grad;
  const CMatrix& in = x.value();
  CMatrix y(in.rows(), in.cols());
  for (Eigen::Index i = 0; i < in.size(); ++i) y(i) = cplx(f(in(i).real()), f(in(i).imag()));
  return x.graph()->record(std::move(y), {x}, [x, df](Graph& g, const CMatrix& G) {
    const CMatrix& in = x.value();
    CMatrix gx(in.rows(), in.cols());
    for (Eigen::Index i = 0; i < in.size(); ++i) {
      gx(i) = cplx(G(i).real() * df(in(i).real()), G(i).imag() * df(in(i).imag()));
    }
    g.accumulate(x, gx);
  });
}

Var dropout(Var x, double p) {
  Graph& graph = *x.graph();
  if (!graph.training() || p <= 0.0) return x;
  require(p < 1.0, "dropout", "p must be < 1");
  Eigen::MatrixXd mask(x.rows(), x.cols());
  const double keep = 1.0 / (1.0 - p);
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask(i) = graph.rng().uniform() < p ? 0.0 : keep;
  CMatrix y = x.value().cwiseProduct(mask.cast<cplx>());
  return graph.record(std::move(y), {x}, [x, mask](Graph& g, const CMatrix& G) {
    g.accumulate(x, G.cwiseProduct(mask.cast<cplx>()));
  });
}

Var normalize_tokens(Var x, double eps) {
  const CMatrix& in = x.value();
  const auto d = static_cast<double>(in.cols());
  CMatrix centered = in.colwise() - in.rowwise().mean();
  Eigen::VectorXd inv = (centered.cwiseAbs2().rowwise().sum() / (2.0 * d)).array() + eps;
  inv = inv.cwiseSqrt().cwiseInverse();
  CMatrix y = inv.cast<cplx>().asDiagonal() * centered;
  return x.graph()->record(std::move(y), {x}, [x, centered, inv, d](Graph& g, const CMatrix& G) {
    // rho_r = Re sum_k conj(G_rk) z_rk
    const Eigen::VectorXd rho = G.conjugate().cwiseProduct(centered).rowwise().sum().real();
    const Eigen::VectorXd coeff = rho.cwiseProduct(inv.cwiseAbs2().cwiseProduct(inv)) / (2.0 * d);
    CMatrix gz = inv.cast<cplx>().asDiagonal() * G;
    gz -= coeff.cast<cplx>().asDiagonal() * centered;
    CMatrix gx = gz.colwise() - gz.rowwise().mean();
    g.accumulate(x, gx);
  });
}

CMatrix attention_scores(const CMatrix& q, const CMatrix& k) {
  require(q.cols() == k.cols(), "attention_scores", "head dims differ");
  const double c = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  return c * q.conjugate() * k.transpose();
}

CMatrix attention_weights(const CMatrix& q, const CMatrix& k) {
  const CMatrix s = attention_scores(q, k);
  const Eigen::MatrixXd r = s.cwiseAbs();
  CMatrix a(s.rows(), s.cols());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const double mx = r.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (r.row(i).array() - mx).exp();
    const Eigen::RowVectorXd p = e / e.sum();
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      a(i, j) = r(i, j) > 0.0 ? p(j) * s(i, j) / r(i, j) : cplx(p(j), 0.0);
    }
  }
  return a;
}

namespace {

// Saved forward state of one (sequence, head) block.
struct AttentionBlock {
  Eigen::Index q0, k0, c0;
  Eigen::MatrixXd r, p;
  CMatrix u, a;        // phase, applied (post-dropout) weights
  Eigen::MatrixXd mask;  // empty when no dropout
};

}  // namespace

Var complex_attention(Var q, Var k, Var v, const AttentionLayout& layout, double dropout_p) {
  const CMatrix& Q = q.value();
  const CMatrix& K = k.value();
  const CMatrix& V = v.value();
  require(Q.cols() == K.cols() && K.cols() == V.cols(), "complex_attention", "feature dims differ");
  require(K.rows() == V.rows(), "complex_attention", "key/value row counts differ");
  require(layout.heads >= 1 && Q.cols() % layout.heads == 0, "complex_attention", "dim not divisible by heads");
  const int qg = layout.query_group > 0 ? layout.query_group : static_cast<int>(Q.rows());
  require(Q.rows() % qg == 0, "complex_attention", "query rows not divisible by group");
  const Eigen::Index groups = Q.rows() / qg;
  const bool shared = layout.key_group == 0;
  const int kg = shared ? static_cast<int>(K.rows()) : layout.key_group;
  require(shared || K.rows() == groups * kg, "complex_attention", "key rows do not match query groups");
  const Eigen::Index dh = Q.cols() / layout.heads;
  const double c = 1.0 / std::sqrt(static_cast<double>(dh));

  Graph& graph = *q.graph();
  const bool drop = graph.training() && dropout_p > 0.0;
  const double keep = drop ? 1.0 / (1.0 - dropout_p) : 1.0;

  CMatrix out(Q.rows(), Q.cols());
  auto blocks = std::make_shared<std::vector<AttentionBlock>>();
  blocks->reserve(static_cast<std::size_t>(groups * layout.heads));
  for (Eigen::Index gi = 0; gi < groups; ++gi) {
    for (int h = 0; h < layout.heads; ++h) {
      AttentionBlock b;
      b.q0 = gi * qg;
      b.k0 = shared ? 0 : gi * kg;
      b.c0 = h * dh;
      const auto Qb = Q.block(b.q0, b.c0, qg, dh);
      const auto Kb = K.block(b.k0, b.c0, kg, dh);
      const auto Vb = V.block(b.k0, b.c0, kg, dh);
      const CMatrix s = c * Qb.conjugate() * Kb.transpose();
      b.r = s.cwiseAbs();
      b.p.resize(qg, kg);
      b.u.resize(qg, kg);
      for (Eigen::Index i = 0; i < qg; ++i) {
        const double mx = b.r.row(i).maxCoeff();
        const Eigen::RowVectorXd e = (b.r.row(i).array() - mx).exp();
        b.p.row(i) = e / e.sum();
        for (Eigen::Index j = 0; j < kg; ++j) {
          b.u(i, j) = b.r(i, j) > 0.0 ? s(i, j) / b.r(i, j) : cplx(1.0, 0.0);
        }
      }
      b.a = b.p.cast<cplx>().cwiseProduct(b.u);
      if (drop) {
        b.mask.resize(qg, kg);
        for (Eigen::Index i = 0; i < b.mask.size(); ++i) {
          b.mask(i) = graph.rng().uniform() < dropout_p ? 0.0 : keep;
        }
        b.a = b.a.cwiseProduct(b.mask.cast<cplx>());
      }
      out.block(b.q0, b.c0, qg, dh) = b.a * Vb;
      blocks->push_back(std::move(b));
    }
  }

  return graph.record(std::move(out), {q, k, v}, [q, k, v, blocks, qg, kg, dh, c](Graph& g, const CMatrix& G) {
    const CMatrix& Q = q.value();
    const CMatrix& K = k.value();
    const CMatrix& V = v.value();
    CMatrix gq = CMatrix::Zero(Q.rows(), Q.cols());
    CMatrix gk = CMatrix::Zero(K.rows(), K.cols());
    CMatrix gv = CMatrix::Zero(V.rows(), V.cols());
    for (const auto& b : *blocks) {
      const auto Gb = G.block(b.q0, b.c0, qg, dh);
      const auto Qb = Q.block(b.q0, b.c0, qg, dh);
      const auto Kb = K.block(b.k0, b.c0, kg, dh);
      const auto Vb = V.block(b.k0, b.c0, kg, dh);
      gv.block(b.k0, b.c0, kg, dh) += b.a.adjoint() * Gb;
      CMatrix ga = Gb * Vb.adjoint();
      if (b.mask.size() > 0) ga = ga.cwiseProduct(b.mask.cast<cplx>());
      // a = p u, u = s/|s|:  G_s = p G_a / r + (G_r - p G_p / r) u,  G_p = Re(conj(G_a) u)
      const Eigen::MatrixXd gp = ga.conjugate().cwiseProduct(b.u).real();
      const Eigen::VectorXd row_dot = b.p.cwiseProduct(gp).rowwise().sum();
      const Eigen::MatrixXd gr = b.p.cwiseProduct(gp.colwise() - row_dot);
      CMatrix gs(qg, kg);
      for (Eigen::Index i = 0; i < qg; ++i) {
        for (Eigen::Index j = 0; j < kg; ++j) {
          const double r = b.r(i, j);
          if (r > 0.0) {
            const double pr = b.p(i, j) / r;
            gs(i, j) = pr * ga(i, j) + (gr(i, j) - pr * gp(i, j)) * b.u(i, j);
          } else {
            gs(i, j) = gr(i, j) * b.u(i, j);
          }
        }
      }
      gq.block(b.q0, b.c0, qg, dh) += c * gs.conjugate() * Kb;
      gk.block(b.k0, b.c0, kg, dh) += c * gs.transpose() * Qb;
    }
    g.accumulate(q, gq);
    g.accumulate(k, gk);
    g.accumulate(v, gv);
  });
}

Var reshape(Var x, Eigen::Index rows, Eigen::Index cols) {
  require(rows * cols == x.value().size(), "reshape", shape(x.value()) + " to " + std::to_string(rows) + "x" +
                                                          std::to_string(cols));
  const Eigen::Index r0 = x.rows(), c0 = x.cols();
  CMatrix y = Eigen::Map<const CMatrix>(x.value().data(), rows, cols);
  return x.graph()->record(std::move(y), {x}, [x, r0, c0](Graph& g, const CMatrix& G) {
    g.accumulate(x, Eigen::Map<const CMatrix>(G.data(), r0, c0));
  });
}

Var transpose(Var x) {
  return x.graph()->record(x.value().transpose(), {x}, [x](Graph& g, const CMatrix& G) {
    g.accumulate(x, G.transpose());
  });
}

Var gather_rows(Var table, const std::vector<int>& rows) {
  const CMatrix& t = table.value();
  CMatrix y(static_cast<Eigen::Index>(rows.size()), t.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] >= 0 && rows[i] < t.rows(), "gather_rows", "row index out of range");
    y.row(static_cast<Eigen::Index>(i)) = t.row(rows[i]);
  }
  return table.graph()->record(std::move(y), {table}, [table, rows](Graph& g, const CMatrix& G) {
    CMatrix gt = CMatrix::Zero(table.rows(), table.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) gt.row(rows[i]) += G.row(static_cast<Eigen::Index>(i));
    g.accumulate(table, gt);
  });
}

Var concat_rows(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_rows", "no inputs");
  Eigen::Index rows = 0;
  const Eigen::Index cols = parts.front().cols();
  for (const auto& p : parts) {
    require(p.cols() == cols, "concat_rows", "column counts differ");
    rows += p.rows();
  }
  CMatrix y(rows, cols);
  Eigen::Index r = 0;
  for (const auto& p : parts) {
    y.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  return parts.front().graph()->record(std::move(y), parts, [parts](Graph& g, const CMatrix& G) {
    Eigen::Index r = 0;
    for (const auto& p : parts) {
      if (g.needs_grad(p)) g.accumulate(p, G.middleRows(r, p.rows()));
      r += p.rows();
    }
  });
}

Var mse(Var pred, const CMatrix& target) {
  require(pred.rows() == target.rows() && pred.cols() == target.cols(), "mse",
          shape(pred.value()) + " vs " + shape(target));
  const auto count = static_cast<double>(target.size());
  CMatrix diff = pred.value() - target;
  const double loss = diff.squaredNorm() / count;
  return pred.graph()->record(CMatrix::Constant(1, 1, cplx(loss, 0.0)), {pred},
                              [pred, diff, count](Graph& g, const CMatrix& G) {
                                g.accumulate(pred, (2.0 * G(0, 0).real() / count) * diff);
                              });
}

Var inner(Var x, const CMatrix& w) {
  require(w.rows() == x.rows() && w.cols() == x.cols(), "inner", shape(w) + " vs " + shape(x.value()));
  const double val = (w.conjugate().cwiseProduct(x.value())).sum().real();
  return x.graph()->record(CMatrix::Constant(1, 1, cplx(val, 0.0)), {x}, [x, w](Graph& g, const CMatrix& G) {
    g.accumulate(x, G(0, 0).real() * w);
  });
}

Eigen::VectorXcd pme_encode(const Eigen::VectorXcd& x, double position) {
  const auto d = static_cast<double>(x.size());
  Eigen::VectorXcd y(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double theta = std::pow(10000.0, -static_cast<double>(i) / d);
    y[i] = x[i] * std::polar(1.0, position * theta);
  }
  return y;
}

CMatrix pme_table(Eigen::Index rows, Eigen::Index dim, int head_dim, int group) {
  require(head_dim > 0 && dim % head_dim == 0, "pme_table", "dim not divisible by head_dim");
  require(group > 0, "pme_table", "group must be positive");
  CMatrix t(rows, dim);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double pos = static_cast<double>(r % group);
    for (Eigen::Index c = 0; c < dim; ++c) {
      const double theta = std::pow(10000.0, -static_cast<double>(c % head_dim) / head_dim);
      t(r, c) = std::polar(1.0, pos * theta);
    }
  }
  return t;
}

}  // namespace tfd::nn
