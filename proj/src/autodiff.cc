// Copyright 2026 The tgsum Authors.
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

#include "tgsum/autodiff.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tgsum::ad {

const Matrix& Var::value() const { return graph_->value(id_); }

Matrix Var::grad() const { return graph_->grad(id_); }

Var Graph::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Graph::param(Parameter& p) {
  Node n;
  n.value = p.value;
  n.param = &p;
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Graph::make(Matrix value, std::span<const Var> inputs, Backward backward) {
  Node n;
  n.value = std::move(value);
  for (const Var& v : inputs) {
    if (v.graph() != this) throw std::logic_error("ad: mixing graphs");
    if (nodes_[v.id()].requires_grad) n.requires_grad = true;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Graph::accumulate(int id, const Matrix& g) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  if (!n.has_grad) {
    n.grad = g;
    n.has_grad = true;
  } else {
    n.grad += g;
  }
}

Matrix Graph::grad(int id) const {
  const Node& n = nodes_[id];
  if (!n.has_grad) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Graph::backward(Var loss) {
  if (loss.rows() != 1 || loss.cols() != 1)
    throw std::invalid_argument("ad: backward needs a 1x1 loss");
  accumulate(loss.id(), Matrix::Ones(1, 1));
  for (int i = loss.id(); i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.has_grad) continue;
    if (n.param != nullptr) {
      n.param->grad += n.grad;
    } else if (n.backward) {
      // The closure may append to nodes_' neighbours but never to nodes_
      // itself, so the reference stays valid.
      Matrix g = std::move(n.grad);
      n.has_grad = false;
      n.backward(*this, g);
      n.grad = std::move(g);
      n.has_grad = true;
    }
  }
}

namespace {

enum class Bcast { kSame, kRow, kCol, kScalar };

Bcast broadcast_kind(const Matrix& a, const Matrix& b) {
  if (b.rows() == a.rows() && b.cols() == a.cols()) return Bcast::kSame;
  if (b.rows() == 1 && b.cols() == 1) return Bcast::kScalar;
  if (b.rows() == 1 && b.cols() == a.cols()) return Bcast::kRow;
  if (b.cols() == 1 && b.rows() == a.rows()) return Bcast::kCol;
  throw std::invalid_argument(
      "ad: incompatible shapes " + std::to_string(a.rows()) + "x" +
      std::to_string(a.cols()) + " and " + std::to_string(b.rows()) + "x" +
      std::to_string(b.cols()));
}

Matrix expand(const Matrix& b, Bcast kind, Eigen::Index rows,
              Eigen::Index cols) {
  switch (kind) {
    case Bcast::kSame:
      return b;
    case Bcast::kRow:
      return b.replicate(rows, 1);
    case Bcast::kCol:
      return b.replicate(1, cols);
    case Bcast::kScalar:
      return Matrix::Constant(rows, cols, b(0, 0));
  }
  return b;
}

Matrix reduce(const Matrix& g, Bcast kind) {
  switch (kind) {
    case Bcast::kSame:
      return g;
    case Bcast::kRow:
      return g.colwise().sum();
    case Bcast::kCol:
      return g.rowwise().sum();
    case Bcast::kScalar:
      return Matrix::Constant(1, 1, g.sum());
  }
  return g;
}

Graph& graph_of(Var a) { return *a.graph(); }

}  // namespace

Var add(Var a, Var b) {
  const Bcast kind = broadcast_kind(a.value(), b.value());
  Matrix out = a.value() + expand(b.value(), kind, a.rows(), a.cols());
  const Var in[] = {a, b};
  return graph_of(a).make(std::move(out), in,
                          [ia = a.id(), ib = b.id(), kind](Graph& g,
                                                           const Matrix& go) {
                            g.accumulate(ia, go);
                            if (g.requires_grad(ib))
                              g.accumulate(ib, reduce(go, kind));
                          });
}

Var sub(Var a, Var b) {
  const Bcast kind = broadcast_kind(a.value(), b.value());
  Matrix out = a.value() - expand(b.value(), kind, a.rows(), a.cols());
  const Var in[] = {a, b};
  return graph_of(a).make(std::move(out), in,
                          [ia = a.id(), ib = b.id(), kind](Graph& g,
                                                           const Matrix& go) {
                            g.accumulate(ia, go);
                            if (g.requires_grad(ib))
                              g.accumulate(ib, -reduce(go, kind));
                          });
}

Var mul(Var a, Var b) {
  const Bcast kind = broadcast_kind(a.value(), b.value());
  Matrix bx = expand(b.value(), kind, a.rows(), a.cols());
  Matrix out = a.value().cwiseProduct(bx);
  const Var in[] = {a, b};
  return graph_of(a).make(
      std::move(out), in,
      [ia = a.id(), ib = b.id(), kind, bx = std::move(bx)](Graph& g,
                                                           const Matrix& go) {
        if (g.requires_grad(ia)) g.accumulate(ia, go.cwiseProduct(bx));
        if (g.requires_grad(ib))
          g.accumulate(ib, reduce(go.cwiseProduct(g.value(ia)), kind));
      });
}

Var scale(Var a, double s) {
  const Var in[] = {a};
  return graph_of(a).make(a.value() * s, in,
                          [ia = a.id(), s](Graph& g, const Matrix& go) {
                            g.accumulate(ia, go * s);
                          });
}

Var add_scalar(Var a, double s) {
  const Var in[] = {a};
  return graph_of(a).make(
      (a.value().array() + s).matrix(), in,
      [ia = a.id()](Graph& g, const Matrix& go) { g.accumulate(ia, go); });
}

Var neg(Var a) { return scale(a, -1.0); }

Var one_minus(Var a) { return add_scalar(neg(a), 1.0); }

Var matmul(Var a, Var b) {
  if (a.cols() != b.rows())
    throw std::invalid_argument("ad: matmul shape mismatch");
  const Var in[] = {a, b};
  return graph_of(a).make(a.value() * b.value(), in,
                          [ia = a.id(), ib = b.id()](Graph& g,
                                                     const Matrix& go) {
                            if (g.requires_grad(ia))
                              g.accumulate(ia, go * g.value(ib).transpose());
                            if (g.requires_grad(ib))
                              g.accumulate(ib, g.value(ia).transpose() * go);
                          });
}

Var transpose(Var a) {
  const Var in[] = {a};
  return graph_of(a).make(a.value().transpose(), in,
                          [ia = a.id()](Graph& g, const Matrix& go) {
                            g.accumulate(ia, go.transpose());
                          });
}

Var tanh(Var a) {
  Matrix out = a.value().array().tanh().matrix();
  const Var in[] = {a};
  Matrix keep = out;
  return graph_of(a).make(
      std::move(out), in,
      [ia = a.id(), y = std::move(keep)](Graph& g, const Matrix& go) {
        g.accumulate(ia, (go.array() * (1.0 - y.array().square())).matrix());
      });
}

Var sigmoid(Var a) {
  Matrix out = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  const Var in[] = {a};
  Matrix keep = out;
  return graph_of(a).make(
      std::move(out), in,
      [ia = a.id(), y = std::move(keep)](Graph& g, const Matrix& go) {
        g.accumulate(ia,
                     (go.array() * y.array() * (1.0 - y.array())).matrix());
      });
}

Var exp(Var a) {
  Matrix out = a.value().array().exp().matrix();
  const Var in[] = {a};
  Matrix keep = out;
  return graph_of(a).make(std::move(out), in,
                          [ia = a.id(), y = std::move(keep)](
                              Graph& g, const Matrix& go) {
                            g.accumulate(ia, go.cwiseProduct(y));
                          });
}

Var safe_log(Var a) {
  static constexpr double kTiny = 1e-300;
  Matrix out = a.value().array().max(kTiny).log().matrix();
  const Var in[] = {a};
  return graph_of(a).make(
      std::move(out), in, [ia = a.id()](Graph& g, const Matrix& go) {
        const Matrix& x = g.value(ia);
        Matrix gi = (x.array() > kTiny)
                        .select(go.array() / x.array(), 0.0)
                        .matrix();
        g.accumulate(ia, gi);
      });
}

Var reciprocal(Var a) {
  Matrix out = a.value().cwiseInverse();
  const Var in[] = {a};
  Matrix keep = out;
  return graph_of(a).make(
      std::move(out), in,
      [ia = a.id(), y = std::move(keep)](Graph& g, const Matrix& go) {
        g.accumulate(ia, (-go.array() * y.array().square()).matrix());
      });
}

Var sqrt(Var a) {
  Matrix out = a.value().cwiseSqrt();
  const Var in[] = {a};
  Matrix keep = out;
  return graph_of(a).make(
      std::move(out), in,
      [ia = a.id(), y = std::move(keep)](Graph& g, const Matrix& go) {
        g.accumulate(ia, (0.5 * go.array() / y.array()).matrix());
      });
}

Var floor_at(Var a, double floor) {
  Matrix out = a.value().array().max(floor).matrix();
  const Var in[] = {a};
  return graph_of(a).make(
      std::move(out), in, [ia = a.id(), floor](Graph& g, const Matrix& go) {
        Matrix gi =
            (g.value(ia).array() > floor).select(go.array(), 0.0).matrix();
        g.accumulate(ia, gi);
      });
}

Var softmax_rows(Var a) {
  Matrix out(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double m = a.value().row(i).maxCoeff();
    out.row(i) = (a.value().row(i).array() - m).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  const Var in[] = {a};
  Matrix keep = out;
  return graph_of(a).make(
      std::move(out), in,
      [ia = a.id(), y = std::move(keep)](Graph& g, const Matrix& go) {
        Matrix dot = go.cwiseProduct(y).rowwise().sum();
        Matrix gi = y.cwiseProduct(go - dot.replicate(1, y.cols()));
        g.accumulate(ia, gi);
      });
}

Var log_softmax_rows(Var a) {
  Matrix out(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double m = a.value().row(i).maxCoeff();
    const double lse =
        m + std::log((a.value().row(i).array() - m).exp().sum());
    out.row(i) = (a.value().row(i).array() - lse).matrix();
  }
  const Var in[] = {a};
  Matrix probs = out.array().exp().matrix();
  return graph_of(a).make(
      std::move(out), in,
      [ia = a.id(), p = std::move(probs)](Graph& g, const Matrix& go) {
        Matrix total = go.rowwise().sum();
        g.accumulate(ia, go - p.cwiseProduct(total.replicate(1, p.cols())));
      });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("ad: empty concat");
  const Eigen::Index rows = parts[0].rows();
  Eigen::Index cols = 0;
  for (const Var& p : parts) {
    if (p.rows() != rows) throw std::invalid_argument("ad: concat_cols rows");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::vector<std::pair<int, Eigen::Index>> spans;
  Eigen::Index at = 0;
  for (const Var& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    spans.emplace_back(p.id(), at);
    at += p.cols();
  }
  return parts[0].graph()->make(
      std::move(out), parts,
      [spans = std::move(spans)](Graph& g, const Matrix& go) {
        for (const auto& [id, start] : spans) {
          if (g.requires_grad(id))
            g.accumulate(id, go.middleCols(start, g.value(id).cols()));
        }
      });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("ad: empty concat");
  const Eigen::Index cols = parts[0].cols();
  Eigen::Index rows = 0;
  for (const Var& p : parts) {
    if (p.cols() != cols) throw std::invalid_argument("ad: concat_rows cols");
    rows += p.rows();
  }
  Matrix out(rows, cols);
  std::vector<std::pair<int, Eigen::Index>> spans;
  Eigen::Index at = 0;
  for (const Var& p : parts) {
    out.middleRows(at, p.rows()) = p.value();
    spans.emplace_back(p.id(), at);
    at += p.rows();
  }
  return parts[0].graph()->make(
      std::move(out), parts,
      [spans = std::move(spans)](Graph& g, const Matrix& go) {
        for (const auto& [id, start] : spans) {
          if (g.requires_grad(id))
            g.accumulate(id, go.middleRows(start, g.value(id).rows()));
        }
      });
}

Var slice_cols(Var a, Eigen::Index start, Eigen::Index count) {
  const Var in[] = {a};
  return graph_of(a).make(
      a.value().middleCols(start, count), in,
      [ia = a.id(), start, count](Graph& g, const Matrix& go) {
        Matrix gi = Matrix::Zero(g.value(ia).rows(), g.value(ia).cols());
        gi.middleCols(start, count) = go;
        g.accumulate(ia, gi);
      });
}

Var slice_rows(Var a, Eigen::Index start, Eigen::Index count) {
  const Var in[] = {a};
  return graph_of(a).make(
      a.value().middleRows(start, count), in,
      [ia = a.id(), start, count](Graph& g, const Matrix& go) {
        Matrix gi = Matrix::Zero(g.value(ia).rows(), g.value(ia).cols());
        gi.middleRows(start, count) = go;
        g.accumulate(ia, gi);
      });
}

Var gather_rows(Var a, std::span<const int> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= a.rows())
      throw std::out_of_range("ad: gather_rows index");
    out.row(static_cast<Eigen::Index>(i)) = a.value().row(rows[i]);
  }
  const Var in[] = {a};
  return graph_of(a).make(
      std::move(out), in,
      [ia = a.id(), idx = std::vector<int>(rows.begin(), rows.end())](
          Graph& g, const Matrix& go) {
        Matrix gi = Matrix::Zero(g.value(ia).rows(), g.value(ia).cols());
        for (std::size_t i = 0; i < idx.size(); ++i)
          gi.row(idx[i]) += go.row(static_cast<Eigen::Index>(i));
        g.accumulate(ia, gi);
      });
}

Var pick_per_row(Var a, std::span<const int> cols) {
  if (static_cast<Eigen::Index>(cols.size()) != a.rows())
    throw std::invalid_argument("ad: pick_per_row size");
  Matrix out(a.rows(), 1);
  for (Eigen::Index i = 0; i < a.rows(); ++i) out(i, 0) = a.value()(i, cols[i]);
  const Var in[] = {a};
  return graph_of(a).make(
      std::move(out), in,
      [ia = a.id(), idx = std::vector<int>(cols.begin(), cols.end())](
          Graph& g, const Matrix& go) {
        Matrix gi = Matrix::Zero(g.value(ia).rows(), g.value(ia).cols());
        for (std::size_t i = 0; i < idx.size(); ++i)
          gi(static_cast<Eigen::Index>(i), idx[i]) =
              go(static_cast<Eigen::Index>(i), 0);
        g.accumulate(ia, gi);
      });
}

Var sum_all(Var a) {
  const Var in[] = {a};
  return graph_of(a).make(
      Matrix::Constant(1, 1, a.value().sum()), in,
      [ia = a.id()](Graph& g, const Matrix& go) {
        g.accumulate(ia, Matrix::Constant(g.value(ia).rows(),
                                          g.value(ia).cols(), go(0, 0)));
      });
}

Var sum_rows(Var a) {
  const Var in[] = {a};
  return graph_of(a).make(a.value().rowwise().sum(), in,
                          [ia = a.id()](Graph& g, const Matrix& go) {
                            g.accumulate(ia,
                                         go.replicate(1, g.value(ia).cols()));
                          });
}

Var sum_cols(Var a) {
  const Var in[] = {a};
  return graph_of(a).make(a.value().colwise().sum(), in,
                          [ia = a.id()](Graph& g, const Matrix& go) {
                            g.accumulate(ia,
                                         go.replicate(g.value(ia).rows(), 1));
                          });
}

Var detach(Var a) { return graph_of(a).constant(a.value()); }

Var dropout(Var a, double rate, std::mt19937_64& rng) {
  if (rate <= 0.0) return a;
  std::bernoulli_distribution keep(1.0 - rate);
  Matrix mask(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < mask.size(); ++i)
    mask.data()[i] = keep(rng) ? 1.0 / (1.0 - rate) : 0.0;
  return mul(a, graph_of(a).constant(std::move(mask)));
}

Var gru_cell(Var x, Var h, Var wx, Var wh, Var b) {
  const Eigen::Index d = h.cols();
  if (wx.cols() != 3 * d || wh.cols() != 3 * d || wh.rows() != d ||
      b.cols() != 3 * d || wx.rows() != x.cols() || x.rows() != h.rows())
    throw std::invalid_argument("ad: gru_cell shape mismatch");
  const Matrix& hv = h.value();
  const Matrix& whv = wh.value();
  Matrix gx = x.value() * wx.value();
  gx.rowwise() += b.value().row(0);
  Matrix gh_zr = hv * whv.leftCols(2 * d);
  auto sig = [](const Matrix& m) {
    return Matrix((1.0 / (1.0 + (-m.array()).exp())).matrix());
  };
  Matrix z = sig(gx.leftCols(d) + gh_zr.leftCols(d));
  Matrix r = sig(gx.middleCols(d, d) + gh_zr.rightCols(d));
  Matrix rh = r.cwiseProduct(hv);
  Matrix n = (gx.rightCols(d) + rh * whv.rightCols(d)).array().tanh().matrix();
  Matrix out = ((1.0 - z.array()) * n.array() + z.array() * hv.array()).matrix();

  const Var in[] = {x, h, wx, wh, b};
  return graph_of(x).make(
      std::move(out), in,
      [ix = x.id(), ih = h.id(), iwx = wx.id(), iwh = wh.id(), ib = b.id(), d,
       z = std::move(z), r = std::move(r), rh = std::move(rh),
       n = std::move(n)](Graph& g, const Matrix& go) {
        const Matrix& hv = g.value(ih);
        const Matrix& whv = g.value(iwh);
        Matrix dn = (go.array() * (1.0 - z.array()) * (1.0 - n.array().square()))
                        .matrix();
        Matrix dz = (go.array() * (hv.array() - n.array()) * z.array() *
                     (1.0 - z.array()))
                        .matrix();
        Matrix drh = dn * whv.rightCols(d).transpose();
        Matrix dr =
            (drh.array() * hv.array() * r.array() * (1.0 - r.array())).matrix();
        Matrix dpre(go.rows(), 3 * d);
        dpre << dz, dr, dn;
        if (g.requires_grad(ih)) {
          Matrix dh = (go.array() * z.array()).matrix();
          dh += drh.cwiseProduct(r);
          dh += dz * whv.leftCols(d).transpose();
          dh += dr * whv.middleCols(d, d).transpose();
          g.accumulate(ih, dh);
        }
        if (g.requires_grad(iwh)) {
          Matrix dwh(d, 3 * d);
          dwh << hv.transpose() * dz, hv.transpose() * dr, rh.transpose() * dn;
          g.accumulate(iwh, dwh);
        }
        if (g.requires_grad(iwx))
          g.accumulate(iwx, g.value(ix).transpose() * dpre);
        if (g.requires_grad(ib)) g.accumulate(ib, dpre.colwise().sum());
        if (g.requires_grad(ix))
          g.accumulate(ix, dpre * g.value(iwx).transpose());
      });
}

}  // namespace tgsum::ad
