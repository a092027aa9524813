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

// Minimal reverse-mode automatic differentiation over dense Eigen matrices.
//
// A Graph is a tape: every op appends a node holding its value and a closure
// that pushes the output gradient back into its inputs. Graphs are built per
// forward pass and discarded; trainable state lives in Parameter objects that
// outlive graphs and receive accumulated gradients from Graph::backward.
//
// Row convention: batches are rows. A vector is a 1 x d row.

#ifndef TGSUM_AUTODIFF_H_
#define TGSUM_AUTODIFF_H_

#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tgsum::ad {

using Matrix = Eigen::MatrixXd;

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string n, Matrix v)
      : name(std::move(n)), value(std::move(v)),
        grad(Matrix::Zero(value.rows(), value.cols())) {}

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

class Graph;

// Handle to a node on a Graph. Cheap to copy; only valid while the graph lives.
class Var {
 public:
  Var() = default;
  Var(Graph* graph, int id) : graph_(graph), id_(id) {}

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }
  // Gradient after Graph::backward; zero matrix if none flowed here.
  Matrix grad() const;

  Graph* graph() const { return graph_; }
  int id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }

 private:
  Graph* graph_ = nullptr;
  int id_ = -1;
};

class Graph {
 public:
  // Receives the gradient of the loss w.r.t. this node's output.
  using Backward = std::function<void(Graph&, const Matrix&)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Matrix value);
  Var param(Parameter& p);

  // Appends a node computed from `inputs`. The backward closure is dropped when
  // none of the inputs needs a gradient.
  Var make(Matrix value, std::span<const Var> inputs, Backward backward);

  // Seeds d(loss)/d(loss) = 1 and propagates; accumulates into Parameter::grad.
  void backward(Var loss);

  const Matrix& value(int id) const { return nodes_[id].value; }
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  // Adds `g` into the gradient slot of node `id` (no-op for constants).
  void accumulate(int id, const Matrix& g);
  Matrix grad(int id) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backward backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
    bool has_grad = false;
  };
  std::vector<Node> nodes_;
};

// Elementwise binary ops accept b with the same shape as a, a 1 x c row, an
// r x 1 column or a 1 x 1 scalar; b is broadcast over a.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);

Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var neg(Var a);
Var one_minus(Var a);

Var matmul(Var a, Var b);
Var transpose(Var a);

Var tanh(Var a);
Var sigmoid(Var a);
Var exp(Var a);
// log(x) for x > 1e-300; inputs at or below that clamp and pass no gradient.
Var safe_log(Var a);
Var reciprocal(Var a);
Var sqrt(Var a);
// Elementwise max(a, floor); gradient passes where a > floor.
Var floor_at(Var a, double floor);

Var softmax_rows(Var a);
Var log_softmax_rows(Var a);

Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var slice_cols(Var a, Eigen::Index start, Eigen::Index count);
Var slice_rows(Var a, Eigen::Index start, Eigen::Index count);
Var gather_rows(Var a, std::span<const int> rows);
// r x 1 column holding a(i, cols[i]).
Var pick_per_row(Var a, std::span<const int> cols);

Var sum_all(Var a);
Var sum_rows(Var a);  // r x c -> r x 1
Var sum_cols(Var a);  // r x c -> 1 x c

// Same value, no gradient flows back.
Var detach(Var a);

// Inverted dropout with a mask drawn from `rng`; identity when rate == 0.
Var dropout(Var a, double rate, std::mt19937_64& rng);

// Fused gated recurrent unit step. Gate layout in the 3d-wide weights is
// [update | reset | candidate].
//   z = sigmoid(x Wx_z + h Wh_z + b_z)
//   r = sigmoid(x Wx_r + h Wh_r + b_r)
//   n = tanh(x Wx_n + (r * h) Wh_n + b_n)
//   h' = (1 - z) * n + z * h
Var gru_cell(Var x, Var h, Var wx, Var wh, Var b);

}  // namespace tgsum::ad

#endif  // TGSUM_AUTODIFF_H_
