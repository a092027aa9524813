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

#include "tgsum/layers.h"

#include <algorithm>
#include <cmath>

namespace tgsum {

Matrix init_uniform(int rows, int cols, int fan_in, std::mt19937_64& rng) {
  const double a = 1.0 / std::sqrt(static_cast<double>(std::max(fan_in, 1)));
  std::uniform_real_distribution<double> u(-a, a);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

Linear::Linear(const std::string& name, int in, int out, std::mt19937_64& rng)
    : weight(name + ".weight", init_uniform(in, out, in, rng)),
      bias(name + ".bias", Matrix::Zero(1, out)) {}

Var Linear::apply(ad::Graph& g, Var x) {
  return ad::add(ad::matmul(x, g.param(weight)), g.param(bias));
}

void Linear::collect(std::vector<Parameter*>& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

Gru::Gru(const std::string& name, int in, int hidden, std::mt19937_64& rng)
    : wx(name + ".wx", init_uniform(in, 3 * hidden, hidden, rng)),
      wh(name + ".wh", init_uniform(hidden, 3 * hidden, hidden, rng)),
      b(name + ".b", Matrix::Zero(1, 3 * hidden)) {}

void Gru::collect(std::vector<Parameter*>& out) {
  out.push_back(&wx);
  out.push_back(&wh);
  out.push_back(&b);
}

PaddedBatch PaddedBatch::from(const std::vector<std::vector<int>>& seqs,
                              bool reversed) {
  PaddedBatch pb;
  pb.batch = static_cast<int>(seqs.size());
  for (const auto& s : seqs) {
    pb.lengths.push_back(static_cast<int>(s.size()));
    pb.steps = std::max(pb.steps, static_cast<int>(s.size()));
  }
  pb.ids.assign(pb.steps, std::vector<int>(pb.batch, 0));
  pb.masks.assign(pb.steps, Matrix::Zero(pb.batch, 1));
  for (int r = 0; r < pb.batch; ++r) {
    const auto& s = seqs[r];
    const int len = static_cast<int>(s.size());
    for (int t = 0; t < len; ++t) {
      pb.ids[t][r] = reversed ? s[len - 1 - t] : s[t];
      pb.masks[t](r, 0) = 1.0;
    }
  }
  return pb;
}

Var masked_update(ad::Graph& g, Var h_new, Var h_old, const Matrix& mask) {
  if (mask.minCoeff() >= 1.0) return h_new;
  Var m = g.constant(mask);
  Var keep = g.constant((1.0 - mask.array()).matrix());
  return ad::add(ad::mul(h_new, m), ad::mul(h_old, keep));
}

std::vector<Var> run_gru(ad::Graph& g, Gru& gru, const std::vector<Var>& inputs,
                         const std::vector<Matrix>* masks, Var h0) {
  Var wx = g.param(gru.wx);
  Var wh = g.param(gru.wh);
  Var b = g.param(gru.b);
  std::vector<Var> states;
  states.reserve(inputs.size());
  Var h = h0;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    Var next = ad::gru_cell(inputs[t], h, wx, wh, b);
    h = masks ? masked_update(g, next, h, (*masks)[t]) : next;
    states.push_back(h);
  }
  return states;
}

}  // namespace tgsum
