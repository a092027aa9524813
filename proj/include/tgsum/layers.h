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

// Parameter blocks shared by the sequence codec and the topic model.

#ifndef TGSUM_LAYERS_H_
#define TGSUM_LAYERS_H_

#include <random>
#include <string>
#include <vector>

#include "tgsum/autodiff.h"

namespace tgsum {

using ad::Matrix;
using ad::Parameter;
using ad::Var;

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)).
Matrix init_uniform(int rows, int cols, int fan_in, std::mt19937_64& rng);

struct Linear {
  Parameter weight;  // in x out
  Parameter bias;    // 1 x out

  Linear() = default;
  Linear(const std::string& name, int in, int out, std::mt19937_64& rng);
  Var apply(ad::Graph& g, Var x);
  void collect(std::vector<Parameter*>& out);
};

struct Gru {
  Parameter wx;  // in x 3h
  Parameter wh;  // h x 3h
  Parameter b;   // 1 x 3h

  Gru() = default;
  Gru(const std::string& name, int in, int hidden, std::mt19937_64& rng);
  int hidden() const { return static_cast<int>(wh.value.rows()); }
  void collect(std::vector<Parameter*>& out);
};

// Variable-length id sequences laid out for time-major batched recurrence.
// Padding positions carry id 0 and mask 0.
struct PaddedBatch {
  int batch = 0;
  int steps = 0;
  std::vector<std::vector<int>> ids;  // [step][row]
  std::vector<Matrix> masks;          // [step] batch x 1
  std::vector<int> lengths;

  static PaddedBatch from(const std::vector<std::vector<int>>& seqs,
                          bool reversed = false);
};

// Runs a GRU over per-step inputs; rows whose mask is 0 keep their state.
// Returns the state after every step (masked rows repeat the carried state).
std::vector<Var> run_gru(ad::Graph& g, Gru& gru, const std::vector<Var>& inputs,
                         const std::vector<Matrix>* masks, Var h0);

// h = mask * h_new + (1 - mask) * h_old with a constant mask column.
Var masked_update(ad::Graph& g, Var h_new, Var h_old, const Matrix& mask);

}  // namespace tgsum

#endif  // TGSUM_LAYERS_H_
