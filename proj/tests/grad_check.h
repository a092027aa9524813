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

// Central finite-difference checks shared by the test binaries.

#ifndef TGSUM_TESTS_GRAD_CHECK_H_
#define TGSUM_TESTS_GRAD_CHECK_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "tgsum/autodiff.h"

namespace tgsum::testing {

struct GradReport {
  double max_rel = 0.0;
  std::string worst;
  int checked = 0;
};

// |a - n| / max(|a|, |n|, floor): relative error with an absolute floor so
// that entries whose true gradient is ~0 are judged on absolute error.
inline double rel_error(double a, double n, double floor = 1e-6) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
}

// `loss` must rebuild its graph from the current parameter values and be a
// deterministic function of them. `analytic` holds the gradients computed at
// the unperturbed point, aligned with `params`. Checks up to `per_param`
// randomly chosen entries of every parameter.
inline GradReport check_parameters(
    const std::vector<ad::Parameter*>& params,
    const std::vector<ad::Matrix>& analytic,
    const std::function<double()>& loss, int per_param = 6, double h = 1e-5,
    std::uint64_t seed = 5) {
  GradReport r;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < params.size(); ++i) {
    ad::Parameter* p = params[i];
    const Eigen::Index size = p->value.size();
    std::vector<Eigen::Index> idx(size);
    for (Eigen::Index j = 0; j < size; ++j) idx[j] = j;
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(std::min<Eigen::Index>(size, per_param));
    for (Eigen::Index j : idx) {
      const double orig = p->value.data()[j];
      p->value.data()[j] = orig + h;
      const double up = loss();
      p->value.data()[j] = orig - h;
      const double down = loss();
      p->value.data()[j] = orig;
      const double numeric = (up - down) / (2 * h);
      const double err = rel_error(analytic[i].data()[j], numeric);
      ++r.checked;
      if (err > r.max_rel) {
        r.max_rel = err;
        r.worst = p->name + "[" + std::to_string(j) + "] analytic " +
                  std::to_string(analytic[i].data()[j]) + " numeric " +
                  std::to_string(numeric);
      }
    }
  }
  return r;
}

// Gradient of a scalar function of one input matrix, checked on every entry.
inline GradReport check_input(
    const ad::Matrix& x,
    const std::function<ad::Var(ad::Graph&, ad::Var)>& f, double h = 1e-6) {
  ad::Matrix analytic;
  {
    ad::Parameter p("x", x);
    ad::Graph g;
    ad::Var out = f(g, g.param(p));
    g.backward(out);
    analytic = p.grad;
  }
  GradReport r;
  ad::Matrix xp = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    auto eval = [&](double v) {
      xp.data()[j] = v;
      ad::Graph g;
      return f(g, g.constant(xp)).scalar();
    };
    const double numeric =
        (eval(x.data()[j] + h) - eval(x.data()[j] - h)) / (2 * h);
    xp.data()[j] = x.data()[j];
    const double err = rel_error(analytic.data()[j], numeric);
    ++r.checked;
    if (err > r.max_rel) {
      r.max_rel = err;
      r.worst = "x[" + std::to_string(j) + "] analytic " +
                std::to_string(analytic.data()[j]) + " numeric " +
                std::to_string(numeric);
    }
  }
  return r;
}

}  // namespace tgsum::testing

#endif  // TGSUM_TESTS_GRAD_CHECK_H_
