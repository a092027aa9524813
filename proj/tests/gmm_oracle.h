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

// Random sentence posteriors and topic weights, brute-force weighted moments
// and a Monte Carlo KL estimate.

#ifndef TGSUM_TESTS_GMM_ORACLE_H_
#define TGSUM_TESTS_GMM_ORACLE_H_

#include <cmath>
#include <random>

#include <Eigen/Cholesky>

#include "tgsum/latent_gmm.h"

namespace tgsum::oracle {

inline SentencePosteriors random_sentences(int S, int n, double floor,
                                           std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> extra(0.0, 2.0);
  SentencePosteriors s;
  s.mean.resize(S, n);
  s.variance.resize(S, n);
  for (int i = 0; i < S; ++i)
    for (int j = 0; j < n; ++j) {
      s.mean(i, j) = 2.0 * normal(rng);
      s.variance(i, j) = floor + extra(rng);
    }
  return s;
}

inline Matrix random_theta(int S, int K, std::mt19937_64& rng,
                           double concentration = 0.5) {
  std::gamma_distribution<double> gamma(concentration, 1.0);
  Matrix t(S, K);
  for (int i = 0; i < S; ++i) {
    for (int k = 0; k < K; ++k) t(i, k) = gamma(rng) + 1e-12;
    t.row(i) /= t.row(i).sum();
  }
  return t;
}

// Weighted moments of topic k written as explicit sums.
inline void brute_moments(const SentencePosteriors& s, const Matrix& theta,
                          int k, Eigen::VectorXd* mean, Matrix* cov) {
  const Eigen::Index S = s.mean.rows(), n = s.mean.cols();
  double mass = 0.0;
  *mean = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < S; ++i) {
    mass += theta(i, k);
    for (Eigen::Index j = 0; j < n; ++j)
      (*mean)(j) += theta(i, k) * s.mean(i, j);
  }
  *mean /= mass;
  *cov = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < S; ++i)
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b) {
        double v = (s.mean(i, a) - (*mean)(a)) * (s.mean(i, b) - (*mean)(b));
        if (a == b) v += s.variance(i, a);
        (*cov)(a, b) += theta(i, k) * v;
      }
  *cov /= mass;
}

struct McEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

// E_q[log q(x) - log p(x)] from `samples` draws of q = N(qm, diag(qv)).
inline McEstimate monte_carlo_kl(const Eigen::VectorXd& qm,
                                 const Eigen::VectorXd& qv,
                                 const Eigen::VectorXd& pm, const Matrix& pc,
                                 int samples, std::mt19937_64& rng) {
  const Eigen::Index n = qm.size();
  const Eigen::LLT<Matrix> llt(pc);
  const Matrix L = llt.matrixL();
  double log_det_p = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) log_det_p += 2.0 * std::log(L(i, i));
  const double log_det_q = qv.array().log().sum();
  std::normal_distribution<double> normal;
  double sum = 0.0, sum_sq = 0.0;
  Eigen::VectorXd eps(n), x(n);
  for (int t = 0; t < samples; ++t) {
    for (Eigen::Index i = 0; i < n; ++i) eps(i) = normal(rng);
    x = qm + (qv.array().sqrt() * eps.array()).matrix();
    const Eigen::VectorXd r = llt.matrixL().solve(x - pm);
    // The 2 pi terms cancel.
    const double log_q = -0.5 * (log_det_q + eps.squaredNorm());
    const double log_p = -0.5 * (log_det_p + r.squaredNorm());
    const double d = log_q - log_p;
    sum += d;
    sum_sq += d * d;
  }
  McEstimate e;
  e.mean = sum / samples;
  const double var = sum_sq / samples - e.mean * e.mean;
  e.standard_error = std::sqrt(var / samples);
  return e;
}

}  // namespace tgsum::oracle

#endif  // TGSUM_TESTS_GMM_ORACLE_H_
