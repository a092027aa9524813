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

// Recursive Gaussian mixture over a topic tree.
//
// Each sentence has a diagonal Gaussian posterior q(x_s | w_s). For every
// topic k of an instance, the topic posterior is the theta-weighted moment
// match of the sentence posteriors:
//
//   mu_k    = sum_s theta_sk mu_s / sum_s theta_sk
//   Sigma_k = sum_s theta_sk (Sigma_s + (mu_s - mu_k)(mu_s - mu_k)^T)
//             / sum_s theta_sk
//
// The prior of the root topic is N(0, I); the prior of any other topic is its
// parent's posterior. Topics with mass below kEmptyTopicMass inherit their
// parent's posterior and are flagged.
//
// Everything here comes in two flavours: plain Eigen values (reference
// implementation, diagnostics, inference) and autodiff Vars (training).

#ifndef TGSUM_LATENT_GMM_H_
#define TGSUM_LATENT_GMM_H_

#include <string>
#include <vector>

#include "tgsum/autodiff.h"
#include "tgsum/topic_tree.h"

namespace tgsum {

using ad::Matrix;

inline constexpr double kEmptyTopicMass = 1e-8;
// Added to the diagonal only when a Cholesky factorization fails.
inline constexpr double kCholeskyJitter = 1e-6;

struct SentencePosteriors {
  Matrix mean;      // S x n
  Matrix variance;  // S x n, diagonal covariances
};

struct Gaussian {
  Eigen::VectorXd mean;
  Matrix cov;
};

struct TopicMeans {
  Matrix means;  // K x n
  std::vector<double> mass;
  std::vector<bool> empty;
};

struct TopicPosterior {
  Eigen::VectorXd mean;
  Matrix cov;
  double mass = 0.0;
  bool empty = false;
};

TopicMeans topic_posterior_means(const SentencePosteriors& sentences,
                                 const Matrix& theta, const TopicTree& tree);
std::vector<Matrix> topic_posterior_covs(const SentencePosteriors& sentences,
                                         const Matrix& theta,
                                         const TopicMeans& means,
                                         const TopicTree& tree);
std::vector<TopicPosterior> topic_posteriors(const SentencePosteriors& sentences,
                                             const Matrix& theta,
                                             const TopicTree& tree);

// Root: N(0, I). Others: the parent's posterior.
std::vector<Gaussian> topic_priors(const std::vector<TopicPosterior>& posteriors,
                                   const TopicTree& tree);

// log|A| by Cholesky; retries once with jitter, then throws.
double log_det(const Matrix& spd);

// KL[N(q_mean, diag(q_var)) || N(p_mean, p_cov)].
double gaussian_kl(const Eigen::VectorXd& q_mean, const Eigen::VectorXd& q_var,
                   const Eigen::VectorXd& p_mean, const Matrix& p_cov);

// sum_s theta_sk KL[q(x_s|w_s) || p_k] - sum_s theta_sk KL[q_k || p_k],
// where q_k is topic k's posterior. Non-negative up to rounding.
double kl_bound_gap(const SentencePosteriors& sentences, const Matrix& theta,
                    const std::vector<TopicPosterior>& posteriors,
                    const std::vector<Gaussian>& priors, int k);

// theta-weighted mean over sentences of log|diag(var_s)| for topic k.
double weighted_sentence_log_det(const SentencePosteriors& sentences,
                                 const Matrix& theta, int k);

// Differentiable counterparts.
struct TopicPosteriorVars {
  std::vector<ad::Var> mean;  // 1 x n each
  std::vector<ad::Var> cov;   // n x n each
  std::vector<double> mass;
  std::vector<bool> empty;
};

TopicPosteriorVars topic_posteriors(ad::Graph& g, ad::Var mean,
                                    ad::Var variance, ad::Var theta,
                                    const TopicTree& tree);

// Row-wise KL[N(q_mean_s, diag(q_var_s)) || N(p_mean, p_cov)]; S x 1.
ad::Var gaussian_kl_rows(ad::Var q_mean, ad::Var q_var, ad::Var p_mean,
                         ad::Var p_cov);

// Per-instance diagnostic record.
struct TopicDump {
  std::string product_id;
  std::vector<int> depth;
  std::vector<double> mass;
  std::vector<bool> empty;
  std::vector<double> log_det;
  Matrix means;             // K x n
  std::vector<Matrix> covs;

  std::string to_json_line() const;
  static TopicDump from_json_line(const std::string& line);
};

TopicDump make_topic_dump(const std::string& product_id,
                          const std::vector<TopicPosterior>& posteriors,
                          const TopicTree& tree);

}  // namespace tgsum

#endif  // TGSUM_LATENT_GMM_H_
