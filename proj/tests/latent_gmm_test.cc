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

#include "tgsum/latent_gmm.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gmm_oracle.h"
#include "grad_check.h"

namespace tgsum {
namespace {

using Eigen::VectorXd;

using oracle::brute_moments;
using oracle::random_sentences;
using oracle::random_theta;

TEST(TopicPosteriorMeans, TrivialCases) {
  const TopicTree tree({2});
  SentencePosteriors s;
  s.mean = (Matrix(2, 2) << 1, 2, 3, -4).finished();
  s.variance = Matrix::Ones(2, 2);
  // Topic 2 is empty and inherits the root's mean.
  const Matrix theta = (Matrix(2, 3) << 1, 0, 0, 0, 1, 0).finished();
  const TopicMeans m = topic_posterior_means(s, theta, tree);
  EXPECT_TRUE(m.means.row(0).isApprox(s.mean.row(0)));
  EXPECT_TRUE(m.means.row(1).isApprox(s.mean.row(1)));
  EXPECT_TRUE(m.empty[2]);
  EXPECT_TRUE(m.means.row(2).isApprox(m.means.row(0)));

  Matrix equal = Matrix::Zero(2, 3);
  equal.col(1).setConstant(0.5);
  equal.col(0).setConstant(0.5);
  const TopicMeans avg = topic_posterior_means(s, equal, tree);
  EXPECT_NEAR(avg.means(1, 0), 2.0, 1e-15);
  EXPECT_NEAR(avg.means(1, 1), -1.0, 1e-15);
}

TEST(TopicPosteriorMeans, MatchesBruteForce) {
  std::mt19937_64 rng(11);
  const TopicTree tree({2, 2});
  const SentencePosteriors s = random_sentences(5, 4, 1.0, rng);
  const Matrix theta = random_theta(5, tree.size(), rng);
  const TopicMeans m = topic_posterior_means(s, theta, tree);
  for (int k = 0; k < tree.size(); ++k) {
    VectorXd mean;
    Matrix cov;
    brute_moments(s, theta, k, &mean, &cov);
    EXPECT_LT((m.means.row(k).transpose() - mean).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(TopicPosteriorCovs, TrivialCases) {
  const TopicTree tree;
  SentencePosteriors one;
  one.mean = (Matrix(1, 3) << 1, -2, 0.5).finished();
  one.variance = (Matrix(1, 3) << 2, 3, 4).finished();
  const auto p = topic_posteriors(one, Matrix::Ones(1, 1), tree);
  EXPECT_TRUE(p[0].cov.isApprox(Matrix(one.variance.row(0).asDiagonal()), 1e-14));

  SentencePosteriors same;
  same.mean = (Matrix(2, 2) << 1, 1, 1, 1).finished();
  same.variance = (Matrix(2, 2) << 1, 2, 3, 4).finished();
  const auto q = topic_posteriors(same, (Matrix(2, 1) << 1, 1).finished(), tree);
  EXPECT_TRUE(q[0].cov.isApprox((Matrix(2, 2) << 2, 0, 0, 3).finished(), 1e-14));
}

TEST(TopicPosteriorCovs, SecondMomentIdentity) {
  std::mt19937_64 rng(12);
  const TopicTree tree({3});
  const SentencePosteriors s = random_sentences(5, 4, 1.0, rng);
  const Matrix theta = random_theta(5, tree.size(), rng);
  const auto post = topic_posteriors(s, theta, tree);
  for (int k = 0; k < tree.size(); ++k) {
    Matrix lhs = Matrix::Zero(4, 4), rhs = Matrix::Zero(4, 4);
    for (int i = 0; i < 5; ++i) {
      const VectorXd mu = s.mean.row(i).transpose();
      lhs += theta(i, k) *
             (Matrix(s.variance.row(i).asDiagonal()) + mu * mu.transpose());
      rhs += theta(i, k) * (post[k].cov + post[k].mean * post[k].mean.transpose());
    }
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_TRUE(post[k].cov.isApprox(post[k].cov.transpose(), 0.0));
  }
}

TEST(TopicPriors, RecursiveStructure) {
  std::mt19937_64 rng(13);
  const TopicTree tree({2, 2});
  const SentencePosteriors s = random_sentences(6, 3, 1.0, rng);
  const auto post = topic_posteriors(s, random_theta(6, tree.size(), rng), tree);
  const auto prior = topic_priors(post, tree);
  EXPECT_EQ(prior[0].mean, VectorXd::Zero(3));
  EXPECT_EQ(prior[0].cov, Matrix::Identity(3, 3));
  EXPECT_EQ(prior[1].mean, post[0].mean);
  EXPECT_EQ(prior[1].cov, post[0].cov);
  // Grandchild 111 gets node 11's posterior, not the root's.
  EXPECT_EQ(prior[2].mean, post[1].mean);
  EXPECT_EQ(prior[2].cov, post[1].cov);
}

TEST(GaussianKl, ClosedFormCases) {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> normal;
  VectorXd mu(4);
  for (int i = 0; i < 4; ++i) mu(i) = normal(rng);
  const VectorXd ones = VectorXd::Ones(4);
  EXPECT_NEAR(gaussian_kl(mu, ones, VectorXd::Zero(4), Matrix::Identity(4, 4)),
              0.5 * mu.squaredNorm(), 1e-12);
  const VectorXd var = (VectorXd(4) << 0.5, 1.5, 2.0, 3.0).finished();
  EXPECT_NEAR(gaussian_kl(mu, var, mu, Matrix(var.asDiagonal())), 0.0, 1e-12);
  // Diagonal p: the per-dimension univariate formula.
  const VectorXd pm = (VectorXd(4) << 1, -1, 0.5, 0).finished();
  const VectorXd pv = (VectorXd(4) << 2, 0.7, 1.1, 4).finished();
  double expected = 0.0;
  for (int i = 0; i < 4; ++i)
    expected += 0.5 * (std::log(pv(i) / var(i)) + var(i) / pv(i) +
                       (mu(i) - pm(i)) * (mu(i) - pm(i)) / pv(i) - 1.0);
  EXPECT_NEAR(gaussian_kl(mu, var, pm, Matrix(pv.asDiagonal())), expected, 1e-12);
}

TEST(GaussianKl, RowsMatchScalarAndGradients) {
  std::mt19937_64 rng(15);
  const SentencePosteriors s = random_sentences(3, 3, 0.5, rng);
  const SentencePosteriors p = random_sentences(4, 3, 0.5, rng);
  const auto post = topic_posteriors(p, Matrix::Ones(4, 1), TopicTree());
  ad::Graph g;
  const Matrix kl = gaussian_kl_rows(g.constant(s.mean), g.constant(s.variance),
                                     g.constant(post[0].mean.transpose()),
                                     g.constant(post[0].cov))
                        .value();
  for (int i = 0; i < 3; ++i)
    EXPECT_NEAR(kl(i, 0),
                gaussian_kl(s.mean.row(i).transpose(), s.variance.row(i).transpose(),
                            post[0].mean, post[0].cov),
                1e-12);
  const Matrix w = (Matrix(3, 1) << 0.3, 1.2, -0.4).finished();
  // Symmetrized so perturbing one entry moves both triangles.
  auto wrt_cov = testing::check_input(post[0].cov, [&](ad::Graph& g, ad::Var c) {
    ad::Var sym = ad::scale(ad::add(c, ad::transpose(c)), 0.5);
    return ad::sum_all(ad::mul(
        gaussian_kl_rows(g.constant(s.mean), g.constant(s.variance),
                         g.constant(post[0].mean.transpose()), sym),
        g.constant(w)));
  });
  EXPECT_LT(wrt_cov.max_rel, 1e-6) << wrt_cov.worst;
  auto wrt_var = testing::check_input(s.variance, [&](ad::Graph& g, ad::Var v) {
    return ad::sum_all(ad::mul(
        gaussian_kl_rows(g.constant(s.mean), v,
                         g.constant(post[0].mean.transpose()),
                         g.constant(post[0].cov)),
        g.constant(w)));
  });
  EXPECT_LT(wrt_var.max_rel, 1e-6) << wrt_var.worst;
  auto wrt_mean = testing::check_input(s.mean, [&](ad::Graph& g, ad::Var m) {
    return ad::sum_all(ad::mul(
        gaussian_kl_rows(m, g.constant(s.variance),
                         g.constant(post[0].mean.transpose()),
                         g.constant(post[0].cov)),
        g.constant(w)));
  });
  EXPECT_LT(wrt_mean.max_rel, 1e-6) << wrt_mean.worst;
}

TEST(TopicPosteriorVars, MatchPlainComputationAndGradients) {
  std::mt19937_64 rng(16);
  const TopicTree tree({2});
  const SentencePosteriors s = random_sentences(4, 3, 0.5, rng);
  const Matrix theta = random_theta(4, tree.size(), rng);
  const auto plain = topic_posteriors(s, theta, tree);
  ad::Graph g;
  const auto vars = topic_posteriors(g, g.constant(s.mean), g.constant(s.variance),
                                     g.constant(theta), tree);
  for (int k = 0; k < tree.size(); ++k) {
    EXPECT_TRUE(vars.mean[k].value().transpose().isApprox(plain[k].mean, 1e-13));
    EXPECT_TRUE(vars.cov[k].value().isApprox(plain[k].cov, 1e-13));
  }
  const Matrix w = Matrix::Random(3, 3);
  auto report = testing::check_input(theta, [&](ad::Graph& g, ad::Var t) {
    auto v = topic_posteriors(g, g.constant(s.mean), g.constant(s.variance), t,
                              tree);
    return ad::add(ad::sum_all(ad::mul(v.cov[1], g.constant(w))),
                   ad::sum_all(v.mean[2]));
  });
  EXPECT_LT(report.max_rel, 1e-6) << report.worst;
}

TEST(KlBoundGap, SingleSentenceIsZero) {
  const TopicTree tree({2});
  SentencePosteriors s;
  s.mean = (Matrix(1, 2) << 0.4, -1.0).finished();
  s.variance = (Matrix(1, 2) << 1.7, 2.5).finished();
  const Matrix theta = (Matrix(1, 3) << 0.0, 1.0, 0.0).finished();
  const auto post = topic_posteriors(s, theta, tree);
  const auto prior = topic_priors(post, tree);
  EXPECT_NEAR(kl_bound_gap(s, theta, post, prior, 1), 0.0, 1e-12);
}

TEST(KlBoundGap, NonNegativeOnRandomInstances) {
  std::mt19937_64 rng(17);
  const TopicTree tree({3, 3});
  const SentencePosteriors s = random_sentences(10, 5, 1.0, rng);
  const Matrix theta = random_theta(10, tree.size(), rng);
  const auto post = topic_posteriors(s, theta, tree);
  const auto prior = topic_priors(post, tree);
  for (int k = 0; k < tree.size(); ++k)
    EXPECT_GE(kl_bound_gap(s, theta, post, prior, k), -1e-8) << k;
}

TEST(LogDetChain, HoldsOnRandomInstance) {
  std::mt19937_64 rng(18);
  const double floor = std::exp(0.5);
  const TopicTree tree({2, 2});
  const SentencePosteriors s = random_sentences(8, 6, floor, rng);
  const Matrix theta = random_theta(8, tree.size(), rng);
  const auto post = topic_posteriors(s, theta, tree);
  for (int k = 0; k < tree.size(); ++k) {
    const double weighted = weighted_sentence_log_det(s, theta, k);
    EXPECT_GE(log_det(post[k].cov), weighted);
    EXPECT_GE(weighted, 6 * std::log(floor));
  }
}

TEST(LogDet, MatchesDeterminant) {
  const Matrix a = (Matrix(3, 3) << 4, 1, 0.5, 1, 3, 0.2, 0.5, 0.2, 2).finished();
  EXPECT_NEAR(log_det(a), std::log(a.determinant()), 1e-12);
}

TEST(TopicDump, JsonRoundTrip) {
  std::mt19937_64 rng(19);
  const TopicTree tree({2});
  const SentencePosteriors s = random_sentences(4, 2, 1.0, rng);
  const auto post = topic_posteriors(s, random_theta(4, 3, rng), tree);
  const TopicDump d = make_topic_dump("p1", post, tree);
  EXPECT_EQ(d.depth, (std::vector<int>{0, 1, 1}));
  for (int k = 0; k < 3; ++k)
    EXPECT_NEAR(d.log_det[k], std::log(post[k].cov.determinant()), 1e-10);
  const TopicDump r = TopicDump::from_json_line(d.to_json_line());
  EXPECT_EQ(r.product_id, "p1");
  EXPECT_TRUE(r.means.isApprox(d.means, 1e-15));
  EXPECT_TRUE(r.covs[2].isApprox(d.covs[2], 1e-15));
}

}  // namespace
}  // namespace tgsum
