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
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace tgsum {

namespace {

using Llt = Eigen::LLT<Matrix>;

bool good_factor(const Llt& llt) {
  if (llt.info() != Eigen::Success) return false;
  const Matrix& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < l.rows(); ++i)
    if (!(l(i, i) > 0.0) || !std::isfinite(l(i, i))) return false;
  return true;
}

Llt factor(const Matrix& a) {
  Llt llt(a);
  if (good_factor(llt)) return llt;
  Matrix jittered = a;
  jittered.diagonal().array() += kCholeskyJitter;
  llt.compute(jittered);
  if (good_factor(llt)) return llt;
  std::ostringstream msg;
  msg << "Cholesky failed for " << a.rows() << "x" << a.cols()
      << " matrix (after jitter " << kCholeskyJitter << "); diagonal min "
      << a.diagonal().minCoeff() << ", max " << a.diagonal().maxCoeff()
      << ", asymmetry " << (a - a.transpose()).cwiseAbs().maxCoeff();
  if (a.allFinite()) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
    msg << ", min eigenvalue " << es.eigenvalues().minCoeff();
  } else {
    msg << ", non-finite entries";
  }
  throw std::runtime_error(msg.str());
}

double log_det_of(const Llt& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

void check_shapes(const SentencePosteriors& s, const Matrix& theta) {
  if (s.mean.rows() != s.variance.rows() || s.mean.cols() != s.variance.cols())
    throw std::invalid_argument("latent_gmm: mean/variance shape mismatch");
  if (theta.rows() != s.mean.rows())
    throw std::invalid_argument("latent_gmm: theta rows != sentences");
}

}  // namespace

TopicMeans topic_posterior_means(const SentencePosteriors& sentences,
                                 const Matrix& theta, const TopicTree& tree) {
  check_shapes(sentences, theta);
  const int K = tree.size();
  const Eigen::Index n = sentences.mean.cols();
  TopicMeans out;
  out.means = Matrix::Zero(K, n);
  out.mass.assign(K, 0.0);
  out.empty.assign(K, false);
  for (int k = 0; k < K; ++k) {
    const double mass = theta.col(k).sum();
    out.mass[k] = mass;
    if (mass < kEmptyTopicMass) {
      out.empty[k] = true;
      const int p = tree.parent(k);
      if (p >= 0) out.means.row(k) = out.means.row(p);
      continue;
    }
    out.means.row(k) = theta.col(k).transpose() * sentences.mean / mass;
  }
  return out;
}

std::vector<Matrix> topic_posterior_covs(const SentencePosteriors& sentences,
                                         const Matrix& theta,
                                         const TopicMeans& means,
                                         const TopicTree& tree) {
  check_shapes(sentences, theta);
  const int K = tree.size();
  const Eigen::Index n = sentences.mean.cols();
  std::vector<Matrix> covs(K);
  for (int k = 0; k < K; ++k) {
    if (means.empty[k]) {
      const int p = tree.parent(k);
      covs[k] = p >= 0 ? covs[p] : Matrix::Identity(n, n);
      continue;
    }
    const Eigen::RowVectorXd mu = means.means.row(k);
    const Matrix centered = sentences.mean.rowwise() - mu;
    const Eigen::VectorXd w = theta.col(k);
    Matrix cov = centered.transpose() * w.asDiagonal() * centered;
    cov.diagonal() += sentences.variance.transpose() * w;
    cov /= means.mass[k];
    covs[k] = 0.5 * (cov + cov.transpose());
  }
  return covs;
}

std::vector<TopicPosterior> topic_posteriors(const SentencePosteriors& sentences,
                                             const Matrix& theta,
                                             const TopicTree& tree) {
  const TopicMeans means = topic_posterior_means(sentences, theta, tree);
  const std::vector<Matrix> covs =
      topic_posterior_covs(sentences, theta, means, tree);
  std::vector<TopicPosterior> out(tree.size());
  for (int k = 0; k < tree.size(); ++k) {
    out[k].mean = means.means.row(k).transpose();
    out[k].cov = covs[k];
    out[k].mass = means.mass[k];
    out[k].empty = means.empty[k];
  }
  return out;
}

std::vector<Gaussian> topic_priors(const std::vector<TopicPosterior>& posteriors,
                                   const TopicTree& tree) {
  if (static_cast<int>(posteriors.size()) != tree.size())
    throw std::invalid_argument("topic_priors: posterior count != K");
  std::vector<Gaussian> out(tree.size());
  const Eigen::Index n = posteriors.empty() ? 0 : posteriors[0].mean.size();
  for (int k = 0; k < tree.size(); ++k) {
    const int p = tree.parent(k);
    if (p < 0) {
      out[k].mean = Eigen::VectorXd::Zero(n);
      out[k].cov = Matrix::Identity(n, n);
    } else {
      out[k].mean = posteriors[p].mean;
      out[k].cov = posteriors[p].cov;
    }
  }
  return out;
}

double log_det(const Matrix& spd) { return log_det_of(factor(spd)); }

double gaussian_kl(const Eigen::VectorXd& q_mean, const Eigen::VectorXd& q_var,
                   const Eigen::VectorXd& p_mean, const Matrix& p_cov) {
  const Eigen::Index n = q_mean.size();
  if (q_var.size() != n || p_mean.size() != n || p_cov.rows() != n ||
      p_cov.cols() != n)
    throw std::invalid_argument("gaussian_kl: dimension mismatch");
  const Llt llt = factor(p_cov);
  const Matrix p_inv = llt.solve(Matrix::Identity(n, n));
  const Eigen::VectorXd diff = q_mean - p_mean;
  const double maha = diff.dot(llt.solve(diff));
  const double trace = p_inv.diagonal().dot(q_var);
  const double kl = 0.5 * (log_det_of(llt) - q_var.array().log().sum() +
                           trace + maha - static_cast<double>(n));
  return kl < 0.0 ? 0.0 : kl;
}

double kl_bound_gap(const SentencePosteriors& sentences, const Matrix& theta,
                    const std::vector<TopicPosterior>& posteriors,
                    const std::vector<Gaussian>& priors, int k) {
  check_shapes(sentences, theta);
  const Gaussian& prior = priors.at(k);
  const TopicPosterior& post = posteriors.at(k);
  // KL[q_k || p_k] with full-covariance q_k.
  const Eigen::Index n = prior.mean.size();
  const Llt lp = factor(prior.cov);
  const Matrix p_inv = lp.solve(Matrix::Identity(n, n));
  const Eigen::VectorXd d = post.mean - prior.mean;
  const double kl_topic =
      0.5 * (log_det_of(lp) - log_det(post.cov) +
             (p_inv * post.cov).trace() + d.dot(lp.solve(d)) -
             static_cast<double>(n));
  double upper = 0.0;
  double lower = 0.0;
  for (Eigen::Index s = 0; s < sentences.mean.rows(); ++s) {
    const double w = theta(s, k);
    upper += w * gaussian_kl(sentences.mean.row(s).transpose(),
                             sentences.variance.row(s).transpose(), prior.mean,
                             prior.cov);
    lower += w * kl_topic;
  }
  return upper - lower;
}

double weighted_sentence_log_det(const SentencePosteriors& sentences,
                                 const Matrix& theta, int k) {
  const double mass = theta.col(k).sum();
  double acc = 0.0;
  for (Eigen::Index s = 0; s < sentences.variance.rows(); ++s)
    acc += theta(s, k) * sentences.variance.row(s).array().log().sum();
  return acc / mass;
}

TopicPosteriorVars topic_posteriors(ad::Graph& g, ad::Var mean,
                                    ad::Var variance, ad::Var theta,
                                    const TopicTree& tree) {
  const int K = tree.size();
  const Eigen::Index n = mean.cols();
  TopicPosteriorVars out;
  out.mean.resize(K);
  out.cov.resize(K);
  out.mass.assign(K, 0.0);
  out.empty.assign(K, false);
  ad::Var eye = g.constant(Matrix::Identity(n, n));
  for (int k = 0; k < K; ++k) {
    ad::Var w = ad::slice_cols(theta, k, 1);
    const double mass = w.value().sum();
    out.mass[k] = mass;
    if (mass < kEmptyTopicMass) {
      out.empty[k] = true;
      const int p = tree.parent(k);
      out.mean[k] = p >= 0 ? out.mean[p] : g.constant(Matrix::Zero(1, n));
      out.cov[k] = p >= 0 ? out.cov[p] : eye;
      continue;
    }
    ad::Var inv_mass = ad::reciprocal(ad::sum_all(w));
    ad::Var wt = ad::transpose(w);
    ad::Var mu = ad::mul(ad::matmul(wt, mean), inv_mass);
    ad::Var centered = ad::sub(mean, mu);
    ad::Var spread =
        ad::matmul(ad::transpose(ad::mul(centered, w)), centered);
    ad::Var diag = ad::mul(eye, ad::matmul(wt, variance));
    out.mean[k] = mu;
    out.cov[k] = ad::mul(ad::add(spread, diag), inv_mass);
  }
  return out;
}

ad::Var gaussian_kl_rows(ad::Var q_mean, ad::Var q_var, ad::Var p_mean,
                         ad::Var p_cov) {
  const Matrix& m = q_mean.value();
  const Matrix& v = q_var.value();
  const Eigen::Index S = m.rows();
  const Eigen::Index n = m.cols();
  if (v.rows() != S || v.cols() != n || p_mean.cols() != n ||
      p_mean.rows() != 1 || p_cov.rows() != n || p_cov.cols() != n)
    throw std::invalid_argument("gaussian_kl_rows: shape mismatch");
  const Llt llt = factor(p_cov.value());
  Matrix p_inv = llt.solve(Matrix::Identity(n, n));
  p_inv = 0.5 * (p_inv + p_inv.transpose());
  const double logdet_p = log_det_of(llt);
  const Matrix diff = m.rowwise() - p_mean.value().row(0);  // S x n
  const Matrix solved = diff * p_inv;                       // rows P^-1 d
  Matrix out(S, 1);
  for (Eigen::Index s = 0; s < S; ++s) {
    out(s, 0) = 0.5 * (logdet_p - v.row(s).array().log().sum() +
                       v.row(s).dot(p_inv.diagonal().transpose()) +
                       diff.row(s).dot(solved.row(s)) - static_cast<double>(n));
  }
  const ad::Var in[] = {q_mean, q_var, p_mean, p_cov};
  return q_mean.graph()->make(
      std::move(out), in,
      [im = q_mean.id(), iv = q_var.id(), ipm = p_mean.id(), ipc = p_cov.id(),
       p_inv, diff, solved](ad::Graph& g, const Matrix& go) {
        const Matrix& v = g.value(iv);
        const Eigen::VectorXd w = go.col(0);
        if (g.requires_grad(im)) g.accumulate(im, w.asDiagonal() * solved);
        if (g.requires_grad(ipm))
          g.accumulate(ipm, -(w.transpose() * solved));
        if (g.requires_grad(iv)) {
          Matrix gv = v.cwiseInverse();
          gv = (-gv).rowwise() + p_inv.diagonal().transpose();
          g.accumulate(iv, 0.5 * (w.asDiagonal() * gv));
        }
        if (g.requires_grad(ipc)) {
          // d/dP = 1/2 [ (sum w) P^-1 - P^-1 (diag(sum w v) + sum w d d^T) P^-1 ]
          Matrix inner = diff.transpose() * w.asDiagonal() * diff;
          inner.diagonal() += v.transpose() * w;
          Matrix gp = 0.5 * (w.sum() * p_inv - p_inv * inner * p_inv);
          g.accumulate(ipc, gp);
        }
      });
}

std::string TopicDump::to_json_line() const {
  nlohmann::json j;
  j["product_id"] = product_id;
  j["depth"] = depth;
  j["mass"] = mass;
  j["empty"] = empty;
  j["log_det"] = log_det;
  nlohmann::json ms = nlohmann::json::array();
  for (Eigen::Index k = 0; k < means.rows(); ++k) {
    std::vector<double> row(means.cols());
    for (Eigen::Index i = 0; i < means.cols(); ++i) row[i] = means(k, i);
    ms.push_back(row);
  }
  j["means"] = std::move(ms);
  nlohmann::json cs = nlohmann::json::array();
  for (const Matrix& c : covs) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < c.rows(); ++r) {
      std::vector<double> row(c.cols());
      for (Eigen::Index i = 0; i < c.cols(); ++i) row[i] = c(r, i);
      rows.push_back(row);
    }
    cs.push_back(std::move(rows));
  }
  j["covs"] = std::move(cs);
  return j.dump();
}

TopicDump TopicDump::from_json_line(const std::string& line) {
  const nlohmann::json j = nlohmann::json::parse(line);
  TopicDump d;
  d.product_id = j.at("product_id").get<std::string>();
  d.depth = j.at("depth").get<std::vector<int>>();
  d.mass = j.at("mass").get<std::vector<double>>();
  d.empty = j.at("empty").get<std::vector<bool>>();
  d.log_det = j.at("log_det").get<std::vector<double>>();
  const auto ms = j.at("means").get<std::vector<std::vector<double>>>();
  const Eigen::Index n = ms.empty() ? 0 : static_cast<Eigen::Index>(ms[0].size());
  d.means = Matrix(static_cast<Eigen::Index>(ms.size()), n);
  for (std::size_t k = 0; k < ms.size(); ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      d.means(static_cast<Eigen::Index>(k), i) = ms[k][i];
  for (const auto& c :
       j.at("covs").get<std::vector<std::vector<std::vector<double>>>>()) {
    Matrix m(static_cast<Eigen::Index>(c.size()),
             c.empty() ? 0 : static_cast<Eigen::Index>(c[0].size()));
    for (std::size_t r = 0; r < c.size(); ++r)
      for (std::size_t i = 0; i < c[r].size(); ++i)
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = c[r][i];
    d.covs.push_back(std::move(m));
  }
  const std::size_t K = d.depth.size();
  if (d.mass.size() != K || d.empty.size() != K || d.log_det.size() != K ||
      static_cast<std::size_t>(d.means.rows()) != K || d.covs.size() != K)
    throw std::runtime_error("topic dump: inconsistent topic counts for " +
                             d.product_id);
  return d;
}

TopicDump make_topic_dump(const std::string& product_id,
                          const std::vector<TopicPosterior>& posteriors,
                          const TopicTree& tree) {
  TopicDump d;
  d.product_id = product_id;
  const Eigen::Index n = posteriors.empty() ? 0 : posteriors[0].mean.size();
  d.means = Matrix(static_cast<Eigen::Index>(posteriors.size()), n);
  for (std::size_t k = 0; k < posteriors.size(); ++k) {
    d.depth.push_back(tree.depth(static_cast<int>(k)));
    d.mass.push_back(posteriors[k].mass);
    d.empty.push_back(posteriors[k].empty);
    d.log_det.push_back(log_det(posteriors[k].cov));
    d.means.row(static_cast<Eigen::Index>(k)) = posteriors[k].mean.transpose();
    d.covs.push_back(posteriors[k].cov);
  }
  return d;
}

}  // namespace tgsum
