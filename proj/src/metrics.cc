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

#include "tgsum/metrics.h"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <numbers>
#include <stdexcept>

namespace tgsum {

namespace {

using NgramCounts = std::map<std::vector<std::string>, int>;

NgramCounts count_ngrams(const Tokens& tokens, int n) {
  NgramCounts counts;
  if (n <= 0 || static_cast<int>(tokens.size()) < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i)
    ++counts[std::vector<std::string>(tokens.begin() + i,
                                      tokens.begin() + i + n)];
  return counts;
}

int total(const NgramCounts& c) {
  int t = 0;
  for (const auto& [g, n] : c) t += n;
  return t;
}

}  // namespace

RougeScore make_rouge(double overlap, double candidate_total,
                      double reference_total) {
  RougeScore s;
  if (candidate_total <= 0.0 || reference_total <= 0.0) return s;
  s.precision = overlap / candidate_total;
  s.recall = overlap / reference_total;
  if (s.precision + s.recall > 0.0)
    s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

RougeScore rouge_n(const Tokens& candidate, const Tokens& reference, int n) {
  if (n < 1) throw std::invalid_argument("rouge_n: n must be >= 1");
  const NgramCounts c = count_ngrams(candidate, n);
  const NgramCounts r = count_ngrams(reference, n);
  int overlap = 0;
  for (const auto& [gram, cnt] : c) {
    auto it = r.find(gram);
    if (it != r.end()) overlap += std::min(cnt, it->second);
  }
  return make_rouge(overlap, total(c), total(r));
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

RougeScore rouge_l(const Tokens& candidate, const Tokens& reference) {
  return make_rouge(static_cast<double>(lcs_length(candidate, reference)),
                    static_cast<double>(candidate.size()),
                    static_cast<double>(reference.size()));
}

double bleu(const Tokens& hypothesis, const std::vector<Tokens>& references,
            int max_order, bool smoothing) {
  if (max_order < 1) throw std::invalid_argument("bleu: max_order < 1");
  if (hypothesis.empty() || references.empty()) return 0.0;
  double log_sum = 0.0;
  for (int n = 1; n <= max_order; ++n) {
    const NgramCounts hyp = count_ngrams(hypothesis, n);
    NgramCounts max_ref;
    for (const Tokens& ref : references)
      for (const auto& [gram, cnt] : count_ngrams(ref, n))
        max_ref[gram] = std::max(max_ref[gram], cnt);
    int clipped = 0;
    for (const auto& [gram, cnt] : hyp) {
      auto it = max_ref.find(gram);
      if (it != max_ref.end()) clipped += std::min(cnt, it->second);
    }
    const int denom = total(hyp);
    double p;
    if (smoothing) {
      p = (clipped + 1.0) / (denom + 1.0);
    } else {
      if (clipped == 0 || denom == 0) return 0.0;
      p = static_cast<double>(clipped) / denom;
    }
    log_sum += std::log(p) / max_order;
  }
  const double hyp_len = static_cast<double>(hypothesis.size());
  double closest = static_cast<double>(references[0].size());
  for (const Tokens& ref : references) {
    const double len = static_cast<double>(ref.size());
    const double d = std::abs(len - hyp_len);
    const double best = std::abs(closest - hyp_len);
    if (d < best || (d == best && len < closest)) closest = len;
  }
  const double bp =
      hyp_len > closest ? 1.0 : std::exp(1.0 - closest / hyp_len);
  return bp * std::exp(log_sum);
}

double self_bleu(const std::vector<Tokens>& summaries, int max_order,
                 bool smoothing) {
  if (summaries.size() < 2)
    throw std::invalid_argument("self_bleu: needs at least 2 summaries");
  double acc = 0.0;
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    std::vector<Tokens> refs;
    for (std::size_t j = 0; j < summaries.size(); ++j)
      if (j != i) refs.push_back(summaries[j]);
    acc += bleu(summaries[i], refs, max_order, smoothing);
  }
  return acc / static_cast<double>(summaries.size());
}

std::vector<double> logdet_by_level(const std::vector<TopicDump>& dumps,
                                    const TopicTree& tree) {
  std::vector<double> sum(tree.level_count(), 0.0);
  std::vector<int> count(tree.level_count(), 0);
  for (const TopicDump& d : dumps) {
    if (static_cast<int>(d.log_det.size()) != tree.size())
      throw std::invalid_argument("logdet_by_level: dump does not match tree");
    for (int k = 0; k < tree.size(); ++k) {
      sum[tree.depth(k)] += d.log_det[k];
      ++count[tree.depth(k)];
    }
  }
  for (std::size_t l = 0; l < sum.size(); ++l)
    if (count[l] > 0) sum[l] /= count[l];
  return sum;
}

Projection latent_projection(const Matrix& means, const std::vector<Matrix>& covs,
                             int ellipse_samples) {
  if (means.rows() < 2)
    throw std::invalid_argument("latent_projection: needs >= 2 topics");
  if (means.cols() < 2)
    throw std::invalid_argument("latent_projection: needs latent dim >= 2");
  const Eigen::RowVectorXd center = means.colwise().mean();
  const Matrix centered = means.rowwise() - center;
  const Matrix scatter = centered.transpose() * centered;
  Eigen::SelfAdjointEigenSolver<Matrix> es(scatter);
  const Eigen::Index n = means.cols();
  Projection p;
  p.eigenvalues = es.eigenvalues().reverse();
  p.axes = Matrix(n, 2);
  p.axes.col(0) = es.eigenvectors().col(n - 1);
  p.axes.col(1) = es.eigenvectors().col(n - 2);
  const double top = p.eigenvalues(0);
  if (!(top > 1e-12 * std::max(1.0, scatter.cwiseAbs().maxCoeff()))) {
    std::clog << "latent_projection: topic means coincide; using coordinate "
                 "axes\n";
    p.degenerate = true;
    p.axes = Matrix::Identity(n, 2);
  }
  p.coords = centered * p.axes;
  for (std::size_t k = 0; k < covs.size(); ++k) {
    const Matrix c2 = p.axes.transpose() * covs[k] * p.axes;
    Eigen::SelfAdjointEigenSolver<Matrix> e2(c2);
    const Matrix root = e2.eigenvectors() *
                        e2.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    Matrix pts(ellipse_samples, 2);
    for (int i = 0; i < ellipse_samples; ++i) {
      const double t = 2.0 * std::numbers::pi * i / ellipse_samples;
      Eigen::Vector2d u(std::cos(t), std::sin(t));
      pts.row(i) = p.coords.row(static_cast<Eigen::Index>(k)) +
                   (root * u).transpose();
    }
    p.ellipses.push_back(std::move(pts));
  }
  return p;
}

}  // namespace tgsum
