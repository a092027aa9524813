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

// Evaluation metrics. ROUGE here is the plain token form: no stemming and no
// stopword removal, so absolute numbers differ from the official toolkit.

#ifndef TGSUM_METRICS_H_
#define TGSUM_METRICS_H_

#include <string>
#include <vector>

#include "tgsum/corpus.h"
#include "tgsum/latent_gmm.h"
#include "tgsum/topic_tree.h"

namespace tgsum {

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

RougeScore make_rouge(double overlap, double candidate_total,
                      double reference_total);

// Clipped n-gram overlap. Zero score when either side has no n-grams.
RougeScore rouge_n(const Tokens& candidate, const Tokens& reference, int n);
// Longest-common-subsequence form.
RougeScore rouge_l(const Tokens& candidate, const Tokens& reference);
std::size_t lcs_length(const Tokens& a, const Tokens& b);

// BLEU of `hypothesis` against several references: clipped n-gram precisions
// for orders 1..max_order, uniform geometric mean, brevity penalty against
// the closest reference length (shorter wins ties). Without smoothing any
// zero precision makes the score 0.
double bleu(const Tokens& hypothesis, const std::vector<Tokens>& references,
            int max_order, bool smoothing = false);

// Mean over summaries of BLEU against all other summaries. Needs >= 2.
double self_bleu(const std::vector<Tokens>& summaries, int max_order,
                 bool smoothing = false);

// Mean log-determinant per depth over all dumps (index = depth).
std::vector<double> logdet_by_level(const std::vector<TopicDump>& dumps,
                                    const TopicTree& tree);

struct Projection {
  Matrix coords;      // K x 2
  Matrix axes;        // n x 2, orthonormal
  Eigen::VectorXd eigenvalues;  // scatter-matrix eigenvalues, descending
  // Per topic, points at unit Mahalanobis distance in the projected plane.
  std::vector<Matrix> ellipses;  // each samples x 2
  bool degenerate = false;
};

// PCA of topic means onto their top two principal axes. Throws with fewer
// than two topics.
Projection latent_projection(const Matrix& means, const std::vector<Matrix>& covs,
                             int ellipse_samples = 32);

}  // namespace tgsum

#endif  // TGSUM_METRICS_H_
