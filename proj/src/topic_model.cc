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

#include "tgsum/topic_model.h"

#include <stdexcept>

namespace tgsum {

Drnn::Drnn(const std::string& name, int hidden, std::mt19937_64& rng)
    : parent_weight(name + ".parent", init_uniform(hidden, hidden, hidden, rng)),
      sibling_weight(name + ".sibling",
                     init_uniform(hidden, hidden, hidden, rng)),
      start(name + ".start", init_uniform(1, hidden, hidden, rng)) {}

void Drnn::collect(std::vector<Parameter*>& out) {
  out.push_back(&parent_weight);
  out.push_back(&sibling_weight);
  out.push_back(&start);
}

TopicModelParams::TopicModelParams(int vocab, int embed_dim, int hidden,
                                   std::mt19937_64& rng)
    : embed("topic.embed", init_uniform(vocab, embed_dim, 1, rng) * 0.1),
      encoder("topic.gru", embed_dim, hidden, rng),
      path("topic.path", hidden, rng),
      level("topic.level", hidden, rng) {}

void TopicModelParams::collect(std::vector<Parameter*>& out) {
  out.push_back(&embed);
  encoder.collect(out);
  path.collect(out);
  level.collect(out);
}

Var tree_hidden_states(ad::Graph& g, Drnn& drnn, const TopicTree& tree) {
  Var wp = g.param(drnn.parent_weight);
  Var ws = g.param(drnn.sibling_weight);
  Var start = g.param(drnn.start);
  std::vector<Var> h(tree.size());
  for (int k = 0; k < tree.size(); ++k) {
    const int p = tree.parent(k);
    Var parent_in = p < 0 ? start : h[p];
    const std::vector<int> sibs = tree.preceding_siblings(k);
    Var sibling_in = sibs.empty() ? start : h[sibs.back()];
    h[k] = ad::tanh(
        ad::add(ad::matmul(parent_in, wp), ad::matmul(sibling_in, ws)));
  }
  return ad::concat_rows(h);
}

namespace {

struct StickLayout {
  std::vector<std::vector<int>> preceding;
  std::vector<bool> forced;
};

StickLayout path_layout(const TopicTree& tree) {
  StickLayout l;
  for (int k = 0; k < tree.size(); ++k) {
    l.preceding.push_back(tree.preceding_siblings(k));
    l.forced.push_back(tree.is_last_sibling(k));
  }
  return l;
}

StickLayout level_layout(const TopicTree& tree) {
  StickLayout l;
  for (int k = 0; k < tree.size(); ++k) {
    l.preceding.push_back(tree.ancestors(k));
    l.forced.push_back(tree.at_deepest_level(k));
  }
  return l;
}

double product_except(const Matrix& v, Eigen::Index row,
                      const std::vector<int>& idx, int skip) {
  double p = 1.0;
  for (int j : idx)
    if (j != skip) p *= 1.0 - v(row, j);
  return p;
}

}  // namespace

Var stick_paths(Var nu, const TopicTree& tree) {
  const int K = tree.size();
  if (nu.cols() != K) throw std::invalid_argument("stick_paths: width != K");
  StickLayout layout = path_layout(tree);
  const Matrix& v = nu.value();
  Matrix pi(v.rows(), K);
  for (Eigen::Index s = 0; s < v.rows(); ++s) {
    pi(s, 0) = 1.0;
    for (int k = 1; k < K; ++k) {
      const double own = layout.forced[k] ? 1.0 : v(s, k);
      pi(s, k) = pi(s, tree.parent(k)) * own *
                 product_except(v, s, layout.preceding[k], -1);
    }
  }
  Matrix pi_keep = pi;
  const Var in[] = {nu};
  return nu.graph()->make(
      std::move(pi), in,
      [inu = nu.id(), tree, layout = std::move(layout),
       pi = std::move(pi_keep)](ad::Graph& g, const Matrix& go) {
        const Matrix& v = g.value(inu);
        Matrix gpi = go;
        Matrix gnu = Matrix::Zero(v.rows(), v.cols());
        for (Eigen::Index s = 0; s < v.rows(); ++s) {
          for (int k = tree.size() - 1; k >= 1; --k) {
            const int p = tree.parent(k);
            const double gk = gpi(s, k);
            const double own = layout.forced[k] ? 1.0 : v(s, k);
            const double rem = product_except(v, s, layout.preceding[k], -1);
            gpi(s, p) += gk * own * rem;
            if (!layout.forced[k]) gnu(s, k) += gk * pi(s, p) * rem;
            for (int j : layout.preceding[k])
              gnu(s, j) -= gk * pi(s, p) * own *
                           product_except(v, s, layout.preceding[k], j);
          }
        }
        g.accumulate(inu, gnu);
      });
}

Var stick_levels(Var eta, const TopicTree& tree) {
  const int K = tree.size();
  if (eta.cols() != K) throw std::invalid_argument("stick_levels: width != K");
  StickLayout layout = level_layout(tree);
  const Matrix& v = eta.value();
  Matrix phi(v.rows(), K);
  for (Eigen::Index s = 0; s < v.rows(); ++s) {
    for (int k = 0; k < K; ++k) {
      const double own = layout.forced[k] ? 1.0 : v(s, k);
      phi(s, k) = own * product_except(v, s, layout.preceding[k], -1);
    }
  }
  const Var in[] = {eta};
  return eta.graph()->make(
      std::move(phi), in,
      [ieta = eta.id(), K, layout = std::move(layout)](ad::Graph& g,
                                                       const Matrix& go) {
        const Matrix& v = g.value(ieta);
        Matrix geta = Matrix::Zero(v.rows(), v.cols());
        for (Eigen::Index s = 0; s < v.rows(); ++s) {
          for (int k = 0; k < K; ++k) {
            const double own = layout.forced[k] ? 1.0 : v(s, k);
            if (!layout.forced[k])
              geta(s, k) +=
                  go(s, k) * product_except(v, s, layout.preceding[k], -1);
            for (int j : layout.preceding[k])
              geta(s, j) -= go(s, k) * own *
                            product_except(v, s, layout.preceding[k], j);
          }
        }
        g.accumulate(ieta, geta);
      });
}

Var path_distribution(Var y, Var hidden, const TopicTree& tree) {
  Var nu = ad::sigmoid(ad::matmul(y, ad::transpose(hidden)));
  return stick_paths(nu, tree);
}

Var level_distribution(Var y, Var hidden, const TopicTree& tree) {
  Var eta = ad::sigmoid(ad::matmul(y, ad::transpose(hidden)));
  return stick_levels(eta, tree);
}

Var sentence_embedding(ad::Graph& g, TopicModelParams& params,
                       const std::vector<std::vector<int>>& sentences,
                       double dropout, std::mt19937_64* rng) {
  const PaddedBatch batch = PaddedBatch::from(sentences);
  Var embed = g.param(params.embed);
  std::vector<Var> inputs;
  for (int t = 0; t < batch.steps; ++t) {
    Var x = ad::gather_rows(embed, batch.ids[t]);
    if (dropout > 0.0 && rng != nullptr) x = ad::dropout(x, dropout, *rng);
    inputs.push_back(x);
  }
  Var h0 = g.constant(Matrix::Zero(batch.batch, params.hidden()));
  if (inputs.empty()) return h0;
  return run_gru(g, params.encoder, inputs, &batch.masks, h0).back();
}

Var soft_sentence_embedding(ad::Graph& g, TopicModelParams& params,
                            const std::vector<Var>& soft_words) {
  if (soft_words.empty())
    throw std::invalid_argument("soft_sentence_embedding: no steps");
  Var embed = g.param(params.embed);
  std::vector<Var> inputs;
  for (const Var& w : soft_words) inputs.push_back(ad::matmul(w, embed));
  Var h0 = g.constant(Matrix::Zero(soft_words[0].rows(), params.hidden()));
  return run_gru(g, params.encoder, inputs, nullptr, h0).back();
}

TopicDistributionVars topic_distribution(ad::Graph& g,
                                         TopicModelParams& params,
                                         const TopicTree& tree, Var y) {
  Var hp = tree_hidden_states(g, params.path, tree);
  Var hl = tree_hidden_states(g, params.level, tree);
  TopicDistributionVars out;
  out.path = path_distribution(y, hp, tree);
  out.level = level_distribution(y, hl, tree);
  out.topic = ad::mul(out.path, out.level);
  return out;
}

Var classify_soft_sentence(ad::Graph& g, TopicModelParams& params,
                           const TopicTree& tree,
                           const std::vector<Var>& soft_words) {
  Var y = soft_sentence_embedding(g, params, soft_words);
  return topic_distribution(g, params, tree, y).topic;
}

TopicDistribution infer_topics(TopicModelParams& params, const TopicTree& tree,
                               const std::vector<std::vector<int>>& sentences) {
  ad::Graph g;
  Var y = sentence_embedding(g, params, sentences);
  TopicDistributionVars d = topic_distribution(g, params, tree, y);
  return {d.path.value(), d.level.value(), d.topic.value()};
}

}  // namespace tgsum
