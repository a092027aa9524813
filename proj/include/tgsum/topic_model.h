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

// Tree-structured neural topic model.
//
// A sentence embedding y_s (final state of a dedicated GRU) is scored against
// per-node hidden states produced by two doubly-recurrent tree networks. The
// first yields stick-breaking proportions nu over siblings (path
// distribution pi), the second yields stopping proportions eta along each
// root-to-leaf path (level distribution phi). The topic distribution is
// theta = pi * phi.
//
// Stick closure: the last sibling always takes the rest of its parent's
// stick (nu = 1) and nodes at the deepest level always stop (eta = 1), so pi
// sums to one on every level and phi sums to one on every path.

#ifndef TGSUM_TOPIC_MODEL_H_
#define TGSUM_TOPIC_MODEL_H_

#include <random>
#include <vector>

#include "tgsum/layers.h"
#include "tgsum/topic_tree.h"

namespace tgsum {

struct Drnn {
  Parameter parent_weight;   // m x m, applied to h_par(k)
  Parameter sibling_weight;  // m x m, applied to h_(k-1)
  Parameter start;           // 1 x m, stands in for a missing parent/sibling

  Drnn() = default;
  Drnn(const std::string& name, int hidden, std::mt19937_64& rng);
  void collect(std::vector<Parameter*>& out);
};

struct TopicModelParams {
  Parameter embed;  // V x e
  Gru encoder;      // e -> m
  Drnn path;
  Drnn level;

  TopicModelParams() = default;
  TopicModelParams(int vocab, int embed_dim, int hidden, std::mt19937_64& rng);
  int hidden() const { return encoder.hidden(); }
  void collect(std::vector<Parameter*>& out);
};

struct TopicDistributionVars {
  Var path;   // S x K
  Var level;  // S x K
  Var topic;  // S x K
};

struct TopicDistribution {
  Matrix path;
  Matrix level;
  Matrix topic;
};

// h_k = tanh(h_par(k) Wp + h_(k-1) Ws) in depth-first order; K x m.
Var tree_hidden_states(ad::Graph& g, Drnn& drnn, const TopicTree& tree);

// Stick-breaking over siblings; column 0 (root) is ignored in `nu`.
Var stick_paths(Var nu, const TopicTree& tree);
// Stick-breaking down each path.
Var stick_levels(Var eta, const TopicTree& tree);

Var path_distribution(Var y, Var hidden, const TopicTree& tree);
Var level_distribution(Var y, Var hidden, const TopicTree& tree);

// Sentence embeddings for discrete token ids; S x m.
Var sentence_embedding(ad::Graph& g, TopicModelParams& params,
                       const std::vector<std::vector<int>>& sentences,
                       double dropout = 0.0, std::mt19937_64* rng = nullptr);
// Same recurrence fed with expected embeddings of soft words; each step is a
// B x V matrix of word probabilities.
Var soft_sentence_embedding(ad::Graph& g, TopicModelParams& params,
                            const std::vector<Var>& soft_words);

TopicDistributionVars topic_distribution(ad::Graph& g,
                                         TopicModelParams& params,
                                         const TopicTree& tree, Var y);

// Topic distribution of relaxed (Gumbel-softmax) sentences; B x K.
Var classify_soft_sentence(ad::Graph& g, TopicModelParams& params,
                           const TopicTree& tree,
                           const std::vector<Var>& soft_words);

// Inference-only convenience over discrete sentences.
TopicDistribution infer_topics(TopicModelParams& params, const TopicTree& tree,
                               const std::vector<std::vector<int>>& sentences);

}  // namespace tgsum

#endif  // TGSUM_TOPIC_MODEL_H_
