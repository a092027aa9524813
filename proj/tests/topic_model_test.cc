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

#include <random>

#include <gtest/gtest.h>

#include "grad_check.h"
#include "reference.h"
#include "tgsum/topic_tree.h"

namespace tgsum {
namespace {

using reference::Row;

Matrix random_matrix(int r, int c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng);
  return m;
}

TEST(TopicTree, SizesForBranchingLists) {
  EXPECT_EQ(TopicTree().size(), 1);
  EXPECT_EQ(TopicTree({3}).size(), 4);
  EXPECT_EQ(TopicTree({2, 2}).size(), 7);
  EXPECT_EQ(TopicTree({3, 3}).size(), 13);
  EXPECT_EQ(TopicTree({4, 4}).size(), 21);
  EXPECT_EQ(topic_count({4, 4}), 21);
  EXPECT_THROW(TopicTree({2, 0}), std::invalid_argument);
}

TEST(TopicTree, DepthFirstOrderAndRelations) {
  const TopicTree t({2, 2});
  // 1, 11, 111, 112, 12, 121, 122
  const std::vector<std::string> labels = {"1",  "11", "111", "112",
                                           "12", "121", "122"};
  for (int k = 0; k < t.size(); ++k) {
    EXPECT_EQ(t.label(k), labels[k]);
    if (k > 0) EXPECT_LT(t.parent(k), k);
  }
  EXPECT_EQ(t.parent(0), -1);
  EXPECT_EQ(t.children(0), (std::vector<int>{1, 4}));
  EXPECT_EQ(t.preceding_siblings(4), (std::vector<int>{1}));
  EXPECT_TRUE(t.preceding_siblings(1).empty());
  EXPECT_EQ(t.ancestors(6), (std::vector<int>{0, 4}));
  EXPECT_TRUE(t.is_last_sibling(3));
  EXPECT_FALSE(t.is_last_sibling(2));
  EXPECT_TRUE(t.at_deepest_level(5));
  EXPECT_EQ(t.nodes_at_depth(2), (std::vector<int>{2, 3, 5, 6}));
  EXPECT_EQ(t.paths().size(), 4u);
  EXPECT_EQ(*t.find_label("121"), 5);
  EXPECT_FALSE(t.find_label("13").has_value());
}

TEST(TreeHiddenStates, SingleNode) {
  std::mt19937_64 rng(1);
  Drnn d("d", 3, rng);
  ad::Graph g;
  const Matrix h = tree_hidden_states(g, d, TopicTree()).value();
  const Row s = d.start.value;
  const Matrix expected =
      (s * d.parent_weight.value + s * d.sibling_weight.value).array().tanh();
  EXPECT_TRUE(h.isApprox(expected, 1e-14));
}

TEST(TreeHiddenStates, ZeroWeightsGiveZeroStates) {
  std::mt19937_64 rng(1);
  Drnn d("d", 4, rng);
  d.parent_weight.value.setZero();
  d.sibling_weight.value.setZero();
  ad::Graph g;
  EXPECT_EQ(tree_hidden_states(g, d, TopicTree({2, 3})).value().norm(), 0.0);
}

TEST(TreeHiddenStates, MatchesHandUnrolledRecurrence) {
  // Tree 1-2 with fixed small weights, unrolled by hand.
  Drnn d;
  d.parent_weight = Parameter("wp", (Matrix(2, 2) << 0.5, -0.2, 0.1, 0.3).finished());
  d.sibling_weight = Parameter("ws", (Matrix(2, 2) << -0.4, 0.2, 0.6, 0.1).finished());
  d.start = Parameter("s", (Matrix(1, 2) << 0.3, -0.7).finished());
  const Row s = d.start.value;
  const Matrix& wp = d.parent_weight.value;
  const Matrix& ws = d.sibling_weight.value;
  const Row h1 = (s * wp + s * ws).array().tanh();
  const Row h11 = (h1 * wp + s * ws).array().tanh();
  const Row h12 = (h1 * wp + h11 * ws).array().tanh();
  ad::Graph g;
  const Matrix h = tree_hidden_states(g, d, TopicTree({2})).value();
  EXPECT_TRUE(h.row(0).isApprox(h1, 1e-14));
  EXPECT_TRUE(h.row(1).isApprox(h11, 1e-14));
  EXPECT_TRUE(h.row(2).isApprox(h12, 1e-14));
  // Independent generic reference on a deeper tree.
  const TopicTree deep({2, 3});
  std::mt19937_64 rng(9);
  Drnn r("r", 3, rng);
  ad::Graph g2;
  EXPECT_TRUE(tree_hidden_states(g2, r, deep).value().isApprox(
      reference::tree_states(deep, r.parent_weight.value,
                             r.sibling_weight.value, r.start.value),
      1e-13));
}

TEST(PathDistribution, RootAndTwoChildren) {
  ad::Graph g;
  const TopicTree root_only;
  EXPECT_DOUBLE_EQ(
      stick_paths(g.constant(Matrix::Constant(1, 1, 0.3)), root_only).scalar(),
      1.0);
  // nu_1 = 0.6, nu_2 forced to 1 -> pi = [1, 0.6, 0.4].
  const Matrix pi =
      stick_paths(g.constant((Matrix(1, 3) << 0.9, 0.6, 0.123).finished()),
                  TopicTree({2}))
          .value();
  EXPECT_NEAR(pi(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(pi(0, 1), 0.6, 1e-15);
  EXPECT_NEAR(pi(0, 2), 0.4, 1e-15);
}

TEST(LevelDistribution, DepthOneAndForcedStop) {
  ad::Graph g;
  EXPECT_DOUBLE_EQ(
      stick_levels(g.constant(Matrix::Constant(1, 1, 0.2)), TopicTree())
          .scalar(),
      1.0);
  // eta_root = 0.3, leaves forced to 1 -> phi = (0.3, 0.7) on each path.
  const Matrix phi =
      stick_levels(g.constant((Matrix(1, 3) << 0.3, 0.5, 0.9).finished()),
                   TopicTree({2}))
          .value();
  EXPECT_NEAR(phi(0, 0), 0.3, 1e-15);
  EXPECT_NEAR(phi(0, 1), 0.7, 1e-15);
  EXPECT_NEAR(phi(0, 2), 0.7, 1e-15);
}

TEST(TopicDistribution, ProductOfPathAndLevel) {
  ad::Graph g;
  const TopicTree t({2});
  Var pi = stick_paths(g.constant((Matrix(1, 3) << 0, 0.6, 0).finished()), t);
  Var phi = stick_levels(g.constant((Matrix(1, 3) << 0.3, 0, 0).finished()), t);
  const Matrix theta = ad::mul(pi, phi).value();
  EXPECT_NEAR(theta(0, 0), 0.3, 1e-15);
  EXPECT_NEAR(theta(0, 1), 0.42, 1e-15);
  EXPECT_NEAR(theta(0, 2), 0.28, 1e-15);
  EXPECT_NEAR(theta.sum(), 1.0, 1e-15);
}

TEST(TopicDistribution, SingleNodeAndTwentyOneTopics) {
  std::mt19937_64 rng(3);
  TopicModelParams p(12, 4, 5, rng);
  const std::vector<std::vector<int>> sents = {{4, 5, 6}, {7}};
  const TopicDistribution one = infer_topics(p, TopicTree(), sents);
  EXPECT_EQ(one.topic.cols(), 1);
  EXPECT_NEAR(one.topic(0, 0), 1.0, 1e-15);
  const TopicDistribution big = infer_topics(p, TopicTree({4, 4}), sents);
  EXPECT_EQ(big.topic.cols(), 21);
}

TEST(TopicDistribution, MatchesReferenceEquations) {
  std::mt19937_64 rng(4);
  const TopicTree tree({3, 2});
  TopicModelParams p(15, 4, 5, rng);
  const std::vector<std::vector<int>> sents = {{4, 9, 6}, {7, 8}, {14}};
  const TopicDistribution d = infer_topics(p, tree, sents);
  const Matrix hp = reference::tree_states(tree, p.path.parent_weight.value,
                                           p.path.sibling_weight.value,
                                           p.path.start.value);
  const Matrix hl = reference::tree_states(tree, p.level.parent_weight.value,
                                           p.level.sibling_weight.value,
                                           p.level.start.value);
  for (std::size_t s = 0; s < sents.size(); ++s) {
    std::vector<Row> xs;
    for (int id : sents[s]) xs.push_back(p.embed.value.row(id));
    const Row y = reference::gru_run(xs, p.encoder.wx.value, p.encoder.wh.value,
                                     p.encoder.b.value);
    Row nu(tree.size()), eta(tree.size());
    for (int k = 0; k < tree.size(); ++k) {
      nu(k) = reference::sigmoid(y.dot(hp.row(k)));
      eta(k) = reference::sigmoid(y.dot(hl.row(k)));
    }
    const Row pi = reference::path_probs(tree, nu);
    const Row phi = reference::level_probs(tree, eta);
    EXPECT_TRUE(d.path.row(s).isApprox(pi, 1e-12));
    EXPECT_TRUE(d.level.row(s).isApprox(phi, 1e-12));
    EXPECT_TRUE(d.topic.row(s).isApprox(pi.cwiseProduct(phi), 1e-12));
  }
}

TEST(TopicDistribution, NormalizedAndStrictlyPositive) {
  std::mt19937_64 rng(5);
  for (const auto& shape : std::vector<std::vector<int>>{{2}, {3, 2}, {2, 2, 2}}) {
    const TopicTree tree(shape);
    TopicModelParams p(20, 6, 6, rng);
    p.embed.value = random_matrix(20, 6, rng);
    std::vector<std::vector<int>> sents;
    std::uniform_int_distribution<int> id(4, 19);
    for (int s = 0; s < 20; ++s) sents.push_back({id(rng), id(rng), id(rng)});
    const TopicDistribution d = infer_topics(p, tree, sents);
    for (Eigen::Index s = 0; s < d.topic.rows(); ++s) {
      for (int depth = 0; depth < tree.level_count(); ++depth) {
        double sum = 0.0;
        for (int k : tree.nodes_at_depth(depth)) sum += d.path(s, k);
        EXPECT_NEAR(sum, 1.0, 1e-6);
      }
      for (const auto& path : tree.paths()) {
        double sum = 0.0;
        for (int k : path) sum += d.level(s, k);
        EXPECT_NEAR(sum, 1.0, 1e-6);
      }
      EXPECT_NEAR(d.topic.row(s).sum(), 1.0, 1e-6);
      EXPECT_GT(d.topic.row(s).minCoeff(), 0.0);
    }
  }
}

TEST(StickBreaking, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(6);
  const TopicTree tree({2, 3});
  std::uniform_real_distribution<double> u(0.05, 0.95);
  Matrix v(3, tree.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = u(rng);
  const Matrix w = random_matrix(3, tree.size(), rng);
  auto paths = testing::check_input(v, [&](ad::Graph& g, Var x) {
    return ad::sum_all(ad::mul(stick_paths(x, tree), g.constant(w)));
  });
  EXPECT_LT(paths.max_rel, 1e-6) << paths.worst;
  auto levels = testing::check_input(v, [&](ad::Graph& g, Var x) {
    return ad::sum_all(ad::mul(stick_levels(x, tree), g.constant(w)));
  });
  EXPECT_LT(levels.max_rel, 1e-6) << levels.worst;
}

std::vector<Var> soft_words(ad::Graph& g, const std::vector<Matrix>& steps) {
  std::vector<Var> out;
  for (const Matrix& m : steps) out.push_back(g.constant(m));
  return out;
}

TEST(ClassifySoftSentence, OneHotMatchesDiscretePath) {
  std::mt19937_64 rng(7);
  const TopicTree tree({2, 2});
  TopicModelParams p(10, 4, 5, rng);
  const std::vector<int> sentence = {4, 7, 5};
  std::vector<Matrix> steps;
  for (int id : sentence) {
    Matrix m = Matrix::Zero(1, 10);
    m(0, id) = 1.0;
    steps.push_back(m);
  }
  ad::Graph g;
  const Matrix soft =
      classify_soft_sentence(g, p, tree, soft_words(g, steps)).value();
  const Matrix hard = infer_topics(p, tree, {sentence}).topic;
  EXPECT_TRUE(soft.isApprox(hard, 1e-14));
}

TEST(ClassifySoftSentence, UniformWordsUseMeanEmbedding) {
  std::mt19937_64 rng(8);
  const TopicTree tree({3});
  TopicModelParams p(10, 4, 5, rng);
  const std::vector<Matrix> steps(3, Matrix::Constant(1, 10, 0.1));
  ad::Graph g;
  const Matrix soft =
      classify_soft_sentence(g, p, tree, soft_words(g, steps)).value();
  const Row mean = p.embed.value.colwise().mean();
  const Row y = reference::gru_run({mean, mean, mean}, p.encoder.wx.value,
                                   p.encoder.wh.value, p.encoder.b.value);
  const Matrix hp = reference::tree_states(tree, p.path.parent_weight.value,
                                           p.path.sibling_weight.value,
                                           p.path.start.value);
  const Matrix hl = reference::tree_states(tree, p.level.parent_weight.value,
                                           p.level.sibling_weight.value,
                                           p.level.start.value);
  Row nu(tree.size()), eta(tree.size());
  for (int k = 0; k < tree.size(); ++k) {
    nu(k) = reference::sigmoid(y.dot(hp.row(k)));
    eta(k) = reference::sigmoid(y.dot(hl.row(k)));
  }
  const Row expected = reference::path_probs(tree, nu)
                           .cwiseProduct(reference::level_probs(tree, eta));
  EXPECT_TRUE(soft.row(0).isApprox(expected, 1e-12));
}

TEST(ClassifySoftSentence, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(9);
  const TopicTree tree({2});
  TopicModelParams p(20, 4, 4, rng);
  p.embed.value = random_matrix(20, 4, rng);
  Matrix logits = random_matrix(3, 20, rng);
  const Matrix w = random_matrix(1, tree.size(), rng);
  // Soft words are rows of softmax(logits); differentiate w.r.t. the words.
  Matrix words(3, 20);
  for (int t = 0; t < 3; ++t) {
    Eigen::RowVectorXd e = (logits.row(t).array() - logits.row(t).maxCoeff()).exp();
    words.row(t) = e / e.sum();
  }
  auto report = testing::check_input(words, [&](ad::Graph& g, Var x) {
    std::vector<Var> steps;
    for (int t = 0; t < 3; ++t) steps.push_back(ad::slice_rows(x, t, 1));
    return ad::sum_all(
        ad::mul(ad::safe_log(classify_soft_sentence(g, p, tree, steps)),
                g.constant(w)));
  });
  EXPECT_LT(report.max_rel, 1e-4) << report.worst;
}

}  // namespace
}  // namespace tgsum
