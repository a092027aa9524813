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

#include "tgsum/objective.h"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "grad_check.h"
#include "tgsum/latent_gmm.h"

namespace tgsum {
namespace {

Config tiny_config(std::vector<int> tree) {
  Config c;
  c.tree = std::move(tree);
  c.embed_dim = 3;
  c.enc_hidden = 3;
  c.latent_dim = 4;
  c.topic_hidden = 3;
  c.dropout = 0.0;
  c.disc_length = 3;
  return c;
}

const std::vector<std::vector<int>> kSentences = {
    {4, 5, 6}, {7, 8}, {9, 10, 11, 12}, {13}, {14, 15, 19}};

TEST(Anneal, Examples) {
  const Config c;
  EXPECT_DOUBLE_EQ(anneal(0, c).beta, 0.0);
  EXPECT_DOUBLE_EQ(anneal(0, c).temperature, 1.0);
  EXPECT_DOUBLE_EQ(anneal(20000, c).beta, 0.5);
  EXPECT_DOUBLE_EQ(anneal(20000, c).temperature, 0.5);
  EXPECT_DOUBLE_EQ(anneal(40000, c).beta, 1.0);
  EXPECT_DOUBLE_EQ(anneal(100000, c).beta, 1.0);
  EXPECT_DOUBLE_EQ(anneal(100000, c).temperature, 0.1);
  Config off = c;
  off.kl_anneal = false;
  EXPECT_DOUBLE_EQ(anneal(0, off).beta, 1.0);
  EXPECT_THROW(anneal(-1, c), std::invalid_argument);
}

TEST(LossOptions, FromConfig) {
  Config c;
  c.no_discriminator = true;
  c.no_attention = true;
  const LossOptions o = LossOptions::from(c, 40000);
  EXPECT_EQ(o.disc_weight, 0.0);
  EXPECT_FALSE(o.attention);
  EXPECT_DOUBLE_EQ(o.beta, 1.0);
  EXPECT_DOUBLE_EQ(o.variance_floor, std::exp(0.5));
}

TEST(BuildLoss, TermsMatchIndependentComputation) {
  const Config c = tiny_config({2});
  Model model(c, 20);
  LossOptions o;
  o.beta = 0.7;
  o.disc_weight = 0.0;
  o.variance_floor = c.variance_floor();
  std::mt19937_64 rng(3);
  std::mt19937_64 replay = rng;
  const LossBreakdown l = compute_loss(model, kSentences, o, rng);

  // Posteriors and memory from the plain encoder.
  ad::Graph g;
  CodecOptions copt;
  copt.variance_floor = o.variance_floor;
  const EncodedSentences enc = encode_sentences(g, model.codec(), kSentences, copt);
  SentencePosteriors post{enc.mean.value(), enc.variance.value()};
  const Matrix theta = infer_topics(model.topics(), model.tree(), kSentences).topic;
  const int K = model.tree().size();

  double kl_z = 0.0;
  for (Eigen::Index s = 0; s < theta.rows(); ++s)
    for (int k = 0; k < K; ++k)
      kl_z += theta(s, k) * (std::log(theta(s, k)) + std::log(K));
  EXPECT_NEAR(l.kl_z, kl_z, 1e-10);

  const auto topics = topic_posteriors(post, theta, model.tree());
  const auto priors = topic_priors(topics, model.tree());
  double kl_x = 0.0;
  for (int k = 0; k < K; ++k)
    for (Eigen::Index s = 0; s < theta.rows(); ++s)
      kl_x += theta(s, k) * gaussian_kl(post.mean.row(s).transpose(),
                                        post.variance.row(s).transpose(),
                                        priors[k].mean, priors[k].cov);
  EXPECT_NEAR(l.kl_x, kl_x, 1e-9 * std::max(1.0, kl_x));

  // One reparameterized sample per sentence, drawn in storage order.
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix eps(post.mean.rows(), post.mean.cols());
  for (Eigen::Index i = 0; i < eps.size(); ++i) eps.data()[i] = normal(replay);
  double recon = 0.0;
  for (std::size_t s = 0; s < kSentences.size(); ++s) {
    const Eigen::VectorXd x =
        (post.mean.row(s).array() +
         post.variance.row(s).array().sqrt() * eps.row(s).array())
            .transpose();
    recon -= sentence_log_likelihood(model.codec(), x, kSentences[s],
                                     enc.memory.value());
  }
  EXPECT_NEAR(l.recon, recon, 1e-9 * std::abs(recon));
  EXPECT_EQ(l.disc, 0.0);
  EXPECT_NEAR(l.total, recon + 0.7 * (kl_z + kl_x), 1e-9 * std::abs(l.total));
}

TEST(BuildLoss, SingleTopicHasNoTopicPenalties) {
  Model model(tiny_config({}), 20);
  LossOptions o;
  o.zero_gumbel_noise = true;
  std::mt19937_64 rng(4);
  const LossBreakdown l = compute_loss(model, kSentences, o, rng);
  EXPECT_NEAR(l.kl_z, 0.0, 1e-15);
  EXPECT_NEAR(l.disc, 0.0, 1e-15);
  EXPECT_GT(l.kl_x, 0.0);
}

TEST(BuildLoss, DiscriminatorTerm) {
  Model model(tiny_config({2}), 20);
  LossOptions o;
  o.zero_gumbel_noise = true;
  o.temperature = 0.8;
  o.disc_length = 3;
  std::mt19937_64 rng(5);
  const LossBreakdown l = compute_loss(model, kSentences, o, rng);

  // Classify the relaxed decodes of the topic means directly.
  ad::Graph g;
  const EncodedSentences enc =
      encode_sentences(g, model.codec(), kSentences, CodecOptions());
  const Matrix theta = infer_topics(model.topics(), model.tree(), kSentences).topic;
  const auto topics = topic_posteriors(
      SentencePosteriors{enc.mean.value(), enc.variance.value()}, theta,
      model.tree());
  Matrix means(3, 4);
  for (int k = 0; k < 3; ++k) means.row(k) = topics[k].mean.transpose();
  GumbelOptions gopt;
  gopt.zero_noise = true;
  gopt.temperature = 0.8;
  gopt.steps = 3;
  std::mt19937_64 unused(0);
  const auto soft = gumbel_softmax_decode(g, model.codec(), g.constant(means),
                                          enc.memory, gopt, unused);
  const Matrix gen = classify_soft_sentence(g, model.topics(), model.tree(), soft)
                         .value();
  double disc = 0.0;
  for (int k = 0; k < 3; ++k) disc -= std::log(gen(k, k));
  EXPECT_NEAR(l.disc, disc, 1e-10);
  EXPECT_GT(l.disc, 0.0);
}

TEST(BuildLoss, DeterministicGivenSeed) {
  Model model(tiny_config({2}), 20);
  LossOptions o;
  std::mt19937_64 a(9), b(9);
  const LossBreakdown x = compute_loss(model, kSentences, o, a);
  const LossBreakdown y = compute_loss(model, kSentences, o, b);
  EXPECT_EQ(x.total, y.total);
  EXPECT_EQ(x.disc, y.disc);
}

TEST(BuildLoss, NonFiniteTermIsNamed) {
  Model model(tiny_config({2}), 20);
  model.codec().out.bias.value(0, 4) = std::numeric_limits<double>::quiet_NaN();
  std::mt19937_64 rng(1);
  try {
    compute_loss(model, kSentences, LossOptions(), rng);
    FAIL() << "expected NonFiniteLoss";
  } catch (const NonFiniteLoss& e) {
    EXPECT_EQ(e.term(), "recon");
  }
}

TEST(BuildLoss, GradientMatchesFiniteDifferences) {
  // n = 4, vocab 20, K = 3.
  const Config c = tiny_config({2});
  Model model(c, 20);
  LossOptions o;
  o.beta = 0.8;
  o.temperature = 0.7;
  o.variance_floor = std::exp(-3.0);  // keep the floor inactive
  auto params = model.parameters();
  for (Parameter* p : params) p->zero_grad();
  {
    ad::Graph g;
    std::mt19937_64 rng(11);
    g.backward(build_loss(g, model, kSentences, o, rng).total);
  }
  std::vector<Matrix> analytic;
  for (Parameter* p : params) analytic.push_back(p->grad);
  auto loss = [&] {
    std::mt19937_64 rng(11);
    return compute_loss(model, kSentences, o, rng).total;
  };
  const auto report = testing::check_parameters(params, analytic, loss, 6, 1e-5);
  EXPECT_LE(report.max_rel, 1e-3) << report.worst;
  EXPECT_GT(report.checked, 50);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Parameter p("p", (Matrix(1, 3) << 1.0, -2.0, 0.5).finished());
  p.grad = (Matrix(1, 3) << 0.3, -4.0, 0.0).finished();
  Adam adam({&p}, 0.1);
  adam.step();
  // m_hat = g, v_hat = g^2, so the update is lr * g / (|g| + eps).
  EXPECT_NEAR(p.value(0, 0), 1.0 - 0.1 * 0.3 / (0.3 + 1e-8), 1e-12);
  EXPECT_NEAR(p.value(0, 1), -2.0 + 0.1 * 4.0 / (4.0 + 1e-8), 1e-12);
  EXPECT_DOUBLE_EQ(p.value(0, 2), 0.5);
  adam.zero_grad();
  EXPECT_EQ(p.grad.norm(), 0.0);
}

TEST(ClipGradients, ScalesToMaxNorm) {
  Parameter a("a", Matrix::Zero(1, 2)), b("b", Matrix::Zero(1, 1));
  a.grad << 3.0, 0.0;
  b.grad << 4.0;
  EXPECT_DOUBLE_EQ(clip_gradients({&a, &b}, 10.0), 5.0);
  EXPECT_DOUBLE_EQ(a.grad(0, 0), 3.0);
  EXPECT_DOUBLE_EQ(clip_gradients({&a, &b}, 1.0), 5.0);
  EXPECT_NEAR(a.grad(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(b.grad(0, 0), 0.8, 1e-15);
}

TEST(Train, LossDecreasesOnSyntheticCorpus) {
  SyntheticSpec spec;
  spec.products = 60;
  const auto instances = generate_synthetic_corpus(spec);
  const Vocabulary vocab = Vocabulary::build(instances, 0);
  Config c = tiny_config({3});
  c.embed_dim = 8;
  c.enc_hidden = 8;
  c.latent_dim = 4;
  c.topic_hidden = 8;
  c.batch_size = 1;
  c.max_steps = 2000;
  c.log_every = 0;
  c.validate_every = 0;
  Model model(c, vocab.size());

  auto eval = [&] {
    const LossOptions o = LossOptions::from(c, c.max_steps);
    double total = 0.0;
    for (int i = 0; i < 10; ++i) {
      std::mt19937_64 rng(i);
      total += compute_loss(model, encode_instance(instances[i], vocab, 30), o,
                            rng)
                   .total;
    }
    return total;
  };
  const double before = eval();
  std::ostringstream csv;
  TrainHooks hooks;
  hooks.log_csv = &csv;
  const TrainResult r = train(model, vocab, instances, {}, hooks);
  EXPECT_EQ(r.steps, 2000);
  EXPECT_LT(eval(), before);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')),
            "step,recon,kl_z,kl_x,disc,total,beta,tau");
}

TEST(Train, RejectsEmptyData) {
  Model model(tiny_config({2}), 20);
  EXPECT_THROW(train(model, Vocabulary(), {}, {}), std::invalid_argument);
}

}  // namespace
}  // namespace tgsum
