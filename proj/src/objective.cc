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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tgsum/latent_gmm.h"
#include "tgsum/metrics.h"
#include "tgsum/summarizer.h"

namespace tgsum {

Schedule anneal(int step, const Config& config) {
  if (step < 0) throw std::invalid_argument("anneal: negative step");
  Schedule s;
  s.beta = config.kl_anneal ? std::min(1.0, config.kl_rate * step) : 1.0;
  s.temperature = std::max(config.min_temperature,
                           1.0 - config.temperature_decay * step);
  return s;
}

LossOptions LossOptions::from(const Config& config, int step) {
  const Schedule s = anneal(step, config);
  LossOptions o;
  o.beta = s.beta;
  o.temperature = s.temperature;
  o.disc_weight = config.no_discriminator ? 0.0 : config.disc_weight;
  o.disc_length = config.disc_length;
  o.dropout = config.dropout;
  o.attention = !config.no_attention;
  o.stop_prior_gradient = config.stop_prior_gradient;
  o.variance_floor = config.variance_floor();
  return o;
}

namespace {

constexpr int kSnapshotEvery = 500;

void check_finite(Var v, const char* term) {
  if (!v.value().allFinite()) throw NonFiniteLoss(term);
}

}  // namespace

LossTerms build_loss(ad::Graph& g, Model& model,
                     const std::vector<std::vector<int>>& sentences,
                     const LossOptions& options, std::mt19937_64& rng) {
  if (sentences.empty()) throw std::invalid_argument("loss: empty instance");
  const TopicTree& tree = model.tree();
  const int K = tree.size();
  const auto S = static_cast<Eigen::Index>(sentences.size());

  CodecOptions copt;
  copt.variance_floor = options.variance_floor;
  copt.dropout = options.dropout;
  copt.attention = options.attention;
  EncodedSentences enc = encode_sentences(g, model.codec(), sentences, copt, &rng);

  Var y = sentence_embedding(g, model.topics(), sentences, options.dropout, &rng);
  Var theta = topic_distribution(g, model.topics(), tree, y).topic;

  LossTerms t;
  Matrix eps(S, enc.mean.cols());
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < eps.size(); ++i) eps.data()[i] = normal(rng);
  Var x = ad::add(enc.mean, ad::mul(ad::sqrt(enc.variance), g.constant(eps)));
  t.recon = ad::neg(ad::sum_all(decode_teacher_forced(
      g, model.codec(), x, sentences, enc.memory, copt, &rng)));
  check_finite(t.recon, "recon");

  t.kl_z = ad::sum_all(ad::mul(
      theta, ad::add_scalar(ad::safe_log(theta), std::log(static_cast<double>(K)))));
  check_finite(t.kl_z, "kl_z");

  TopicPosteriorVars post =
      topic_posteriors(g, enc.mean, enc.variance, theta, tree);
  const auto n = enc.mean.cols();
  Var kl_x = g.constant(Matrix::Zero(1, 1));
  for (int k = 0; k < K; ++k) {
    const int p = tree.parent(k);
    Var pm, pc;
    if (p < 0) {
      pm = g.constant(Matrix::Zero(1, n));
      pc = g.constant(Matrix::Identity(n, n));
    } else {
      pm = options.stop_prior_gradient ? ad::detach(post.mean[p]) : post.mean[p];
      pc = options.stop_prior_gradient ? ad::detach(post.cov[p]) : post.cov[p];
    }
    Var rows = gaussian_kl_rows(enc.mean, enc.variance, pm, pc);
    kl_x = ad::add(kl_x, ad::sum_all(ad::mul(ad::slice_cols(theta, k, 1), rows)));
  }
  t.kl_x = kl_x;
  check_finite(t.kl_x, "kl_x");

  if (options.disc_weight > 0.0) {
    Var latents = ad::concat_rows(post.mean);
    GumbelOptions gopt;
    gopt.temperature = options.temperature;
    gopt.steps = options.disc_length;
    gopt.zero_noise = options.zero_gumbel_noise;
    gopt.attention = options.attention;
    std::vector<Var> soft =
        gumbel_softmax_decode(g, model.codec(), latents, enc.memory, gopt, rng);
    Var gen_theta = classify_soft_sentence(g, model.topics(), tree, soft);
    std::vector<int> diag(K);
    std::iota(diag.begin(), diag.end(), 0);
    t.disc = ad::neg(ad::sum_all(ad::pick_per_row(ad::safe_log(gen_theta), diag)));
  } else {
    t.disc = g.constant(Matrix::Zero(1, 1));
  }
  check_finite(t.disc, "disc");

  t.total = ad::add(
      ad::add(t.recon, ad::scale(ad::add(t.kl_z, t.kl_x), options.beta)),
      ad::scale(t.disc, options.disc_weight));
  check_finite(t.total, "total");
  return t;
}

LossBreakdown compute_loss(Model& model,
                           const std::vector<std::vector<int>>& sentences,
                           const LossOptions& options, std::mt19937_64& rng) {
  ad::Graph g;
  LossTerms t = build_loss(g, model, sentences, options, rng);
  return {t.recon.scalar(), t.kl_z.scalar(), t.kl_x.scalar(), t.disc.scalar(),
          t.total.scalar()};
}

Adam::Adam(std::vector<Parameter*> params, double lr, double beta1,
           double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2),
      eps_(eps) {
  for (Parameter* p : params_) {
    m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const Matrix& g = params_[i]->grad;
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g.cwiseProduct(g);
    params_[i]->value.array() -=
        lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
  }
}

void Adam::zero_grad() {
  for (Parameter* p : params_) p->zero_grad();
}

double clip_gradients(const std::vector<Parameter*>& params, double max_norm) {
  double sq = 0.0;
  for (const Parameter* p : params) sq += p->grad.squaredNorm();
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (Parameter* p : params) p->grad *= s;
  }
  return norm;
}

double validation_score(Model& model, const Vocabulary& vocab,
                        const std::vector<Instance>& instances,
                        const std::map<std::string, Tokens>* gold) {
  const Config& c = model.config();
  const std::size_t count = std::min<std::size_t>(
      instances.size(), static_cast<std::size_t>(c.validation_instances));
  if (count == 0) return 0.0;
  const DecodeOptions dopt = DecodeOptions::from(c);
  const ExtractOptions eopt{c.beam_width, c.max_sentences,
                            c.redundancy_threshold};
  double acc = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const Instance& inst = instances[i];
    const auto ids = encode_instance(inst, vocab, c.max_sentence_len);
    if (ids.empty()) continue;
    const InstanceAnalysis a = analyze_instance(model, ids);
    const auto ts = generate_topic_sentences(model, vocab, a, c.seed, dopt);
    const Summary s = summarize(inst.product_id, ts, inst, model.tree(), eopt);
    Tokens ref = inst.all_tokens();
    if (gold) {
      auto it = gold->find(inst.product_id);
      if (it != gold->end()) ref = it->second;
    }
    acc += rouge_l(s.tokens(), ref).f1;
    ++used;
  }
  return used ? acc / static_cast<double>(used) : 0.0;
}

TrainResult train(Model& model, const Vocabulary& vocab,
                  const std::vector<Instance>& train_set,
                  const std::vector<Instance>& validation_set,
                  const TrainHooks& hooks) {
  const Config& c = model.config();
  std::vector<std::vector<std::vector<int>>> data;
  for (const Instance& inst : train_set) {
    auto ids = encode_instance(inst, vocab, c.max_sentence_len);
    if (!ids.empty()) data.push_back(std::move(ids));
  }
  if (data.empty()) throw std::invalid_argument("train: no training data");

  std::vector<Parameter*> params = model.parameters();
  Adam adam(params, c.learning_rate);
  adam.zero_grad();
  std::mt19937_64 rng(c.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();

  if (hooks.log_csv)
    *hooks.log_csv << "step,recon,kl_z,kl_x,disc,total,beta,tau\n";

  TrainResult result;
  std::vector<Matrix> last_good = model.values();
  std::vector<Matrix> best_values;
  int stale = 0;
  const bool validate = c.validate_every > 0 && !validation_set.empty() &&
                        c.validation_instances > 0;

  for (int step = 0; step < c.max_steps; ++step) {
    const LossOptions opt = LossOptions::from(c, step);
    LossBreakdown mean;
    try {
      for (int b = 0; b < c.batch_size; ++b) {
        if (cursor >= order.size()) {
          std::shuffle(order.begin(), order.end(), rng);
          cursor = 0;
        }
        const auto& ids = data[order[cursor++]];
        ad::Graph g;
        LossTerms t = build_loss(g, model, ids, opt, rng);
        g.backward(ad::scale(t.total, 1.0 / c.batch_size));
        mean.recon += t.recon.scalar() / c.batch_size;
        mean.kl_z += t.kl_z.scalar() / c.batch_size;
        mean.kl_x += t.kl_x.scalar() / c.batch_size;
        mean.disc += t.disc.scalar() / c.batch_size;
        mean.total += t.total.scalar() / c.batch_size;
      }
      const double norm = clip_gradients(params, c.grad_clip);
      if (!std::isfinite(norm)) throw NonFiniteLoss("gradient");
    } catch (const NonFiniteLoss& e) {
      model.set_values(last_good);
      if (hooks.checkpoint_dir)
        save_checkpoint(*hooks.checkpoint_dir, model, vocab, step);
      throw TrainingDiverged(std::string(e.what()) + " at step " +
                             std::to_string(step) +
                             "; restored last good parameters");
    }
    adam.step();
    adam.zero_grad();
    result.steps = step + 1;

    if (c.log_every > 0 && step % c.log_every == 0) {
      LogRow row{step, mean, opt.beta, opt.temperature};
      result.log.push_back(row);
      if (hooks.log_csv)
        *hooks.log_csv << step << ',' << mean.recon << ',' << mean.kl_z << ','
                       << mean.kl_x << ',' << mean.disc << ',' << mean.total
                       << ',' << opt.beta << ',' << opt.temperature << '\n';
      if (hooks.progress)
        *hooks.progress << "step " << step << " loss " << mean.total
                        << " recon " << mean.recon << " kl_z " << mean.kl_z
                        << " kl_x " << mean.kl_x << " disc " << mean.disc
                        << '\n';
    }

    if (!validate && (step + 1) % kSnapshotEvery == 0)
      last_good = model.values();
    if (validate && (step + 1) % c.validate_every == 0) {
      last_good = model.values();
      const double score =
          validation_score(model, vocab, validation_set, hooks.gold);
      if (hooks.progress)
        *hooks.progress << "step " << step + 1 << " validation rouge-l "
                        << score << '\n';
      if (score > result.best_validation) {
        result.best_validation = score;
        result.best_step = step + 1;
        best_values = last_good;
        stale = 0;
        if (hooks.checkpoint_dir)
          save_checkpoint(*hooks.checkpoint_dir, model, vocab, step + 1);
      } else if (c.patience > 0 && ++stale >= c.patience) {
        break;
      }
    }
  }

  if (validate && result.best_validation < 0.0) {
    const double score =
        validation_score(model, vocab, validation_set, hooks.gold);
    result.best_validation = score;
    result.best_step = result.steps;
    best_values = model.values();
  }
  if (!best_values.empty()) model.set_values(best_values);
  else result.best_step = result.steps;
  if (hooks.checkpoint_dir)
    save_checkpoint(*hooks.checkpoint_dir, model, vocab, result.best_step);
  return result;
}

}  // namespace tgsum
