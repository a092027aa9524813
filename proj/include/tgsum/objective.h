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

// Training objective and loop.
//
// Per instance:
//   recon = -sum_s log p(w_s | x_s),  x_s ~ q(x_s | w_s) (one sample)
//   kl_z  = sum_s sum_k theta_sk (log theta_sk + log K)
//   kl_x  = sum_k sum_s theta_sk KL[q(x_s | w_s) || p_k]
//   disc  = -sum_k log theta'_kk, theta' the topic distribution of the
//           relaxed sentence decoded from topic k's posterior mean
//   total = recon + beta (kl_z + kl_x) + w_disc disc

#ifndef TGSUM_OBJECTIVE_H_
#define TGSUM_OBJECTIVE_H_

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "tgsum/model.h"

namespace tgsum {

struct Schedule {
  double beta = 0.0;
  double temperature = 1.0;
};

// beta = min(1, kl_rate * step), tau = max(min_temperature,
// 1 - temperature_decay * step); beta is 1 throughout without annealing.
Schedule anneal(int step, const Config& config = Config());

struct LossOptions {
  double beta = 1.0;
  double temperature = 1.0;
  double disc_weight = 1.0;
  int disc_length = 20;
  double dropout = 0.0;
  bool attention = true;
  bool stop_prior_gradient = false;
  double variance_floor = kDefaultVarianceFloor;
  bool zero_gumbel_noise = false;  // test hook

  static LossOptions from(const Config& config, int step);
};

struct LossTerms {
  Var recon, kl_z, kl_x, disc, total;
};

struct LossBreakdown {
  double recon = 0.0;
  double kl_z = 0.0;
  double kl_x = 0.0;
  double disc = 0.0;
  double total = 0.0;
};

class NonFiniteLoss : public std::runtime_error {
 public:
  explicit NonFiniteLoss(const std::string& term)
      : std::runtime_error("non-finite loss term: " + term), term_(term) {}
  const std::string& term() const { return term_; }

 private:
  std::string term_;
};

// Builds the loss graph of one instance. Throws NonFiniteLoss naming the
// first non-finite term.
LossTerms build_loss(ad::Graph& g, Model& model,
                     const std::vector<std::vector<int>>& sentences,
                     const LossOptions& options, std::mt19937_64& rng);

LossBreakdown compute_loss(Model& model,
                           const std::vector<std::vector<int>>& sentences,
                           const LossOptions& options, std::mt19937_64& rng);

class Adam {
 public:
  Adam(std::vector<Parameter*> params, double lr, double beta1 = 0.9,
       double beta2 = 0.999, double eps = 1e-8);
  // Applies one update from the accumulated gradients.
  void step();
  void zero_grad();

 private:
  std::vector<Parameter*> params_;
  std::vector<Matrix> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
};

// Scales gradients so their global L2 norm is at most max_norm; returns the
// norm before scaling.
double clip_gradients(const std::vector<Parameter*>& params, double max_norm);

struct LogRow {
  int step = 0;
  LossBreakdown loss;  // batch mean
  double beta = 0.0;
  double temperature = 1.0;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainHooks {
  // Written at every validation improvement and at the end.
  std::optional<std::filesystem::path> checkpoint_dir;
  std::ostream* log_csv = nullptr;
  std::ostream* progress = nullptr;
  // Gold summaries for validation, by product id. Without one the extracted
  // summary is scored against the instance's own reviews.
  const std::map<std::string, Tokens>* gold = nullptr;
};

struct TrainResult {
  int steps = 0;
  int best_step = 0;
  double best_validation = -1.0;
  std::vector<LogRow> log;
};

// Mean ROUGE-L F of extracted summaries over the first
// config.validation_instances instances.
double validation_score(Model& model, const Vocabulary& vocab,
                        const std::vector<Instance>& instances,
                        const std::map<std::string, Tokens>* gold);

// Runs config.max_steps Adam steps. The model ends holding the parameters of
// the best validation score (the final ones without validation data).
TrainResult train(Model& model, const Vocabulary& vocab,
                  const std::vector<Instance>& train_set,
                  const std::vector<Instance>& validation_set,
                  const TrainHooks& hooks = {});

}  // namespace tgsum

#endif  // TGSUM_OBJECTIVE_H_
