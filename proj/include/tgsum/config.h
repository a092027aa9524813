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

// Flat key=value configuration. Lines starting with '#' are comments.
// Unknown keys and malformed values are rejected.

#ifndef TGSUM_CONFIG_H_
#define TGSUM_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace tgsum {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Config {
  // Model shape.
  std::vector<int> tree = {4, 4};
  int embed_dim = 200;
  int enc_hidden = 200;
  int latent_dim = 32;
  int topic_hidden = 200;
  double log_variance_floor = 0.5;
  int max_sentence_len = 30;

  // Training.
  double learning_rate = 5e-3;
  int batch_size = 8;
  double dropout = 0.2;
  double kl_rate = 2.5e-5;
  bool kl_anneal = true;
  double temperature_decay = 2.5e-5;
  double min_temperature = 0.1;
  double disc_weight = 1.0;
  int disc_length = 20;
  double grad_clip = 5.0;
  bool stop_prior_gradient = false;
  int max_steps = 40000;
  int validate_every = 1000;
  int validation_instances = 50;
  int patience = 0;  // validations without improvement; 0 disables
  int log_every = 100;
  std::uint64_t seed = 1;

  // Ablations.
  bool no_discriminator = false;
  bool no_attention = false;
  bool beam_decode = false;

  // Generation and extraction.
  double nucleus_p = 0.4;
  int decode_max_len = 30;
  int decode_beam_width = 5;
  int beam_width = 8;
  int max_sentences = 6;
  double redundancy_threshold = 0.6;
  int oracle_count = 4;

  // Corpus construction.
  int min_count = 16;
  int reviews_per_instance = 8;
  int instances_per_product = 12;
  int max_sentences_per_review = 50;
  double validation_fraction = 0.05;
  double test_fraction = 0.05;

  double variance_floor() const;
  // Hash of the keys that determine parameter shapes.
  std::uint64_t model_hash() const;

  void set(const std::string& key, const std::string& value);
  std::map<std::string, std::string> items() const;
  std::string to_text() const;

  static Config from_text(const std::string& text);
  static Config load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  // Throws ConfigError when a value is out of range.
  void validate() const;
};

// Names accepted by --ablation.
void apply_ablation(Config& config, const std::string& flag);

std::vector<int> parse_tree_shape(const std::string& text);
std::string format_tree_shape(const std::vector<int>& shape);

}  // namespace tgsum

#endif  // TGSUM_CONFIG_H_
