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

#include "tgsum/config.h"

#include <cmath>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>
#include <unistd.h>

#include "tgsum/model.h"

namespace tgsum {
namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() /
               ("tgsum_config_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TEST(Config, Defaults) {
  const Config c;
  EXPECT_EQ(c.tree, (std::vector<int>{4, 4}));
  EXPECT_EQ(c.embed_dim, 200);
  EXPECT_EQ(c.enc_hidden, 200);
  EXPECT_EQ(c.latent_dim, 32);
  EXPECT_DOUBLE_EQ(c.learning_rate, 5e-3);
  EXPECT_EQ(c.batch_size, 8);
  EXPECT_DOUBLE_EQ(c.dropout, 0.2);
  EXPECT_DOUBLE_EQ(c.kl_rate, 2.5e-5);
  EXPECT_DOUBLE_EQ(c.temperature_decay, 2.5e-5);
  EXPECT_DOUBLE_EQ(c.nucleus_p, 0.4);
  EXPECT_DOUBLE_EQ(c.redundancy_threshold, 0.6);
  EXPECT_EQ(c.decode_beam_width, 5);
  EXPECT_EQ(c.max_sentences, 6);
  EXPECT_EQ(c.beam_width, 8);
  EXPECT_EQ(c.oracle_count, 4);
  EXPECT_EQ(c.min_count, 16);
  EXPECT_EQ(c.reviews_per_instance, 8);
  EXPECT_EQ(c.instances_per_product, 12);
  EXPECT_DOUBLE_EQ(c.variance_floor(), std::exp(0.5));
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, TextRoundTrip) {
  Config c;
  c.set("tree", "[3,2]");
  c.set("learning_rate", "0.001");
  c.set("no_attention", "true");
  c.set("seed", "42");
  const Config r = Config::from_text(c.to_text());
  EXPECT_EQ(r.items(), c.items());
  EXPECT_EQ(r.tree, (std::vector<int>{3, 2}));
  EXPECT_TRUE(r.no_attention);
  EXPECT_EQ(r.seed, 42u);
  const fs::path dir = temp_dir("rt");
  c.save(dir / "config.txt");
  EXPECT_EQ(Config::load(dir / "config.txt").items(), c.items());
  fs::remove_all(dir);
}

TEST(Config, RejectsBadInput) {
  Config c;
  EXPECT_THROW(c.set("no_such_key", "1"), ConfigError);
  EXPECT_THROW(c.set("batch_size", "eight"), ConfigError);
  Config bad;
  bad.dropout = 1.5;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = Config();
  bad.nucleus_p = 0.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  EXPECT_THROW(Config::from_text("learning_rate = -1\n"), ConfigError);
}

TEST(Config, ModelHashTracksShapeKeysOnly) {
  Config a, b;
  b.learning_rate = 0.1;
  b.seed = 9;
  EXPECT_EQ(a.model_hash(), b.model_hash());
  b.latent_dim = 16;
  EXPECT_NE(a.model_hash(), b.model_hash());
  Config t;
  t.tree = {3, 3};
  EXPECT_NE(a.model_hash(), t.model_hash());
}

TEST(TreeShape, ParseAndFormat) {
  EXPECT_EQ(parse_tree_shape("[4,4]"), (std::vector<int>{4, 4}));
  EXPECT_EQ(parse_tree_shape("3, 2"), (std::vector<int>{3, 2}));
  EXPECT_EQ(parse_tree_shape("[]"), std::vector<int>{});
  EXPECT_EQ(format_tree_shape({4, 4}), "[4,4]");
  EXPECT_THROW(parse_tree_shape("[4,x]"), ConfigError);
  EXPECT_THROW(parse_tree_shape("[4,0]"), ConfigError);
}

TEST(Ablation, Flags) {
  Config c;
  apply_ablation(c, "no_discriminator");
  EXPECT_TRUE(c.no_discriminator);
  apply_ablation(c, "no_attention");
  EXPECT_TRUE(c.no_attention);
  apply_ablation(c, "beam_decode");
  EXPECT_TRUE(c.beam_decode);
  apply_ablation(c, "no_kl_anneal");
  EXPECT_FALSE(c.kl_anneal);
  EXPECT_THROW(apply_ablation(c, "no_topics"), ConfigError);
}

Config small() {
  Config c;
  c.tree = {2};
  c.embed_dim = 3;
  c.enc_hidden = 2;
  c.latent_dim = 2;
  c.topic_hidden = 3;
  return c;
}

TEST(Checkpoint, RoundTrip) {
  const fs::path dir = temp_dir("ckpt");
  Vocabulary vocab;
  Model m(small(), vocab.size());
  m.codec().out.bias.value(0, 1) = 0.125;
  save_checkpoint(dir, m, vocab, 77);
  const Checkpoint meta = load_checkpoint_meta(dir);
  EXPECT_EQ(meta.step, 77);
  EXPECT_EQ(meta.config.items(), small().items());
  EXPECT_EQ(meta.vocab, vocab);
  Model back = load_model(dir, meta);
  const auto a = m.values(), b = back.values();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
  fs::remove_all(dir);
}

TEST(Checkpoint, ShapeMismatchIsRejected) {
  const fs::path dir = temp_dir("mismatch");
  Model m(small(), 10);
  m.save_params(dir / "params.bin");
  Config other = small();
  other.latent_dim = 3;
  Model o(other, 10);
  EXPECT_THROW(o.load_params(dir / "params.bin"), std::runtime_error);
  Model v(small(), 11);
  EXPECT_THROW(v.load_params(dir / "params.bin"), std::runtime_error);
  fs::remove_all(dir);
}

TEST(Model, SameSeedSameParameters) {
  Model a(small(), 10), b(small(), 10);
  EXPECT_EQ(a.values(), b.values());
  Config s = small();
  s.seed = 2;
  Model c(s, 10);
  EXPECT_NE(a.values(), c.values());
  EXPECT_GT(a.parameter_count(), 0u);
}

}  // namespace
}  // namespace tgsum
