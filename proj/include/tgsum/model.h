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

// The full model: sentence codec, topic model and topic tree, plus
// checkpoint persistence.
//
// A checkpoint directory holds params.bin (versioned binary header, model
// hash, named parameter blocks), config.txt, step.txt and vocab.tsv.

#ifndef TGSUM_MODEL_H_
#define TGSUM_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "tgsum/config.h"
#include "tgsum/corpus.h"
#include "tgsum/seq_codec.h"
#include "tgsum/topic_model.h"
#include "tgsum/topic_tree.h"

namespace tgsum {

class Model {
 public:
  Model(const Config& config, int vocab_size);

  const Config& config() const { return config_; }
  const TopicTree& tree() const { return tree_; }
  CodecParams& codec() { return codec_; }
  TopicModelParams& topics() { return topics_; }
  int vocab_size() const { return codec_.vocab(); }

  std::vector<Parameter*> parameters();
  std::size_t parameter_count();

  // Snapshot of every parameter value, in parameters() order.
  std::vector<Matrix> values();
  void set_values(const std::vector<Matrix>& values);

  void save_params(const std::filesystem::path& path);
  // Throws std::runtime_error on a bad header, hash or parameter shape.
  void load_params(const std::filesystem::path& path);

 private:
  Config config_;
  TopicTree tree_;
  CodecParams codec_;
  TopicModelParams topics_;
};

struct Checkpoint {
  Config config;
  Vocabulary vocab;
  int step = 0;
};

void save_checkpoint(const std::filesystem::path& dir, Model& model,
                     const Vocabulary& vocab, int step);
// Loads config, vocabulary and parameters.
Checkpoint load_checkpoint_meta(const std::filesystem::path& dir);
Model load_model(const std::filesystem::path& dir, const Checkpoint& meta);

// Sentences of an instance as token ids, truncated to max_len. Empty
// sentences are dropped.
std::vector<std::vector<int>> encode_instance(const Instance& instance,
                                              const Vocabulary& vocab,
                                              int max_len);

}  // namespace tgsum

#endif  // TGSUM_MODEL_H_
