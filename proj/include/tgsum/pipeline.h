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

// Batch generation, extraction and evaluation over a list of instances.

#ifndef TGSUM_PIPELINE_H_
#define TGSUM_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "tgsum/latent_gmm.h"
#include "tgsum/metrics.h"
#include "tgsum/summarizer.h"

namespace tgsum {

// Decoding seed of the i-th instance of a run.
std::uint64_t instance_seed(std::uint64_t seed, std::size_t index);

struct InstanceTopics {
  std::string product_id;
  std::vector<TopicSentence> sentences;
  TopicDump dump;

  std::string to_json_line(const TopicTree& tree) const;
  // Reads product_id and sentences; the dump is left empty.
  static InstanceTopics from_json_line(const std::string& line,
                                       const TopicTree& tree);
};

std::vector<InstanceTopics> generate_all(Model& model, const Vocabulary& vocab,
                                         const std::vector<Instance>& instances,
                                         std::uint64_t seed,
                                         const DecodeOptions& options);

// topics[i] belongs to instances[i].
std::vector<Summary> extract_all(const std::vector<InstanceTopics>& topics,
                                 const std::vector<Instance>& instances,
                                 const TopicTree& tree,
                                 const ExtractOptions& options);

ExtractOptions extract_options(const Config& config);

struct EvalRow {
  std::string product_id;
  RougeScore r1, r2, rl;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  EvalRow mean;
  // Over all summaries; zero with fewer than two.
  double self_bleu3 = 0.0;
  double self_bleu4 = 0.0;

  void write_csv(std::ostream& out) const;
};

// references[i] is the reference of summaries[i].
EvalReport evaluate(const std::vector<Summary>& summaries,
                    const std::vector<Tokens>& references);

// Gold summaries, one JSON object per line: {"product_id": ..., "summary": ...}.
std::map<std::string, Tokens> load_gold(const std::filesystem::path& path);

}  // namespace tgsum

#endif  // TGSUM_PIPELINE_H_
