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

// Topic sentence generation and summary extraction.

#ifndef TGSUM_SUMMARIZER_H_
#define TGSUM_SUMMARIZER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "tgsum/corpus.h"
#include "tgsum/latent_gmm.h"
#include "tgsum/model.h"

namespace tgsum {

// Plain-value forward pass of one instance.
struct InstanceAnalysis {
  SentencePosteriors sentences;
  Matrix theta;   // S x K
  Matrix memory;  // tokens x 2h
  std::vector<TopicPosterior> topics;
};

InstanceAnalysis analyze_instance(Model& model,
                                  const std::vector<std::vector<int>>& ids);

struct TopicSentence {
  int topic = 0;
  std::vector<int> ids;
  Tokens tokens;
  std::uint64_t seed = 0;
  // Set when the topic had no mass and decoded from its inherited prior.
  bool low_confidence = false;
};

struct DecodeOptions {
  double nucleus_p = 0.4;
  int max_len = 30;
  bool attention = true;
  // Beam search (width beam_width) instead of nucleus sampling when > 0.
  int beam_width = 0;

  static DecodeOptions from(const Config& config);
};

// One sentence per topic, decoded from the topic posterior mean.
std::vector<TopicSentence> generate_topic_sentences(
    Model& model, const Vocabulary& vocab, const InstanceAnalysis& analysis,
    std::uint64_t seed, const DecodeOptions& options);

struct ExtractOptions {
  int beam_width = 8;
  int max_sentences = 6;
  double redundancy_threshold = 0.6;
};

struct SummaryCandidate {
  std::vector<int> selected;  // candidate indices, ascending
  double score = 0.0;
};

// True when both ROUGE-1 precisions of the pair are below the threshold.
bool compatible(const Tokens& a, const Tokens& b, double redundancy_threshold);

// Beam search over sets of candidate sentences scored by ROUGE-1 F against
// `reference`. Every selected pair is compatible(). Ties prefer fewer
// sentences, then lexicographically smaller index lists. Empty candidates are
// never selected; with nothing admissible the result is empty.
SummaryCandidate extract_summary(const std::vector<Tokens>& candidates,
                                 const Tokens& reference,
                                 const ExtractOptions& options);

// Selected topic ids in depth-first order of the tree.
std::vector<int> order_depth_first(const std::vector<int>& topics,
                                   const TopicTree& tree);

// `count` candidates maximizing ROUGE-L F against `gold`. Exhaustive when
// the number of subsets is manageable, beam search otherwise.
SummaryCandidate oracle_extract(const std::vector<Tokens>& candidates,
                                const Tokens& gold, int count);

struct Summary {
  std::string product_id;
  std::vector<int> topics;  // depth-first order
  std::vector<Tokens> sentences;
  double score = 0.0;

  Tokens tokens() const;
  std::string text() const;
  std::string to_json_line(const TopicTree& tree) const;
  static Summary from_json_line(const std::string& line,
                                const TopicTree& tree);
};

Summary summarize(const std::string& product_id,
                  const std::vector<TopicSentence>& topic_sentences,
                  const Instance& instance, const TopicTree& tree,
                  const ExtractOptions& options);

}  // namespace tgsum

#endif  // TGSUM_SUMMARIZER_H_
