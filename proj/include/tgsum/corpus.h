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

// Review corpora: tokenization, instance construction, vocabulary, JSONL
// persistence and a synthetic topic-mixture generator for desk-scale runs.

#ifndef TGSUM_CORPUS_H_
#define TGSUM_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tgsum {

using Tokens = std::vector<std::string>;

enum class Split { kTrain, kValidation, kTest };

std::string_view split_name(Split s);
Split parse_split(std::string_view name);

struct Review {
  std::vector<Tokens> sentences;
  // Ground-truth topic per sentence for synthetic data; empty otherwise.
  std::vector<int> topics;

  bool operator==(const Review&) const = default;
};

struct Instance {
  std::string product_id;
  std::vector<Review> reviews;
  Split split = Split::kTrain;

  std::size_t sentence_count() const;
  // All sentences in review order.
  std::vector<Tokens> sentences() const;
  // Ground-truth topics aligned with sentences(); -1 where unknown.
  std::vector<int> sentence_topics() const;
  // Every review token, concatenated.
  Tokens all_tokens() const;

  bool operator==(const Instance&) const = default;
};

// Splits on '.', '?' and '!' (runs of terminators stay with their sentence),
// lowercases ASCII, and emits words ([a-z0-9'] runs) and single punctuation
// characters as tokens.
std::vector<Tokens> tokenize(std::string_view text);

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;
  static constexpr int kSpecialCount = 4;

  Vocabulary();

  // Keeps words seen strictly more than `min_count` times in the training
  // split. Ids after the specials are ordered by count desc, then word.
  static Vocabulary build(const std::vector<Instance>& instances,
                          int min_count);

  int size() const { return static_cast<int>(words_.size()); }
  int id(const std::string& word) const;
  const std::string& word(int id) const { return words_.at(id); }
  std::int64_t count(int id) const { return counts_.at(id); }
  bool contains(const std::string& word) const {
    return index_.contains(word);
  }

  std::vector<int> encode(const Tokens& tokens, std::size_t max_len) const;
  // Stops at the first end-of-sentence id; drops padding and begin markers.
  Tokens decode(const std::vector<int>& ids) const;

  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  bool operator==(const Vocabulary& o) const {
    return words_ == o.words_ && counts_ == o.counts_;
  }

 private:
  void push(std::string word, std::int64_t count);

  std::vector<std::string> words_;
  std::vector<std::int64_t> counts_;
  std::unordered_map<std::string, int> index_;
};

struct InstanceOptions {
  int reviews_per_instance = 8;
  int instances_per_product = 12;
  int max_sentences_per_review = 50;
  std::uint64_t seed = 1;
  Split split = Split::kTrain;
};

// Products are visited in id order and each gets an RNG seeded from
// (seed, product id), so the result does not depend on map iteration or on
// which other products are present.
std::vector<Instance> make_instances(
    const std::map<std::string, std::vector<Review>>& reviews_by_product,
    const InstanceOptions& options);

struct SyntheticSpec {
  int topics = 3;
  int words_per_topic = 10;
  // Empty means uniform.
  std::vector<double> mixture;
  int products = 250;
  int instances_per_product = 1;
  int reviews_per_instance = 8;
  int min_sentences_per_review = 1;
  int max_sentences_per_review = 3;
  int min_words_per_sentence = 4;
  int max_words_per_sentence = 7;
  // Shared words "g<w>" used by every topic. Each sentence is a general
  // sentence (ground-truth topic -1) with probability general_sentences, and
  // each word of a topic sentence is replaced by a general word with
  // probability general_words.
  int general_vocabulary = 10;
  double general_sentences = 0.0;
  double general_words = 0.0;
  // Leading products go to the validation and test splits.
  int validation_products = 0;
  int test_products = 0;
  std::uint64_t seed = 7;
};

// Word `w` of topic `t` is spelled "t<t>w<w>"; each sentence draws its topic
// from the mixture and all of its words from that topic's vocabulary.
std::string synthetic_word(int topic, int word);
std::vector<Instance> generate_synthetic_corpus(const SyntheticSpec& spec);

// One JSON object per line:
// {"product_id": ..., "split": ..., "reviews": [[["tok", ...], ...], ...]}
// with an extra "topics" array when ground truth is known.
void save_instances(const std::vector<Instance>& instances,
                    const std::filesystem::path& path);
std::vector<Instance> load_instances(const std::filesystem::path& path);
std::string instance_to_json_line(const Instance& instance);
Instance instance_from_json_line(const std::string& line);

// Raw reviews: one JSON object per line {"product_id": ..., "text": ...}.
std::map<std::string, std::vector<Review>> load_raw_reviews(
    const std::filesystem::path& path);

}  // namespace tgsum

#endif  // TGSUM_CORPUS_H_
