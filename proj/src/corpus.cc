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

#include "tgsum/corpus.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace tgsum {

using nlohmann::json;

std::string_view split_name(Split s) {
  switch (s) {
    case Split::kTrain:
      return "train";
    case Split::kValidation:
      return "validation";
    case Split::kTest:
      return "test";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "validation" || name == "valid" || name == "dev")
    return Split::kValidation;
  if (name == "test") return Split::kTest;
  throw std::invalid_argument("unknown split: " + std::string(name));
}

std::size_t Instance::sentence_count() const {
  std::size_t n = 0;
  for (const Review& r : reviews) n += r.sentences.size();
  return n;
}

std::vector<Tokens> Instance::sentences() const {
  std::vector<Tokens> out;
  out.reserve(sentence_count());
  for (const Review& r : reviews)
    out.insert(out.end(), r.sentences.begin(), r.sentences.end());
  return out;
}

std::vector<int> Instance::sentence_topics() const {
  std::vector<int> out;
  for (const Review& r : reviews) {
    for (std::size_t i = 0; i < r.sentences.size(); ++i)
      out.push_back(i < r.topics.size() ? r.topics[i] : -1);
  }
  return out;
}

Tokens Instance::all_tokens() const {
  Tokens out;
  for (const Review& r : reviews)
    for (const Tokens& s : r.sentences) out.insert(out.end(), s.begin(), s.end());
  return out;
}

namespace {

bool is_word_char(unsigned char c) {
  return std::isalnum(c) != 0 || c == '\'';
}

bool is_terminator(char c) { return c == '.' || c == '?' || c == '!'; }

// FNV-1a; stable across platforms, unlike std::hash.
std::uint64_t stable_hash(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

std::vector<Tokens> tokenize(std::string_view text) {
  std::vector<Tokens> sentences;
  Tokens current;
  bool after_terminator = false;
  std::size_t i = 0;
  while (i < text.size()) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (after_terminator && !is_terminator(static_cast<char>(c))) {
      sentences.push_back(std::move(current));
      current.clear();
      after_terminator = false;
    }
    if (std::isspace(c) != 0) {
      ++i;
    } else if (is_word_char(c)) {
      std::string word;
      while (i < text.size() &&
             is_word_char(static_cast<unsigned char>(text[i]))) {
        word.push_back(static_cast<char>(
            std::tolower(static_cast<unsigned char>(text[i]))));
        ++i;
      }
      current.push_back(std::move(word));
    } else {
      current.emplace_back(1, static_cast<char>(c));
      if (is_terminator(static_cast<char>(c))) after_terminator = true;
      ++i;
    }
  }
  if (!current.empty()) sentences.push_back(std::move(current));
  return sentences;
}

Vocabulary::Vocabulary() {
  push("<pad>", 0);
  push("<unk>", 0);
  push("<s>", 0);
  push("</s>", 0);
}

void Vocabulary::push(std::string word, std::int64_t count) {
  index_.emplace(word, static_cast<int>(words_.size()));
  words_.push_back(std::move(word));
  counts_.push_back(count);
}

Vocabulary Vocabulary::build(const std::vector<Instance>& instances,
                             int min_count) {
  std::unordered_map<std::string, std::int64_t> freq;
  bool any = false;
  for (const Instance& inst : instances) {
    if (inst.split != Split::kTrain) continue;
    any = true;
    for (const Review& r : inst.reviews)
      for (const Tokens& s : r.sentences)
        for (const std::string& w : s) ++freq[w];
  }
  if (!any) throw std::invalid_argument("no training data");

  std::vector<std::pair<std::string, std::int64_t>> kept;
  for (auto& [w, c] : freq)
    if (c > min_count) kept.emplace_back(w, c);
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary v;
  for (auto& [w, c] : kept) {
    if (v.contains(w)) continue;
    v.push(w, c);
  }
  return v;
}

int Vocabulary::id(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? kUnk : it->second;
}

std::vector<int> Vocabulary::encode(const Tokens& tokens,
                                    std::size_t max_len) const {
  std::vector<int> ids;
  ids.reserve(std::min(tokens.size(), max_len));
  for (const std::string& t : tokens) {
    if (ids.size() >= max_len) break;
    ids.push_back(id(t));
  }
  return ids;
}

Tokens Vocabulary::decode(const std::vector<int>& ids) const {
  Tokens out;
  for (int id : ids) {
    if (id == kEos) break;
    if (id == kPad || id == kBos) continue;
    out.push_back(word(id));
  }
  return out;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < words_.size(); ++i)
    out << words_[i] << '\t' << counts_[i] << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  Vocabulary v;
  v.words_.clear();
  v.counts_.clear();
  v.index_.clear();
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("vocabulary line without tab: " + line);
    v.push(line.substr(0, tab), std::stoll(line.substr(tab + 1)));
  }
  if (v.size() < kSpecialCount || v.word(kPad) != "<pad>" ||
      v.word(kUnk) != "<unk>" || v.word(kBos) != "<s>" ||
      v.word(kEos) != "</s>")
    throw std::runtime_error("vocabulary is missing special tokens");
  return v;
}

std::vector<Instance> make_instances(
    const std::map<std::string, std::vector<Review>>& reviews_by_product,
    const InstanceOptions& options) {
  std::vector<Instance> out;
  for (const auto& [product, reviews] : reviews_by_product) {
    std::vector<const Review*> usable;
    for (const Review& r : reviews) {
      if (r.sentences.empty()) continue;
      if (static_cast<int>(r.sentences.size()) >
          options.max_sentences_per_review)
        continue;
      usable.push_back(&r);
    }
    if (static_cast<int>(usable.size()) < options.reviews_per_instance) {
      std::clog << "make_instances: skipping product " << product << " ("
                << usable.size() << " usable reviews)\n";
      continue;
    }
    std::mt19937_64 rng(options.seed ^ stable_hash(product));
    std::vector<std::size_t> order(usable.size());
    for (int n = 0; n < options.instances_per_product; ++n) {
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      Instance inst;
      inst.product_id = product;
      inst.split = options.split;
      for (int i = 0; i < options.reviews_per_instance; ++i)
        inst.reviews.push_back(*usable[order[i]]);
      out.push_back(std::move(inst));
    }
  }
  return out;
}

std::string synthetic_word(int topic, int word) {
  return "t" + std::to_string(topic) + "w" + std::to_string(word);
}

std::vector<Instance> generate_synthetic_corpus(const SyntheticSpec& spec) {
  if (spec.topics <= 0) throw std::invalid_argument("synthetic: 0 topics");
  if (spec.words_per_topic <= 0)
    throw std::invalid_argument("synthetic: empty topic vocabulary");
  if (spec.products <= 0 || spec.reviews_per_instance <= 0 ||
      spec.instances_per_product <= 0)
    throw std::invalid_argument("synthetic: empty corpus");
  if (spec.min_sentences_per_review < 1 ||
      spec.max_sentences_per_review < spec.min_sentences_per_review ||
      spec.min_words_per_sentence < 1 ||
      spec.max_words_per_sentence < spec.min_words_per_sentence)
    throw std::invalid_argument("synthetic: bad length ranges");
  std::vector<double> weights = spec.mixture;
  if (weights.empty()) weights.assign(spec.topics, 1.0);
  if (static_cast<int>(weights.size()) != spec.topics)
    throw std::invalid_argument("synthetic: mixture size != topics");

  std::mt19937_64 rng(spec.seed);
  std::discrete_distribution<int> topic_dist(weights.begin(), weights.end());
  std::uniform_int_distribution<int> word_dist(0, spec.words_per_topic - 1);
  std::uniform_int_distribution<int> nsent(spec.min_sentences_per_review,
                                           spec.max_sentences_per_review);
  std::uniform_int_distribution<int> nword(spec.min_words_per_sentence,
                                           spec.max_words_per_sentence);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> general_dist(
      0, std::max(0, spec.general_vocabulary - 1));
  if ((spec.general_sentences > 0.0 || spec.general_words > 0.0) &&
      spec.general_vocabulary <= 0)
    throw std::invalid_argument("synthetic: empty general vocabulary");

  std::vector<Instance> out;
  for (int p = 0; p < spec.products; ++p) {
    Split split = Split::kTrain;
    if (p < spec.validation_products)
      split = Split::kValidation;
    else if (p < spec.validation_products + spec.test_products)
      split = Split::kTest;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "p%05d", p);
    for (int n = 0; n < spec.instances_per_product; ++n) {
      Instance inst;
      inst.product_id = buf;
      inst.split = split;
      for (int r = 0; r < spec.reviews_per_instance; ++r) {
        Review review;
        const int ns = nsent(rng);
        for (int s = 0; s < ns; ++s) {
          int topic = topic_dist(rng);
          if (spec.general_sentences > 0.0 && unit(rng) < spec.general_sentences)
            topic = -1;
          const int nw = nword(rng);
          Tokens sent;
          for (int w = 0; w < nw; ++w) {
            const bool general =
                topic < 0 ||
                (spec.general_words > 0.0 && unit(rng) < spec.general_words);
            sent.push_back(general ? "g" + std::to_string(general_dist(rng))
                                   : synthetic_word(topic, word_dist(rng)));
          }
          review.sentences.push_back(std::move(sent));
          review.topics.push_back(topic);
        }
        inst.reviews.push_back(std::move(review));
      }
      out.push_back(std::move(inst));
    }
  }
  return out;
}

std::string instance_to_json_line(const Instance& inst) {
  json j;
  j["product_id"] = inst.product_id;
  j["split"] = std::string(split_name(inst.split));
  json reviews = json::array();
  json topics = json::array();
  bool has_topics = false;
  for (const Review& r : inst.reviews) {
    reviews.push_back(r.sentences);
    topics.push_back(r.topics);
    if (!r.topics.empty()) has_topics = true;
  }
  j["reviews"] = std::move(reviews);
  if (has_topics) j["topics"] = std::move(topics);
  return j.dump();
}

Instance instance_from_json_line(const std::string& line) {
  const json j = json::parse(line);
  Instance inst;
  inst.product_id = j.at("product_id").get<std::string>();
  inst.split = parse_split(j.at("split").get<std::string>());
  for (const json& r : j.at("reviews")) {
    Review review;
    review.sentences = r.get<std::vector<Tokens>>();
    inst.reviews.push_back(std::move(review));
  }
  if (j.contains("topics")) {
    const json& t = j.at("topics");
    if (t.size() != inst.reviews.size())
      throw std::runtime_error("topics/reviews size mismatch for " +
                               inst.product_id);
    for (std::size_t i = 0; i < t.size(); ++i)
      inst.reviews[i].topics = t[i].get<std::vector<int>>();
  }
  return inst;
}

void save_instances(const std::vector<Instance>& instances,
                    const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const Instance& inst : instances)
    out << instance_to_json_line(inst) << '\n';
}

std::vector<Instance> load_instances(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<Instance> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(instance_from_json_line(line));
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": " + e.what());
    }
  }
  return out;
}

std::map<std::string, std::vector<Review>> load_raw_reviews(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::map<std::string, std::vector<Review>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    Review r;
    r.sentences = tokenize(j.at("text").get<std::string>());
    if (r.sentences.empty()) continue;
    out[j.at("product_id").get<std::string>()].push_back(std::move(r));
  }
  return out;
}

}  // namespace tgsum
