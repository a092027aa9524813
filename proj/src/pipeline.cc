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

#include "tgsum/pipeline.h"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tgsum {
namespace {

Tokens split_words(const std::string& text) {
  std::istringstream in(text);
  Tokens out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::string join_words(const Tokens& t) {
  std::string out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) out += ' ';
    out += t[i];
  }
  return out;
}

void add_scores(EvalRow& acc, const EvalRow& r) {
  for (auto [a, b] : {std::pair{&acc.r1, &r.r1}, std::pair{&acc.r2, &r.r2},
                      std::pair{&acc.rl, &r.rl}}) {
    a->precision += b->precision;
    a->recall += b->recall;
    a->f1 += b->f1;
  }
}

}  // namespace

std::uint64_t instance_seed(std::uint64_t seed, std::size_t index) {
  return seed * 1000003ULL + index;
}

std::string InstanceTopics::to_json_line(const TopicTree& tree) const {
  nlohmann::json j;
  j["product_id"] = product_id;
  nlohmann::json ts = nlohmann::json::array();
  for (const TopicSentence& s : sentences) {
    ts.push_back({{"topic", tree.label(s.topic)},
                  {"text", join_words(s.tokens)},
                  {"seed", s.seed},
                  {"low_confidence", s.low_confidence}});
  }
  j["topic_sentences"] = ts;
  return j.dump();
}

InstanceTopics InstanceTopics::from_json_line(const std::string& line,
                                              const TopicTree& tree) {
  const nlohmann::json j = nlohmann::json::parse(line);
  InstanceTopics out;
  out.product_id = j.at("product_id").get<std::string>();
  for (const auto& t : j.at("topic_sentences")) {
    TopicSentence s;
    const std::string label = t.at("topic").get<std::string>();
    auto k = tree.find_label(label);
    if (!k)
      throw std::runtime_error("topic sentences: label '" + label +
                               "' is not in the tree");
    s.topic = *k;
    s.tokens = split_words(t.at("text").get<std::string>());
    s.seed = t.value("seed", std::uint64_t{0});
    s.low_confidence = t.value("low_confidence", false);
    out.sentences.push_back(std::move(s));
  }
  return out;
}

std::vector<InstanceTopics> generate_all(Model& model, const Vocabulary& vocab,
                                         const std::vector<Instance>& instances,
                                         std::uint64_t seed,
                                         const DecodeOptions& options) {
  std::vector<InstanceTopics> out;
  out.reserve(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto ids = encode_instance(instances[i], vocab,
                                     model.config().max_sentence_len);
    InstanceTopics t;
    t.product_id = instances[i].product_id;
    if (ids.empty()) {
      out.push_back(std::move(t));
      continue;
    }
    const InstanceAnalysis a = analyze_instance(model, ids);
    t.sentences = generate_topic_sentences(model, vocab, a,
                                           instance_seed(seed, i), options);
    t.dump = make_topic_dump(t.product_id, a.topics, model.tree());
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<Summary> extract_all(const std::vector<InstanceTopics>& topics,
                                 const std::vector<Instance>& instances,
                                 const TopicTree& tree,
                                 const ExtractOptions& options) {
  if (topics.size() != instances.size())
    throw std::runtime_error("extract: " + std::to_string(topics.size()) +
                             " topic-sentence records for " +
                             std::to_string(instances.size()) + " instances");
  std::vector<Summary> out;
  out.reserve(topics.size());
  for (std::size_t i = 0; i < topics.size(); ++i) {
    if (topics[i].product_id != instances[i].product_id)
      throw std::runtime_error("extract: record " + std::to_string(i) +
                               " is for product " + topics[i].product_id +
                               ", expected " + instances[i].product_id);
    out.push_back(summarize(topics[i].product_id, topics[i].sentences,
                            instances[i], tree, options));
  }
  return out;
}

ExtractOptions extract_options(const Config& config) {
  ExtractOptions o;
  o.beam_width = config.beam_width;
  o.max_sentences = config.max_sentences;
  o.redundancy_threshold = config.redundancy_threshold;
  return o;
}

EvalReport evaluate(const std::vector<Summary>& summaries,
                    const std::vector<Tokens>& references) {
  if (summaries.size() != references.size())
    throw std::invalid_argument("evaluate: summary/reference count mismatch");
  EvalReport rep;
  rep.mean.product_id = "mean";
  std::vector<Tokens> texts;
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const Tokens cand = summaries[i].tokens();
    EvalRow r{summaries[i].product_id, rouge_n(cand, references[i], 1),
              rouge_n(cand, references[i], 2), rouge_l(cand, references[i])};
    add_scores(rep.mean, r);
    rep.rows.push_back(std::move(r));
    texts.push_back(cand);
  }
  if (!summaries.empty()) {
    const double n = static_cast<double>(summaries.size());
    for (RougeScore* s : {&rep.mean.r1, &rep.mean.r2, &rep.mean.rl}) {
      s->precision /= n;
      s->recall /= n;
      s->f1 /= n;
    }
  }
  if (texts.size() >= 2) {
    rep.self_bleu3 = self_bleu(texts, 3);
    rep.self_bleu4 = self_bleu(texts, 4);
  }
  return rep;
}

void EvalReport::write_csv(std::ostream& out) const {
  out << "product_id,rouge1_p,rouge1_r,rouge1_f,rouge2_p,rouge2_r,rouge2_f,"
         "rougeL_p,rougeL_r,rougeL_f\n";
  out << std::setprecision(6) << std::fixed;
  auto row = [&](const EvalRow& r) {
    out << r.product_id;
    for (const RougeScore* s : {&r.r1, &r.r2, &r.rl})
      out << ',' << s->precision << ',' << s->recall << ',' << s->f1;
    out << '\n';
  };
  for (const EvalRow& r : rows) row(r);
  row(mean);
  out << "# self_bleu3," << self_bleu3 << '\n';
  out << "# self_bleu4," << self_bleu4 << '\n';
}

std::map<std::string, Tokens> load_gold(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::map<std::string, Tokens> gold;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      Tokens t;
      for (const Tokens& s : tokenize(j.at("summary").get<std::string>()))
        t.insert(t.end(), s.begin(), s.end());
      gold[j.at("product_id").get<std::string>()] = std::move(t);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(n) + ": " +
                               e.what());
    }
  }
  return gold;
}

}  // namespace tgsum
