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

#include "tgsum/summarizer.h"

#include <algorithm>
#include <iostream>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "tgsum/metrics.h"

namespace tgsum {

InstanceAnalysis analyze_instance(Model& model,
                                  const std::vector<std::vector<int>>& ids) {
  if (ids.empty()) throw std::invalid_argument("analyze: instance has no sentences");
  ad::Graph g;
  CodecOptions opt;
  opt.variance_floor = model.config().variance_floor();
  EncodedSentences enc = encode_sentences(g, model.codec(), ids, opt);
  Var y = sentence_embedding(g, model.topics(), ids);
  TopicDistributionVars td = topic_distribution(g, model.topics(), model.tree(), y);
  InstanceAnalysis a;
  a.sentences.mean = enc.mean.value();
  a.sentences.variance = enc.variance.value();
  a.memory = enc.memory.value();
  a.theta = td.topic.value();
  a.topics = topic_posteriors(a.sentences, a.theta, model.tree());
  return a;
}

DecodeOptions DecodeOptions::from(const Config& config) {
  DecodeOptions o;
  o.nucleus_p = config.nucleus_p;
  o.max_len = config.decode_max_len;
  o.attention = !config.no_attention;
  o.beam_width = config.beam_decode ? config.decode_beam_width : 0;
  return o;
}

std::vector<TopicSentence> generate_topic_sentences(
    Model& model, const Vocabulary& vocab, const InstanceAnalysis& analysis,
    std::uint64_t seed, const DecodeOptions& options) {
  const int K = static_cast<int>(analysis.topics.size());
  Matrix means(K, model.config().latent_dim);
  for (int k = 0; k < K; ++k) means.row(k) = analysis.topics[k].mean.transpose();
  std::vector<std::vector<int>> ids =
      options.beam_width > 0
          ? beam_decode(model.codec(), means, analysis.memory,
                        options.beam_width, options.max_len, options.attention)
          : nucleus_decode(model.codec(), means, analysis.memory,
                           options.nucleus_p, options.max_len, seed,
                           options.attention);
  std::vector<TopicSentence> out(K);
  for (int k = 0; k < K; ++k) {
    out[k].topic = k;
    out[k].ids = ids[k];
    out[k].tokens = vocab.decode(ids[k]);
    out[k].seed = seed;
    out[k].low_confidence = analysis.topics[k].empty;
  }
  return out;
}

bool compatible(const Tokens& a, const Tokens& b, double redundancy_threshold) {
  return rouge_n(a, b, 1).precision < redundancy_threshold &&
         rouge_n(b, a, 1).precision < redundancy_threshold;
}

namespace {

bool better(const SummaryCandidate& a, const SummaryCandidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.selected.size() != b.selected.size())
    return a.selected.size() < b.selected.size();
  return a.selected < b.selected;
}

Tokens concat(const std::vector<Tokens>& candidates,
              const std::vector<int>& selected) {
  Tokens out;
  for (int i : selected)
    out.insert(out.end(), candidates[i].begin(), candidates[i].end());
  return out;
}

}  // namespace

SummaryCandidate extract_summary(const std::vector<Tokens>& candidates,
                                 const Tokens& reference,
                                 const ExtractOptions& options) {
  if (options.beam_width < 1 || options.max_sentences < 1)
    throw std::invalid_argument("extract: beam width and size must be >= 1");
  if (!(options.redundancy_threshold > 0 && options.redundancy_threshold <= 1))
    throw std::invalid_argument("extract: threshold must be in (0, 1]");
  const int n = static_cast<int>(candidates.size());
  std::vector<std::vector<char>> ok(n, std::vector<char>(n, 0));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      ok[i][j] = ok[j][i] =
          compatible(candidates[i], candidates[j], options.redundancy_threshold);

  auto score = [&](const std::vector<int>& sel) {
    return rouge_n(concat(candidates, sel), reference, 1).f1;
  };

  std::vector<SummaryCandidate> beam = {SummaryCandidate{}};
  SummaryCandidate best;
  bool found = false;
  for (int size = 1; size <= options.max_sentences; ++size) {
    std::set<std::vector<int>> seen;
    std::vector<SummaryCandidate> next;
    for (const SummaryCandidate& state : beam) {
      for (int j = 0; j < n; ++j) {
        if (candidates[j].empty()) continue;
        if (std::find(state.selected.begin(), state.selected.end(), j) !=
            state.selected.end())
          continue;
        bool admissible = true;
        for (int i : state.selected) admissible = admissible && ok[i][j];
        if (!admissible) continue;
        std::vector<int> sel = state.selected;
        sel.insert(std::upper_bound(sel.begin(), sel.end(), j), j);
        if (!seen.insert(sel).second) continue;
        next.push_back(SummaryCandidate{sel, score(sel)});
      }
    }
    if (next.empty()) break;
    std::sort(next.begin(), next.end(), better);
    if (static_cast<int>(next.size()) > options.beam_width)
      next.resize(options.beam_width);
    if (!found || better(next.front(), best)) best = next.front();
    found = true;
    beam = std::move(next);
  }
  if (!found) std::clog << "extract: no admissible sentence; empty summary\n";
  return best;
}

std::vector<int> order_depth_first(const std::vector<int>& topics,
                                   const TopicTree& tree) {
  for (int k : topics)
    if (k < 0 || k >= tree.size())
      throw std::out_of_range("order: topic id outside the tree");
  // Node indices are the depth-first enumeration.
  std::vector<int> out = topics;
  std::sort(out.begin(), out.end());
  return out;
}

SummaryCandidate oracle_extract(const std::vector<Tokens>& candidates,
                                const Tokens& gold, int count) {
  const int n = static_cast<int>(candidates.size());
  const int r = std::min(count, n);
  SummaryCandidate best;
  if (r <= 0) return best;
  auto score = [&](const std::vector<int>& sel) {
    return rouge_l(concat(candidates, sel), gold).f1;
  };
  double subsets = 1.0;
  for (int i = 0; i < r; ++i) subsets = subsets * (n - i) / (i + 1);
  bool found = false;
  if (subsets <= 200000.0) {
    std::vector<int> sel(r);
    for (int i = 0; i < r; ++i) sel[i] = i;
    while (true) {
      SummaryCandidate c{sel, score(sel)};
      if (!found || better(c, best)) best = c;
      found = true;
      int i = r - 1;
      while (i >= 0 && sel[i] == n - r + i) --i;
      if (i < 0) break;
      ++sel[i];
      for (int j = i + 1; j < r; ++j) sel[j] = sel[j - 1] + 1;
    }
    return best;
  }
  constexpr int kWidth = 16;
  std::vector<std::vector<int>> beam = {{}};
  for (int size = 1; size <= r; ++size) {
    std::set<std::vector<int>> seen;
    std::vector<SummaryCandidate> next;
    for (const auto& state : beam) {
      for (int j = 0; j < n; ++j) {
        if (std::find(state.begin(), state.end(), j) != state.end()) continue;
        std::vector<int> sel = state;
        sel.insert(std::upper_bound(sel.begin(), sel.end(), j), j);
        if (seen.insert(sel).second) next.push_back({sel, score(sel)});
      }
    }
    std::sort(next.begin(), next.end(), better);
    if (static_cast<int>(next.size()) > kWidth) next.resize(kWidth);
    beam.clear();
    for (const auto& c : next) beam.push_back(c.selected);
    if (size == r) best = next.front();
  }
  return best;
}

Tokens Summary::tokens() const {
  Tokens out;
  for (const Tokens& s : sentences) out.insert(out.end(), s.begin(), s.end());
  return out;
}

namespace {

std::string join(const Tokens& t) {
  std::string out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) out += ' ';
    out += t[i];
  }
  return out;
}

Tokens split_ws(const std::string& s) {
  Tokens out;
  std::string cur;
  for (char c : s) {
    if (c == ' ') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

}  // namespace

std::string Summary::text() const {
  std::string out;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (i) out += ' ';
    out += join(sentences[i]);
  }
  return out;
}

std::string Summary::to_json_line(const TopicTree& tree) const {
  nlohmann::json j;
  j["product_id"] = product_id;
  nlohmann::json labels = nlohmann::json::array();
  for (int k : topics) labels.push_back(tree.label(k));
  j["selected_topics"] = labels;
  nlohmann::json sents = nlohmann::json::array();
  for (const Tokens& s : sentences) sents.push_back(join(s));
  j["sentences"] = sents;
  j["score"] = score;
  return j.dump();
}

Summary Summary::from_json_line(const std::string& line,
                                const TopicTree& tree) {
  const nlohmann::json j = nlohmann::json::parse(line);
  Summary s;
  s.product_id = j.at("product_id").get<std::string>();
  for (const auto& l : j.at("selected_topics")) {
    auto k = tree.find_label(l.get<std::string>());
    if (!k)
      throw std::runtime_error("summary: topic label '" + l.get<std::string>() +
                               "' is not in the tree");
    s.topics.push_back(*k);
  }
  for (const auto& t : j.at("sentences"))
    s.sentences.push_back(split_ws(t.get<std::string>()));
  s.score = j.at("score").get<double>();
  return s;
}

Summary summarize(const std::string& product_id,
                  const std::vector<TopicSentence>& topic_sentences,
                  const Instance& instance, const TopicTree& tree,
                  const ExtractOptions& options) {
  std::vector<Tokens> candidates;
  for (const TopicSentence& t : topic_sentences) candidates.push_back(t.tokens);
  const SummaryCandidate c =
      extract_summary(candidates, instance.all_tokens(), options);
  std::vector<int> topics;
  for (int i : c.selected) topics.push_back(topic_sentences[i].topic);
  Summary s;
  s.product_id = product_id;
  s.topics = order_depth_first(topics, tree);
  for (int k : s.topics) {
    for (const TopicSentence& t : topic_sentences)
      if (t.topic == k) s.sentences.push_back(t.tokens);
  }
  s.score = c.score;
  return s;
}

}  // namespace tgsum
