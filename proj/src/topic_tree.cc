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

#include "tgsum/topic_tree.h"

#include <algorithm>
#include <stdexcept>

namespace tgsum {

TopicTree::TopicTree(std::vector<int> branching)
    : branching_(std::move(branching)) {
  for (int b : branching_)
    if (b < 1) throw std::invalid_argument("tree: branching factor < 1");
  if (topic_count(branching_) > 100000)
    throw std::invalid_argument("tree: too many topics");
  build(-1, 0, "1");
}

void TopicTree::build(int parent, int depth, const std::string& label) {
  const int k = static_cast<int>(parent_.size());
  parent_.push_back(parent);
  depth_.push_back(depth);
  children_.emplace_back();
  labels_.push_back(label);
  if (parent >= 0) children_[parent].push_back(k);
  if (depth >= static_cast<int>(branching_.size())) return;
  const int b = branching_[depth];
  for (int c = 0; c < b; ++c) {
    std::string child = b > 9 ? label + "." + std::to_string(c + 1)
                              : label + std::to_string(c + 1);
    build(k, depth + 1, child);
  }
}

std::vector<int> TopicTree::preceding_siblings(int k) const {
  std::vector<int> out;
  if (parent_[k] < 0) return out;
  for (int s : children_[parent_[k]]) {
    if (s == k) break;
    out.push_back(s);
  }
  return out;
}

std::vector<int> TopicTree::ancestors(int k) const {
  std::vector<int> out;
  for (int p = parent_[k]; p >= 0; p = parent_[p]) out.push_back(p);
  std::reverse(out.begin(), out.end());
  return out;
}

bool TopicTree::is_last_sibling(int k) const {
  if (parent_[k] < 0) return true;
  return children_[parent_[k]].back() == k;
}

std::vector<int> TopicTree::nodes_at_depth(int depth) const {
  std::vector<int> out;
  for (int k = 0; k < size(); ++k)
    if (depth_[k] == depth) out.push_back(k);
  return out;
}

std::vector<std::vector<int>> TopicTree::paths() const {
  std::vector<std::vector<int>> out;
  for (int k = 0; k < size(); ++k) {
    if (!children_[k].empty()) continue;
    std::vector<int> path = ancestors(k);
    path.push_back(k);
    out.push_back(std::move(path));
  }
  return out;
}

std::optional<int> TopicTree::find_label(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<int>(it - labels_.begin());
}

int topic_count(const std::vector<int>& branching) {
  long long total = 1;
  long long width = 1;
  for (int b : branching) {
    width *= b;
    total += width;
    if (total > 1000000) break;
  }
  return static_cast<int>(total);
}

}  // namespace tgsum
