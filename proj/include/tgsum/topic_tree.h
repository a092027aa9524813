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

#ifndef TGSUM_TOPIC_TREE_H_
#define TGSUM_TOPIC_TREE_H_

#include <optional>
#include <string>
#include <vector>

namespace tgsum {

// A fixed topic tree. Nodes are indexed 0..K-1 in depth-first order, so every
// node precedes its descendants and node 0 is the root. Depths are 0-based;
// the root sits at depth 0 ("level 1" in reports).
class TopicTree {
 public:
  // {4, 4} is a root with 4 children, each with 4 children: 21 nodes.
  // An empty list is the single-node tree.
  explicit TopicTree(std::vector<int> branching = {});

  int size() const { return static_cast<int>(parent_.size()); }
  int level_count() const { return static_cast<int>(branching_.size()) + 1; }
  const std::vector<int>& branching() const { return branching_; }

  int parent(int k) const { return parent_[k]; }  // -1 for the root
  int depth(int k) const { return depth_[k]; }
  const std::vector<int>& children(int k) const { return children_[k]; }
  // Siblings that come before k, in order.
  std::vector<int> preceding_siblings(int k) const;
  // Root first, parent last.
  std::vector<int> ancestors(int k) const;
  bool is_last_sibling(int k) const;
  bool at_deepest_level(int k) const { return depth_[k] == level_count() - 1; }
  std::vector<int> nodes_at_depth(int depth) const;
  // Each root-to-leaf path as a node list.
  std::vector<std::vector<int>> paths() const;

  // "1" for the root, then one digit per child position ("12" is the root's
  // second child). Falls back to dot-separated positions past 9 children.
  const std::string& label(int k) const { return labels_[k]; }
  std::optional<int> find_label(const std::string& label) const;

 private:
  void build(int parent, int depth, const std::string& label);

  std::vector<int> branching_;
  std::vector<int> parent_;
  std::vector<int> depth_;
  std::vector<std::vector<int>> children_;
  std::vector<std::string> labels_;
};

// Number of nodes for a branching list: 1 + b1 + b1*b2 + ...
int topic_count(const std::vector<int>& branching);

}  // namespace tgsum

#endif  // TGSUM_TOPIC_TREE_H_
