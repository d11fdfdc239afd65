// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace medcorpus::html {

using NodeId = std::size_t;

struct Node {
  enum class Kind { kElement, kText };
  Kind kind = Kind::kElement;
  std::string tag;  // lower-case; empty for the document root
  std::map<std::string, std::string> attrs;
  std::string text;  // entity-decoded text for kText nodes
  NodeId parent = 0;
  std::vector<NodeId> children;
};

// Lenient HTML tree. Never throws on malformed markup: unmatched end tags
// are ignored and unclosed elements end with their parent. Script, style
// and comment contents are dropped.
class Tree {
 public:
  static Tree parse(std::string_view html);

  NodeId root() const { return 0; }
  const Node& node(NodeId id) const { return nodes_[id]; }
  std::size_t size() const { return nodes_.size(); }

  // Matches in document order, without duplicates.
  std::vector<NodeId> select(std::string_view selector) const;
  std::vector<NodeId> select(std::string_view selector, NodeId scope) const;
  bool contains(NodeId ancestor, NodeId node) const;

  // Text of the subtree with block elements separated by newlines. Nodes in
  // `skip` (and their subtrees) are left out.
  std::string text(NodeId id, const std::vector<NodeId>& skip = {}) const;

  std::string attr(NodeId id, const std::string& name) const;

 private:
  std::vector<Node> nodes_;
};

std::string decode_entities(std::string_view text);

}  // namespace medcorpus::html
