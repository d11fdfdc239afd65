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

#include "medcorpus/html.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>
#include <optional>
#include <set>
#include <unordered_map>

#include "medcorpus/errors.hpp"
#include "medcorpus/unicode.hpp"

namespace medcorpus::html {
namespace {

const std::set<std::string, std::less<>> kVoid = {
    "area", "base", "br",   "col",   "embed",  "hr",    "img",
    "input", "link", "meta", "param", "source", "track", "wbr"};

const std::set<std::string, std::less<>> kRawText = {"script", "style",
                                                     "noscript", "template"};

const std::set<std::string, std::less<>> kBlock = {
    "address", "article", "aside", "blockquote", "br",     "dd",    "div",
    "dl",      "dt",      "figcaption", "footer", "form",  "h1",    "h2",
    "h3",      "h4",      "h5",    "h6",         "header", "hr",    "li",
    "main",    "nav",     "ol",    "p",          "pre",    "section", "table",
    "td",      "th",      "tr",    "ul"};

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f';
}

const std::unordered_map<std::string_view, char32_t>& named_entities() {
  static const std::unordered_map<std::string_view, char32_t> map = {
      {"amp", U'&'},      {"lt", U'<'},       {"gt", U'>'},
      {"quot", U'"'},     {"apos", U'\''},    {"nbsp", 0xA0},
      {"zwnj", 0x200C},   {"zwj", 0x200D},    {"lrm", 0x200E},
      {"rlm", 0x200F},    {"hellip", 0x2026}, {"laquo", 0xAB},
      {"raquo", 0xBB},    {"mdash", 0x2014},  {"ndash", 0x2013},
      {"copy", 0xA9},     {"reg", 0xAE},      {"times", 0xD7},
      {"lsquo", 0x2018},  {"rsquo", 0x2019},  {"ldquo", 0x201C},
      {"rdquo", 0x201D},  {"middot", 0xB7},   {"bull", 0x2022}};
  return map;
}

// ---- selectors -------------------------------------------------------------

struct AttrTest {
  std::string name;
  std::optional<std::string> value;
};

struct Compound {
  std::string tag;  // empty or "*": any
  std::vector<std::string> classes;
  std::string id;
  std::vector<AttrTest> attrs;
  bool child_of_prev = false;  // '>' combinator before this compound
};

using Chain = std::vector<Compound>;

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ||
         static_cast<unsigned char>(c) >= 0x80;
}

std::vector<Chain> parse_selector(std::string_view sel) {
  std::vector<Chain> chains;
  Chain chain;
  std::size_t i = 0;
  bool pending_child = false;
  auto fail = [&](const char* what) {
    throw ConfigError(std::string("bad selector '") + std::string(sel) +
                      "': " + what);
  };
  auto read_ident = [&]() {
    const std::size_t start = i;
    while (i < sel.size() && ident_char(sel[i])) ++i;
    if (i == start) fail("expected identifier");
    return std::string(sel.substr(start, i - start));
  };
  while (i < sel.size()) {
    const char c = sel[i];
    if (is_space(c)) {
      ++i;
      continue;
    }
    if (c == ',') {
      if (chain.empty() || pending_child) fail("empty alternative");
      chains.push_back(std::move(chain));
      chain.clear();
      ++i;
      continue;
    }
    if (c == '>') {
      if (chain.empty() || pending_child) fail("dangling '>'");
      pending_child = true;
      ++i;
      continue;
    }
    Compound comp;
    comp.child_of_prev = pending_child;
    pending_child = false;
    if (c == '*') {
      comp.tag = "*";
      ++i;
    } else if (ident_char(c)) {
      comp.tag = lower(read_ident());
    }
    while (i < sel.size() && !is_space(sel[i]) && sel[i] != ',' &&
           sel[i] != '>') {
      if (sel[i] == '.') {
        ++i;
        comp.classes.push_back(read_ident());
      } else if (sel[i] == '#') {
        ++i;
        comp.id = read_ident();
      } else if (sel[i] == '[') {
        ++i;
        AttrTest test;
        test.name = lower(read_ident());
        if (i < sel.size() && sel[i] == '=') {
          ++i;
          std::string value;
          if (i < sel.size() && (sel[i] == '"' || sel[i] == '\'')) {
            const char q = sel[i++];
            const std::size_t end = sel.find(q, i);
            if (end == std::string_view::npos) fail("unterminated quote");
            value = std::string(sel.substr(i, end - i));
            i = end + 1;
          } else {
            value = read_ident();
          }
          test.value = value;
        }
        if (i >= sel.size() || sel[i] != ']') fail("expected ']'");
        ++i;
        comp.attrs.push_back(std::move(test));
      } else {
        fail("unexpected character");
      }
    }
    chain.push_back(std::move(comp));
  }
  if (pending_child) fail("dangling '>'");
  if (!chain.empty()) chains.push_back(std::move(chain));
  if (chains.empty()) fail("empty selector");
  return chains;
}

bool has_class(const Node& n, std::string_view cls) {
  auto it = n.attrs.find("class");
  if (it == n.attrs.end()) return false;
  const std::string& v = it->second;
  std::size_t i = 0;
  while (i < v.size()) {
    while (i < v.size() && is_space(v[i])) ++i;
    const std::size_t start = i;
    while (i < v.size() && !is_space(v[i])) ++i;
    if (i > start && std::string_view(v).substr(start, i - start) == cls) {
      return true;
    }
  }
  return false;
}

bool matches_compound(const Node& n, const Compound& c) {
  if (n.kind != Node::Kind::kElement || n.tag.empty()) return false;
  if (!c.tag.empty() && c.tag != "*" && c.tag != n.tag) return false;
  if (!c.id.empty()) {
    auto it = n.attrs.find("id");
    if (it == n.attrs.end() || it->second != c.id) return false;
  }
  for (const auto& cls : c.classes) {
    if (!has_class(n, cls)) return false;
  }
  for (const auto& a : c.attrs) {
    auto it = n.attrs.find(a.name);
    if (it == n.attrs.end()) return false;
    if (a.value && it->second != *a.value) return false;
  }
  return true;
}

}  // namespace

std::string decode_entities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '&') {
      out.push_back(text[i++]);
      continue;
    }
    const std::size_t semi = text.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out.push_back(text[i++]);
      continue;
    }
    const std::string_view name = text.substr(i + 1, semi - i - 1);
    char32_t cp = 0;
    bool ok = false;
    if (!name.empty() && name[0] == '#') {
      std::uint32_t value = 0;
      const char* first = name.data() + 1;
      const char* last = name.data() + name.size();
      int base = 10;
      if (first != last && (*first == 'x' || *first == 'X')) {
        ++first;
        base = 16;
      }
      auto [ptr, ec] = std::from_chars(first, last, value, base);
      if (ec == std::errc() && ptr == last && first != last) {
        // Zero, surrogates and out-of-range values become U+FFFD.
        const bool valid = value > 0 && value <= 0x10FFFF &&
                           !(value >= 0xD800 && value <= 0xDFFF);
        cp = valid ? value : 0xFFFD;
        ok = true;
      }
    } else {
      auto it = named_entities().find(name);
      if (it != named_entities().end()) {
        cp = it->second;
        ok = true;
      }
    }
    if (ok) {
      unicode::append_utf8(out, cp);
      i = semi + 1;
    } else {
      out.push_back(text[i++]);
    }
  }
  return out;
}

Tree Tree::parse(std::string_view html) {
  Tree tree;
  tree.nodes_.push_back(Node{});
  std::vector<NodeId> stack = {0};
  auto add = [&](Node node) {
    const NodeId parent = stack.back();
    node.parent = parent;
    tree.nodes_.push_back(std::move(node));
    const NodeId id = tree.nodes_.size() - 1;
    tree.nodes_[parent].children.push_back(id);
    return id;
  };
  auto add_text = [&](std::string_view raw) {
    if (raw.empty()) return;
    Node n;
    n.kind = Node::Kind::kText;
    n.text = decode_entities(raw);
    add(std::move(n));
  };

  std::size_t i = 0;
  const std::size_t n = html.size();
  while (i < n) {
    const std::size_t lt = html.find('<', i);
    if (lt == std::string_view::npos) {
      add_text(html.substr(i));
      break;
    }
    add_text(html.substr(i, lt - i));
    i = lt;
    if (html.compare(i, 4, "<!--") == 0) {
      const std::size_t end = html.find("-->", i + 4);
      i = end == std::string_view::npos ? n : end + 3;
      continue;
    }
    if (i + 1 < n && (html[i + 1] == '!' || html[i + 1] == '?')) {
      const std::size_t end = html.find('>', i);
      i = end == std::string_view::npos ? n : end + 1;
      continue;
    }
    const bool closing = i + 1 < n && html[i + 1] == '/';
    std::size_t j = i + (closing ? 2 : 1);
    const std::size_t name_start = j;
    while (j < n && (std::isalnum(static_cast<unsigned char>(html[j])) ||
                     html[j] == '-' || html[j] == ':')) {
      ++j;
    }
    if (j == name_start) {
      // A lone '<' is text.
      add_text(html.substr(i, 1));
      ++i;
      continue;
    }
    const std::string tag = lower(html.substr(name_start, j - name_start));
    // Attributes.
    std::map<std::string, std::string> attrs;
    bool self_closing = false;
    while (j < n && html[j] != '>') {
      if (is_space(html[j])) {
        ++j;
        continue;
      }
      if (html[j] == '/') {
        self_closing = true;
        ++j;
        continue;
      }
      const std::size_t an = j;
      while (j < n && !is_space(html[j]) && html[j] != '=' && html[j] != '>' &&
             html[j] != '/') {
        ++j;
      }
      std::string attr_name = lower(html.substr(an, j - an));
      while (j < n && is_space(html[j])) ++j;
      std::string value;
      if (j < n && html[j] == '=') {
        ++j;
        while (j < n && is_space(html[j])) ++j;
        if (j < n && (html[j] == '"' || html[j] == '\'')) {
          const char q = html[j++];
          const std::size_t end = html.find(q, j);
          const std::size_t stop = end == std::string_view::npos ? n : end;
          value = decode_entities(html.substr(j, stop - j));
          j = stop == n ? n : stop + 1;
        } else {
          const std::size_t vs = j;
          while (j < n && !is_space(html[j]) && html[j] != '>') ++j;
          value = decode_entities(html.substr(vs, j - vs));
        }
      }
      if (!attr_name.empty()) attrs.emplace(std::move(attr_name), std::move(value));
    }
    i = j < n ? j + 1 : n;

    if (closing) {
      auto it = std::find_if(stack.rbegin(), stack.rend() - 1, [&](NodeId id) {
        return tree.nodes_[id].tag == tag;
      });
      if (it != stack.rend() - 1) {
        stack.erase(std::next(it).base(), stack.end());
      }
      continue;
    }
    if (kRawText.count(tag)) {
      const std::string close = "</" + tag;
      std::size_t k = i;
      while (true) {
        k = html.find("</", k);
        if (k == std::string_view::npos) break;
        if (lower(html.substr(k, close.size())) == close) break;
        k += 2;
      }
      if (k == std::string_view::npos) {
        i = n;
      } else {
        const std::size_t gt = html.find('>', k);
        i = gt == std::string_view::npos ? n : gt + 1;
      }
      continue;
    }
    // Implied end of an open paragraph when another block starts.
    if ((tag == "p" || tag == "div" || tag == "ul" || tag == "ol" ||
         tag == "table" || (tag.size() == 2 && tag[0] == 'h' &&
                            tag[1] >= '1' && tag[1] <= '6')) &&
        tree.nodes_[stack.back()].tag == "p") {
      stack.pop_back();
    }
    if (tag == "li" && tree.nodes_[stack.back()].tag == "li") stack.pop_back();
    Node el;
    el.tag = tag;
    el.attrs = std::move(attrs);
    const NodeId id = add(std::move(el));
    if (!self_closing && !kVoid.count(tag)) stack.push_back(id);
  }
  return tree;
}

std::vector<NodeId> Tree::select(std::string_view selector) const {
  return select(selector, root());
}

std::vector<NodeId> Tree::select(std::string_view selector,
                                 NodeId scope) const {
  const auto chains = parse_selector(selector);
  std::vector<NodeId> out;
  // Walk the scope subtree in document order.
  std::vector<NodeId> order;
  std::vector<NodeId> todo = {scope};
  while (!todo.empty()) {
    const NodeId id = todo.back();
    todo.pop_back();
    if (id != scope) order.push_back(id);
    const auto& ch = nodes_[id].children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) todo.push_back(*it);
  }
  for (NodeId id : order) {
    for (const auto& chain : chains) {
      // Right-to-left match; ancestors are limited to the scope subtree.
      std::function<bool(NodeId, std::size_t)> match = [&](NodeId node,
                                                           std::size_t k) {
        if (!matches_compound(nodes_[node], chain[k])) return false;
        if (k == 0) return true;
        if (node == scope) return false;
        if (chain[k].child_of_prev) return match(nodes_[node].parent, k - 1);
        for (NodeId cur = nodes_[node].parent;; cur = nodes_[cur].parent) {
          if (match(cur, k - 1)) return true;
          if (cur == scope || cur == 0) break;
        }
        return false;
      };
      if (match(id, chain.size() - 1)) {
        out.push_back(id);
        break;
      }
    }
  }
  return out;
}

bool Tree::contains(NodeId ancestor, NodeId node) const {
  while (true) {
    if (node == ancestor) return true;
    if (node == 0) return false;
    node = nodes_[node].parent;
  }
}

std::string Tree::text(NodeId id, const std::vector<NodeId>& skip) const {
  std::string out;
  std::function<void(NodeId)> walk = [&](NodeId cur) {
    if (std::find(skip.begin(), skip.end(), cur) != skip.end()) return;
    const Node& node = nodes_[cur];
    if (node.kind == Node::Kind::kText) {
      out += node.text;
      return;
    }
    const bool block = kBlock.count(node.tag) > 0;
    if (block) out.push_back('\n');
    for (NodeId c : node.children) walk(c);
    if (block) out.push_back('\n');
  };
  walk(id);
  return out;
}

std::string Tree::attr(NodeId id, const std::string& name) const {
  auto it = nodes_[id].attrs.find(name);
  return it == nodes_[id].attrs.end() ? std::string() : it->second;
}

}  // namespace medcorpus::html
