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

#include "medcorpus/textproc.hpp"

#include <unicode/uchar.h>

#include <algorithm>

#include "medcorpus/errors.hpp"
#include "medcorpus/fileio.hpp"
#include "medcorpus/hashing.hpp"
#include "medcorpus/html.hpp"
#include "medcorpus/unicode.hpp"

namespace medcorpus {

namespace u = unicode;

std::string_view to_string(SplitTag tag) {
  switch (tag) {
    case SplitTag::kTrainPool:
      return "train-pool";
    case SplitTag::kTestPool:
      return "test-pool";
    case SplitTag::kExternal:
      return "external";
    case SplitTag::kTrain:
      return "train";
    case SplitTag::kDev:
      return "dev";
    case SplitTag::kTest:
      return "test";
  }
  return "train-pool";
}

SplitTag split_tag_from_string(std::string_view name) {
  for (SplitTag t : {SplitTag::kTrainPool, SplitTag::kTestPool,
                     SplitTag::kExternal, SplitTag::kTrain, SplitTag::kDev,
                     SplitTag::kTest}) {
    if (to_string(t) == name) return t;
  }
  throw InputError("unknown split tag '" + std::string(name) + "'");
}

std::string normalize_text(std::string_view raw) {
  const std::u32string decoded = u::decode_utf8(raw);
  std::u32string pre;
  pre.reserve(decoded.size());
  for (char32_t cp : decoded) {
    if (cp == 0xFEFF) continue;
    if (cp == U'\r' || cp == 0x2028 || cp == 0x2029) {
      pre.push_back(U'\n');
    } else if (cp != U'\n' && u::is_control(cp)) {
      pre.push_back(U' ');
    } else {
      pre.push_back(cp);
    }
  }
  std::u32string text = u::to_nfc(pre);
  for (char32_t& cp : text) {
    if (cp == 0x064A) {
      cp = 0x06CC;
    } else if (cp == 0x0643) {
      cp = 0x06A9;
    } else if (const int d = u::digit_value(cp); d >= 0) {
      cp = static_cast<char32_t>(U'0' + d);
    }
  }
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const char32_t cp = text[i];
    if (u::is_whitespace(cp)) {
      bool newline = false;
      while (i < text.size() && u::is_whitespace(text[i])) {
        newline = newline || text[i] == U'\n';
        ++i;
      }
      out.push_back(newline ? U'\n' : U' ');
      continue;
    }
    if (cp == u::kZwnj && !out.empty() && out.back() == u::kZwnj) {
      ++i;
      continue;
    }
    out.push_back(cp);
    ++i;
  }
  const auto first = out.find_first_not_of(U" \n");
  if (first == std::u32string::npos) return {};
  const auto last = out.find_last_not_of(U" \n");
  return u::encode_utf8(std::u32string_view(out).substr(first, last - first + 1));
}

std::vector<std::string> WhitespaceTokenizer::tokenize(
    std::string_view text) const {
  std::vector<std::string> tokens;
  const std::u32string cps = u::decode_utf8_lenient(text);
  std::u32string cur;
  for (char32_t cp : cps) {
    if (u::is_whitespace(cp)) {
      if (!cur.empty()) tokens.push_back(u::encode_utf8(cur));
      cur.clear();
    } else {
      cur.push_back(cp);
    }
  }
  if (!cur.empty()) tokens.push_back(u::encode_utf8(cur));
  return tokens;
}

std::vector<std::string> WhitespacePunctTokenizer::tokenize(
    std::string_view text) const {
  std::vector<std::string> tokens;
  const std::u32string cps = u::decode_utf8_lenient(text);
  std::u32string cur;
  auto flush = [&] {
    // A token made only of ZWNJ carries no text.
    if (!cur.empty() && cur.find_first_not_of(u::kZwnj) != std::u32string::npos) {
      tokens.push_back(u::encode_utf8(cur));
    }
    cur.clear();
  };
  for (char32_t cp : cps) {
    if (u::is_whitespace(cp) || u_ispunct(static_cast<UChar32>(cp))) {
      flush();
    } else {
      cur.push_back(cp);
    }
  }
  flush();
  return tokens;
}

std::unique_ptr<Tokenizer> make_tokenizer(std::string_view name) {
  if (name == "whitespace") return std::make_unique<WhitespaceTokenizer>();
  if (name == "whitespace-punct") {
    return std::make_unique<WhitespacePunctTokenizer>();
  }
  throw ConfigError("unknown tokenizer '" + std::string(name) +
                    "' (known: whitespace, whitespace-punct)");
}

std::int64_t count_tokens(std::string_view text, const Tokenizer& tokenizer) {
  return static_cast<std::int64_t>(tokenizer.tokenize(text).size());
}

// ---- extraction rules ------------------------------------------------------

namespace {

std::vector<std::string> string_list(const nlohmann::json& j,
                                     const char* key) {
  std::vector<std::string> out;
  if (!j.contains(key)) return out;
  const auto& v = j.at(key);
  if (v.is_string()) {
    out.push_back(v.get<std::string>());
  } else {
    for (const auto& s : v) out.push_back(s.get<std::string>());
  }
  return out;
}

SourceRules parse_source_rules(const std::string& name,
                               const nlohmann::json& j) {
  SourceRules r;
  try {
    r.kind = j.value("kind", std::string("article"));
    if (r.kind == "article") {
      r.article.title = j.value("title", r.article.title);
      r.article.body = j.value("body", r.article.body);
      r.article.exclude = string_list(j, "exclude");
    } else if (r.kind == "qa") {
      r.qa.thread = j.value("thread", std::string());
      r.qa.question = j.at("question").get<std::string>();
      r.qa.answer = j.at("answer").get<std::string>();
      r.qa.id_attr = j.value("id_attr", r.qa.id_attr);
      r.qa.exclude = string_list(j, "exclude");
    } else {
      throw ConfigError("rules for '" + name + "': unknown kind '" + r.kind +
                        "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("rules for '" + name + "': " + e.what());
  }
  return r;
}

// Decoded entities can reintroduce tag-like text; drop it so emitted text is
// markup-free.
std::string strip_markup(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '<' && i + 1 < text.size()) {
      const char c = text[i + 1];
      const bool tagish = std::isalpha(static_cast<unsigned char>(c)) ||
                          c == '/' || c == '!' || c == '?';
      const std::size_t gt = text.find('>', i + 1);
      if (tagish && gt != std::string_view::npos) {
        out.push_back(' ');
        i = gt + 1;
        continue;
      }
    }
    out.push_back(text[i++]);
  }
  return out;
}

std::string clean_text(std::string_view raw) {
  return normalize_text(strip_markup(raw));
}

std::vector<html::NodeId> select_all(const html::Tree& tree,
                                     const std::vector<std::string>& sels,
                                     html::NodeId scope) {
  std::vector<html::NodeId> out;
  for (const auto& s : sels) {
    auto found = tree.select(s, scope);
    out.insert(out.end(), found.begin(), found.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool inside_any(const html::Tree& tree, html::NodeId node,
                const std::vector<html::NodeId>& roots) {
  return std::any_of(roots.begin(), roots.end(), [&](html::NodeId r) {
    return tree.contains(r, node);
  });
}

// Keeps only nodes that are not excluded and not nested in another kept node.
std::vector<html::NodeId> outermost(const html::Tree& tree,
                                    std::vector<html::NodeId> nodes,
                                    const std::vector<html::NodeId>& excluded) {
  std::vector<html::NodeId> out;
  for (html::NodeId n : nodes) {
    if (inside_any(tree, n, excluded)) continue;
    if (inside_any(tree, n, out)) continue;
    out.push_back(n);
  }
  return out;
}

}  // namespace

ExtractionRules ExtractionRules::from_json(const nlohmann::json& doc) {
  ExtractionRules rules;
  if (!doc.is_object() || !doc.contains("sources") ||
      !doc.at("sources").is_object()) {
    throw ConfigError("rules file needs a 'sources' object");
  }
  for (const auto& [name, body] : doc.at("sources").items()) {
    rules.sources_[name] = parse_source_rules(name, body);
  }
  rules.hash_ = sha256_hex(doc.dump());
  return rules;
}

ExtractionRules ExtractionRules::load(const std::string& path) {
  const std::string text = read_file(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what(), e.byte);
  }
  ExtractionRules rules = from_json(doc);
  rules.hash_ = sha256_hex(text);
  return rules;
}

const SourceRules& ExtractionRules::for_source(std::string_view source,
                                               std::string_view kind) const {
  const std::string fallback = "default-" + std::string(kind);
  for (std::string_view key : {source, std::string_view(fallback),
                               std::string_view("default")}) {
    auto it = sources_.find(key);
    if (it == sources_.end()) continue;
    if (it->second.kind == kind) return it->second;
    if (key == source) {
      throw ConfigError("rules for '" + std::string(source) + "' are " +
                        it->second.kind + " rules, not " + std::string(kind));
    }
  }
  throw ConfigError("no " + std::string(kind) + " extraction rules for '" +
                    std::string(source) + "' and no default");
}

void ExtractionRules::set(std::string source, SourceRules rules) {
  sources_[std::move(source)] = std::move(rules);
}

const ExtractionRules& default_rules() {
  static const ExtractionRules rules = [] {
    ExtractionRules r;
    SourceRules article;
    article.kind = "article";
    article.article.title = "h1";
    article.article.body = "p";
    article.article.exclude = {"nav", "footer", "header", "aside", "form",
                               ".ads", ".share", ".related"};
    r.set("default", article);
    SourceRules qa;
    qa.kind = "qa";
    qa.qa.thread = ".qa-thread";
    qa.qa.question = ".question";
    qa.qa.answer = ".answer";
    qa.qa.exclude = {"nav", "footer", ".ads"};
    r.set("default-qa", qa);
    return r;
  }();
  return rules;
}

Document parse_article(std::string_view html_text, std::string_view source,
                       const ExtractionRules& rules,
                       const Tokenizer& tokenizer, ArticleMeta meta) {
  const ArticleRule& rule = rules.for_source(source, "article").article;
  const html::Tree tree = html::Tree::parse(html_text);
  const auto excluded = select_all(tree, rule.exclude, tree.root());

  const auto body_nodes =
      outermost(tree, tree.select(rule.body), excluded);
  std::string body_raw;
  for (html::NodeId n : body_nodes) {
    body_raw += tree.text(n, excluded);
    body_raw.push_back('\n');
  }
  Document doc;
  doc.body = clean_text(body_raw);
  if (doc.body.empty()) {
    throw ExtractionError("body:" + rule.body,
                          "no extractable body for source '" +
                              std::string(source) + "' (rule body:" +
                              rule.body + ")");
  }
  for (html::NodeId n : tree.select(rule.title)) {
    if (inside_any(tree, n, excluded)) continue;
    doc.title = clean_text(tree.text(n));
    if (!doc.title.empty()) break;
  }
  if (doc.title.empty()) {
    for (html::NodeId n : tree.select("title")) {
      doc.title = clean_text(tree.text(n));
      if (!doc.title.empty()) break;
    }
  }
  doc.source = std::string(source);
  doc.url = std::move(meta.url);
  doc.id = meta.id.empty() ? doc.source + ":" + sha256_hex(doc.body).substr(0, 16)
                           : std::move(meta.id);
  doc.token_count = count_tokens(doc.body, tokenizer);
  return doc;
}

ParsedQa parse_qa(std::string_view html_text, std::string_view source,
                  const ExtractionRules& rules, const Tokenizer& tokenizer,
                  SplitTag hint) {
  const QaRule& rule = rules.for_source(source, "qa").qa;
  const html::Tree tree = html::Tree::parse(html_text);
  const auto excluded = select_all(tree, rule.exclude, tree.root());
  const std::vector<html::NodeId> threads =
      rule.thread.empty()
          ? std::vector<html::NodeId>{tree.root()}
          : outermost(tree, tree.select(rule.thread), excluded);

  ParsedQa out;
  const std::string src(source);
  for (html::NodeId t : threads) {
    const auto qnodes = outermost(tree, tree.select(rule.question, t), excluded);
    if (qnodes.empty()) continue;
    const std::string question = clean_text(tree.text(qnodes.front(), excluded));
    std::string thread_id;
    if (t != tree.root()) {
      thread_id = tree.attr(t, rule.id_attr);
      if (thread_id.empty()) thread_id = tree.attr(t, "id");
    }
    if (thread_id.empty()) {
      thread_id = src + ":" + sha256_hex(question).substr(0, 16);
    }
    if (question.empty()) {
      out.rejects.push_back({src, thread_id, "empty-question", question});
      continue;
    }
    auto anodes = outermost(tree, tree.select(rule.answer, t), excluded);
    anodes.erase(std::remove_if(anodes.begin(), anodes.end(),
                                [&](html::NodeId a) {
                                  return tree.contains(qnodes.front(), a);
                                }),
                 anodes.end());
    if (anodes.empty()) {
      out.rejects.push_back({src, thread_id, "no-answer", question});
      continue;
    }
    std::size_t index = 0;
    for (html::NodeId a : anodes) {
      std::string answer = clean_text(tree.text(a, excluded));
      if (answer.empty()) {
        out.rejects.push_back({src, thread_id, "empty-answer", question});
        continue;
      }
      QAPair pair;
      pair.id = thread_id + "-a" + std::to_string(index++);
      pair.source = src;
      pair.question = question;
      pair.answer = std::move(answer);
      pair.answer_tokens = count_tokens(pair.answer, tokenizer);
      pair.split = hint;
      out.pairs.push_back(std::move(pair));
    }
  }
  return out;
}

nlohmann::ordered_json to_json(const QaReject& reject) {
  nlohmann::ordered_json j;
  j["source"] = reject.source;
  j["thread_id"] = reject.thread_id;
  j["reason"] = reject.reason;
  j["question"] = reject.question;
  return j;
}

}  // namespace medcorpus
