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

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace medcorpus {

// Where a QA record belongs. The *_pool values are routing hints set at
// extraction time; train/dev/test are assigned by build_splits.
enum class SplitTag { kTrainPool, kTestPool, kExternal, kTrain, kDev, kTest };

std::string_view to_string(SplitTag tag);
SplitTag split_tag_from_string(std::string_view name);

struct Document {
  std::string id;
  std::string source;
  std::string title;
  std::string body;
  std::int64_t token_count = 0;
  std::string url;

  bool operator==(const Document&) const = default;
};

struct QAPair {
  std::string id;
  std::string source;
  std::string question;
  std::string answer;
  std::int64_t answer_tokens = 0;
  SplitTag split = SplitTag::kTrainPool;
  // Keys this toolkit does not interpret, carried through load/emit.
  nlohmann::json extras = nlohmann::json::object();

  bool operator==(const QAPair&) const = default;
};

// Applied in order: control characters and BOMs to whitespace/removed, NFC,
// Arabic yeh/kaf folded to their Persian forms, Arabic-Indic and Extended
// Arabic-Indic digits to ASCII, ZWNJ runs collapsed to one ZWNJ, whitespace
// runs collapsed to one space (or one newline when the run held a newline),
// trim. Idempotent. Throws DecodeError on invalid UTF-8.
std::string normalize_text(std::string_view raw);

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::vector<std::string> tokenize(std::string_view text) const = 0;
  virtual std::string name() const = 0;
};

// Splits on whitespace only.
class WhitespaceTokenizer final : public Tokenizer {
 public:
  std::vector<std::string> tokenize(std::string_view text) const override;
  std::string name() const override { return "whitespace"; }
};

// Splits on whitespace and on punctuation, dropping the punctuation. ZWNJ
// stays inside the word it joins. This is the default.
class WhitespacePunctTokenizer final : public Tokenizer {
 public:
  std::vector<std::string> tokenize(std::string_view text) const override;
  std::string name() const override { return "whitespace-punct"; }
};

inline constexpr std::string_view kDefaultTokenizer = "whitespace-punct";

// Throws ConfigError for unknown names.
std::unique_ptr<Tokenizer> make_tokenizer(std::string_view name);

std::int64_t count_tokens(std::string_view text, const Tokenizer& tokenizer);

// Per-source element selectors. Selectors support tag, .class, #id,
// [attr] and [attr=value] compounds, descendant and '>' combinators and
// comma-separated alternatives.
struct ArticleRule {
  std::string title = "h1";
  std::string body = "p";
  std::vector<std::string> exclude;
};

struct QaRule {
  std::string thread;  // empty: the whole page is one thread
  std::string question;
  std::string answer;
  std::string id_attr = "data-id";
  std::vector<std::string> exclude;
};

struct SourceRules {
  std::string kind;  // "article" or "qa"
  ArticleRule article;
  QaRule qa;
};

class ExtractionRules {
 public:
  ExtractionRules() = default;
  static ExtractionRules from_json(const nlohmann::json& doc);
  static ExtractionRules load(const std::string& path);

  // Looks up `source`, then "default-<kind>", then "default". Throws
  // ConfigError when nothing of the requested kind ("article" or "qa")
  // matches.
  const SourceRules& for_source(std::string_view source,
                                std::string_view kind) const;
  void set(std::string source, SourceRules rules);
  std::string sha256() const { return hash_; }

 private:
  std::map<std::string, SourceRules, std::less<>> sources_;
  std::string hash_;
};

// Rules used when no rules file is given.
const ExtractionRules& default_rules();

struct ArticleMeta {
  std::string id;
  std::string url;
};

Document parse_article(std::string_view html, std::string_view source,
                       const ExtractionRules& rules,
                       const Tokenizer& tokenizer, ArticleMeta meta = {});

struct QaReject {
  std::string source;
  std::string thread_id;
  std::string reason;  // no-answer, empty-question, empty-answer
  std::string question;
};

struct ParsedQa {
  std::vector<QAPair> pairs;
  std::vector<QaReject> rejects;
};

// One pair per (question, answer) block; a thread with several doctor
// answers yields several pairs sharing the question.
ParsedQa parse_qa(std::string_view html, std::string_view source,
                  const ExtractionRules& rules, const Tokenizer& tokenizer,
                  SplitTag hint = SplitTag::kTrainPool);

nlohmann::ordered_json to_json(const QaReject& reject);

}  // namespace medcorpus
