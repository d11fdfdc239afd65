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
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "medcorpus/cleaner.hpp"
#include "medcorpus/errors.hpp"
#include "medcorpus/textproc.hpp"

namespace medcorpus::dataset {

inline constexpr std::string_view kExternalSource = "external";

struct SplitPolicy {
  std::set<std::string> train_sources;
  std::set<std::string> test_sources;
  // JSONL files appended to test with source "external".
  std::vector<std::string> external_test_files;
  double dev_fraction = 0.05;
  std::uint64_t rng_seed = 0;
  std::string tokenizer = std::string(kDefaultTokenizer);
  // Applied to external records, which skip the other cleaning stages.
  clean::PiiPatterns external_pii = clean::default_pii_patterns();

  // Throws ConfigError.
  void validate() const;
  static SplitPolicy from_json(const nlohmann::json& doc);
  nlohmann::ordered_json to_json() const;
  std::string sha256() const;
};

// Record sources that no policy set names.
class RoutingError : public InputError {
 public:
  explicit RoutingError(std::vector<std::string> sources);
  const std::vector<std::string>& sources() const { return sources_; }

 private:
  std::vector<std::string> sources_;
};

// A record that could not be placed without breaking disjointness.
struct Conflict {
  std::string id;
  std::string source;
  std::string reason;  // duplicate-id, duplicate-content or content-in-other-split

  bool operator==(const Conflict&) const = default;
};

struct DatasetSplit {
  std::vector<QAPair> train;
  std::vector<QAPair> dev;
  std::vector<QAPair> test;
  std::vector<Conflict> conflicts;
  nlohmann::ordered_json manifest;
};

// Routes records by source, carves dev from the train pool by seeded
// sampling, then appends the external records to test. Test claims content
// first, so a train-pool record repeating test content becomes a conflict.
// Every split is sorted by id.
DatasetSplit build_splits(const std::vector<QAPair>& cleaned,
                          const SplitPolicy& policy);
DatasetSplit build_splits(const std::vector<QAPair>& cleaned,
                          const SplitPolicy& policy,
                          std::vector<QAPair> external);

// Reads an external test file: each line needs "question" and "answer"; "id"
// defaults to "external-<line>" and other keys go to extras. Text is
// normalized and PII-scrubbed. Throws ParseError with the line number.
std::vector<QAPair> load_external(const std::string& path,
                                  const SplitPolicy& policy);

inline constexpr std::size_t kHistogramBuckets = 10;
inline constexpr std::int64_t kHistogramWidth = 50;

struct StatsReport {
  std::string tokenizer;
  std::int64_t total_tokens = 0;
  std::uint64_t record_count = 0;
  std::map<std::string, double> per_source_share;  // token share
  std::map<std::string, std::uint64_t> per_source_records;
  std::map<std::string, std::int64_t> per_source_tokens;
  // Bucket i counts lengths in [50 i, 50 (i + 1)); the last bucket is open.
  std::vector<std::uint64_t> length_histogram =
      std::vector<std::uint64_t>(kHistogramBuckets, 0);

  nlohmann::ordered_json to_json() const;
  std::string to_csv() const;
};

// Token counts are recomputed with `tokenizer`. QA pairs are measured by
// answer, documents by body.
StatsReport corpus_stats(const std::vector<QAPair>& items,
                         const Tokenizer& tokenizer);
StatsReport corpus_stats(const std::vector<Document>& items,
                         const Tokenizer& tokenizer);

// Deterministic seeded subset of round(fraction * n) items, kept in input
// order. Selection depends only on seed and id. Throws InputError unless
// 0 <= fraction <= 1.
std::vector<Document> subsample(const std::vector<Document>& items,
                                double fraction, std::uint64_t seed);
std::vector<QAPair> subsample(const std::vector<QAPair>& items, double fraction,
                              std::uint64_t seed);

// JSONL with a fixed key order:
// {"id", "source", "question", "answer", "answer_tokens", "split", "extras"}.
// Keys unknown on load are kept in extras.
std::string to_jsonl_line(const QAPair& record);
QAPair qa_from_json(const nlohmann::json& j);
void emit_jsonl(const std::vector<QAPair>& records, const std::string& path);
std::vector<QAPair> load_jsonl(const std::string& path);
std::vector<QAPair> parse_jsonl(std::string_view text,
                                std::string_view name = "<input>");

// {"id", "source", "title", "body", "tokens", "url"}.
void emit_documents(const std::vector<Document>& docs, const std::string& path);
std::vector<Document> load_documents(const std::string& path);

// Default chat template of the aya-expanse model family.
inline constexpr std::string_view kAyaChatTemplate =
    "<BOS_TOKEN><|START_OF_TURN_TOKEN|><|USER_TOKEN|>{q}<|END_OF_TURN_TOKEN|>"
    "<|START_OF_TURN_TOKEN|><|CHATBOT_TOKEN|>{a}<|END_OF_TURN_TOKEN|>";

// Substitutes every {q} and {a} in one pass; text is inserted verbatim.
// Throws TemplateError when either placeholder is missing.
std::string emit_instruction_format(const QAPair& pair,
                                    std::string_view tmpl = kAyaChatTemplate);

}  // namespace medcorpus::dataset
