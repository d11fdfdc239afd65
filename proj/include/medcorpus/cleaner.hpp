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
#include <string>
#include <string_view>
#include <vector>

#include <boost/regex.hpp>
#include <json.hpp>

#include "medcorpus/textproc.hpp"

namespace medcorpus::clean {

enum class SplitKind { kTrain, kDev, kTest };

std::string_view to_string(SplitKind kind);
SplitKind split_kind_from_string(std::string_view name);

class PiiPatterns {
 public:
  struct Entry {
    std::string category;
    std::string pattern;
    std::string mask;
    boost::regex regex;
  };

  PiiPatterns() = default;
  // {"patterns": [{"category", "regex", "mask"}]}. Throws ConfigError.
  static PiiPatterns from_json(const nlohmann::json& doc);
  static PiiPatterns load(const std::string& path);

  const std::vector<Entry>& entries() const { return entries_; }
  const std::string& sha256() const { return hash_; }

 private:
  std::vector<Entry> entries_;
  std::string hash_;
};

// Iranian mobile and landline numbers, e-mail addresses, 16-digit card
// numbers and 10-digit national ids.
const PiiPatterns& default_pii_patterns();

// Mechanical stand-ins for a human quality pass.
struct QualityRules {
  std::int64_t min_question_tokens = 3;
  // URLs per whitespace-separated answer word above which an answer counts as link spam.
  double max_url_density = 0.2;
  // Longest tolerated run of one repeated character.
  std::int64_t max_char_run = 10;
  bool reject_echo = true;  // answer identical to question
  std::string hash;

  static QualityRules from_json(const nlohmann::json& doc);
  static QualityRules load(const std::string& path);
  nlohmann::ordered_json to_json() const;
};

struct CleaningConfig {
  std::int64_t min_answer_tokens = 50;
  double short_drop_probability = 0.8;
  std::uint64_t rng_seed = 0;
  double near_dup_threshold = 0.9;
  std::size_t shingle_size = 5;
  QualityRules quality_rules;
  PiiPatterns pii_patterns = default_pii_patterns();
  std::string tokenizer = std::string(kDefaultTokenizer);
  // Threads for the per-record stages. Output does not depend on it.
  std::size_t workers = 1;

  // Throws ConfigError.
  void validate() const;
};

inline constexpr std::string_view kShortAnswer = "short-answer";
inline constexpr std::string_view kExactDuplicate = "exact-duplicate";
inline constexpr std::string_view kNearDuplicate = "near-duplicate";
inline constexpr std::string_view kSpam = "spam";
inline constexpr std::string_view kEmptyAfterScrub = "empty-after-scrub";

struct CleaningReport {
  std::string split;
  std::uint64_t input_count = 0;
  std::uint64_t kept_count = 0;
  // Always holds all five reasons, zero or not.
  std::map<std::string, std::uint64_t> dropped_by_reason;
  std::map<std::string, std::uint64_t> spam_by_rule;
  std::uint64_t flagged_for_review = 0;
  std::uint64_t pii_hits = 0;
  double discard_rate = 0.0;
  std::string tokenizer_name;
  std::uint64_t seed = 0;
  double short_drop_probability = 0.0;
  std::int64_t min_answer_tokens = 0;
  std::string pii_patterns_sha256;
  std::string quality_rules_sha256;

  CleaningReport();
  std::uint64_t dropped_total() const;
  // kept + dropped == input.
  bool conserved() const;
  nlohmann::ordered_json to_json() const;
  std::string summary_table() const;
};

struct ScrubResult {
  std::string text;
  std::size_t hits = 0;
};

// Replaces every match with its category mask. Idempotent.
ScrubResult scrub_pii(std::string_view text, const PiiPatterns& patterns);

struct LengthFilterResult {
  std::vector<QAPair> kept;
  std::vector<QAPair> dropped;
  std::vector<QAPair> flagged;  // test split only; also present in kept
};

// Train/dev: answers shorter than min_answer_tokens are dropped with
// probability short_drop_probability. The draw is a keyed hash of the seed
// and the record, so a surviving record survives every rerun. Test: nothing
// is dropped and short answers are flagged for review.
LengthFilterResult length_filter(const std::vector<QAPair>& records,
                                 const CleaningConfig& config, SplitKind kind);

// The keyed uniform draw in [0, 1) used by length_filter.
double drop_draw(std::uint64_t seed, const QAPair& record);

struct DedupResult {
  std::vector<QAPair> kept;
  std::vector<QAPair> exact_duplicates;
  std::vector<QAPair> near_duplicates;
};

// Exact duplicates (same normalized question+answer hash) keep their first
// occurrence. Near duplicates (Jaccard similarity of token shingles at or
// above the threshold) keep the record with the longest answer. Surviving
// records keep their input order and no surviving pair is a near duplicate.
DedupResult dedup(const std::vector<QAPair>& records,
                  const CleaningConfig& config);

// Jaccard similarity of the shingle sets of two records.
double shingle_similarity(const QAPair& a, const QAPair& b,
                          const CleaningConfig& config);

struct CleanResult {
  std::vector<QAPair> records;
  std::vector<QAPair> review_queue;
  CleaningReport report;
};

// scrub_pii, quality rules, dedup, length_filter, in that order.
CleanResult clean_pipeline(const std::vector<QAPair>& records,
                           const CleaningConfig& config, SplitKind kind);

}  // namespace medcorpus::clean
