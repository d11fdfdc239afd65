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
#include <iosfwd>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace medcorpus {

using RecordId = std::uint64_t;

namespace sim {

enum class LinkModel { kUniform, kPreferential };

struct SimConfig {
  std::uint64_t total_records = 1;
  std::uint64_t window_size = 1;
  std::uint64_t max_related = 0;
  // Records appended per crawl round by SimSource; 0 keeps the forum static.
  std::uint64_t arrival_batch = 0;
  std::uint64_t rng_seed = 0;
  LinkModel link_model = LinkModel::kUniform;
  // Records only link inside their community (id mod communities), which
  // yields that many disconnected components.
  std::uint64_t communities = 1;

  // Throws ConfigError.
  void validate() const;
};

struct ForumEntry {
  RecordId id = 0;
  std::uint64_t arrival = 0;
  std::vector<RecordId> related;

  bool operator==(const ForumEntry&) const = default;
};

// Records are stored by arrival; the id of a record equals its arrival
// index. Related links are directed and may point to newer records.
class SyntheticForum {
 public:
  const SimConfig& config() const { return config_; }
  std::size_t size() const { return records_.size(); }
  // Logical time: number of arrivals so far.
  std::uint64_t clock() const { return records_.size(); }
  const std::vector<ForumEntry>& records() const { return records_; }
  bool contains(RecordId id) const { return id < records_.size(); }

  // Same records and links. The generator state is not compared.
  bool operator==(const SyntheticForum& other) const {
    return records_ == other.records_;
  }

 private:
  friend SyntheticForum generate_forum(const SimConfig& config);
  friend void advance_in_place(SyntheticForum& forum, std::uint64_t n_new);

  SimConfig config_;
  std::vector<ForumEntry> records_;
  // Per-community sampling pool for preferential attachment: each member
  // once plus once per received link.
  std::vector<std::vector<RecordId>> pools_;
  std::mt19937_64 rng_;
};

SyntheticForum generate_forum(const SimConfig& config);

// The min(window_size, size) newest ids, newest last.
std::vector<RecordId> visible_roots(const SyntheticForum& forum);

// Throws LookupError for unknown ids.
const std::vector<RecordId>& related(const SyntheticForum& forum, RecordId id);

// Appends n_new records. Existing adjacency is never touched.
SyntheticForum advance(SyntheticForum forum, std::uint64_t n_new);
void advance_in_place(SyntheticForum& forum, std::uint64_t n_new);

// Transitive closure over related links by exhaustive depth-first search.
// Throws LookupError for unknown roots.
std::set<RecordId> reachable_set(const SyntheticForum& forum,
                                 const std::set<RecordId>& roots);

// One JSON object per line: {"id", "related", "arrival"}.
void write_jsonl(const SyntheticForum& forum, std::ostream& out);

// Synthetic QA page for a record: one ".qa-thread" with a ".question" and
// an ".answer", plus the usual boilerplate. Content is a pure function of
// the forum seed and the id. Answer lengths straddle the 50-token mark,
// some pages repeat another page's text and some carry a phone number.
std::string render_page(const SyntheticForum& forum, RecordId id);

// Uniform integer in [0, bound) without modulo bias. bound must be > 0.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

}  // namespace sim
}  // namespace medcorpus
