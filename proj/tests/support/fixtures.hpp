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

// Generators, oracles and fakes shared by the unit and acceptance tests.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "medcorpus/crawler.hpp"
#include "medcorpus/forum_sim.hpp"
#include "medcorpus/textproc.hpp"

namespace fixtures {

using medcorpus::QAPair;
using medcorpus::RecordId;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  std::uint64_t below(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(gen_);
  }
  std::uint64_t between(std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(gen_);
  }
  bool chance(double p) { return std::uniform_real_distribution<double>()(gen_) < p; }
  template <class T>
  const T& pick(const std::vector<T>& v) { return v[below(v.size())]; }
  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

// Valid UTF-8 mixing Persian and Arabic letters, both digit families, ZWNJ,
// assorted whitespace and controls, combining marks, Latin and emoji.
std::string random_unicode(Rng& rng, std::size_t codepoints);

// Arbitrary bytes, mostly invalid UTF-8.
std::string random_bytes(Rng& rng, std::size_t n);

// Space separated words from a fixed Persian vocabulary.
std::string persian_words(Rng& rng, std::size_t n);

// Word `i` of an injective numbering scheme: distinct i give distinct words.
std::string unique_word(std::uint64_t i);

// normalized record with answer_tokens set by the default tokenizer.
QAPair make_pair(const std::string& id, const std::string& source,
                 const std::string& question, const std::string& answer);

// Record for persistence round trips: ZWNJ, newlines, masks and extras.
QAPair random_record(Rng& rng, std::uint64_t n);

// Reachability by repeated sweeps over every record until nothing changes.
// Deliberately unlike the library's traversal.
std::set<RecordId> naive_closure(const medcorpus::sim::SyntheticForum& forum,
                                 const std::set<RecordId>& roots);

// Wraps a source and counts fetches per id. Can fail ids permanently, fail
// ids transiently a number of times, or go unavailable after a fetch budget.
class CountingSource : public medcorpus::crawl::RecordSource {
 public:
  explicit CountingSource(medcorpus::crawl::RecordSource& inner) : inner_(inner) {}

  std::vector<RecordId> list_window() override;
  medcorpus::crawl::FetchedRecord fetch(RecordId id) override;

  std::map<RecordId, int> counts() const;
  int max_count() const;
  std::size_t total_fetches() const;

  std::set<RecordId> permanent_failures;
  std::map<RecordId, int> transient_failures;
  std::optional<std::size_t> unavailable_after;
  bool window_unavailable = false;

 private:
  medcorpus::crawl::RecordSource& inner_;
  mutable std::mutex mu_;
  std::map<RecordId, int> counts_;  // successful + failed attempts
  std::map<RecordId, int> attempts_;
  std::size_t fetched_ = 0;
};

class MemorySink : public medcorpus::crawl::RecordSink {
 public:
  void store(const medcorpus::crawl::FetchedRecord& r) override;
  std::vector<medcorpus::crawl::FetchedRecord> records;
  // Throws after this many stores, as a crash would.
  std::optional<std::size_t> crash_after;
};

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

}  // namespace fixtures
