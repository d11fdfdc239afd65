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

#include <chrono>
#include <cstdio>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "medcorpus/errors.hpp"
#include "medcorpus/forum_sim.hpp"

namespace medcorpus::crawl {

struct FetchedRecord {
  RecordId id = 0;
  std::string url;
  std::string payload;
  std::vector<RecordId> related;

  bool operator==(const FetchedRecord&) const = default;
};

// Thrown by RecordSource::fetch. Transient failures are retried with
// exponential backoff; all failures end up as skipped ids once retries run
// out.
class FetchError : public Error {
 public:
  FetchError(const std::string& what, bool transient)
      : Error(what), transient_(transient) {}
  bool transient() const { return transient_; }

 private:
  bool transient_;
};

class RecordNotFound : public FetchError {
 public:
  explicit RecordNotFound(const std::string& what) : FetchError(what, false) {}
};

// The source as a whole is unreachable. Aborts the crawl with a resumable
// state.
class SourceUnavailable : public Error {
 public:
  using Error::Error;
};

class RecordSource {
 public:
  virtual ~RecordSource() = default;
  // Currently listable ids; may change between calls.
  virtual std::vector<RecordId> list_window() = 0;
  // Idempotent for a fixed id. Called concurrently when the policy allows
  // more than one fetch in flight.
  virtual FetchedRecord fetch(RecordId id) = 0;
  // Politeness key. Sources with an empty host are not rate limited.
  virtual std::string host() const { return {}; }
};

class RecordSink {
 public:
  virtual ~RecordSink() = default;
  virtual void store(const FetchedRecord& record) = 0;
};

struct CrawlPolicy {
  std::uint64_t max_iterations = 10;
  std::chrono::milliseconds per_host_delay{1000};
  std::size_t max_concurrent_fetches = 1;
  // Upper bound on pending ids. Links found while the queue is full are
  // counted as deferred and can be rediscovered by later rounds.
  std::optional<std::size_t> frontier_limit;
  int fetch_attempts = 3;
  std::chrono::milliseconds backoff_base{200};

  // Throws ConfigError.
  void validate() const;
};

struct IterationStats {
  std::vector<RecordId> roots;
  std::uint64_t window_size = 0;
  std::uint64_t new_records = 0;
  std::uint64_t duplicates_skipped = 0;
  std::uint64_t deferred = 0;
  std::vector<RecordId> failed;
  bool complete = false;

  bool operator==(const IterationStats&) const = default;
};

// Resumable crawl progress. `visited` holds fetched and stored ids;
// `frontier` holds discovered ids still to fetch, in BFS order.
struct CrawlState {
  std::set<RecordId> visited;
  std::uint64_t stored = 0;
  std::vector<IterationStats> iterations;
  std::uint64_t rng_seed = 0;
  std::deque<RecordId> frontier;
  std::set<RecordId> failed;
  std::vector<RecordId> last_window;

  bool operator==(const CrawlState&) const = default;
};

// Carries the state reached before the source went away. Persist it and call
// iterate_crawl again to resume.
class CrawlInterrupted : public Error {
 public:
  CrawlInterrupted(const std::string& what, CrawlState state)
      : Error(what), state_(std::move(state)) {}
  const CrawlState& state() const { return state_; }

 private:
  CrawlState state_;
};

struct CrawlHooks {
  RecordSink* sink = nullptr;
  // Called after every BFS level and before CrawlInterrupted is thrown.
  std::function<void(const CrawlState&)> checkpoint;
};

// One BFS pass from `roots`, recorded as one iteration. Ids already visited,
// queued or failed are never fetched again.
CrawlState bfs_crawl(RecordSource& source, const std::set<RecordId>& roots,
                     CrawlState state, const CrawlPolicy& policy = {},
                     const CrawlHooks& hooks = {});

// Repeated BFS rounds seeded from the current window's unvisited ids. Stops
// after max_iterations rounds, or earlier once a round finds nothing new and
// the window did not change. An unfinished round left in `state` is resumed
// first and counts as a round.
CrawlState iterate_crawl(RecordSource& source, const CrawlPolicy& policy,
                         CrawlState state, const CrawlHooks& hooks = {});

// Fraction of `total` records visited. Throws ConsistencyError when
// total < |visited|.
double coverage(const CrawlState& state, std::uint64_t total);

// Records found in the sink but missing from `state` (a crash between store
// and checkpoint) are adopted as visited and their links queued.
void reconcile(CrawlState& state, const std::vector<FetchedRecord>& stored);

// Versioned JSON document. load_state throws ParseError carrying the byte
// offset of malformed input and never returns a partial state.
std::string save_state(const CrawlState& state);
CrawlState load_state(std::string_view bytes);

void write_state_file(const std::string& path, const CrawlState& state);
CrawlState read_state_file(const std::string& path);

// Serves a SyntheticForum. When the forum's arrival_batch is non-zero, every
// list_window call after the first appends that many records first.
class SimSource : public RecordSource {
 public:
  explicit SimSource(sim::SyntheticForum forum) : forum_(std::move(forum)) {}

  std::vector<RecordId> list_window() override;
  FetchedRecord fetch(RecordId id) override;

  const sim::SyntheticForum& forum() const { return forum_; }
  // Union of every window handed out so far.
  const std::set<RecordId>& windows_seen() const { return windows_seen_; }

 private:
  mutable std::mutex mu_;
  sim::SyntheticForum forum_;
  bool listed_once_ = false;
  std::set<RecordId> windows_seen_;
};

// Appends one JSON line per record ({"id", "url", "related", "payload"}).
// Opening an existing file recovers complete lines and drops a torn tail.
class JsonlRecordSink : public RecordSink {
 public:
  explicit JsonlRecordSink(std::string path);
  ~JsonlRecordSink() override;
  JsonlRecordSink(const JsonlRecordSink&) = delete;
  JsonlRecordSink& operator=(const JsonlRecordSink&) = delete;

  void store(const FetchedRecord& record) override;
  const std::vector<FetchedRecord>& recovered() const { return recovered_; }

 private:
  std::string path_;
  std::FILE* file_ = nullptr;
  std::set<RecordId> ids_;
  std::vector<FetchedRecord> recovered_;
};

std::vector<FetchedRecord> read_records_jsonl(const std::string& path);

// Per-host minimum spacing between request starts.
class PolitenessLimiter {
 public:
  explicit PolitenessLimiter(std::chrono::milliseconds delay) : delay_(delay) {}
  void wait(const std::string& host);

 private:
  std::chrono::milliseconds delay_;
  std::mutex mu_;
  std::map<std::string, std::chrono::steady_clock::time_point> next_;
};

}  // namespace medcorpus::crawl
