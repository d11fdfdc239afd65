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

#include "medcorpus/crawler.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <filesystem>
#include <thread>

#include <json.hpp>

#include "medcorpus/fileio.hpp"

namespace medcorpus::crawl {
namespace {

constexpr std::string_view kStateFormat = "medcorpus-crawl-state";
constexpr int kStateVersion = 1;

enum class FetchStatus { kNotAttempted, kOk, kFailed, kUnavailable };

struct FetchSlot {
  FetchStatus status = FetchStatus::kNotAttempted;
  FetchedRecord record;
  std::string error;
};

// Owns the bookkeeping for one crawl call: which ids are already queued and
// how one level of the frontier is fetched and merged.
class CrawlRun {
 public:
  CrawlRun(RecordSource& source, const CrawlPolicy& policy,
           const CrawlHooks& hooks, CrawlState& state)
      : source_(source),
        policy_(policy),
        hooks_(hooks),
        state_(state),
        limiter_(policy.per_host_delay),
        queued_(state.frontier.begin(), state.frontier.end()) {}

  bool known(RecordId id) const {
    return state_.visited.count(id) || queued_.count(id) ||
           state_.failed.count(id);
  }

  void offer(RecordId id, IterationStats& stats) {
    if (known(id)) {
      ++stats.duplicates_skipped;
      return;
    }
    if (policy_.frontier_limit && queued_.size() >= *policy_.frontier_limit) {
      ++stats.deferred;
      return;
    }
    queued_.insert(id);
    state_.frontier.push_back(id);
  }

  // Drains the frontier level by level into `stats`.
  void drain(IterationStats& stats) {
    while (!state_.frontier.empty()) {
      const std::vector<RecordId> level(state_.frontier.begin(),
                                        state_.frontier.end());
      state_.frontier.clear();
      std::vector<FetchSlot> slots = fetch_level(level);

      std::deque<RecordId> pending;
      bool unavailable = false;
      std::string reason;
      for (std::size_t i = 0; i < level.size(); ++i) {
        FetchSlot& slot = slots[i];
        const RecordId id = level[i];
        switch (slot.status) {
          case FetchStatus::kOk: {
            slot.record.id = id;
            if (hooks_.sink) hooks_.sink->store(slot.record);
            queued_.erase(id);
            state_.visited.insert(id);
            ++state_.stored;
            ++stats.new_records;
            break;
          }
          case FetchStatus::kFailed:
            queued_.erase(id);
            state_.failed.insert(id);
            stats.failed.push_back(id);
            break;
          case FetchStatus::kUnavailable:
            unavailable = true;
            if (reason.empty()) reason = slot.error;
            pending.push_back(id);
            break;
          case FetchStatus::kNotAttempted:
            pending.push_back(id);
            break;
        }
      }
      // Links are offered after the whole level is merged so the next level
      // does not depend on completion order.
      for (std::size_t i = 0; i < level.size(); ++i) {
        if (slots[i].status != FetchStatus::kOk) continue;
        for (RecordId next : slots[i].record.related) offer(next, stats);
      }
      state_.frontier.insert(state_.frontier.begin(), pending.begin(),
                             pending.end());
      if (unavailable) interrupt("source unavailable: " + reason);
      if (hooks_.checkpoint) hooks_.checkpoint(state_);
    }
  }

  [[noreturn]] void interrupt(const std::string& why) {
    if (hooks_.checkpoint) hooks_.checkpoint(state_);
    throw CrawlInterrupted(why, state_);
  }

 private:
  FetchSlot fetch_one(RecordId id) {
    FetchSlot slot;
    const std::string host = source_.host();
    for (int attempt = 0; attempt < policy_.fetch_attempts; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(policy_.backoff_base * (1 << (attempt - 1)));
      }
      if (!host.empty()) limiter_.wait(host);
      try {
        slot.record = source_.fetch(id);
        slot.status = FetchStatus::kOk;
        return slot;
      } catch (const SourceUnavailable& e) {
        slot.status = FetchStatus::kUnavailable;
        slot.error = e.what();
        return slot;
      } catch (const FetchError& e) {
        slot.status = FetchStatus::kFailed;
        slot.error = e.what();
        if (!e.transient()) return slot;
      } catch (const std::exception& e) {
        slot.status = FetchStatus::kFailed;
        slot.error = e.what();
        return slot;
      }
    }
    return slot;
  }

  std::vector<FetchSlot> fetch_level(const std::vector<RecordId>& level) {
    std::vector<FetchSlot> slots(level.size());
    const std::size_t workers =
        std::min(policy_.max_concurrent_fetches, level.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    auto work = [&] {
      while (!stop.load()) {
        const std::size_t i = next.fetch_add(1);
        if (i >= level.size()) return;
        slots[i] = fetch_one(level[i]);
        if (slots[i].status == FetchStatus::kUnavailable) stop.store(true);
      }
    };
    if (workers <= 1) {
      work();
    } else {
      std::vector<std::thread> pool;
      pool.reserve(workers);
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
      for (auto& t : pool) t.join();
    }
    return slots;
  }

  RecordSource& source_;
  const CrawlPolicy& policy_;
  const CrawlHooks& hooks_;
  CrawlState& state_;
  PolitenessLimiter limiter_;
  std::set<RecordId> queued_;
};

std::vector<RecordId> sorted(const std::set<RecordId>& ids) {
  return {ids.begin(), ids.end()};
}

}  // namespace

void CrawlPolicy::validate() const {
  if (per_host_delay.count() < 0) {
    throw ConfigError("per_host_delay must be >= 0");
  }
  if (max_concurrent_fetches < 1) {
    throw ConfigError("max_concurrent_fetches must be >= 1");
  }
  if (fetch_attempts < 1) throw ConfigError("fetch_attempts must be >= 1");
  if (backoff_base.count() < 0) throw ConfigError("backoff_base must be >= 0");
}

CrawlState bfs_crawl(RecordSource& source, const std::set<RecordId>& roots,
                     CrawlState state, const CrawlPolicy& policy,
                     const CrawlHooks& hooks) {
  policy.validate();
  CrawlRun run(source, policy, hooks, state);
  state.iterations.emplace_back();
  const std::size_t slot = state.iterations.size() - 1;
  state.iterations[slot].roots = sorted(roots);
  {
    IterationStats& stats = state.iterations[slot];
    for (RecordId r : roots) run.offer(r, stats);
  }
  run.drain(state.iterations[slot]);
  state.iterations[slot].complete = true;
  if (hooks.checkpoint) hooks.checkpoint(state);
  return state;
}

CrawlState iterate_crawl(RecordSource& source, const CrawlPolicy& policy,
                         CrawlState state, const CrawlHooks& hooks) {
  policy.validate();
  CrawlRun run(source, policy, hooks, state);
  std::uint64_t rounds = 0;
  if (!state.iterations.empty() && !state.iterations.back().complete) {
    run.drain(state.iterations.back());
    state.iterations.back().complete = true;
    if (hooks.checkpoint) hooks.checkpoint(state);
    ++rounds;
  }
  while (rounds < policy.max_iterations) {
    std::vector<RecordId> window;
    try {
      window = source.list_window();
    } catch (const SourceUnavailable& e) {
      run.interrupt(std::string("source unavailable: ") + e.what());
    } catch (const FetchError& e) {
      run.interrupt(std::string("window listing failed: ") + e.what());
    }
    const bool window_changed = window != state.last_window;
    state.iterations.emplace_back();
    IterationStats& stats = state.iterations.back();
    stats.window_size = window.size();
    for (RecordId id : window) {
      if (!run.known(id)) stats.roots.push_back(id);
    }
    for (RecordId id : window) run.offer(id, stats);
    state.last_window = window;
    run.drain(state.iterations.back());
    state.iterations.back().complete = true;
    if (hooks.checkpoint) hooks.checkpoint(state);
    ++rounds;
    if (state.iterations.back().new_records == 0 && !window_changed) break;
  }
  return state;
}

double coverage(const CrawlState& state, std::uint64_t total) {
  const std::uint64_t visited = state.visited.size();
  if (total < visited) {
    throw ConsistencyError("coverage: total " + std::to_string(total) +
                           " is smaller than visited " +
                           std::to_string(visited));
  }
  if (total == 0) return 0.0;
  return static_cast<double>(visited) / static_cast<double>(total);
}

void reconcile(CrawlState& state, const std::vector<FetchedRecord>& stored) {
  std::set<RecordId> queued(state.frontier.begin(), state.frontier.end());
  std::vector<const FetchedRecord*> adopted;
  for (const auto& rec : stored) {
    if (state.visited.count(rec.id)) continue;
    state.visited.insert(rec.id);
    ++state.stored;
    state.failed.erase(rec.id);
    if (queued.erase(rec.id)) {
      state.frontier.erase(
          std::find(state.frontier.begin(), state.frontier.end(), rec.id));
    }
    adopted.push_back(&rec);
  }
  if (adopted.empty()) return;
  if (state.iterations.empty()) state.iterations.emplace_back();
  IterationStats& stats = state.iterations.back();
  stats.new_records += adopted.size();
  for (const FetchedRecord* rec : adopted) {
    for (RecordId next : rec->related) {
      if (state.visited.count(next) || queued.count(next) ||
          state.failed.count(next)) {
        continue;
      }
      queued.insert(next);
      state.frontier.push_back(next);
    }
  }
  if (!state.frontier.empty()) stats.complete = false;
}

// ---- persistence -----------------------------------------------------------

std::string save_state(const CrawlState& state) {
  nlohmann::ordered_json j;
  j["format"] = kStateFormat;
  j["version"] = kStateVersion;
  j["rng_seed"] = state.rng_seed;
  j["stored"] = state.stored;
  j["visited"] = sorted(state.visited);
  j["frontier"] = std::vector<RecordId>(state.frontier.begin(),
                                        state.frontier.end());
  j["failed"] = sorted(state.failed);
  j["last_window"] = state.last_window;
  auto& iters = j["iterations"] = nlohmann::ordered_json::array();
  for (const auto& it : state.iterations) {
    nlohmann::ordered_json e;
    e["roots"] = it.roots;
    e["window_size"] = it.window_size;
    e["new_records"] = it.new_records;
    e["duplicates_skipped"] = it.duplicates_skipped;
    e["deferred"] = it.deferred;
    e["failed"] = it.failed;
    e["complete"] = it.complete;
    iters.push_back(std::move(e));
  }
  return j.dump() + "\n";
}

CrawlState load_state(std::string_view bytes) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    throw ParseError("crawl state: malformed at byte offset " +
                         std::to_string(offset) + ": " + e.what(),
                     offset);
  }
  const std::size_t end = bytes.size();
  CrawlState s;
  try {
    if (j.at("format").get<std::string>() != kStateFormat) {
      throw ParseError("crawl state: wrong format tag", 0);
    }
    const int version = j.at("version").get<int>();
    if (version != kStateVersion) {
      throw ParseError("crawl state: unsupported version " +
                           std::to_string(version),
                       0);
    }
    s.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    s.stored = j.at("stored").get<std::uint64_t>();
    for (RecordId id : j.at("visited").get<std::vector<RecordId>>()) {
      s.visited.insert(id);
    }
    for (RecordId id : j.at("frontier").get<std::vector<RecordId>>()) {
      s.frontier.push_back(id);
    }
    for (RecordId id : j.at("failed").get<std::vector<RecordId>>()) {
      s.failed.insert(id);
    }
    s.last_window = j.at("last_window").get<std::vector<RecordId>>();
    for (const auto& e : j.at("iterations")) {
      IterationStats it;
      it.roots = e.at("roots").get<std::vector<RecordId>>();
      it.window_size = e.at("window_size").get<std::uint64_t>();
      it.new_records = e.at("new_records").get<std::uint64_t>();
      it.duplicates_skipped = e.at("duplicates_skipped").get<std::uint64_t>();
      it.deferred = e.at("deferred").get<std::uint64_t>();
      it.failed = e.at("failed").get<std::vector<RecordId>>();
      it.complete = e.at("complete").get<bool>();
      s.iterations.push_back(std::move(it));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("crawl state: ") + e.what(), end);
  }
  std::uint64_t total_new = 0;
  for (const auto& it : s.iterations) total_new += it.new_records;
  if (s.stored != s.visited.size() || total_new != s.visited.size()) {
    throw ParseError("crawl state: counts do not match the visited set", end);
  }
  return s;
}

void write_state_file(const std::string& path, const CrawlState& state) {
  write_file_atomic(path, save_state(state));
}

CrawlState read_state_file(const std::string& path) {
  return load_state(read_file(path));
}

// ---- sim source ------------------------------------------------------------

std::vector<RecordId> SimSource::list_window() {
  std::lock_guard lock(mu_);
  if (listed_once_ && forum_.config().arrival_batch > 0) {
    sim::advance_in_place(forum_, forum_.config().arrival_batch);
  }
  listed_once_ = true;
  auto window = sim::visible_roots(forum_);
  windows_seen_.insert(window.begin(), window.end());
  return window;
}

FetchedRecord SimSource::fetch(RecordId id) {
  std::lock_guard lock(mu_);
  if (!forum_.contains(id)) {
    throw RecordNotFound("no record " + std::to_string(id));
  }
  FetchedRecord rec;
  rec.id = id;
  rec.url = "sim://record/" + std::to_string(id);
  rec.related = forum_.records()[id].related;
  rec.payload = sim::render_page(forum_, id);
  return rec;
}

// ---- record sink -----------------------------------------------------------

namespace {

nlohmann::ordered_json record_json(const FetchedRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["url"] = r.url;
  j["related"] = r.related;
  j["payload"] = r.payload;
  return j;
}

FetchedRecord record_from_json(const nlohmann::json& j) {
  FetchedRecord r;
  r.id = j.at("id").get<RecordId>();
  r.url = j.value("url", std::string());
  r.related = j.value("related", std::vector<RecordId>{});
  r.payload = j.value("payload", std::string());
  return r;
}

}  // namespace

std::vector<FetchedRecord> read_records_jsonl(const std::string& path) {
  const std::string text = read_file(path);
  std::vector<FetchedRecord> out;
  std::size_t pos = 0;
  std::size_t line = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::size_t stop = nl == std::string::npos ? text.size() : nl;
    ++line;
    const std::string_view row(text.data() + pos, stop - pos);
    if (!row.empty()) {
      try {
        out.push_back(record_from_json(nlohmann::json::parse(row)));
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ":" + std::to_string(line) + ": " + e.what(),
                         pos, line);
      }
    }
    pos = stop + 1;
  }
  return out;
}

JsonlRecordSink::JsonlRecordSink(std::string path) : path_(std::move(path)) {
  std::size_t keep = 0;
  if (std::filesystem::exists(path_)) {
    const std::string text = read_file(path_);
    std::size_t pos = 0;
    while (pos < text.size()) {
      const std::size_t nl = text.find('\n', pos);
      if (nl == std::string::npos) break;  // torn tail
      const std::string_view row(text.data() + pos, nl - pos);
      if (!row.empty()) {
        try {
          FetchedRecord r = record_from_json(nlohmann::json::parse(row));
          if (ids_.insert(r.id).second) recovered_.push_back(std::move(r));
        } catch (const nlohmann::json::exception&) {
          break;
        }
      }
      pos = nl + 1;
      keep = pos;
    }
    if (keep < text.size()) std::filesystem::resize_file(path_, keep);
  }
  file_ = std::fopen(path_.c_str(), "ab");
  if (!file_) {
    throw IoError("cannot open '" + path_ + "': " + std::strerror(errno));
  }
}

JsonlRecordSink::~JsonlRecordSink() {
  if (file_) std::fclose(file_);
}

void JsonlRecordSink::store(const FetchedRecord& record) {
  if (!ids_.insert(record.id).second) return;
  const std::string line = record_json(record).dump() + "\n";
  if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() ||
      std::fflush(file_) != 0) {
    throw IoError("write to '" + path_ + "' failed");
  }
}

// ---- politeness ------------------------------------------------------------

void PolitenessLimiter::wait(const std::string& host) {
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mu_);
    const auto now = std::chrono::steady_clock::now();
    auto& next = next_[host];
    slot = std::max(now, next);
    next = slot + delay_;
  }
  std::this_thread::sleep_until(slot);
}

}  // namespace medcorpus::crawl
