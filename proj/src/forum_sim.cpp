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

#include "medcorpus/forum_sim.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "medcorpus/errors.hpp"

namespace medcorpus::sim {
namespace {

bool has(const std::vector<RecordId>& v, RecordId id) {
  return std::find(v.begin(), v.end(), id) != v.end();
}

// Members of community c are c, c + k, c + 2k, ... among the first
// `population` ids.
std::uint64_t community_size(std::uint64_t c, std::uint64_t k,
                             std::uint64_t population) {
  return population > c ? (population - c + k - 1) / k : 0;
}

// Uniform draw of up to `want` distinct members of the record's community
// among the first `population` records, excluding the record itself
// (Floyd's sampling over member indices).
std::vector<RecordId> sample_uniform(std::mt19937_64& rng, RecordId self,
                                     std::uint64_t want,
                                     std::uint64_t population,
                                     std::uint64_t k) {
  const std::uint64_t c = self % k;
  const std::uint64_t self_index = self / k;
  const std::uint64_t members = community_size(c, k, population);
  const bool self_in = self < population;
  const std::uint64_t candidates = members - (self_in ? 1 : 0);
  want = std::min(want, candidates);
  std::vector<std::uint64_t> picked;
  picked.reserve(want);
  for (std::uint64_t j = candidates - want; j < candidates; ++j) {
    const std::uint64_t t = uniform_below(rng, j + 1);
    if (std::find(picked.begin(), picked.end(), t) == picked.end()) {
      picked.push_back(t);
    } else {
      picked.push_back(j);
    }
  }
  std::vector<RecordId> out;
  out.reserve(picked.size());
  for (std::uint64_t idx : picked) {
    if (self_in && idx >= self_index) ++idx;
    out.push_back(c + idx * k);
  }
  return out;
}

std::vector<RecordId> sample_preferential(std::mt19937_64& rng, RecordId self,
                                          std::uint64_t want,
                                          std::uint64_t population,
                                          std::uint64_t k,
                                          const std::vector<RecordId>& pool) {
  const std::uint64_t c = self % k;
  const std::uint64_t members = community_size(c, k, population);
  const std::uint64_t candidates = members - (self < population ? 1 : 0);
  want = std::min(want, candidates);
  std::vector<RecordId> out;
  out.reserve(want);
  std::uint64_t attempts = 64 * want + 64;
  while (out.size() < want && attempts-- > 0 && !pool.empty()) {
    const RecordId id = pool[uniform_below(rng, pool.size())];
    if (id == self || id >= population || has(out, id)) continue;
    out.push_back(id);
  }
  // Pool too concentrated: fill the rest in id order.
  for (RecordId id = c; out.size() < want && id < population; id += k) {
    if (id != self && !has(out, id)) out.push_back(id);
  }
  return out;
}

}  // namespace

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - (max % bound);
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

void SimConfig::validate() const {
  if (total_records == 0) throw ConfigError("total_records must be >= 1");
  if (window_size == 0) throw ConfigError("window_size must be >= 1");
  if (max_related >= total_records) {
    throw ConfigError("max_related must be <= total_records - 1");
  }
  if (communities == 0) throw ConfigError("communities must be >= 1");
}

SyntheticForum generate_forum(const SimConfig& config) {
  config.validate();
  SyntheticForum forum;
  forum.config_ = config;
  forum.rng_.seed(config.rng_seed);
  const std::uint64_t n = config.total_records;
  const std::uint64_t k = config.communities;
  forum.records_.resize(n);
  forum.pools_.assign(k, {});
  for (RecordId id = 0; id < n; ++id) {
    forum.records_[id].id = id;
    forum.records_[id].arrival = id;
    forum.pools_[id % k].push_back(id);
  }
  for (RecordId id = 0; id < n; ++id) {
    auto& rel = forum.records_[id].related;
    if (config.link_model == LinkModel::kUniform) {
      rel = sample_uniform(forum.rng_, id, config.max_related, n, k);
    } else {
      rel = sample_preferential(forum.rng_, id, config.max_related, n, k,
                                forum.pools_[id % k]);
      for (RecordId t : rel) forum.pools_[t % k].push_back(t);
    }
  }
  return forum;
}

std::vector<RecordId> visible_roots(const SyntheticForum& forum) {
  const std::uint64_t n = forum.size();
  const std::uint64_t w = std::min<std::uint64_t>(forum.config().window_size, n);
  std::vector<RecordId> out;
  out.reserve(w);
  for (std::uint64_t id = n - w; id < n; ++id) out.push_back(id);
  return out;
}

const std::vector<RecordId>& related(const SyntheticForum& forum, RecordId id) {
  if (!forum.contains(id)) {
    throw LookupError("unknown record id " + std::to_string(id));
  }
  return forum.records()[id].related;
}

void advance_in_place(SyntheticForum& forum, std::uint64_t n_new) {
  const SimConfig& cfg = forum.config_;
  const std::uint64_t k = cfg.communities;
  for (std::uint64_t i = 0; i < n_new; ++i) {
    const RecordId id = forum.records_.size();
    ForumEntry entry;
    entry.id = id;
    entry.arrival = id;
    // Links go to records that already exist.
    if (cfg.link_model == LinkModel::kUniform) {
      entry.related = sample_uniform(forum.rng_, id, cfg.max_related, id, k);
    } else {
      entry.related = sample_preferential(forum.rng_, id, cfg.max_related, id,
                                          k, forum.pools_[id % k]);
      for (RecordId t : entry.related) forum.pools_[t % k].push_back(t);
    }
    forum.pools_[id % k].push_back(id);
    forum.records_.push_back(std::move(entry));
  }
}

SyntheticForum advance(SyntheticForum forum, std::uint64_t n_new) {
  advance_in_place(forum, n_new);
  return forum;
}

std::set<RecordId> reachable_set(const SyntheticForum& forum,
                                 const std::set<RecordId>& roots) {
  std::set<RecordId> seen;
  std::vector<RecordId> stack;
  for (RecordId r : roots) {
    if (!forum.contains(r)) {
      throw LookupError("unknown root id " + std::to_string(r));
    }
    if (seen.insert(r).second) stack.push_back(r);
  }
  while (!stack.empty()) {
    const RecordId cur = stack.back();
    stack.pop_back();
    for (RecordId next : forum.records()[cur].related) {
      if (seen.insert(next).second) stack.push_back(next);
    }
  }
  return seen;
}

namespace {

const std::vector<std::string_view>& page_vocab() {
  static const std::vector<std::string_view> v = {
      "سردرد", "تب", "سرفه", "درد", "معده", "قلب", "فشار", "خون", "قند",
      "دارو", "قرص", "آزمایش", "پزشک", "بیمار", "روز", "شب", "هفته", "ماه",
      "شدید", "خفیف", "مزمن", "حاد", "کودک", "بارداری", "حساسیت", "پوست",
      "کمر", "زانو", "چشم", "گوش", "تنفس", "خواب", "استراحت", "رژیم", "ورزش",
      "آنتی‌بیوتیک", "مسکن", "عفونت", "ویروس", "سونوگرافی", "نوار", "مصرف",
      "دوز", "کاهش", "افزایش", "علائم", "درمان", "تشخیص", "مراجعه", "لطفا"};
  return v;
}

std::string sentence(std::mt19937_64& rng, std::uint64_t n) {
  const auto& v = page_vocab();
  std::string s;
  for (std::uint64_t i = 0; i < n; ++i) {
    if (i) s += ' ';
    s += v[uniform_below(rng, v.size())];
  }
  return s;
}

}  // namespace

std::string render_page(const SyntheticForum& forum, RecordId id) {
  if (!forum.contains(id)) {
    throw LookupError("no record " + std::to_string(id));
  }
  // One in twelve pages copies an older page's text.
  RecordId content_id = id;
  std::mt19937_64 pick(forum.config().rng_seed ^ (0x9e3779b97f4a7c15ULL * (id + 1)));
  if (id > 0 && uniform_below(pick, 12) == 0) content_id = uniform_below(pick, id);
  std::mt19937_64 rng(forum.config().rng_seed ^
                      (0xc2b2ae3d27d4eb4fULL * (content_id + 1)));
  const std::string question = sentence(rng, 4 + uniform_below(rng, 12)) + "؟";
  // Roughly a third of the answers fall under 50 tokens.
  std::string answer = sentence(rng, uniform_below(rng, 3) == 0
                                         ? 5 + uniform_below(rng, 40)
                                         : 50 + uniform_below(rng, 200));
  if (uniform_below(rng, 20) == 0) answer += " تماس: 09" + std::to_string(100000000 + content_id);
  std::string out = "<html><body><nav>خانه | پرسش‌ها</nav><div class=\"qa-thread\" data-id=\"";
  out += std::to_string(id);
  out += "\"><div class=\"question\">" + question + "</div>";
  out += "<div class=\"answer\">" + answer + "</div></div>";
  out += "<footer>کلیه حقوق محفوظ است</footer></body></html>";
  return out;
}

void write_jsonl(const SyntheticForum& forum, std::ostream& out) {
  for (const auto& e : forum.records()) {
    nlohmann::ordered_json j;
    j["id"] = e.id;
    j["related"] = e.related;
    j["arrival"] = e.arrival;
    out << j.dump() << '\n';
  }
}

}  // namespace medcorpus::sim
