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

#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "fixtures.hpp"
#include "medcorpus/errors.hpp"
#include "medcorpus/forum_sim.hpp"

using namespace medcorpus;
using namespace medcorpus::sim;

namespace {

SimConfig cfg(std::uint64_t n, std::uint64_t k, std::uint64_t m, std::uint64_t seed) {
  SimConfig c;
  c.total_records = n;
  c.window_size = k;
  c.max_related = m;
  c.rng_seed = seed;
  return c;
}

void check_well_formed(const SyntheticForum& f) {
  const auto m = f.config().max_related;
  const auto k = f.config().communities;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto& r = f.records()[i];
    REQUIRE(r.id == i);
    CHECK(r.arrival == i);
    CHECK(r.related.size() <= m);
    std::set<RecordId> uniq(r.related.begin(), r.related.end());
    CHECK(uniq.size() == r.related.size());
    for (RecordId to : r.related) {
      CHECK(f.contains(to));
      CHECK(to != r.id);
      CHECK(to % k == r.id % k);
    }
  }
}

}  // namespace

TEST_CASE("degenerate forum") {
  const auto f = generate_forum(cfg(1, 1, 0, 0));
  CHECK(f.size() == 1);
  CHECK(related(f, 0).empty());
  CHECK(visible_roots(f) == std::vector<RecordId>{0});
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(generate_forum(cfg(10, 0, 1, 0)), ConfigError);
  CHECK_THROWS_AS(generate_forum(cfg(10, 5, 10, 0)), ConfigError);
  CHECK_THROWS_AS(generate_forum(cfg(0, 5, 0, 0)), ConfigError);
  auto c = cfg(10, 5, 3, 0);
  c.communities = 0;
  CHECK_THROWS_AS(generate_forum(c), ConfigError);
  CHECK_NOTHROW(generate_forum(cfg(10, 50, 9, 0)));
}

TEST_CASE("related lists bounded by max_related") {
  const auto f = generate_forum(cfg(200, 20, 10, 7));
  CHECK(f.size() == 200);
  check_well_formed(f);
  std::size_t forward = 0;
  for (const auto& r : f.records()) {
    for (RecordId to : r.related) forward += to > r.id;
  }
  CHECK(forward > 0);  // forward links exist
}

TEST_CASE("full-scale analog") {
  const auto f = generate_forum(cfg(200000, 2000, 100, 1));
  CHECK(f.size() == 200000);
  const auto w = visible_roots(f);
  CHECK(w.size() == 2000);
  CHECK(w.front() == 198000);
  CHECK(w.back() == 199999);
  std::size_t longest = 0;
  for (const auto& r : f.records()) longest = std::max(longest, r.related.size());
  CHECK(longest <= 100);
}

TEST_CASE("determinism") {
  fixtures::Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    auto c = cfg(1 + rng.below(300), 1 + rng.below(50), 0, rng.engine()());
    c.max_related = rng.below(std::min<std::uint64_t>(c.total_records, 12));
    c.communities = 1 + rng.below(3);
    c.link_model = rng.chance(0.5) ? LinkModel::kUniform : LinkModel::kPreferential;
    const auto a = generate_forum(c);
    const auto b = generate_forum(c);
    CHECK(a == b);
    check_well_formed(a);
  }
  auto c = cfg(100, 10, 5, 1);
  auto d = c;
  d.rng_seed = 2;
  CHECK_FALSE(generate_forum(c) == generate_forum(d));
}

TEST_CASE("preferential attachment concentrates links") {
  auto c = cfg(3000, 100, 5, 4);
  c.link_model = LinkModel::kPreferential;
  const auto pref = generate_forum(c);
  c.link_model = LinkModel::kUniform;
  const auto uni = generate_forum(c);
  auto max_in = [](const SyntheticForum& f) {
    std::vector<std::size_t> in(f.size(), 0);
    for (const auto& r : f.records()) {
      for (RecordId to : r.related) ++in[to];
    }
    return *std::max_element(in.begin(), in.end());
  };
  check_well_formed(pref);
  CHECK(max_in(pref) > max_in(uni));
}

TEST_CASE("visible_roots window") {
  const auto f = generate_forum(cfg(200, 20, 3, 9));
  std::vector<RecordId> expect;
  for (RecordId i = 180; i < 200; ++i) expect.push_back(i);
  CHECK(visible_roots(f) == expect);

  const auto g = advance(f, 5);
  std::vector<RecordId> shifted;
  for (RecordId i = 185; i < 205; ++i) shifted.push_back(i);
  CHECK(visible_roots(g) == shifted);

  const auto small = generate_forum(cfg(7, 50, 2, 9));
  CHECK(visible_roots(small) == std::vector<RecordId>{0, 1, 2, 3, 4, 5, 6});
}

TEST_CASE("related lookup") {
  const auto f = generate_forum(cfg(300, 10, 5, 11));
  CHECK(related(f, 42) == f.records()[42].related);
  CHECK(related(f, 42) == related(f, 42));
  CHECK_THROWS_AS(related(f, 300), LookupError);
  const auto none = generate_forum(cfg(30, 10, 0, 11));
  for (RecordId i = 0; i < 30; ++i) CHECK(related(none, i).empty());
}

TEST_CASE("advance") {
  const auto f = generate_forum(cfg(200, 20, 6, 3));
  CHECK(advance(f, 0) == f);
  const auto g = advance(f, 5);
  CHECK(g.size() == 205);
  CHECK(g.clock() == 205);
  for (RecordId i = 0; i < 200; ++i) CHECK(related(g, i) == related(f, i));
  check_well_formed(g);
  for (RecordId i = 200; i < 205; ++i) {
    for (RecordId to : related(g, i)) CHECK(to < i);  // links to existing records
  }
  const auto h = advance(advance(f, 3), 4);
  CHECK(h.size() == 207);
  CHECK(f.size() == 200);  // by-value advance leaves the input alone
}

TEST_CASE("reachable_set") {
  const auto none = generate_forum(cfg(10, 3, 0, 0));
  CHECK(reachable_set(none, {5}) == std::set<RecordId>{5});
  CHECK_THROWS_AS(reachable_set(none, {10}), LookupError);

  // Fully connected: every record links to every other.
  const auto full = generate_forum(cfg(8, 3, 7, 0));
  std::set<RecordId> all;
  for (RecordId i = 0; i < 8; ++i) all.insert(i);
  CHECK(reachable_set(full, {3}) == all);

  const auto f = generate_forum(cfg(300, 30, 5, 11));
  const auto w = visible_roots(f);
  const std::set<RecordId> roots(w.begin(), w.end());
  CHECK(reachable_set(f, roots) == fixtures::naive_closure(f, roots));
}

TEST_CASE("property: reachable_set matches the naive oracle and is monotone") {
  fixtures::Rng rng(2024);
  for (int i = 0; i < 200; ++i) {
    auto c = cfg(1 + rng.below(400), 1 + rng.below(40), 0, rng.engine()());
    c.max_related = rng.below(std::min<std::uint64_t>(c.total_records, 6));
    c.communities = 1 + rng.below(4);
    c.link_model = rng.chance(0.3) ? LinkModel::kPreferential : LinkModel::kUniform;
    const auto f = generate_forum(c);
    std::set<RecordId> a, b;
    for (std::uint64_t k = rng.below(4); k > 0; --k) a.insert(rng.below(f.size()));
    for (std::uint64_t k = rng.below(4); k > 0; --k) b.insert(rng.below(f.size()));
    std::set<RecordId> ab = a;
    ab.insert(b.begin(), b.end());
    const auto ra = reachable_set(f, a);
    const auto rab = reachable_set(f, ab);
    CHECK(ra == fixtures::naive_closure(f, a));
    CHECK(std::includes(rab.begin(), rab.end(), ra.begin(), ra.end()));
  }
}

TEST_CASE("communities give disconnected components") {
  auto c = cfg(400, 40, 6, 5);
  c.communities = 4;
  const auto f = generate_forum(c);
  check_well_formed(f);
  const auto r = reachable_set(f, {0});
  for (RecordId id : r) CHECK(id % 4 == 0);
  CHECK(r.size() < f.size());
}

TEST_CASE("jsonl export") {
  const auto f = generate_forum(cfg(5, 2, 2, 1));
  std::ostringstream os;
  write_jsonl(f, os);
  std::istringstream is(os.str());
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j["id"].get<RecordId>() == n);
    CHECK(j["arrival"].get<std::uint64_t>() == n);
    CHECK(j["related"].get<std::vector<RecordId>>() == f.records()[n].related);
    ++n;
  }
  CHECK(n == 5);
}
