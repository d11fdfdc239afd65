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

#include <atomic>
#include <thread>

#include <httplib.h>

#include "fixtures.hpp"
#include "medcorpus/crawler.hpp"
#include "medcorpus/errors.hpp"
#include "medcorpus/http_source.hpp"

using namespace medcorpus;
using namespace medcorpus::crawl;

namespace {

// Serves a small forum: "/" lists the newest records, "/q/<id>" links to
// related records.
class ForumServer {
 public:
  explicit ForumServer(std::string robots = "") : robots_(std::move(robots)) {
    sim::SimConfig c;
    c.total_records = 60;
    c.window_size = 5;
    c.max_related = 3;
    c.rng_seed = 12;
    forum_ = sim::generate_forum(c);
    server_.Get("/robots.txt", [this](const httplib::Request&, httplib::Response& res) {
      if (robots_.empty()) {
        res.status = 404;
        return;
      }
      res.set_content(robots_, "text/plain");
    });
    server_.Get("/", [this](const httplib::Request& req, httplib::Response& res) {
      agent_ = req.get_header_value("User-Agent");
      std::string body = "<html><body><ul>";
      for (RecordId id : sim::visible_roots(forum_)) {
        body += "<li><a href=\"/q/" + std::to_string(id) + "\">q</a></li>";
      }
      body += "<a href='/about'>about</a></ul></body></html>";
      res.set_content(body, "text/html");
    });
    server_.Get(R"(/q/(\d+))", [this](const httplib::Request& req, httplib::Response& res) {
      const RecordId id = std::stoull(req.matches[1]);
      ++hits_;
      if (!forum_.contains(id)) {
        res.status = 404;
        return;
      }
      if (id == 7 && flaky_7_ > 0) {
        --flaky_7_;
        res.status = 503;
        return;
      }
      std::string body = "<div class='question'>q" + std::to_string(id) + "</div>";
      body += "<a href='/q/" + std::to_string(id) + "'>self</a>";
      for (RecordId to : forum_.records()[id].related) {
        body += "<a href=\"/q/" + std::to_string(to) + "\">r</a>";
      }
      res.set_content(body, "text/html");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~ForumServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  const sim::SyntheticForum& forum() const { return forum_; }
  int hits() const { return hits_; }
  std::string agent() const { return agent_; }
  std::atomic<int> flaky_7_{0};

 private:
  std::string robots_;
  sim::SyntheticForum forum_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<int> hits_{0};
  std::string agent_;
};

CrawlPolicy quick() {
  CrawlPolicy p;
  p.per_host_delay = std::chrono::milliseconds(1);
  p.backoff_base = std::chrono::milliseconds(1);
  return p;
}

}  // namespace

TEST_CASE("robots rules") {
  const auto r = RobotsRules::parse(
      "User-agent: *\nDisallow: /private\nAllow: /private/ok\n\n"
      "User-agent: medcorpus-crawler\nDisallow: /q/9\n", "medcorpus-crawler/0.1");
  CHECK_FALSE(r.allowed("/q/9"));
  CHECK_FALSE(r.allowed("/q/99"));
  CHECK(r.allowed("/private"));  // own group replaces the * group
  const auto star = RobotsRules::parse(
      "User-agent: *\nDisallow: /private\nAllow: /private/ok\n", "other/1.0");
  CHECK_FALSE(star.allowed("/private/x"));
  CHECK(star.allowed("/private/ok/1"));
  CHECK(star.allowed("/"));
  CHECK(RobotsRules::parse("User-agent: *\nDisallow:\n", "x").allowed("/anything"));
  CHECK(RobotsRules::parse("", "x").allowed("/"));
}

TEST_CASE("http source crawl matches the oracle") {
  ForumServer server;
  HttpSourceConfig cfg;
  cfg.base_url = server.url();
  cfg.user_agent = "medcorpus-test/1.0";
  HttpSource src(cfg);
  fixtures::CountingSource counting(src);
  const auto state = iterate_crawl(counting, quick(), {});
  const auto w = sim::visible_roots(server.forum());
  const std::set<RecordId> roots(w.begin(), w.end());
  CHECK(state.visited == fixtures::naive_closure(server.forum(), roots));
  CHECK(counting.max_count() == 1);
  CHECK(server.agent() == "medcorpus-test/1.0");
  const auto rec = src.fetch(*roots.begin());
  const auto& expect = server.forum().records()[*roots.begin()].related;
  CHECK(std::set<RecordId>(rec.related.begin(), rec.related.end()) ==
        std::set<RecordId>(expect.begin(), expect.end()));
  CHECK(rec.payload.find("class='question'") != std::string::npos);
}

TEST_CASE("http source: status handling") {
  ForumServer server;
  HttpSourceConfig cfg;
  cfg.base_url = server.url();
  HttpSource src(cfg);
  CHECK_THROWS_AS(src.fetch(10000), RecordNotFound);
  server.flaky_7_ = 1;
  try {
    src.fetch(7);
    FAIL("expected FetchError");
  } catch (const FetchError& e) {
    CHECK(e.transient());
  }
  CHECK(src.fetch(7).id == 7);
}

TEST_CASE("http source honours robots.txt") {
  ForumServer blocked("User-agent: *\nDisallow: /\n");
  HttpSourceConfig cfg;
  cfg.base_url = blocked.url();
  CHECK_THROWS_AS(HttpSource{cfg}, ConfigError);
  cfg.respect_robots = false;
  CHECK_NOTHROW(HttpSource{cfg});

  ForumServer partial("User-agent: *\nDisallow: /q/5\n");
  cfg.base_url = partial.url();
  cfg.respect_robots = true;
  HttpSource src(cfg);
  CHECK_THROWS_AS(src.fetch(5), RecordNotFound);
  CHECK_THROWS_AS(src.fetch(50), RecordNotFound);  // /q/50 starts with /q/5
  CHECK_NOTHROW(src.fetch(6));
}

TEST_CASE("http source: unreachable host is an outage") {
  HttpSourceConfig cfg;
  cfg.base_url = "http://127.0.0.1:1";
  cfg.timeout_seconds = 2;
  CHECK_THROWS_AS(HttpSource{cfg}, SourceUnavailable);
  cfg.respect_robots = false;
  HttpSource src(cfg);
  CHECK_THROWS_AS(iterate_crawl(src, quick(), {}), CrawlInterrupted);
}

TEST_CASE("http source config validation") {
  HttpSourceConfig cfg;
  CHECK_THROWS_AS(HttpSource{cfg}, ConfigError);
  cfg.base_url = "http://127.0.0.1:1";
  cfg.record_path = "/q/";
  CHECK_THROWS_AS(HttpSource{cfg}, ConfigError);
  cfg.record_path = "/q/{id}";
  cfg.id_pattern = "/q/\\d+";
  CHECK_THROWS_AS(HttpSource{cfg}, ConfigError);
  cfg.id_pattern = "(";
  CHECK_THROWS_AS(HttpSource{cfg}, ConfigError);
}
