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

#include "medcorpus/http_source.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

#include <httplib.h>

namespace medcorpus::crawl {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

RobotsRules RobotsRules::parse(std::string_view text,
                               std::string_view user_agent) {
  // Product token: "medcorpus-crawler/0.1" -> "medcorpus-crawler".
  const std::string token =
      lower(user_agent.substr(0, user_agent.find('/')));
  struct Group {
    std::vector<std::string> agents;
    std::vector<Rule> rules;
  };
  std::vector<Group> groups;
  bool in_agents = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                      : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) continue;
    const std::string key = lower(trim(line.substr(0, colon)));
    const std::string value(trim(line.substr(colon + 1)));
    if (key == "user-agent") {
      if (!in_agents) groups.emplace_back();
      groups.back().agents.push_back(lower(value));
      in_agents = true;
    } else if (key == "allow" || key == "disallow") {
      in_agents = false;
      if (groups.empty()) continue;
      // An empty Disallow allows everything.
      if (value.empty()) continue;
      groups.back().rules.push_back({value, key == "allow"});
    }
  }
  RobotsRules out;
  const Group* star = nullptr;
  const Group* mine = nullptr;
  for (const auto& g : groups) {
    for (const auto& a : g.agents) {
      if (a == "*" && !star) star = &g;
      if (!token.empty() && a == token && !mine) mine = &g;
    }
  }
  if (const Group* g = mine ? mine : star) out.rules_ = g->rules;
  return out;
}

bool RobotsRules::allowed(std::string_view path) const {
  std::size_t best = 0;
  bool allow = true;
  for (const auto& r : rules_) {
    if (path.substr(0, r.prefix.size()) != r.prefix) continue;
    if (r.prefix.size() > best || (r.prefix.size() == best && r.allow)) {
      best = r.prefix.size();
      allow = r.allow;
    }
  }
  return allow;
}

HttpSource::HttpSource(HttpSourceConfig config)
    : config_(std::move(config)) {
  if (config_.base_url.empty()) throw ConfigError("http source needs a base url");
  if (config_.record_path.find("{id}") == std::string::npos) {
    throw ConfigError("record_path must contain {id}");
  }
  try {
    id_regex_ = std::regex(config_.id_pattern);
  } catch (const std::regex_error& e) {
    throw ConfigError("bad id pattern '" + config_.id_pattern + "': " + e.what());
  }
  if (id_regex_.mark_count() < 1) {
    throw ConfigError("id pattern needs one capture group");
  }
  if (config_.respect_robots) {
    httplib::Client cli(config_.base_url);
    cli.set_connection_timeout(config_.timeout_seconds);
    cli.set_read_timeout(config_.timeout_seconds);
    auto res = cli.Get("/robots.txt", {{"User-Agent", config_.user_agent}});
    if (!res) {
      throw SourceUnavailable("robots.txt: " + httplib::to_string(res.error()));
    }
    if (res->status == 200) {
      robots_ = RobotsRules::parse(res->body, config_.user_agent);
    }
    if (!robots_.allowed(config_.window_path)) {
      throw ConfigError("robots.txt disallows " + config_.window_path);
    }
  }
}

std::string HttpSource::record_path(RecordId id) const {
  std::string path = config_.record_path;
  const auto at = path.find("{id}");
  path.replace(at, 4, std::to_string(id));
  return path;
}

std::string HttpSource::get(const std::string& path, bool for_window) const {
  httplib::Client cli(config_.base_url);
  cli.set_connection_timeout(config_.timeout_seconds);
  cli.set_read_timeout(config_.timeout_seconds);
  cli.set_follow_location(true);
  auto res = cli.Get(path, {{"User-Agent", config_.user_agent}});
  if (!res) {
    throw SourceUnavailable(path + ": " + httplib::to_string(res.error()));
  }
  const int status = res->status;
  if (status == 200) return res->body;
  const std::string what = path + ": HTTP " + std::to_string(status);
  if (status == 429 || status >= 500) {
    if (for_window) throw SourceUnavailable(what);
    throw FetchError(what, true);
  }
  if (for_window) throw SourceUnavailable(what);
  throw RecordNotFound(what);
}

std::vector<RecordId> HttpSource::list_window() {
  return extract_ids(get(config_.window_path, true));
}

FetchedRecord HttpSource::fetch(RecordId id) {
  const std::string path = record_path(id);
  if (!robots_.allowed(path)) throw RecordNotFound(path + ": disallowed by robots.txt");
  FetchedRecord rec;
  rec.id = id;
  rec.url = config_.base_url + path;
  rec.payload = get(path, false);
  for (RecordId r : extract_ids(rec.payload)) {
    if (r != id) rec.related.push_back(r);
  }
  return rec;
}

std::vector<RecordId> HttpSource::extract_ids(std::string_view html) const {
  static const std::regex href(R"(href\s*=\s*["']([^"']*)["'])",
                               std::regex::icase);
  std::vector<RecordId> out;
  std::set<RecordId> seen;
  const std::string text(html);
  for (auto it = std::sregex_iterator(text.begin(), text.end(), href);
       it != std::sregex_iterator(); ++it) {
    const std::string target = (*it)[1].str();
    std::smatch m;
    if (!std::regex_search(target, m, id_regex_)) continue;
    const std::string digits = m[1].str();
    RecordId id = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), id);
    if (ec != std::errc() || p != digits.data() + digits.size()) continue;
    if (seen.insert(id).second) out.push_back(id);
  }
  return out;
}

}  // namespace medcorpus::crawl
