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

#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "medcorpus/crawler.hpp"

namespace medcorpus::crawl {

struct HttpSourceConfig {
  // Scheme, host and optional port, e.g. "https://forum.example".
  std::string base_url;
  // Page listing the visible records.
  std::string window_path = "/";
  // Record page; "{id}" is replaced by the record id.
  std::string record_path = "/q/{id}";
  // First capture group is a record id. Applied to every href on a page.
  std::string id_pattern = R"(/q/(\d+))";
  std::string user_agent = "medcorpus-crawler/0.1";
  int timeout_seconds = 30;
  bool respect_robots = true;
};

// Allow/Disallow rules for one user agent, longest match wins.
class RobotsRules {
 public:
  static RobotsRules parse(std::string_view robots_txt,
                           std::string_view user_agent);
  bool allowed(std::string_view path) const;

 private:
  struct Rule {
    std::string prefix;
    bool allow;
  };
  std::vector<Rule> rules_;
};

// Live forum adapter over HTTP GET. robots.txt is read once at construction;
// a disallowed window page is a ConfigError. 404 and robots-disallowed
// record pages are permanent fetch failures, 429/5xx are transient, and
// connection failures raise SourceUnavailable.
class HttpSource : public RecordSource {
 public:
  explicit HttpSource(HttpSourceConfig config);

  std::vector<RecordId> list_window() override;
  FetchedRecord fetch(RecordId id) override;
  std::string host() const override { return config_.base_url; }

  // Record ids in href targets of `html`, in order of first appearance.
  std::vector<RecordId> extract_ids(std::string_view html) const;

 private:
  std::string get(const std::string& path, bool for_window) const;
  std::string record_path(RecordId id) const;

  HttpSourceConfig config_;
  std::regex id_regex_;
  RobotsRules robots_;
};

}  // namespace medcorpus::crawl
