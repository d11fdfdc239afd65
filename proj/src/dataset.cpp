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

#include "medcorpus/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <unordered_set>

#include "medcorpus/fileio.hpp"
#include "medcorpus/forum_sim.hpp"
#include "medcorpus/hashing.hpp"

namespace medcorpus::dataset {
namespace {

const std::set<std::string, std::less<>> kQaKeys = {
    "id", "source", "question", "answer", "answer_tokens", "split", "extras"};

template <class Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t pos = 0;
  std::size_t line = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::size_t stop = nl == std::string_view::npos ? text.size() : nl;
    ++line;
    std::string_view row = text.substr(pos, stop - pos);
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    if (!row.empty()) fn(row, line, pos);
    pos = stop + 1;
  }
}

std::string jsonl_error(std::string_view name, std::size_t line,
                        const std::string& what) {
  return std::string(name) + ":" + std::to_string(line) + ": " + what;
}

void sort_by_id(std::vector<QAPair>& v) {
  std::stable_sort(v.begin(), v.end(), [](const QAPair& a, const QAPair& b) {
    return a.id < b.id;
  });
}

}  // namespace

// ---- policy ----------------------------------------------------------------

void SplitPolicy::validate() const {
  for (const auto& s : train_sources) {
    if (test_sources.count(s)) {
      throw ConfigError("source '" + s + "' is both a train and a test source");
    }
  }
  if (!(dev_fraction >= 0.0 && dev_fraction < 1.0)) {
    throw ConfigError("dev_fraction must be in [0, 1)");
  }
  make_tokenizer(tokenizer);
}

SplitPolicy SplitPolicy::from_json(const nlohmann::json& doc) {
  SplitPolicy p;
  try {
    for (const auto& s : doc.value("train_sources", nlohmann::json::array())) {
      p.train_sources.insert(s.get<std::string>());
    }
    for (const auto& s : doc.value("test_sources", nlohmann::json::array())) {
      p.test_sources.insert(s.get<std::string>());
    }
    p.external_test_files =
        doc.value("external_test_files", std::vector<std::string>{});
    p.dev_fraction = doc.value("dev_fraction", p.dev_fraction);
    p.rng_seed = doc.value("rng_seed", p.rng_seed);
    p.tokenizer = doc.value("tokenizer", p.tokenizer);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("split policy: ") + e.what());
  }
  return p;
}

nlohmann::ordered_json SplitPolicy::to_json() const {
  nlohmann::ordered_json j;
  j["train_sources"] = train_sources;
  j["test_sources"] = test_sources;
  j["external_test_files"] = external_test_files;
  j["dev_fraction"] = dev_fraction;
  j["rng_seed"] = rng_seed;
  j["tokenizer"] = tokenizer;
  j["external_pii_sha256"] = external_pii.sha256();
  return j;
}

std::string SplitPolicy::sha256() const { return sha256_hex(to_json().dump()); }

namespace {

std::string join_sources(const std::vector<std::string>& sources) {
  std::string s;
  for (const auto& x : sources) {
    if (!s.empty()) s += ", ";
    s += x;
  }
  return s;
}

}  // namespace

RoutingError::RoutingError(std::vector<std::string> sources)
    : InputError("records from sources not named by the split policy: " +
                 join_sources(sources)),
      sources_(std::move(sources)) {}

// ---- splits ----------------------------------------------------------------

std::vector<QAPair> load_external(const std::string& path,
                                  const SplitPolicy& policy) {
  const auto tok = make_tokenizer(policy.tokenizer);
  const std::string text = read_file(path);
  std::vector<QAPair> out;
  for_each_line(text, [&](std::string_view row, std::size_t line,
                          std::size_t offset) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(row);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(jsonl_error(path, line, e.what()), offset, line);
    }
    if (!j.is_object() || !j.contains("question") || !j.contains("answer") ||
        !j["question"].is_string() || !j["answer"].is_string()) {
      throw ParseError(
          jsonl_error(path, line, "external record needs string question and answer"),
          offset, line);
    }
    QAPair r;
    r.id = j.contains("id") && j["id"].is_string()
               ? j["id"].get<std::string>()
               : "external-" + std::to_string(line);
    r.source = std::string(kExternalSource);
    r.question = normalize_text(
        clean::scrub_pii(normalize_text(j["question"].get<std::string>()),
                         policy.external_pii)
            .text);
    r.answer = normalize_text(
        clean::scrub_pii(normalize_text(j["answer"].get<std::string>()),
                         policy.external_pii)
            .text);
    if (r.question.empty() || r.answer.empty()) {
      throw ParseError(jsonl_error(path, line, "empty question or answer"),
                       offset, line);
    }
    r.answer_tokens = count_tokens(r.answer, *tok);
    r.split = SplitTag::kExternal;
    for (const auto& [k, v] : j.items()) {
      if (k != "id" && k != "question" && k != "answer") r.extras[k] = v;
    }
    out.push_back(std::move(r));
  });
  return out;
}

DatasetSplit build_splits(const std::vector<QAPair>& cleaned,
                          const SplitPolicy& policy) {
  policy.validate();
  std::vector<QAPair> external;
  for (const auto& path : policy.external_test_files) {
    auto recs = load_external(path, policy);
    external.insert(external.end(), std::make_move_iterator(recs.begin()),
                    std::make_move_iterator(recs.end()));
  }
  return build_splits(cleaned, policy, std::move(external));
}

DatasetSplit build_splits(const std::vector<QAPair>& cleaned,
                          const SplitPolicy& policy,
                          std::vector<QAPair> external) {
  policy.validate();
  std::set<std::string> unknown;
  for (const auto& r : cleaned) {
    if (!policy.train_sources.count(r.source) &&
        !policy.test_sources.count(r.source)) {
      unknown.insert(r.source);
    }
  }
  if (!unknown.empty()) {
    throw RoutingError(std::vector<std::string>(unknown.begin(), unknown.end()));
  }

  DatasetSplit out;
  std::unordered_set<std::string> ids;
  std::unordered_set<std::string> test_content;
  std::unordered_set<std::string> train_content;
  auto claim_id = [&](const QAPair& r) {
    if (ids.insert(r.id).second) return true;
    out.conflicts.push_back({r.id, r.source, "duplicate-id"});
    return false;
  };

  for (const auto& r : cleaned) {
    if (!policy.test_sources.count(r.source)) continue;
    if (!claim_id(r)) continue;
    QAPair t = r;
    t.split = SplitTag::kTest;
    test_content.insert(content_hash(t.question, t.answer));
    out.test.push_back(std::move(t));
  }
  std::vector<QAPair> ext_sorted;
  for (auto& r : external) {
    if (!claim_id(r)) continue;
    r.split = SplitTag::kTest;
    test_content.insert(content_hash(r.question, r.answer));
    ext_sorted.push_back(std::move(r));
  }
  std::vector<QAPair> pool;
  for (const auto& r : cleaned) {
    if (!policy.train_sources.count(r.source)) continue;
    const std::string h = content_hash(r.question, r.answer);
    if (test_content.count(h)) {
      out.conflicts.push_back({r.id, r.source, "content-in-other-split"});
      continue;
    }
    // Repeated content could otherwise straddle train and dev.
    if (train_content.count(h)) {
      out.conflicts.push_back({r.id, r.source, "duplicate-content"});
      continue;
    }
    if (!claim_id(r)) continue;
    train_content.insert(h);
    pool.push_back(r);
  }

  // Dev: seeded Fisher-Yates over the id-sorted pool.
  sort_by_id(pool);
  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(policy.rng_seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[sim::uniform_below(rng, i)]);
  }
  const auto n_dev = static_cast<std::size_t>(
      std::floor(policy.dev_fraction * static_cast<double>(pool.size())));
  std::vector<char> is_dev(pool.size(), 0);
  for (std::size_t k = 0; k < n_dev; ++k) is_dev[order[k]] = 1;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    QAPair r = std::move(pool[i]);
    r.split = is_dev[i] ? SplitTag::kDev : SplitTag::kTrain;
    (is_dev[i] ? out.dev : out.train).push_back(std::move(r));
  }
  sort_by_id(out.test);
  // External records follow the routed test records.
  sort_by_id(ext_sorted);
  out.test.insert(out.test.end(), std::make_move_iterator(ext_sorted.begin()),
                  std::make_move_iterator(ext_sorted.end()));

  nlohmann::ordered_json& m = out.manifest;
  m["policy_sha256"] = policy.sha256();
  m["tokenizer"] = policy.tokenizer;
  m["input_count"] = cleaned.size();
  m["external_count"] = external.size();
  auto split_json = [](const std::vector<QAPair>& v) {
    nlohmann::ordered_json s;
    s["count"] = v.size();
    std::map<std::string, std::uint64_t> per;
    for (const auto& r : v) ++per[r.source];
    s["sources"] = per;
    return s;
  };
  m["splits"]["train"] = split_json(out.train);
  m["splits"]["dev"] = split_json(out.dev);
  m["splits"]["test"] = split_json(out.test);
  m["conflicts"] = out.conflicts.size();
  return out;
}

// ---- stats -----------------------------------------------------------------

namespace {

template <class Item, class Text>
StatsReport stats_impl(const std::vector<Item>& items,
                       const Tokenizer& tokenizer, Text&& text_of) {
  StatsReport rep;
  rep.tokenizer = tokenizer.name();
  rep.record_count = items.size();
  for (const auto& it : items) {
    const std::int64_t n = count_tokens(text_of(it), tokenizer);
    rep.total_tokens += n;
    ++rep.per_source_records[it.source];
    rep.per_source_tokens[it.source] += n;
    const auto bucket = std::min<std::size_t>(
        static_cast<std::size_t>(n / kHistogramWidth), kHistogramBuckets - 1);
    ++rep.length_histogram[bucket];
  }
  for (const auto& [src, count] : rep.per_source_records) {
    rep.per_source_share[src] =
        rep.total_tokens > 0
            ? static_cast<double>(rep.per_source_tokens[src]) /
                  static_cast<double>(rep.total_tokens)
            : static_cast<double>(count) /
                  static_cast<double>(rep.record_count);
  }
  return rep;
}

}  // namespace

StatsReport corpus_stats(const std::vector<QAPair>& items,
                         const Tokenizer& tokenizer) {
  return stats_impl(items, tokenizer,
                    [](const QAPair& r) -> const std::string& { return r.answer; });
}

StatsReport corpus_stats(const std::vector<Document>& items,
                         const Tokenizer& tokenizer) {
  return stats_impl(items, tokenizer,
                    [](const Document& d) -> const std::string& { return d.body; });
}

nlohmann::ordered_json StatsReport::to_json() const {
  nlohmann::ordered_json j;
  j["tokenizer"] = tokenizer;
  j["total_tokens"] = total_tokens;
  j["record_count"] = record_count;
  j["per_source_share"] = per_source_share;
  j["per_source_records"] = per_source_records;
  j["per_source_tokens"] = per_source_tokens;
  j["histogram_bucket_width"] = kHistogramWidth;
  j["length_histogram"] = length_histogram;
  return j;
}

std::string StatsReport::to_csv() const {
  std::ostringstream out;
  out << "source,records,tokens,share\n";
  for (const auto& [src, share] : per_source_share) {
    std::string name = src;
    if (name.find_first_of(",\"\n") != std::string::npos) {
      std::string q = "\"";
      for (char c : name) {
        if (c == '"') q += '"';
        q += c;
      }
      name = q + "\"";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", share);
    out << name << ',' << per_source_records.at(src) << ','
        << per_source_tokens.at(src) << ',' << buf << '\n';
  }
  return out.str();
}

// ---- subsampling -----------------------------------------------------------

namespace {

template <class Item>
std::vector<Item> subsample_impl(const std::vector<Item>& items, double fraction,
                                 std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw InputError("sample fraction must be in [0, 1]");
  const auto keep = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(items.size())));
  // Rank by a keyed hash of the id, so a larger fraction keeps a superset.
  std::vector<std::pair<std::uint64_t, std::size_t>> ranked;
  ranked.reserve(items.size());
  const std::string prefix = std::to_string(seed) + '\x1f';
  for (std::size_t i = 0; i < items.size(); ++i)
    ranked.emplace_back(sha256_u64(prefix + items[i].id), i);
  std::sort(ranked.begin(), ranked.end());
  ranked.resize(keep);
  std::vector<std::size_t> idx;
  idx.reserve(keep);
  for (const auto& r : ranked) idx.push_back(r.second);
  std::sort(idx.begin(), idx.end());
  std::vector<Item> out;
  out.reserve(keep);
  for (auto i : idx) out.push_back(items[i]);
  return out;
}

}  // namespace

std::vector<Document> subsample(const std::vector<Document>& items,
                                double fraction, std::uint64_t seed) {
  return subsample_impl(items, fraction, seed);
}

std::vector<QAPair> subsample(const std::vector<QAPair>& items, double fraction,
                              std::uint64_t seed) {
  return subsample_impl(items, fraction, seed);
}

// ---- persistence -----------------------------------------------------------

std::string to_jsonl_line(const QAPair& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["source"] = r.source;
  j["question"] = r.question;
  j["answer"] = r.answer;
  j["answer_tokens"] = r.answer_tokens;
  j["split"] = to_string(r.split);
  j["extras"] = r.extras.is_object() ? r.extras : nlohmann::json::object();
  return j.dump();
}

QAPair qa_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("record is not a JSON object");
  QAPair r;
  r.id = j.at("id").get<std::string>();
  r.source = j.at("source").get<std::string>();
  r.question = j.at("question").get<std::string>();
  r.answer = j.at("answer").get<std::string>();
  r.answer_tokens = j.at("answer_tokens").get<std::int64_t>();
  r.split = split_tag_from_string(j.at("split").get<std::string>());
  if (j.contains("extras")) {
    if (!j["extras"].is_object()) throw InputError("extras must be an object");
    r.extras = j["extras"];
  }
  for (const auto& [k, v] : j.items()) {
    if (!kQaKeys.count(k)) r.extras[k] = v;
  }
  return r;
}

std::vector<QAPair> parse_jsonl(std::string_view text, std::string_view name) {
  std::vector<QAPair> out;
  for_each_line(text, [&](std::string_view row, std::size_t line,
                          std::size_t offset) {
    try {
      out.push_back(qa_from_json(nlohmann::json::parse(row)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(jsonl_error(name, line, e.what()), offset, line);
    } catch (const InputError& e) {
      throw ParseError(jsonl_error(name, line, e.what()), offset, line);
    }
  });
  return out;
}

void emit_jsonl(const std::vector<QAPair>& records, const std::string& path) {
  std::string text;
  for (const auto& r : records) {
    text += to_jsonl_line(r);
    text.push_back('\n');
  }
  write_file_atomic(path, text);
}

std::vector<QAPair> load_jsonl(const std::string& path) {
  return parse_jsonl(read_file(path), path);
}

void emit_documents(const std::vector<Document>& docs,
                    const std::string& path) {
  std::string text;
  for (const auto& d : docs) {
    nlohmann::ordered_json j;
    j["id"] = d.id;
    j["source"] = d.source;
    j["title"] = d.title;
    j["body"] = d.body;
    j["tokens"] = d.token_count;
    j["url"] = d.url;
    text += j.dump();
    text.push_back('\n');
  }
  write_file_atomic(path, text);
}

std::vector<Document> load_documents(const std::string& path) {
  const std::string text = read_file(path);
  std::vector<Document> out;
  for_each_line(text, [&](std::string_view row, std::size_t line,
                          std::size_t offset) {
    try {
      const auto j = nlohmann::json::parse(row);
      Document d;
      d.id = j.at("id").get<std::string>();
      d.source = j.at("source").get<std::string>();
      d.title = j.value("title", std::string());
      d.body = j.at("body").get<std::string>();
      d.token_count = j.value("tokens", std::int64_t{0});
      d.url = j.value("url", std::string());
      out.push_back(std::move(d));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(jsonl_error(path, line, e.what()), offset, line);
    }
  });
  return out;
}

std::string emit_instruction_format(const QAPair& pair,
                                    std::string_view tmpl) {
  const bool has_q = tmpl.find("{q}") != std::string_view::npos;
  const bool has_a = tmpl.find("{a}") != std::string_view::npos;
  if (!has_q || !has_a) {
    throw TemplateError(std::string("template is missing the ") +
                        (!has_q ? "{q}" : "{a}") + " placeholder");
  }
  std::string out;
  out.reserve(tmpl.size() + pair.question.size() + pair.answer.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl.compare(i, 3, "{q}") == 0) {
      out += pair.question;
      i += 3;
    } else if (tmpl.compare(i, 3, "{a}") == 0) {
      out += pair.answer;
      i += 3;
    } else {
      out.push_back(tmpl[i++]);
    }
  }
  return out;
}

}  // namespace medcorpus::dataset
