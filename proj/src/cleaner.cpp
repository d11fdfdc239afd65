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

#include "medcorpus/cleaner.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "medcorpus/errors.hpp"
#include "medcorpus/fileio.hpp"
#include "medcorpus/hashing.hpp"
#include "medcorpus/unicode.hpp"
#include "parallel.hpp"

namespace medcorpus::clean {
namespace {

nlohmann::json parse_json_file(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what(), e.byte);
  }
}

std::uint64_t fnv1a(std::string_view bytes,
                    std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::uint64_t> shingles(const QAPair& r, const Tokenizer& tok,
                                    std::size_t k) {
  std::vector<std::string> tokens = tok.tokenize(r.question);
  for (auto& t : tok.tokenize(r.answer)) tokens.push_back(std::move(t));
  std::vector<std::uint64_t> out;
  if (tokens.empty()) return out;
  const std::size_t width = std::min(k, tokens.size());
  out.reserve(tokens.size() - width + 1);
  for (std::size_t i = 0; i + width <= tokens.size(); ++i) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t j = 0; j < width; ++j) {
      h = fnv1a(tokens[i + j], h);
      h = fnv1a("\x1f", h);
    }
    out.push_back(h);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double jaccard(const std::vector<std::uint64_t>& a,
               const std::vector<std::uint64_t>& b) {
  if (a.empty() || b.empty()) return 0.0;
  std::size_t shared = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++shared, ++i, ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return static_cast<double>(shared) /
         static_cast<double>(a.size() + b.size() - shared);
}

std::size_t count_urls(std::string_view text) {
  std::size_t n = 0;
  for (std::string_view marker : {"http://", "https://", "www."}) {
    for (std::size_t pos = text.find(marker); pos != std::string_view::npos;
         pos = text.find(marker, pos + marker.size())) {
      // "https://www." counts once.
      if (marker == "www." && pos >= 3 && text.substr(pos - 3, 3) == "://") {
        continue;
      }
      ++n;
    }
  }
  return n;
}

std::size_t word_count(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (char ch : text) {
    const bool space = ch == ' ' || ch == '\n' || ch == '\t' || ch == '\r';
    n += !space && !in_word;
    in_word = !space;
  }
  return n;
}

std::int64_t longest_char_run(std::string_view text) {
  const std::u32string cps = unicode::decode_utf8_lenient(text);
  std::int64_t best = 0;
  std::int64_t run = 0;
  char32_t prev = 0;
  for (char32_t cp : cps) {
    if (unicode::is_whitespace(cp)) {
      run = 0;
      prev = 0;
      continue;
    }
    run = (cp == prev) ? run + 1 : 1;
    prev = cp;
    best = std::max(best, run);
  }
  return best;
}

// Name of the first failing quality rule, or empty.
std::string quality_failure(const QAPair& r, const QualityRules& rules,
                            const Tokenizer& tok) {
  if (count_tokens(r.question, tok) < rules.min_question_tokens) {
    return "short-question";
  }
  if (rules.reject_echo && r.question == r.answer) return "echo";
  // Per whitespace word: punctuation-aware tokenizers split a URL into
  // several tokens and would hide link spam.
  const double urls = static_cast<double>(count_urls(r.answer));
  const double words = static_cast<double>(std::max<std::size_t>(1, word_count(r.answer)));
  if (urls / words > rules.max_url_density) return "url-density";
  if (std::max(longest_char_run(r.question), longest_char_run(r.answer)) >
      rules.max_char_run) {
    return "char-run";
  }
  return {};
}

bool empty_without_masks(std::string_view text, const PiiPatterns& patterns) {
  std::string rest(text);
  for (const auto& e : patterns.entries()) {
    for (std::size_t pos = rest.find(e.mask); pos != std::string::npos;
         pos = rest.find(e.mask, pos)) {
      rest.replace(pos, e.mask.size(), " ");
    }
  }
  return normalize_text(rest).empty();
}

}  // namespace

std::string_view to_string(SplitKind kind) {
  switch (kind) {
    case SplitKind::kTrain:
      return "train";
    case SplitKind::kDev:
      return "dev";
    case SplitKind::kTest:
      return "test";
  }
  return "train";
}

SplitKind split_kind_from_string(std::string_view name) {
  if (name == "train") return SplitKind::kTrain;
  if (name == "dev") return SplitKind::kDev;
  if (name == "test") return SplitKind::kTest;
  throw InputError("unknown split kind '" + std::string(name) +
                   "' (expected train, dev or test)");
}

// ---- patterns and rules ----------------------------------------------------

PiiPatterns PiiPatterns::from_json(const nlohmann::json& doc) {
  PiiPatterns out;
  try {
    for (const auto& p : doc.at("patterns")) {
      Entry e;
      e.category = p.at("category").get<std::string>();
      e.pattern = p.at("regex").get<std::string>();
      e.mask = p.value("mask", "[" + e.category + "]");
      try {
        e.regex = boost::regex(e.pattern, boost::regex::ECMAScript);
      } catch (const boost::regex_error& err) {
        throw ConfigError("pii pattern '" + e.category + "': " + err.what());
      }
      out.entries_.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("pii patterns: ") + e.what());
  }
  out.hash_ = sha256_hex(doc.dump());
  return out;
}

PiiPatterns PiiPatterns::load(const std::string& path) {
  PiiPatterns p = from_json(parse_json_file(path));
  p.hash_ = sha256_hex(read_file(path));
  return p;
}

const PiiPatterns& default_pii_patterns() {
  static const PiiPatterns patterns = PiiPatterns::from_json(R"({
    "version": 1,
    "patterns": [
      {"category": "email", "mask": "[EMAIL]",
       "regex": "[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\\.[A-Za-z]{2,}"},
      {"category": "phone", "mask": "[PHONE]",
       "regex": "(?:\\+98|\\b0098|\\b0)9\\d{2}[- ]?\\d{3}[- ]?\\d{4}\\b"},
      {"category": "card", "mask": "[CARD]",
       "regex": "\\b\\d{4}[- ]?\\d{4}[- ]?\\d{4}[- ]?\\d{4}\\b"},
      {"category": "landline", "mask": "[PHONE]",
       "regex": "\\b0\\d{2}[- ]?\\d{8}\\b"},
      {"category": "national-id", "mask": "[NATIONAL_ID]",
       "regex": "\\b\\d{10}\\b"}
    ]
  })"_json);
  return patterns;
}

QualityRules QualityRules::from_json(const nlohmann::json& doc) {
  QualityRules r;
  try {
    r.min_question_tokens = doc.value("min_question_tokens", r.min_question_tokens);
    r.max_url_density = doc.value("max_url_density", r.max_url_density);
    r.max_char_run = doc.value("max_char_run", r.max_char_run);
    r.reject_echo = doc.value("reject_echo", r.reject_echo);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("quality rules: ") + e.what());
  }
  r.hash = sha256_hex(doc.dump());
  return r;
}

QualityRules QualityRules::load(const std::string& path) {
  QualityRules r = from_json(parse_json_file(path));
  r.hash = sha256_hex(read_file(path));
  return r;
}

nlohmann::ordered_json QualityRules::to_json() const {
  nlohmann::ordered_json j;
  j["min_question_tokens"] = min_question_tokens;
  j["max_url_density"] = max_url_density;
  j["max_char_run"] = max_char_run;
  j["reject_echo"] = reject_echo;
  return j;
}

void CleaningConfig::validate() const {
  if (!(short_drop_probability >= 0.0 && short_drop_probability <= 1.0)) {
    throw ConfigError("short_drop_probability must be in [0, 1]");
  }
  if (min_answer_tokens < 0) throw ConfigError("min_answer_tokens must be >= 0");
  if (!(near_dup_threshold >= 0.0 && near_dup_threshold <= 1.0)) {
    throw ConfigError("near_dup_threshold must be in [0, 1]");
  }
  if (shingle_size == 0) throw ConfigError("shingle_size must be >= 1");
  make_tokenizer(tokenizer);
}

// ---- report ----------------------------------------------------------------

CleaningReport::CleaningReport() {
  for (std::string_view r : {kShortAnswer, kExactDuplicate, kNearDuplicate,
                             kSpam, kEmptyAfterScrub}) {
    dropped_by_reason[std::string(r)] = 0;
  }
}

std::uint64_t CleaningReport::dropped_total() const {
  std::uint64_t n = 0;
  for (const auto& [_, c] : dropped_by_reason) n += c;
  return n;
}

bool CleaningReport::conserved() const {
  return kept_count + dropped_total() == input_count;
}

nlohmann::ordered_json CleaningReport::to_json() const {
  nlohmann::ordered_json j;
  j["split"] = split;
  j["input_count"] = input_count;
  j["kept_count"] = kept_count;
  j["dropped_by_reason"] = dropped_by_reason;
  j["spam_by_rule"] = spam_by_rule;
  j["flagged_for_review"] = flagged_for_review;
  j["pii_hits"] = pii_hits;
  j["discard_rate"] = discard_rate;
  j["tokenizer"] = tokenizer_name;
  j["seed"] = seed;
  j["short_drop_probability"] = short_drop_probability;
  j["min_answer_tokens"] = min_answer_tokens;
  j["pii_patterns_sha256"] = pii_patterns_sha256;
  j["quality_rules_sha256"] = quality_rules_sha256;
  return j;
}

std::string CleaningReport::summary_table() const {
  std::ostringstream out;
  auto row = [&](std::string_view label, std::uint64_t n) {
    out << std::left << std::setw(22) << label << std::right << std::setw(10)
        << n << '\n';
  };
  out << "cleaning report (" << split << ", tokenizer " << tokenizer_name
      << ", seed " << seed << ")\n";
  row("input", input_count);
  for (const auto& [reason, n] : dropped_by_reason) {
    row("dropped " + reason, n);
  }
  row("kept", kept_count);
  row("flagged for review", flagged_for_review);
  row("pii hits", pii_hits);
  out << std::left << std::setw(22) << "discard rate" << std::right
      << std::setw(10) << std::fixed << std::setprecision(4) << discard_rate
      << '\n';
  return out.str();
}

// ---- stages ----------------------------------------------------------------

ScrubResult scrub_pii(std::string_view text, const PiiPatterns& patterns) {
  ScrubResult out{std::string(text), 0};
  for (const auto& e : patterns.entries()) {
    std::string replaced;
    replaced.reserve(out.text.size());
    std::size_t hits = 0;
    auto last = out.text.cbegin();
    for (boost::sregex_iterator it(out.text.cbegin(), out.text.cend(), e.regex), end;
         it != end; ++it) {
      replaced.append(last, (*it)[0].first);
      replaced += e.mask;  // masks are literal, no $-expansion
      last = (*it)[0].second;
      ++hits;
    }
    if (hits == 0) continue;
    replaced.append(last, out.text.cend());
    out.hits += hits;
    out.text = std::move(replaced);
  }
  return out;
}

double drop_draw(std::uint64_t seed, const QAPair& record) {
  std::string key = std::to_string(seed);
  key.push_back('\x1f');
  key += record.id;
  key.push_back('\x1f');
  key += record.question;
  key.push_back('\x1f');
  key += record.answer;
  return static_cast<double>(sha256_u64(key) >> 11) * 0x1.0p-53;
}

LengthFilterResult length_filter(const std::vector<QAPair>& records,
                                 const CleaningConfig& config,
                                 SplitKind kind) {
  config.validate();
  std::vector<char> drop(records.size(), 0);
  detail::parallel_for(records.size(), config.workers, [&](std::size_t i) {
    const QAPair& r = records[i];
    if (r.answer_tokens >= config.min_answer_tokens) return;
    if (kind == SplitKind::kTest) {
      drop[i] = 2;
    } else if (drop_draw(config.rng_seed, r) < config.short_drop_probability) {
      drop[i] = 1;
    }
  });
  LengthFilterResult out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (drop[i] == 1) {
      out.dropped.push_back(records[i]);
      continue;
    }
    if (drop[i] == 2) out.flagged.push_back(records[i]);
    out.kept.push_back(records[i]);
  }
  return out;
}

double shingle_similarity(const QAPair& a, const QAPair& b,
                          const CleaningConfig& config) {
  const auto tok = make_tokenizer(config.tokenizer);
  return jaccard(shingles(a, *tok, config.shingle_size),
                 shingles(b, *tok, config.shingle_size));
}

DedupResult dedup(const std::vector<QAPair>& records,
                  const CleaningConfig& config) {
  config.validate();
  const auto tok = make_tokenizer(config.tokenizer);
  DedupResult out;

  // Exact duplicates: first occurrence by input order wins.
  std::vector<std::string> hashes(records.size());
  detail::parallel_for(records.size(), config.workers, [&](std::size_t i) {
    hashes[i] = content_hash(records[i].question, records[i].answer);
  });
  std::unordered_set<std::string> seen;
  std::vector<std::size_t> unique;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (seen.insert(hashes[i]).second) {
      unique.push_back(i);
    } else {
      out.exact_duplicates.push_back(records[i]);
    }
  }

  std::vector<std::vector<std::uint64_t>> sh(records.size());
  detail::parallel_for(unique.size(), config.workers, [&](std::size_t k) {
    sh[unique[k]] = shingles(records[unique[k]], *tok, config.shingle_size);
  });

  // Greedy clustering against current representatives, repeated until no
  // two representatives are near duplicates.
  std::vector<std::size_t> reps = unique;
  std::vector<char> dropped(records.size(), 0);
  bool merged = true;
  while (merged) {
    merged = false;
    std::vector<std::size_t> current;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> index;
    auto index_add = [&](std::size_t slot) {
      for (std::uint64_t s : sh[current[slot]]) index[s].push_back(slot);
    };
    auto index_remove = [&](std::size_t slot) {
      for (std::uint64_t s : sh[current[slot]]) {
        auto& v = index[s];
        v.erase(std::remove(v.begin(), v.end(), slot), v.end());
      }
    };
    for (std::size_t rec : reps) {
      if (sh[rec].empty()) {
        current.push_back(rec);
        continue;
      }
      std::unordered_map<std::size_t, std::size_t> shared;
      for (std::uint64_t s : sh[rec]) {
        auto it = index.find(s);
        if (it == index.end()) continue;
        for (std::size_t slot : it->second) ++shared[slot];
      }
      std::size_t best_slot = 0;
      double best = -1.0;
      for (const auto& [slot, n] : shared) {
        const std::size_t other = current[slot];
        const double sim = static_cast<double>(n) /
                           static_cast<double>(sh[rec].size() +
                                               sh[other].size() - n);
        if (sim > best || (sim == best && slot < best_slot)) {
          best = sim;
          best_slot = slot;
        }
      }
      if (best >= config.near_dup_threshold && best > 0.0) {
        merged = true;
        const std::size_t other = current[best_slot];
        if (records[rec].answer_tokens > records[other].answer_tokens) {
          index_remove(best_slot);
          dropped[other] = 1;
          current[best_slot] = rec;
          index_add(best_slot);
        } else {
          dropped[rec] = 1;
        }
      } else {
        current.push_back(rec);
        index_add(current.size() - 1);
      }
    }
    std::sort(current.begin(), current.end());
    reps = std::move(current);
  }
  for (std::size_t i : unique) {
    if (dropped[i]) out.near_duplicates.push_back(records[i]);
  }
  for (std::size_t i : reps) out.kept.push_back(records[i]);
  return out;
}

CleanResult clean_pipeline(const std::vector<QAPair>& records,
                           const CleaningConfig& config, SplitKind kind) {
  config.validate();
  const auto tok = make_tokenizer(config.tokenizer);
  CleanResult out;
  CleaningReport& rep = out.report;
  rep.split = std::string(to_string(kind));
  rep.input_count = records.size();
  rep.tokenizer_name = tok->name();
  rep.seed = config.rng_seed;
  rep.short_drop_probability = config.short_drop_probability;
  rep.min_answer_tokens = config.min_answer_tokens;
  rep.pii_patterns_sha256 = config.pii_patterns.sha256();
  rep.quality_rules_sha256 = config.quality_rules.hash.empty()
                                 ? sha256_hex(config.quality_rules.to_json().dump())
                                 : config.quality_rules.hash;

  // Per-record stages: normalize, scrub, quality.
  std::vector<QAPair> staged(records.begin(), records.end());
  std::vector<std::string> verdict(records.size());
  std::vector<std::size_t> hits(records.size(), 0);
  detail::parallel_for(staged.size(), config.workers, [&](std::size_t i) {
    QAPair& r = staged[i];
    auto q = scrub_pii(normalize_text(r.question), config.pii_patterns);
    auto a = scrub_pii(normalize_text(r.answer), config.pii_patterns);
    hits[i] = q.hits + a.hits;
    r.question = normalize_text(q.text);
    r.answer = normalize_text(a.text);
    r.answer_tokens = count_tokens(r.answer, *tok);
    if (empty_without_masks(r.question, config.pii_patterns) ||
        empty_without_masks(r.answer, config.pii_patterns)) {
      verdict[i] = std::string(kEmptyAfterScrub);
      return;
    }
    const std::string rule = quality_failure(r, config.quality_rules, *tok);
    if (!rule.empty()) verdict[i] = "spam:" + rule;
  });
  std::vector<QAPair> survivors;
  for (std::size_t i = 0; i < staged.size(); ++i) {
    rep.pii_hits += hits[i];
    if (verdict[i].empty()) {
      survivors.push_back(std::move(staged[i]));
    } else if (verdict[i] == kEmptyAfterScrub) {
      ++rep.dropped_by_reason[std::string(kEmptyAfterScrub)];
    } else {
      ++rep.dropped_by_reason[std::string(kSpam)];
      ++rep.spam_by_rule[verdict[i].substr(5)];
    }
  }

  DedupResult d = dedup(survivors, config);
  rep.dropped_by_reason[std::string(kExactDuplicate)] = d.exact_duplicates.size();
  rep.dropped_by_reason[std::string(kNearDuplicate)] = d.near_duplicates.size();

  LengthFilterResult lf = length_filter(d.kept, config, kind);
  rep.dropped_by_reason[std::string(kShortAnswer)] = lf.dropped.size();
  rep.flagged_for_review = lf.flagged.size();

  out.records = std::move(lf.kept);
  out.review_queue = std::move(lf.flagged);
  rep.kept_count = out.records.size();
  rep.discard_rate =
      rep.input_count == 0
          ? 0.0
          : 1.0 - static_cast<double>(rep.kept_count) /
                      static_cast<double>(rep.input_count);
  return out;
}

}  // namespace medcorpus::clean
