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

#include "fixtures.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "medcorpus/unicode.hpp"

namespace fixtures {

namespace {

const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> words = {
      "سلام", "دکتر", "عزیز", "درد", "سر", "معده", "قلب", "فشار", "خون",
      "دارو", "قرص", "آزمایش", "پزشک", "بیمار", "درمان", "علائم", "تب",
      "سرفه", "کودک", "بارداری", "پوست", "چشم", "گوش", "دندان", "کلیه",
      "کبد", "ریه", "استخوان", "عضله", "خواب", "تغذیه", "ورزش", "وزن",
      "قند", "چربی", "حساسیت", "عفونت", "ویروس", "واکسن", "جراحی", "روز",
      "هفته", "ماه", "سال", "لطفا", "ممنون", "خیلی", "کمی", "بعد", "قبل",
      "می‌شود", "نمی‌دانم", "است", "دارم", "باید", "چه", "آیا"};
  return words;
}

// Valid code points worth mixing into normalization fuzz.
const std::vector<char32_t>& pool() {
  static const std::vector<char32_t> cps = [] {
    std::vector<char32_t> v;
    for (char32_t c = 0x0621; c <= 0x064A; ++c) v.push_back(c);   // Arabic letters
    for (char32_t c = 0x064B; c <= 0x0655; ++c) v.push_back(c);   // harakat, hamza marks
    for (char32_t c = 0x0660; c <= 0x0669; ++c) v.push_back(c);   // Arabic-Indic digits
    for (char32_t c = 0x06F0; c <= 0x06F9; ++c) v.push_back(c);   // Persian digits
    for (char32_t c : {0x067E, 0x0686, 0x0698, 0x06A9, 0x06AF, 0x06CC, 0x06C0,
                       0x0622, 0x0623, 0x0624, 0x0625, 0x0626}) {
      v.push_back(c);
    }
    for (char32_t c = 'a'; c <= 'z'; ++c) v.push_back(c);
    for (char32_t c = '0'; c <= '9'; ++c) v.push_back(c);
    for (char32_t c : {U' ', U' ', U' ', U'\n', U'\r', U'\t', U'\v', U'\f',
                       char32_t{0x00A0}, char32_t{0x2009}, char32_t{0x3000}}) {
      v.push_back(c);
    }
    for (char32_t c : {0x200C, 0x200C, 0x200C, 0x200D, 0xFEFF, 0x2028, 0x2029,
                       0x0001, 0x001B, 0x007F, 0x0085, 0x0301, 0x0308}) {
      v.push_back(c);
    }
    for (char32_t c : {U'.', U',', U'!', U'?', U'(', U')', U'[', U']', U'@',
                       char32_t{0x060C}, char32_t{0x061F}, char32_t{0x066A},
                       char32_t{0x00AB}, char32_t{0x00BB}}) {
      v.push_back(c);
    }
    for (char32_t c : {0x00E9, 0x0065, 0x1F600, 0x1F3FD, 0xFB8A, 0xFDF2}) v.push_back(c);
    return v;
  }();
  return cps;
}

}  // namespace

std::string random_unicode(Rng& rng, std::size_t codepoints) {
  std::u32string s;
  for (std::size_t i = 0; i < codepoints; ++i) s.push_back(rng.pick(pool()));
  return medcorpus::unicode::encode_utf8(s);
}

std::string random_bytes(Rng& rng, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s.push_back(static_cast<char>(rng.below(256)));
  return s;
}

std::string persian_words(Rng& rng, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) s.push_back(' ');
    s += rng.pick(vocabulary());
  }
  return s;
}

std::string unique_word(std::uint64_t i) {
  static const std::vector<std::string> letters = {
      "ا", "ب", "پ", "ت", "ث", "ج", "چ", "ح", "خ", "د",
      "ذ", "ر", "ز", "ژ", "س", "ش", "ص", "ض", "ط", "ظ"};
  std::string w = "م";  // fixed lead keeps one-letter words out
  do {
    w += letters[i % letters.size()];
    i /= letters.size();
  } while (i > 0);
  return w;
}

QAPair make_pair(const std::string& id, const std::string& source,
                 const std::string& question, const std::string& answer) {
  static const auto tok = medcorpus::make_tokenizer(medcorpus::kDefaultTokenizer);
  QAPair p;
  p.id = id;
  p.source = source;
  p.question = medcorpus::normalize_text(question);
  p.answer = medcorpus::normalize_text(answer);
  p.answer_tokens = medcorpus::count_tokens(p.answer, *tok);
  return p;
}

QAPair random_record(Rng& rng, std::uint64_t n) {
  static const std::vector<std::string> pieces = {
      "می‌شود", "\n", "[PHONE]", "[EMAIL]", "\"quoted\"", "back\\slash",
      "tab\there", "‌‌", "۱۲۳", "🙂", "<b>", "{q}", "\r\n"};
  QAPair r;
  r.id = "rec-" + std::to_string(n) + "-" + std::to_string(rng.below(1000000));
  r.source = rng.chance(0.5) ? "drhast" : "niniban";
  auto text = [&] {
    std::string s;
    const auto parts = rng.between(0, 12);
    for (std::uint64_t k = 0; k < parts; ++k) {
      s += rng.chance(0.4) ? rng.pick(pieces) : random_unicode(rng, rng.between(0, 8));
    }
    return s;
  };
  r.question = text();
  r.answer = text();
  r.answer_tokens = static_cast<std::int64_t>(rng.below(400));
  static const std::vector<medcorpus::SplitTag> tags = {
      medcorpus::SplitTag::kTrainPool, medcorpus::SplitTag::kTestPool,
      medcorpus::SplitTag::kExternal, medcorpus::SplitTag::kTrain,
      medcorpus::SplitTag::kDev, medcorpus::SplitTag::kTest};
  r.split = rng.pick(tags);
  if (rng.chance(0.5)) {
    r.extras["url"] = "https://example.org/q/" + std::to_string(n);
    r.extras["nested"] = {{"k", rng.below(10)}, {"list", {1, 2, 3}}};
  }
  return r;
}

std::set<RecordId> naive_closure(const medcorpus::sim::SyntheticForum& forum,
                                 const std::set<RecordId>& roots) {
  std::vector<char> in(forum.size(), 0);
  for (RecordId r : roots) in.at(r) = 1;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& rec : forum.records()) {
      if (!in[rec.id]) continue;
      for (RecordId to : rec.related) {
        if (!in.at(to)) {
          in[to] = 1;
          changed = true;
        }
      }
    }
  }
  std::set<RecordId> out;
  for (RecordId i = 0; i < in.size(); ++i) {
    if (in[i]) out.insert(i);
  }
  return out;
}

std::vector<RecordId> CountingSource::list_window() {
  if (window_unavailable) {
    throw medcorpus::crawl::SourceUnavailable("window unavailable");
  }
  return inner_.list_window();
}

medcorpus::crawl::FetchedRecord CountingSource::fetch(RecordId id) {
  {
    std::lock_guard lock(mu_);
    if (unavailable_after && fetched_ >= *unavailable_after) {
      throw medcorpus::crawl::SourceUnavailable("source went away");
    }
    ++fetched_;
    ++counts_[id];
    ++attempts_[id];
    if (permanent_failures.count(id)) {
      throw medcorpus::crawl::RecordNotFound("gone: " + std::to_string(id));
    }
    auto it = transient_failures.find(id);
    if (it != transient_failures.end() && attempts_[id] <= it->second) {
      throw medcorpus::crawl::FetchError("flaky: " + std::to_string(id), true);
    }
  }
  return inner_.fetch(id);
}

std::map<RecordId, int> CountingSource::counts() const {
  std::lock_guard lock(mu_);
  return counts_;
}

int CountingSource::max_count() const {
  std::lock_guard lock(mu_);
  int m = 0;
  for (const auto& [id, n] : counts_) m = std::max(m, n);
  return m;
}

std::size_t CountingSource::total_fetches() const {
  std::lock_guard lock(mu_);
  return fetched_;
}

void MemorySink::store(const medcorpus::crawl::FetchedRecord& r) {
  if (crash_after && records.size() >= *crash_after) {
    throw std::runtime_error("simulated crash");
  }
  records.push_back(r);
}

TempDir::TempDir() {
  static std::atomic<unsigned> counter{0};
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() /
          ("medcorpus-test-" + std::to_string(rd()) + "-" +
           std::to_string(counter++));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace fixtures
