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

#include <cmath>

#include "fixtures.hpp"
#include "medcorpus/errors.hpp"
#include "medcorpus/evalkit.hpp"

using namespace medcorpus;
using namespace medcorpus::eval;

namespace {

std::string item_line(const std::string& id, const std::string& subset, int key,
                      int options = 4) {
  nlohmann::json j;
  j["id"] = id;
  j["subset"] = subset;
  j["question"] = "سوال " + id;
  j["options"] = nlohmann::json::array();
  for (int i = 0; i < options; ++i) j["options"].push_back("گزینه " + std::to_string(i));
  j["answer"] = key;
  return j.dump() + "\n";
}

// `correct` of `total` items answered right, the rest wrong.
std::pair<std::vector<BenchmarkItem>, std::map<std::string, std::string>> fixture(
    const std::string& subset, std::uint64_t correct, std::uint64_t total) {
  std::string text;
  std::map<std::string, std::string> responses;
  const char* letters[] = {"A", "B", "C", "D"};
  for (std::uint64_t i = 0; i < total; ++i) {
    const int key = static_cast<int>(i % 4);
    const std::string id = subset + "-" + std::to_string(i);
    text += item_line(id, subset, key);
    responses[id] = std::string("پاسخ ") + letters[i < correct ? key : (key + 1) % 4];
  }
  return {parse_benchmark(text), responses};
}

const std::vector<std::uint64_t> kTotals = {135, 100, 173, 265, 272, 144};

std::vector<SubsetScore> row(const std::vector<double>& accuracies) {
  std::vector<SubsetScore> out;
  for (std::size_t i = 0; i < accuracies.size(); ++i) {
    out.push_back({"s" + std::to_string(i), 0, kTotals[i], accuracies[i]});
  }
  return out;
}

// Independent oracle: integer-weighted sum in long double.
long double oracle(const std::vector<double>& acc) {
  long double num = 0, den = 0;
  for (std::size_t i = 0; i < acc.size(); ++i) {
    num += static_cast<long double>(acc[i]) * kTotals[i];
    den += kTotals[i];
  }
  return num / den;
}

}  // namespace

TEST_CASE("load_benchmark") {
  fixtures::TempDir tmp;
  fixtures::write_text(tmp.file("b.jsonl"), item_line("1", "anatomy", 0) + item_line("2", "anatomy", 3));
  const auto items = load_benchmark(tmp.file("b.jsonl"));
  REQUIRE(items.size() == 2);
  CHECK(items[1].answer_key == 3);
  CHECK(items[0].options[2] == "گزینه 2");

  auto expect_error = [](const std::string& text, const std::string& needle) {
    try {
      parse_benchmark(text);
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_error(item_line("q3", "a", 0, 3), "q3");
  expect_error(item_line("q5", "a", 0, 5), "q5");
  expect_error(item_line("k", "a", 4), "k");
  expect_error(item_line("k", "a", -1), "k");
  expect_error(item_line("dup", "a", 0) + item_line("dup", "b", 1), "dup");
  CHECK_THROWS_AS(parse_benchmark("{nope\n"), ParseError);
  CHECK(parse_benchmark("").empty());
}

TEST_CASE("extract_choice") {
  CHECK(extract_choice("گزینه B") == 1);
  CHECK(extract_choice("پاسخ: الف") == 0);
  CHECK(extract_choice("cannot determine") == std::nullopt);
  CHECK(extract_choice("") == std::nullopt);
  CHECK(extract_choice("D") == 3);
  CHECK(extract_choice("(c)") == std::nullopt);  // lower case is not an option letter
  CHECK(extract_choice("answer: C.") == 2);
  CHECK(extract_choice("گزینه د صحیح است") == 3);
  CHECK(extract_choice("گزینه ج") == 2);
  CHECK(extract_choice("گزینه ۲") == 1);
  CHECK(extract_choice("گزینه ٣") == 2);
  CHECK(extract_choice("option 4") == 3);
  CHECK(extract_choice("12 گزینه") == std::nullopt);  // 12 is not an option number
  CHECK(extract_choice("بدن") == std::nullopt);        // ب inside a word
  // Letters outrank Persian ordinals, which outrank digits.
  CHECK(extract_choice("1 یا ب یا C") == 2);
  CHECK(extract_choice("3 یا ب") == 1);
  CHECK(extract_choice("\xff\xfe B") == 1);  // invalid UTF-8 still parses
}

TEST_CASE("property: extract_choice is total") {
  fixtures::Rng rng(5);
  for (int i = 0; i < 5000; ++i) {
    const std::string s = rng.chance(0.5) ? fixtures::random_unicode(rng, rng.below(30))
                                          : fixtures::random_bytes(rng, rng.below(30));
    const auto c = extract_choice(s);
    if (c) {
      CHECK(*c >= 0);
      CHECK(*c <= 3);
    }
  }
}

TEST_CASE("score_mcq") {
  {
    auto [items, resp] = fixture("x", 5, 5);
    const auto s = score_mcq(items, resp);
    REQUIRE(s.size() == 1);
    CHECK(s[0].accuracy == 100.0);
  }
  {
    auto [items, resp] = fixture("x", 3, 5);
    CHECK(score_mcq(items, resp)[0].accuracy == 60.0);
  }
  {
    auto [items, resp] = fixture("anatomy", 65, 135);
    const auto s = score_mcq(items, resp)[0];
    CHECK(s.correct == 65);
    CHECK(s.total == 135);
    CHECK(s.accuracy == 48.15);
    CHECK(std::abs(s.accuracy - 48.14) <= 0.01 + 1e-9);
  }
  {
    // Missing response abstains, unknown id warns.
    auto [items, resp] = fixture("x", 4, 4);
    resp.erase(items[0].id);
    resp["ghost"] = "A";
    std::vector<std::string> warnings;
    const auto s = score_mcq(items, resp, &warnings);
    CHECK(s[0].correct == 3);
    CHECK(s[0].total == 4);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("ghost") != std::string::npos);
  }
  CHECK(rounded_accuracy(128, 272) == 47.06);
  // Published as 47.05; agree within the table's last digit.
  CHECK(std::abs(rounded_accuracy(128, 272) - 47.05) <= 0.01 + 1e-9);
  CHECK(rounded_accuracy(1, 8) == 12.5);
  CHECK(rounded_accuracy(1, 3) == 33.33);
  CHECK(rounded_accuracy(2, 3) == 66.67);
  CHECK(rounded_accuracy(1, 800) == 0.13);  // 0.125 rounds up
}

TEST_CASE("property: score_mcq is bounded and order-free") {
  fixtures::Rng rng(8);
  const std::vector<std::string> subsets = {"anatomy", "college_biology", "ibmsee"};
  const std::vector<std::string> answers = {"A", "B", "C", "D", "الف", "۳", "هیچ", ""};
  for (int trial = 0; trial < 100; ++trial) {
    std::string text;
    std::vector<std::pair<std::string, std::string>> resp;
    for (std::uint64_t i = rng.below(50) + 1; i > 0; --i) {
      const std::string id = "i" + std::to_string(i);
      text += item_line(id, rng.pick(subsets), static_cast<int>(rng.below(4)));
      if (rng.chance(0.9)) resp.emplace_back(id, rng.pick(answers));
    }
    const auto items = parse_benchmark(text);
    const std::map<std::string, std::string> a(resp.begin(), resp.end());
    std::map<std::string, std::string> b;
    for (auto it = resp.rbegin(); it != resp.rend(); ++it) b.insert(*it);
    auto shuffled = items;
    for (std::size_t i = shuffled.size() - 1; i > 0; --i) {
      std::swap(shuffled[i], shuffled[rng.below(i + 1)]);
    }
    const auto s = score_mcq(items, a);
    CHECK(score_mcq(shuffled, b) == s);
    for (const auto& x : s) {
      CHECK(x.accuracy >= 0.0);
      CHECK(x.accuracy <= 100.0);
      CHECK(x.correct <= x.total);
    }
    CHECK(std::is_sorted(s.begin(), s.end(), [](const auto& l, const auto& r) {
      return l.subset < r.subset;
    }));
  }
}

TEST_CASE("weighted_average reproduces the reported MMLU averages") {
  const std::vector<double> ours = {48.14, 53.0, 43.93, 55.47, 47.05, 47.22};
  const std::vector<double> base = {40.74, 49.0, 44.51, 52.07, 45.58, 45.14};
  const double w_ours = weighted_average(row(ours));
  const double w_base = weighted_average(row(base));
  CHECK(std::abs(w_ours - static_cast<double>(oracle(ours))) < 1e-9);
  CHECK(std::abs(w_base - static_cast<double>(oracle(base))) < 1e-9);
  CHECK(std::abs(w_ours - 49.31) <= 0.01);
  CHECK(std::abs(w_base - 46.64) <= 0.01);
  CHECK(std::abs((w_ours - w_base) - 2.67) <= 0.01);
  // Two more columns of the same table.
  CHECK(std::abs(weighted_average(row({25.18, 34.0, 20.23, 25.28, 23.89, 32.63})) - 25.89) <= 0.01);
  CHECK(std::abs(weighted_average(row({14.07, 20.0, 19.08, 27.54, 17.27, 18.75})) - 20.11) <= 0.01);
  // Subset mean would not reproduce it.
  double mean = 0;
  for (double a : ours) mean += a / 6;
  CHECK(std::abs(mean - 49.31) > 0.01);

  CHECK_THROWS_AS(weighted_average({}), InputError);
  CHECK(weighted_average({{"a", 1, 10, 10.0}, {"b", 9, 10, 90.0}}) == doctest::Approx(50.0));
}

TEST_CASE("property: weighted_average bounds") {
  fixtures::Rng rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<SubsetScore> s;
    const bool equal = rng.chance(0.3);
    const auto t0 = 1 + rng.below(300);
    for (std::uint64_t i = rng.below(8) + 1; i > 0; --i) {
      const auto t = equal ? t0 : 1 + rng.below(300);
      const auto c = rng.below(t + 1);
      s.push_back({"s" + std::to_string(i), c, t, rounded_accuracy(c, t)});
    }
    const double w = weighted_average(s);
    double lo = 100, hi = 0, mean = 0;
    for (const auto& x : s) {
      lo = std::min(lo, x.accuracy);
      hi = std::max(hi, x.accuracy);
      mean += x.accuracy / static_cast<double>(s.size());
    }
    CHECK(w >= lo - 1e-9);
    CHECK(w <= hi + 1e-9);
    if (equal) CHECK(w == doctest::Approx(mean).epsilon(1e-12));
  }
}

TEST_CASE("pass_fail") {
  CHECK(pass_fail(38.69));
  CHECK_FALSE(pass_fail(34.52));
  CHECK(pass_fail(36.0));
  CHECK_FALSE(pass_fail(35.99));
  CHECK_THROWS_AS(pass_fail(-1), ValidationError);
  CHECK_THROWS_AS(pass_fail(100.5), ValidationError);
  CHECK_THROWS_AS(pass_fail(std::nan("")), ValidationError);
  double prev = 0;
  bool passed = false;
  for (int i = 0; i <= 10000; ++i) {
    const double s = i / 100.0;
    const bool p = pass_fail(s);
    CHECK((!passed || p));  // monotone
    passed = p;
    prev = s;
  }
  CHECK(prev == 100.0);
}

TEST_CASE("win_rate") {
  auto make = [](int w, int l, int t) {
    std::vector<JudgeVerdict> v;
    for (int i = 0; i < w; ++i) v.push_back({"w" + std::to_string(i), Verdict::kWin});
    for (int i = 0; i < l; ++i) v.push_back({"l" + std::to_string(i), Verdict::kLoss});
    for (int i = 0; i < t; ++i) v.push_back({"t" + std::to_string(i), Verdict::kTie});
    return v;
  };
  auto r = win_rate(make(10, 0, 0));
  CHECK(r.win_pct == 100.0);
  CHECK(r.loss_pct == 0.0);
  CHECK(r.tie_pct == 0.0);
  r = win_rate(make(50, 30, 20));
  CHECK(r.win_pct == doctest::Approx(50.0));
  CHECK(r.loss_pct == doctest::Approx(30.0));
  CHECK(r.tie_pct == doctest::Approx(20.0));
  r = win_rate(make(1, 1, 0));
  CHECK(r.win_pct == 50.0);
  CHECK(r.loss_pct == 50.0);
  CHECK_THROWS_AS(win_rate({}), InputError);
  CHECK(verdict_from_string("tie") == Verdict::kTie);
  CHECK(to_string(Verdict::kWin) == "win");
  CHECK_THROWS_AS(verdict_from_string("draw"), ValidationError);

  fixtures::Rng rng(2);
  for (int trial = 0; trial < 300; ++trial) {
    auto v = make(static_cast<int>(rng.below(30)), static_cast<int>(rng.below(30)),
                  static_cast<int>(rng.below(30)) + 1);
    const auto a = win_rate(v);
    for (std::size_t i = v.size() - 1; i > 0; --i) std::swap(v[i], v[rng.below(i + 1)]);
    const auto b = win_rate(v);
    CHECK(a.win_pct == b.win_pct);
    CHECK(a.loss_pct == b.loss_pct);
    CHECK(a.tie_pct == b.tie_pct);
    CHECK(std::abs(a.win_pct + a.loss_pct + a.tie_pct - 100.0) <= 0.01);
  }
}

TEST_CASE("latency_summary") {
  auto s = latency_summary({{"a", 10.0}});
  CHECK(s.mean == 10.0);
  CHECK(s.median == 10.0);
  CHECK(s.p95 == 10.0);
  std::vector<LatencySample> hundred;
  for (int i = 100; i >= 1; --i) hundred.push_back({std::to_string(i), static_cast<double>(i)});
  s = latency_summary(hundred);
  CHECK(s.median == 50.5);
  CHECK(s.p95 == 95.0);
  CHECK(s.mean == 50.5);
  s = latency_summary({{"a", 3.0}, {"b", 3.0}, {"c", 3.0}});
  CHECK(s.mean == 3.0);
  CHECK(s.median == 3.0);
  CHECK(s.p95 == 3.0);
  CHECK_THROWS_AS(latency_summary({}), InputError);
  CHECK_THROWS_AS(latency_summary({{"a", -1.0}}), ValidationError);
}

TEST_CASE("report output") {
  auto [items, resp] = fixture("anatomy", 65, 135);
  auto [exam, exam_resp] = fixture("ibmsee", 65, 168);
  items.insert(items.end(), exam.begin(), exam.end());
  resp.insert(exam_resp.begin(), exam_resp.end());
  ModelReport m{"ours", score_mcq(items, resp), LatencySummary{10.0, 10.0, 12.0}};
  CHECK(m.mmlu().size() == 1);
  REQUIRE(m.exam().has_value());
  CHECK(m.exam()->accuracy == 38.69);
  const auto csv = report_csv({m});
  CHECK(csv.rfind("model,subset,correct,total,accuracy\n", 0) == 0);
  CHECK(csv.find("ours,anatomy,65,135,48.15") != std::string::npos);
  CHECK(csv.find("ours,ibmsee,65,168,38.69") != std::string::npos);
  CHECK(csv.find("mmlu_avg") != std::string::npos);
  const auto table = report_table({m});
  CHECK(table.find("MMLU(avg)") != std::string::npos);
  CHECK(table.find("(pass)") != std::string::npos);
  CHECK(table.find("inference time") != std::string::npos);
}

TEST_CASE("loaders") {
  fixtures::TempDir tmp;
  fixtures::write_text(tmp.file("r.jsonl"), R"({"id": "1", "response": "B"})" "\n");
  CHECK(load_responses(tmp.file("r.jsonl")).at("1") == "B");
  fixtures::write_text(tmp.file("v.jsonl"), R"({"id": "1", "verdict": "win"})" "\n"
                                            R"({"id": "2", "verdict": "huh"})" "\n");
  CHECK_THROWS(load_verdicts(tmp.file("v.jsonl")));
  fixtures::write_text(tmp.file("l.jsonl"), R"({"id": "1", "seconds": 9.5})" "\n");
  CHECK(load_latency(tmp.file("l.jsonl"))[0].seconds == 9.5);
}
