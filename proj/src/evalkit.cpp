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

#include "medcorpus/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include <json.hpp>

#include "medcorpus/fileio.hpp"
#include "medcorpus/unicode.hpp"

namespace medcorpus::eval {
namespace {

template <class Fn>
void for_each_json_line(std::string_view text, std::string_view name, Fn&& fn) {
  std::size_t pos = 0;
  std::size_t line = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::size_t stop = nl == std::string_view::npos ? text.size() : nl;
    ++line;
    std::string_view row = text.substr(pos, stop - pos);
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    if (!row.empty()) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(row);
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string(name) + ":" + std::to_string(line) + ": " +
                             e.what(),
                         pos, line);
      }
      try {
        fn(j, line);
      } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string(name) + ":" + std::to_string(line) +
                              ": " + e.what());
      }
    }
    pos = stop + 1;
  }
}

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

bool joins_word(char32_t c) {
  return c == unicode::kZwnj || unicode::is_letter(c) ||
         unicode::digit_value(c) >= 0;
}

// Index of the first standalone occurrence of any needle, scanning left to
// right; -1 when none.
int first_standalone(const std::u32string& text,
                     const std::vector<std::u32string>& needles) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    for (std::size_t k = 0; k < needles.size(); ++k) {
      const auto& n = needles[k];
      if (text.compare(i, n.size(), n) != 0) continue;
      const bool left_ok = i == 0 || !joins_word(text[i - 1]);
      const std::size_t end = i + n.size();
      const bool right_ok = end >= text.size() || !joins_word(text[end]);
      if (left_ok && right_ok) return static_cast<int>(k);
    }
  }
  return -1;
}

}  // namespace

std::vector<BenchmarkItem> parse_benchmark(std::string_view text,
                                           std::string_view name) {
  std::vector<BenchmarkItem> out;
  std::set<std::string> ids;
  for_each_json_line(text, name, [&](const nlohmann::json& j, std::size_t line) {
    const std::string where = std::string(name) + ":" + std::to_string(line);
    if (!j.is_object()) throw ValidationError(where + ": not an object");
    BenchmarkItem item;
    item.id = j.at("id").get<std::string>();
    const std::string tag = where + ": item '" + item.id + "'";
    item.subset = j.at("subset").get<std::string>();
    item.question = j.at("question").get<std::string>();
    const auto& opts = j.at("options");
    if (!opts.is_array() || opts.size() != 4) {
      throw ValidationError(tag + " needs exactly 4 options, has " +
                            std::to_string(opts.is_array() ? opts.size() : 0));
    }
    for (std::size_t k = 0; k < 4; ++k) item.options[k] = opts[k].get<std::string>();
    const auto& key = j.at("answer");
    if (!key.is_number_integer() || key.get<std::int64_t>() < 0 ||
        key.get<std::int64_t>() > 3) {
      throw ValidationError(tag + " has answer key out of range 0-3");
    }
    item.answer_key = key.get<int>();
    if (!ids.insert(item.id).second) {
      throw ValidationError(where + ": duplicate item id '" + item.id + "'");
    }
    out.push_back(std::move(item));
  });
  return out;
}

std::vector<BenchmarkItem> load_benchmark(const std::string& path) {
  return parse_benchmark(read_file(path), path);
}

std::optional<int> extract_choice(std::string_view response) {
  const std::u32string text = unicode::decode_utf8_lenient(response);
  static const std::vector<std::u32string> latin = {U"A", U"B", U"C", U"D"};
  static const std::vector<std::u32string> persian = {
      U"الف", U"ب", U"ج", U"د"};
  static const std::vector<std::u32string> digits = {
      U"1", U"2", U"3", U"4",
      U"۱", U"۲", U"۳", U"۴",
      U"١", U"٢", U"٣", U"٤"};
  if (int k = first_standalone(text, latin); k >= 0) return k;
  if (int k = first_standalone(text, persian); k >= 0) return k;
  if (int k = first_standalone(text, digits); k >= 0) return k % 4;
  return std::nullopt;
}

double rounded_accuracy(std::uint64_t correct, std::uint64_t total) {
  if (total == 0) throw InputError("accuracy of an empty subset");
  if (correct > total) throw ValidationError("correct exceeds total");
  const std::uint64_t hundredths = (20000 * correct + total) / (2 * total);
  return static_cast<double>(hundredths) / 100.0;
}

std::vector<SubsetScore> score_mcq(
    const std::vector<BenchmarkItem>& items,
    const std::map<std::string, std::string>& responses,
    std::vector<std::string>* warnings) {
  std::map<std::string, SubsetScore> by_subset;
  std::set<std::string> known;
  for (const auto& item : items) {
    known.insert(item.id);
    auto& s = by_subset[item.subset];
    s.subset = item.subset;
    ++s.total;
    const auto it = responses.find(item.id);
    if (it == responses.end()) continue;
    const auto choice = extract_choice(it->second);
    if (choice && *choice == item.answer_key) ++s.correct;
  }
  if (warnings) {
    for (const auto& [id, text] : responses) {
      if (!known.count(id)) warnings->push_back("response for unknown item '" + id + "' ignored");
    }
  }
  std::vector<SubsetScore> out;
  for (auto& [name, s] : by_subset) {
    s.accuracy = rounded_accuracy(s.correct, s.total);
    out.push_back(std::move(s));
  }
  return out;
}

double weighted_average(const std::vector<SubsetScore>& scores) {
  if (scores.empty()) throw InputError("weighted average of no subsets");
  double num = 0.0;
  std::uint64_t den = 0;
  for (const auto& s : scores) {
    num += s.accuracy * static_cast<double>(s.total);
    den += s.total;
  }
  if (den == 0) throw InputError("weighted average over zero questions");
  return num / static_cast<double>(den);
}

bool pass_fail(double score, double threshold) {
  if (!(score >= 0.0 && score <= 100.0)) {
    throw ValidationError("score " + fmt2(score) + " outside [0, 100]");
  }
  return score >= threshold;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kWin: return "win";
    case Verdict::kLoss: return "loss";
    case Verdict::kTie: return "tie";
  }
  return "tie";
}

Verdict verdict_from_string(std::string_view s) {
  if (s == "win") return Verdict::kWin;
  if (s == "loss") return Verdict::kLoss;
  if (s == "tie") return Verdict::kTie;
  throw ValidationError("unknown verdict '" + std::string(s) + "'");
}

WinRate win_rate(const std::vector<JudgeVerdict>& verdicts) {
  if (verdicts.empty()) throw InputError("win rate of no verdicts");
  std::uint64_t w = 0, l = 0, t = 0;
  for (const auto& v : verdicts) {
    if (v.verdict == Verdict::kWin) ++w;
    else if (v.verdict == Verdict::kLoss) ++l;
    else ++t;
  }
  const double n = static_cast<double>(verdicts.size());
  return {100.0 * static_cast<double>(w) / n, 100.0 * static_cast<double>(l) / n,
          100.0 * static_cast<double>(t) / n};
}

LatencySummary latency_summary(const std::vector<LatencySample>& samples) {
  if (samples.empty()) throw InputError("latency summary of no samples");
  std::vector<double> v;
  v.reserve(samples.size());
  for (const auto& s : samples) {
    if (!(s.seconds >= 0.0)) {
      throw ValidationError("negative latency for '" + s.id + "'");
    }
    v.push_back(s.seconds);
  }
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  LatencySummary out;
  double sum = 0.0;
  for (double x : v) sum += x;
  out.mean = sum / static_cast<double>(n);
  out.median = n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
  const std::size_t rank = (95 * n + 99) / 100;  // ceil(0.95 n)
  out.p95 = v[std::max<std::size_t>(rank, 1) - 1];
  return out;
}

std::map<std::string, std::string> load_responses(const std::string& path) {
  std::map<std::string, std::string> out;
  for_each_json_line(read_file(path), path,
                     [&](const nlohmann::json& j, std::size_t) {
                       out[j.at("id").get<std::string>()] =
                           j.at("response").get<std::string>();
                     });
  return out;
}

std::vector<JudgeVerdict> load_verdicts(const std::string& path) {
  std::vector<JudgeVerdict> out;
  for_each_json_line(read_file(path), path,
                     [&](const nlohmann::json& j, std::size_t) {
                       out.push_back({j.at("id").get<std::string>(),
                                      verdict_from_string(
                                          j.at("verdict").get<std::string>())});
                     });
  return out;
}

std::vector<LatencySample> load_latency(const std::string& path) {
  std::vector<LatencySample> out;
  for_each_json_line(read_file(path), path,
                     [&](const nlohmann::json& j, std::size_t) {
                       out.push_back({j.at("id").get<std::string>(),
                                      j.at("seconds").get<double>()});
                     });
  return out;
}

std::vector<SubsetScore> ModelReport::mmlu() const {
  std::vector<SubsetScore> out;
  for (const auto& s : scores) {
    if (s.subset != kExamSubset) out.push_back(s);
  }
  return out;
}

std::optional<SubsetScore> ModelReport::exam() const {
  for (const auto& s : scores) {
    if (s.subset == kExamSubset) return s;
  }
  return std::nullopt;
}

std::string report_csv(const std::vector<ModelReport>& models,
                       double threshold) {
  std::ostringstream out;
  out << "model,subset,correct,total,accuracy\n";
  for (const auto& m : models) {
    for (const auto& s : m.scores) {
      out << m.model << ',' << s.subset << ',' << s.correct << ',' << s.total
          << ',' << fmt2(s.accuracy) << '\n';
    }
    const auto mm = m.mmlu();
    if (!mm.empty()) {
      std::uint64_t c = 0, t = 0;
      for (const auto& s : mm) c += s.correct, t += s.total;
      out << m.model << ",mmlu_avg," << c << ',' << t << ','
          << fmt2(weighted_average(mm)) << '\n';
    }
    if (const auto ex = m.exam()) {
      out << m.model << ",exam_pass,,," << (pass_fail(ex->accuracy, threshold) ? "pass" : "fail")
          << '\n';
    }
  }
  return out.str();
}

std::string report_table(const std::vector<ModelReport>& models,
                         double threshold) {
  std::vector<std::string> subsets;
  for (const auto& m : models) {
    for (const auto& s : m.mmlu()) {
      if (std::find(subsets.begin(), subsets.end(), s.subset) == subsets.end()) {
        subsets.push_back(s.subset);
      }
    }
  }
  std::sort(subsets.begin(), subsets.end());

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> head = {"Benchmark"};
  for (const auto& m : models) head.push_back(m.model);
  rows.push_back(head);
  auto cell_for = [](const ModelReport& m, const std::string& subset) {
    for (const auto& s : m.scores) {
      if (s.subset == subset) return fmt2(s.accuracy);
    }
    return std::string("-");
  };
  for (const auto& sub : subsets) {
    std::vector<std::string> r = {sub};
    for (const auto& m : models) r.push_back(cell_for(m, sub));
    rows.push_back(r);
  }
  std::vector<std::string> avg = {"MMLU(avg)"};
  for (const auto& m : models) {
    const auto mm = m.mmlu();
    avg.push_back(mm.empty() ? "-" : fmt2(weighted_average(mm)));
  }
  rows.push_back(avg);
  bool any_exam = false;
  for (const auto& m : models) any_exam = any_exam || m.exam().has_value();
  if (any_exam) {
    std::vector<std::string> ex = {"IBMSEE"};
    for (const auto& m : models) {
      const auto e = m.exam();
      ex.push_back(e ? fmt2(e->accuracy) +
                           (pass_fail(e->accuracy, threshold) ? " (pass)" : " (fail)")
                     : "-");
    }
    rows.push_back(ex);
  }
  bool any_latency = false;
  for (const auto& m : models) any_latency = any_latency || m.latency.has_value();
  if (any_latency) {
    std::vector<std::string> lat = {"inference time (s)"};
    for (const auto& m : models) {
      lat.push_back(m.latency ? fmt2(m.latency->mean) : "-");
    }
    rows.push_back(lat);
  }

  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  std::ostringstream out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      if (c) out << "  ";
      out << rows[i][c];
      if (c + 1 < rows[i].size()) out << std::string(width[c] - rows[i][c].size(), ' ');
    }
    out << '\n';
    if (i == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w;
      out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
    }
  }
  return out.str();
}

}  // namespace medcorpus::eval
