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

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "medcorpus/errors.hpp"

namespace medcorpus::eval {

struct BenchmarkItem {
  std::string id;
  std::string subset;
  std::string question;
  std::array<std::string, 4> options;
  int answer_key = 0;

  bool operator==(const BenchmarkItem&) const = default;
};

// {"id", "subset", "question", "options": [4], "answer": 0-3}, one per line.
// Throws ValidationError naming the item, ParseError on bad JSON.
std::vector<BenchmarkItem> load_benchmark(const std::string& path);
std::vector<BenchmarkItem> parse_benchmark(std::string_view text,
                                           std::string_view name = "<input>");

// Option index 0-3, or nullopt for abstain. Never throws.
// Priority: standalone A-D, then standalone الف/ب/ج/د, then standalone 1-4
// in ASCII, Persian or Arabic-Indic digits. First hit of a rule wins.
std::optional<int> extract_choice(std::string_view response);

struct SubsetScore {
  std::string subset;
  std::uint64_t correct = 0;
  std::uint64_t total = 0;
  double accuracy = 0.0;  // percent, 2 decimals, half-up

  bool operator==(const SubsetScore&) const = default;
};

// 100 c / t rounded half-up to 2 decimals, in exact integer arithmetic.
double rounded_accuracy(std::uint64_t correct, std::uint64_t total);

// Per-subset scores sorted by subset name. Missing responses abstain and
// score as wrong. Responses for unknown ids are ignored and reported in
// `warnings` when given.
std::vector<SubsetScore> score_mcq(
    const std::vector<BenchmarkItem>& items,
    const std::map<std::string, std::string>& responses,
    std::vector<std::string>* warnings = nullptr);

// Question-count-weighted mean of subset accuracies, unrounded.
double weighted_average(const std::vector<SubsetScore>& scores);

inline constexpr double kPassThreshold = 36.0;

// score >= threshold. Throws ValidationError outside [0, 100].
bool pass_fail(double score, double threshold = kPassThreshold);

enum class Verdict { kWin, kLoss, kTie };
std::string_view to_string(Verdict v);
Verdict verdict_from_string(std::string_view s);

struct JudgeVerdict {
  std::string id;
  Verdict verdict = Verdict::kTie;
};

struct WinRate {
  double win_pct = 0.0;
  double loss_pct = 0.0;
  double tie_pct = 0.0;
};

// Ties are their own bucket. Throws InputError on an empty list.
WinRate win_rate(const std::vector<JudgeVerdict>& verdicts);

struct LatencySample {
  std::string id;
  double seconds = 0.0;
};

struct LatencySummary {
  double mean = 0.0;
  double median = 0.0;
  double p95 = 0.0;  // nearest rank
};

LatencySummary latency_summary(const std::vector<LatencySample>& samples);

// {"id", "response"} / {"id", "verdict"} / {"id", "seconds"} lines.
std::map<std::string, std::string> load_responses(const std::string& path);
std::vector<JudgeVerdict> load_verdicts(const std::string& path);
std::vector<LatencySample> load_latency(const std::string& path);

// Exam subset kept apart from the MMLU average.
inline constexpr std::string_view kExamSubset = "ibmsee";

struct ModelReport {
  std::string model;
  std::vector<SubsetScore> scores;  // may include the exam subset
  std::optional<LatencySummary> latency;

  std::vector<SubsetScore> mmlu() const;
  std::optional<SubsetScore> exam() const;
};

// model,subset,correct,total,accuracy with avg and pass rows.
std::string report_csv(const std::vector<ModelReport>& models,
                       double threshold = kPassThreshold);
// One row per subset, one column per model.
std::string report_table(const std::vector<ModelReport>& models,
                         double threshold = kPassThreshold);

}  // namespace medcorpus::eval
