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

#include "medcorpus/trainplan.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <vector>

namespace medcorpus::plan {
namespace {

std::string shortest(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

double round2(double v) { return std::floor(v * 100.0 + 0.5) / 100.0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <class T>
T parse_number(const std::map<std::string, std::string, std::less<>>& kv,
               std::string_view key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw InputError("plan is missing '" + std::string(key) + "'");
  T v{};
  const auto& s = it->second;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw InputError("plan key '" + std::string(key) + "' is not a number: " + s);
  }
  return v;
}

}  // namespace

std::string_view to_string(Stage stage) {
  return stage == Stage::kFinetune ? "finetune" : "instruct";
}

Stage stage_from_string(std::string_view name) {
  if (name == "finetune") return Stage::kFinetune;
  if (name == "instruct") return Stage::kInstruct;
  throw InputError("unknown stage '" + std::string(name) +
                   "' (expected finetune or instruct)");
}

std::string_view to_string(PaddingSide side) {
  return side == PaddingSide::kLeft ? "left" : "right";
}

void TrainPlan::validate() const {
  auto positive = [](auto v, const char* name) {
    if (!(v > 0)) throw ValidationError(std::string(name) + " must be positive");
  };
  positive(epochs, "epochs");
  positive(batch_size, "batch_size");
  positive(grad_accum_steps, "grad_accum_steps");
  positive(learning_rate, "learning_rate");
  positive(max_grad_norm, "max_grad_norm");
  positive(warmup_ratio, "warmup_ratio");
  positive(max_context_length, "max_context_length");
  positive(lora_rank, "lora_rank");
  positive(lora_alpha, "lora_alpha");
  if (!(weight_decay >= 0.0)) throw ValidationError("weight_decay must be >= 0");
  if (!(lora_dropout >= 0.0 && lora_dropout < 1.0)) {
    throw ValidationError("lora_dropout must be in [0, 1)");
  }
  if (optimizer.empty()) throw ValidationError("optimizer is empty");
}

std::int64_t TrainPlan::effective_batch() const {
  return plan::effective_batch(batch_size, grad_accum_steps);
}

std::string TrainPlan::to_cfg() const {
  std::vector<std::pair<std::string, std::string>> kv = {
      {"stage", std::string(to_string(stage))},
      {"epochs", std::to_string(epochs)},
      {"batch_size", std::to_string(batch_size)},
      {"grad_accum_steps", std::to_string(grad_accum_steps)},
      {"effective_batch_size", std::to_string(effective_batch())},
      {"optimizer", optimizer},
      {"learning_rate", shortest(learning_rate)},
      {"max_grad_norm", shortest(max_grad_norm)},
      {"warmup_ratio", shortest(warmup_ratio)},
      {"weight_decay", shortest(weight_decay)},
      {"max_context_length", std::to_string(max_context_length)},
      {"padding_side", std::string(to_string(padding_side))},
      {"lora_rank", std::to_string(lora_rank)},
      {"lora_alpha", std::to_string(lora_alpha)},
      {"lora_dropout", shortest(lora_dropout)},
      {"target_modules", target_modules},
  };
  std::string out = "# medcorpus train plan v1\n";
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

TrainPlan TrainPlan::from_cfg(std::string_view text) {
  std::map<std::string, std::string, std::less<>> kv;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = trim(text.substr(
        pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw InputError("plan line without '=': " + std::string(line));
    }
    kv[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
  }
  auto str = [&](std::string_view key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw InputError("plan is missing '" + std::string(key) + "'");
    return it->second;
  };
  TrainPlan p;
  p.stage = stage_from_string(str("stage"));
  p.epochs = parse_number<std::int64_t>(kv, "epochs");
  p.batch_size = parse_number<std::int64_t>(kv, "batch_size");
  p.grad_accum_steps = parse_number<std::int64_t>(kv, "grad_accum_steps");
  p.optimizer = str("optimizer");
  p.learning_rate = parse_number<double>(kv, "learning_rate");
  p.max_grad_norm = parse_number<double>(kv, "max_grad_norm");
  p.warmup_ratio = parse_number<double>(kv, "warmup_ratio");
  p.weight_decay = parse_number<double>(kv, "weight_decay");
  p.max_context_length = parse_number<std::int64_t>(kv, "max_context_length");
  const std::string pad = str("padding_side");
  if (pad == "left") p.padding_side = PaddingSide::kLeft;
  else if (pad == "right") p.padding_side = PaddingSide::kRight;
  else throw InputError("padding_side must be left or right");
  p.lora_rank = parse_number<std::int64_t>(kv, "lora_rank");
  p.lora_alpha = parse_number<std::int64_t>(kv, "lora_alpha");
  p.lora_dropout = parse_number<double>(kv, "lora_dropout");
  p.target_modules = str("target_modules");
  p.validate();
  return p;
}

TrainPlan emit_train_plan(Stage stage) {
  TrainPlan p;
  p.stage = stage;
  p.epochs = 1;
  p.batch_size = 2;
  p.grad_accum_steps = 16;
  p.optimizer = "AdamW";
  p.learning_rate = 5e-4;
  p.max_grad_norm = 0.3;
  p.warmup_ratio = 0.03;
  p.max_context_length = 1024;
  p.padding_side = PaddingSide::kLeft;
  p.target_modules = "all linear layers";
  if (stage == Stage::kFinetune) {
    p.weight_decay = 0.1;
    p.lora_rank = 8;
    p.lora_alpha = 16;
    p.lora_dropout = 0.05;
  } else {
    p.weight_decay = 0.5;
    p.lora_rank = 2;
    p.lora_alpha = 2;
    p.lora_dropout = 0.4;
  }
  p.validate();
  return p;
}

TrainPlan emit_train_plan(std::string_view stage) {
  return emit_train_plan(stage_from_string(stage));
}

std::int64_t effective_batch(std::int64_t batch_size,
                             std::int64_t grad_accum_steps) {
  if (batch_size <= 0 || grad_accum_steps <= 0) {
    throw InputError("batch size and accumulation steps must be positive");
  }
  return batch_size * grad_accum_steps;
}

CarbonEstimate carbon_estimate(double power_watts, double hours,
                               double intensity_kg_per_kwh) {
  if (!(power_watts >= 0.0) || !(hours >= 0.0) || !(intensity_kg_per_kwh >= 0.0)) {
    throw InputError("carbon estimate inputs must be non-negative");
  }
  CarbonEstimate c;
  c.power_watts = power_watts;
  c.hours = hours;
  c.intensity_kg_per_kwh = intensity_kg_per_kwh;
  c.energy_kwh = power_watts * hours / 1000.0;
  c.co2_kg = c.energy_kwh * intensity_kg_per_kwh;
  c.energy_kwh_reported = round2(c.energy_kwh);
  c.co2_kg_reported = round2(c.co2_kg);
  return c;
}

}  // namespace medcorpus::plan
