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

#include <cstdint>
#include <string>
#include <string_view>

#include "medcorpus/errors.hpp"

namespace medcorpus::plan {

enum class Stage { kFinetune, kInstruct };
std::string_view to_string(Stage stage);
// "finetune" or "instruct"; throws InputError otherwise.
Stage stage_from_string(std::string_view name);

enum class PaddingSide { kLeft, kRight };
std::string_view to_string(PaddingSide side);

struct TrainPlan {
  Stage stage = Stage::kFinetune;
  std::int64_t epochs = 1;
  std::int64_t batch_size = 1;
  std::int64_t grad_accum_steps = 1;
  std::string optimizer;
  double learning_rate = 0.0;
  double max_grad_norm = 0.0;
  double warmup_ratio = 0.0;
  double weight_decay = 0.0;
  std::int64_t max_context_length = 0;
  PaddingSide padding_side = PaddingSide::kLeft;
  std::int64_t lora_rank = 0;
  std::int64_t lora_alpha = 0;
  double lora_dropout = 0.0;
  std::string target_modules;

  bool operator==(const TrainPlan&) const = default;

  // Throws ValidationError.
  void validate() const;
  std::int64_t effective_batch() const;
  // Flat "key = value" lines in a fixed order; floats in shortest
  // round-trip form.
  std::string to_cfg() const;
  static TrainPlan from_cfg(std::string_view text);
};

TrainPlan emit_train_plan(Stage stage);
TrainPlan emit_train_plan(std::string_view stage);

// Throws InputError unless both are positive.
std::int64_t effective_batch(std::int64_t batch_size,
                             std::int64_t grad_accum_steps);

struct CarbonEstimate {
  double power_watts = 0.0;
  double hours = 0.0;
  double intensity_kg_per_kwh = 0.0;
  // Unrounded.
  double energy_kwh = 0.0;
  double co2_kg = 0.0;
  // Rounded half-up to 2 decimals, as reported.
  double energy_kwh_reported = 0.0;
  double co2_kg_reported = 0.0;
};

// Throws InputError on negative input.
CarbonEstimate carbon_estimate(double power_watts, double hours,
                               double intensity_kg_per_kwh);

}  // namespace medcorpus::plan
