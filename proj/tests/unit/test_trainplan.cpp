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
#include "medcorpus/trainplan.hpp"

using namespace medcorpus;
using namespace medcorpus::plan;

TEST_CASE("finetune stage") {
  const auto p = emit_train_plan(Stage::kFinetune);
  CHECK(p.epochs == 1);
  CHECK(p.batch_size == 2);
  CHECK(p.grad_accum_steps == 16);
  CHECK(p.effective_batch() == 32);
  CHECK(p.optimizer == "AdamW");
  CHECK(p.learning_rate == 5e-4);
  CHECK(p.max_grad_norm == 0.3);
  CHECK(p.warmup_ratio == 0.03);
  CHECK(p.weight_decay == 0.1);
  CHECK(p.max_context_length == 1024);
  CHECK(p.padding_side == PaddingSide::kLeft);
  CHECK(p.lora_rank == 8);
  CHECK(p.lora_alpha == 16);
  CHECK(p.lora_dropout == 0.05);
  CHECK(p.target_modules == "all linear layers");
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("instruct stage differs only in the tuning knobs") {
  const auto f = emit_train_plan(Stage::kFinetune);
  const auto p = emit_train_plan("instruct");
  CHECK(p.weight_decay == 0.5);
  CHECK(p.lora_rank == 2);
  CHECK(p.lora_alpha == 2);
  CHECK(p.lora_dropout == 0.4);
  auto same = p;
  same.stage = f.stage;
  same.weight_decay = f.weight_decay;
  same.lora_rank = f.lora_rank;
  same.lora_alpha = f.lora_alpha;
  same.lora_dropout = f.lora_dropout;
  CHECK(same == f);
  CHECK_THROWS_AS(emit_train_plan("pretrain"), InputError);
}

TEST_CASE("golden plan files") {
  const auto fine = fixtures::read_text(MEDCORPUS_TEST_DATA "/golden/finetune.cfg");
  const auto inst = fixtures::read_text(MEDCORPUS_TEST_DATA "/golden/instruct.cfg");
  CHECK(emit_train_plan(Stage::kFinetune).to_cfg() == fine);
  CHECK(emit_train_plan(Stage::kInstruct).to_cfg() == inst);
  for (int i = 0; i < 3; ++i) CHECK(emit_train_plan("finetune").to_cfg() == fine);
  CHECK(TrainPlan::from_cfg(fine) == emit_train_plan(Stage::kFinetune));
  CHECK(TrainPlan::from_cfg(inst) == emit_train_plan(Stage::kInstruct));
}

TEST_CASE("plan validation and parsing") {
  auto p = emit_train_plan(Stage::kFinetune);
  p.lora_dropout = 1.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = emit_train_plan(Stage::kFinetune);
  p.weight_decay = -0.1;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = emit_train_plan(Stage::kFinetune);
  p.learning_rate = 0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = emit_train_plan(Stage::kFinetune);
  p.weight_decay = 0;
  CHECK_NOTHROW(p.validate());
  CHECK_THROWS(TrainPlan::from_cfg("stage = finetune\nepochs = x\n"));
  CHECK_THROWS(TrainPlan::from_cfg("nonsense line\n"));
}

TEST_CASE("effective_batch") {
  CHECK(effective_batch(2, 16) == 32);
  CHECK(effective_batch(1, 1) == 1);
  CHECK(effective_batch(4, 8) == 32);
  CHECK_THROWS_AS(effective_batch(0, 4), InputError);
  CHECK_THROWS_AS(effective_batch(4, -1), InputError);
  fixtures::Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const auto a = static_cast<std::int64_t>(rng.below(1000)) + 1;
    const auto b = static_cast<std::int64_t>(rng.below(1000)) + 1;
    CHECK(effective_batch(a, b) == effective_batch(b, a));
    CHECK(effective_batch(a, b) == a * b);
  }
}

TEST_CASE("carbon_estimate") {
  auto c = carbon_estimate(250, 19, 0.56);
  CHECK(c.energy_kwh == doctest::Approx(4.75));
  CHECK(c.energy_kwh_reported == 4.75);
  CHECK(c.co2_kg == doctest::Approx(2.66));
  CHECK(c.co2_kg_reported == 2.66);
  c = carbon_estimate(0, 19, 0.56);
  CHECK(c.energy_kwh == 0.0);
  CHECK(c.co2_kg == 0.0);
  c = carbon_estimate(300, 10, 0.4);
  CHECK(c.energy_kwh_reported == 3.0);
  CHECK(c.co2_kg_reported == 1.2);
  CHECK_THROWS_AS(carbon_estimate(-1, 1, 1), InputError);
  CHECK_THROWS_AS(carbon_estimate(1, -1, 1), InputError);
  CHECK_THROWS_AS(carbon_estimate(1, 1, -1), InputError);
}

TEST_CASE("property: carbon is linear in each input") {
  fixtures::Rng rng(17);
  for (int i = 0; i < 1000; ++i) {
    const double w = static_cast<double>(rng.below(2000));
    const double h = static_cast<double>(rng.below(500)) / 4.0;
    const double g = static_cast<double>(rng.below(1000)) / 1000.0;
    const double k = static_cast<double>(rng.below(50) + 1) / 5.0;
    const double base = carbon_estimate(w, h, g).co2_kg;
    const double tol = 1e-9 * std::max(1.0, std::abs(base * k));
    CHECK(std::abs(carbon_estimate(w * k, h, g).co2_kg - k * base) <= tol);
    CHECK(std::abs(carbon_estimate(w, h * k, g).co2_kg - k * base) <= tol);
    CHECK(std::abs(carbon_estimate(w, h, g * k).co2_kg - k * base) <= tol);
    const auto c = carbon_estimate(w, h, g);
    CHECK(std::abs(c.energy_kwh - w * h / 1000.0) <= 1e-9 * std::max(1.0, c.energy_kwh));
  }
}
