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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "medcorpus/cleaner.hpp"
#include "medcorpus/crawler.hpp"
#include "medcorpus/dataset.hpp"
#include "medcorpus/errors.hpp"
#include "medcorpus/evalkit.hpp"
#include "medcorpus/forum_sim.hpp"
#include "medcorpus/textproc.hpp"
#include "medcorpus/trainplan.hpp"

namespace py = pybind11;
using namespace medcorpus;
using nlohmann::json;

namespace {

// Records cross the boundary as plain dicts; going through the json module
// keeps one schema for Python and the JSONL files.
json to_json(const py::handle& obj) {
  // Leaked on purpose: destroying it at exit would need the GIL.
  static auto* dumps = new py::object(py::module_::import("json").attr("dumps"));
  return json::parse((*dumps)(obj).cast<std::string>());
}

py::object from_json(const json& j) {
  static auto* loads = new py::object(py::module_::import("json").attr("loads"));
  return (*loads)(j.dump());
}

std::vector<QAPair> records_in(const py::list& items) {
  std::vector<QAPair> out;
  out.reserve(items.size());
  for (const auto& item : items) {
    auto j = to_json(item);
    if (!j.contains("split")) j["split"] = "train-pool";
    if (!j.contains("answer_tokens")) {
      static const auto tok = make_tokenizer(kDefaultTokenizer);
      j["answer_tokens"] = count_tokens(j.at("answer").get<std::string>(), *tok);
    }
    out.push_back(dataset::qa_from_json(j));
  }
  return out;
}

py::list records_out(const std::vector<QAPair>& records) {
  py::list out;
  for (const auto& r : records)
    out.append(from_json(json::parse(dataset::to_jsonl_line(r))));
  return out;
}

clean::CleaningConfig cleaning_config(const py::dict& opts) {
  clean::CleaningConfig c;
  for (const auto& [k, v] : opts) {
    const auto key = k.cast<std::string>();
    if (key == "min_answer_tokens") c.min_answer_tokens = v.cast<std::int64_t>();
    else if (key == "short_drop_probability") c.short_drop_probability = v.cast<double>();
    else if (key == "rng_seed") c.rng_seed = v.cast<std::uint64_t>();
    else if (key == "near_dup_threshold") c.near_dup_threshold = v.cast<double>();
    else if (key == "shingle_size") c.shingle_size = v.cast<std::size_t>();
    else if (key == "tokenizer") c.tokenizer = v.cast<std::string>();
    else if (key == "workers") c.workers = v.cast<std::size_t>();
    else if (key == "pii_patterns") c.pii_patterns = clean::PiiPatterns::load(v.cast<std::string>());
    else if (key == "quality_rules") c.quality_rules = clean::QualityRules::load(v.cast<std::string>());
    else throw ConfigError("unknown cleaning option: " + key);
  }
  return c;
}

std::vector<eval::SubsetScore> scores_in(const py::list& items) {
  std::vector<eval::SubsetScore> out;
  for (const auto& item : items) {
    const auto t = item.cast<py::tuple>();
    eval::SubsetScore s;
    s.subset = t[0].cast<std::string>();
    s.correct = t[1].cast<std::uint64_t>();
    s.total = t[2].cast<std::uint64_t>();
    s.accuracy = eval::rounded_accuracy(s.correct, s.total);
    out.push_back(std::move(s));
  }
  return out;
}

py::dict plan_dict(const plan::TrainPlan& p) {
  py::dict d;
  d["stage"] = std::string(plan::to_string(p.stage));
  d["epochs"] = p.epochs;
  d["batch_size"] = p.batch_size;
  d["grad_accum_steps"] = p.grad_accum_steps;
  d["effective_batch"] = p.effective_batch();
  d["optimizer"] = p.optimizer;
  d["learning_rate"] = p.learning_rate;
  d["max_grad_norm"] = p.max_grad_norm;
  d["warmup_ratio"] = p.warmup_ratio;
  d["weight_decay"] = p.weight_decay;
  d["max_context_length"] = p.max_context_length;
  d["padding_side"] = std::string(plan::to_string(p.padding_side));
  d["lora_rank"] = p.lora_rank;
  d["lora_alpha"] = p.lora_alpha;
  d["lora_dropout"] = p.lora_dropout;
  d["target_modules"] = p.target_modules;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Persian medical corpus toolkit";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<InputError>(m, "InputError", base);
  py::register_exception<ValidationError>(m, "ValidationError", base);
  py::register_exception<LookupError>(m, "LookupError", base);
  py::register_exception<IoError>(m, "IoError", base);
  py::register_exception<ParseError>(m, "ParseError", base);
  py::register_exception<json::exception>(m, "RecordError", PyExc_ValueError);

  // text
  m.def("normalize_text", [](const std::string& s) { return normalize_text(s); });
  m.def(
      "tokenize",
      [](const std::string& s, const std::string& tok) {
        return make_tokenizer(tok)->tokenize(s);
      },
      py::arg("text"), py::arg("tokenizer") = std::string(kDefaultTokenizer));
  m.def(
      "count_tokens",
      [](const std::string& s, const std::string& tok) {
        return count_tokens(s, *make_tokenizer(tok));
      },
      py::arg("text"), py::arg("tokenizer") = std::string(kDefaultTokenizer));

  // cleaning
  m.def(
      "scrub_pii",
      [](const std::string& s) {
        auto r = clean::scrub_pii(s, clean::default_pii_patterns());
        return py::make_tuple(r.text, r.hits);
      },
      py::arg("text"));
  m.def(
      "clean",
      [](const py::list& records, const std::string& split, const py::dict& opts) {
        const auto config = cleaning_config(opts);
        auto r = clean::clean_pipeline(records_in(records), config,
                                       clean::split_kind_from_string(split));
        py::dict out;
        out["records"] = records_out(r.records);
        out["review_queue"] = records_out(r.review_queue);
        out["report"] = from_json(r.report.to_json());
        return out;
      },
      py::arg("records"), py::arg("split") = "train", py::arg("options") = py::dict());

  // splits
  m.def(
      "build_splits",
      [](const py::list& records, const py::dict& policy) {
        auto p = dataset::SplitPolicy::from_json(to_json(policy));
        auto s = dataset::build_splits(records_in(records), p);
        py::dict out;
        out["train"] = records_out(s.train);
        out["dev"] = records_out(s.dev);
        out["test"] = records_out(s.test);
        py::list conflicts;
        for (const auto& c : s.conflicts)
          conflicts.append(py::make_tuple(c.id, c.source, c.reason));
        out["conflicts"] = conflicts;
        out["manifest"] = from_json(s.manifest);
        return out;
      },
      py::arg("records"), py::arg("policy"));
  m.def(
      "instruction_format",
      [](const py::dict& record, const std::string& tmpl) {
        py::list one;
        one.append(record);
        return dataset::emit_instruction_format(records_in(one).front(), tmpl);
      },
      py::arg("record"), py::arg("template") = std::string(dataset::kAyaChatTemplate));

  // evaluation
  m.def("extract_choice", [](const std::string& s) { return eval::extract_choice(s); });
  m.def("rounded_accuracy", &eval::rounded_accuracy, py::arg("correct"), py::arg("total"));
  m.def(
      "weighted_average",
      [](const py::list& subsets) { return eval::weighted_average(scores_in(subsets)); },
      py::arg("subsets"), "subsets: list of (name, correct, total)");
  m.def("pass_fail", &eval::pass_fail, py::arg("score"),
        py::arg("threshold") = eval::kPassThreshold);

  // training plan
  m.def(
      "train_plan",
      [](const std::string& stage) { return plan_dict(plan::emit_train_plan(stage)); },
      py::arg("stage"));
  m.def(
      "train_plan_cfg",
      [](const std::string& stage) { return plan::emit_train_plan(stage).to_cfg(); },
      py::arg("stage"));
  m.def(
      "effective_batch",
      [](std::int64_t b, std::int64_t g) { return plan::effective_batch(b, g); },
      py::arg("batch_size"), py::arg("grad_accum_steps"));
  m.def(
      "carbon_estimate",
      [](double watts, double hours, double intensity) {
        const auto c = plan::carbon_estimate(watts, hours, intensity);
        py::dict d;
        d["energy_kwh"] = c.energy_kwh;
        d["co2_kg"] = c.co2_kg;
        d["energy_kwh_reported"] = c.energy_kwh_reported;
        d["co2_kg_reported"] = c.co2_kg_reported;
        return d;
      },
      py::arg("power_watts"), py::arg("hours"), py::arg("intensity_kg_per_kwh"));

  // simulator and crawler
  py::class_<sim::SyntheticForum>(m, "Forum")
      .def("__len__", &sim::SyntheticForum::size)
      .def("related", [](const sim::SyntheticForum& f, RecordId id) {
        return sim::related(f, id);
      })
      .def("visible_roots", [](const sim::SyntheticForum& f) { return sim::visible_roots(f); })
      .def("page", [](const sim::SyntheticForum& f, RecordId id) {
        return sim::render_page(f, id);
      });
  m.def(
      "generate_forum",
      [](std::uint64_t total, std::uint64_t window, std::uint64_t max_related,
         std::uint64_t seed, std::uint64_t communities, std::uint64_t arrival_batch,
         const std::string& link_model) {
        sim::SimConfig c;
        c.total_records = total;
        c.window_size = window;
        c.max_related = max_related;
        c.rng_seed = seed;
        c.communities = communities;
        c.arrival_batch = arrival_batch;
        if (link_model == "uniform") c.link_model = sim::LinkModel::kUniform;
        else if (link_model == "preferential") c.link_model = sim::LinkModel::kPreferential;
        else throw ConfigError("unknown link model: " + link_model);
        return sim::generate_forum(c);
      },
      py::arg("total_records"), py::arg("window_size"), py::arg("max_related") = 3,
      py::arg("rng_seed") = 0, py::arg("communities") = 1, py::arg("arrival_batch") = 0,
      py::arg("link_model") = "uniform");
  m.def(
      "reachable_set",
      [](const sim::SyntheticForum& f, const std::set<RecordId>& roots) {
        return sim::reachable_set(f, roots);
      },
      py::arg("forum"), py::arg("roots"));
  m.def(
      "crawl",
      [](const sim::SyntheticForum& f, std::uint64_t max_iterations) {
        crawl::SimSource source(f);
        crawl::CrawlPolicy policy;
        policy.max_iterations = max_iterations;
        policy.per_host_delay = std::chrono::milliseconds(0);
        crawl::CrawlState state;
        {
          py::gil_scoped_release release;
          state = crawl::iterate_crawl(source, policy, std::move(state));
        }
        py::dict out;
        out["visited"] = state.visited;
        out["windows_seen"] = source.windows_seen();
        out["iterations"] = state.iterations.size();
        out["coverage"] = crawl::coverage(state, source.forum().size());
        return out;
      },
      py::arg("forum"), py::arg("max_iterations") = 10);
}
