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

#include "medcorpus/cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "medcorpus/crawler.hpp"
#include "medcorpus/errors.hpp"
#include "medcorpus/evalkit.hpp"
#include "medcorpus/fileio.hpp"
#include "medcorpus/forum_sim.hpp"
#include "medcorpus/http_source.hpp"
#include "medcorpus/textproc.hpp"
#include "medcorpus/trainplan.hpp"

namespace fs = std::filesystem;

namespace medcorpus::cli {
namespace {

nlohmann::json parse_config_file(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what(), e.byte);
  }
}

void info(std::ostream& err, int verbosity, const std::string& msg) {
  if (verbosity > 0) err << msg << '\n';
}

// "name=path" for per-model inputs.
std::pair<std::string, std::string> split_named(const std::string& arg) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size()) {
    throw InputError("expected NAME=PATH, got '" + arg + "'");
  }
  return {arg.substr(0, eq), arg.substr(eq + 1)};
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string tokenizer;
  int verbosity = 0;
};

ToolConfig resolve_config(const Globals& g) {
  ToolConfig cfg;
  if (!g.config_path.empty()) cfg = load_tool_config(g.config_path);
  if (!g.tokenizer.empty()) {
    cfg.tokenizer = g.tokenizer;
    cfg.cleaning.tokenizer = g.tokenizer;
    cfg.split_policy.tokenizer = g.tokenizer;
  }
  if (g.seed) cfg.seed = g.seed;
  if (cfg.seed) {
    cfg.cleaning.rng_seed = *cfg.seed;
    cfg.split_policy.rng_seed = *cfg.seed;
  }
  cfg.verbosity = std::max(cfg.verbosity, g.verbosity);
  make_tokenizer(cfg.tokenizer);
  return cfg;
}

// ---- crawl -----------------------------------------------------------------

struct CrawlArgs {
  std::string source = "sim";
  std::string state;
  std::string out;
  std::string export_forum;
  std::uint64_t max_iterations = 10;
  std::optional<std::int64_t> delay_ms;
  std::size_t concurrency = 1;
  std::optional<std::size_t> frontier_limit;
  int fetch_attempts = 3;
  std::uint64_t sim_records = 1000;
  std::uint64_t sim_window = 100;
  std::uint64_t sim_related = 10;
  std::uint64_t sim_arrivals = 0;
  std::uint64_t sim_communities = 1;
  std::string sim_link = "uniform";
  std::string user_agent = "medcorpus-crawler/0.1";
  std::string window_path = "/";
  std::string record_path = "/q/{id}";
  std::string id_pattern = R"(/q/(\d+))";
  bool ignore_robots = false;
};

int cmd_crawl(const CrawlArgs& a, const ToolConfig& cfg, std::ostream& out,
              std::ostream& err) {
  const std::string state_path = !a.state.empty() ? a.state : cfg.state_path;
  if (state_path.empty()) throw InputError("crawl needs --state");
  if (a.out.empty()) throw InputError("crawl needs --out");

  crawl::CrawlState state;
  if (fs::exists(state_path)) {
    state = crawl::read_state_file(state_path);
    info(err, cfg.verbosity, "resuming from " + state_path);
  } else {
    state.rng_seed = cfg.seed.value_or(0);
  }

  std::unique_ptr<crawl::RecordSource> source;
  crawl::SimSource* sim_source = nullptr;
  bool is_sim = a.source == "sim" || a.source.rfind("sim:", 0) == 0;
  std::uint64_t seed = cfg.seed.value_or(0);
  if (is_sim) {
    if (a.source.size() > 4) {
      const std::string digits = a.source.substr(4);
      auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), seed);
      if (ec != std::errc() || p != digits.data() + digits.size()) {
        throw InputError("bad sim seed in '" + a.source + "'");
      }
    }
    sim::SimConfig sc;
    sc.total_records = a.sim_records;
    sc.window_size = a.sim_window;
    sc.max_related = a.sim_related;
    sc.arrival_batch = a.sim_arrivals;
    sc.communities = a.sim_communities;
    sc.rng_seed = seed;
    if (a.sim_link == "uniform") sc.link_model = sim::LinkModel::kUniform;
    else if (a.sim_link == "preferential") sc.link_model = sim::LinkModel::kPreferential;
    else throw InputError("--sim-link must be uniform or preferential");
    auto forum = sim::generate_forum(sc);
    // A resumed state may have seen arrivals; replay them.
    if (!state.visited.empty() && *state.visited.rbegin() >= forum.size()) {
      sim::advance_in_place(forum, *state.visited.rbegin() + 1 - forum.size());
    }
    auto s = std::make_unique<crawl::SimSource>(std::move(forum));
    sim_source = s.get();
    source = std::move(s);
  } else {
    crawl::HttpSourceConfig hc;
    hc.base_url = a.source;
    hc.user_agent = a.user_agent;
    hc.window_path = a.window_path;
    hc.record_path = a.record_path;
    hc.id_pattern = a.id_pattern;
    hc.respect_robots = !a.ignore_robots;
    source = std::make_unique<crawl::HttpSource>(hc);
  }

  crawl::CrawlPolicy policy;
  policy.max_iterations = a.max_iterations;
  policy.per_host_delay =
      std::chrono::milliseconds(a.delay_ms.value_or(is_sim ? 0 : 1000));
  policy.max_concurrent_fetches = a.concurrency;
  policy.frontier_limit = a.frontier_limit;
  policy.fetch_attempts = a.fetch_attempts;
  if (is_sim) policy.backoff_base = std::chrono::milliseconds(0);
  policy.validate();

  crawl::JsonlRecordSink sink(a.out);
  crawl::reconcile(state, sink.recovered());

  crawl::CrawlHooks hooks;
  hooks.sink = &sink;
  hooks.checkpoint = [&](const crawl::CrawlState& s) {
    crawl::write_state_file(state_path, s);
  };
  try {
    state = crawl::iterate_crawl(*source, policy, std::move(state), hooks);
  } catch (const crawl::CrawlInterrupted& e) {
    crawl::write_state_file(state_path, e.state());
    err << "crawl interrupted: " << e.what() << "\nstate saved to " << state_path
        << "; rerun to resume\n";
    return kExitIo;
  }
  crawl::write_state_file(state_path, state);

  out << "iterations: " << state.iterations.size() << '\n'
      << "visited: " << state.visited.size() << '\n'
      << "failed: " << state.failed.size() << '\n'
      << "frontier: " << state.frontier.size() << '\n';
  if (sim_source) {
    const auto total = sim_source->forum().size();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", crawl::coverage(state, total));
    out << "coverage: " << buf << " of " << total << '\n';
    if (!a.export_forum.empty()) {
      std::ostringstream os;
      sim::write_jsonl(sim_source->forum(), os);
      write_file_atomic(a.export_forum, os.str());
    }
  }
  return kExitOk;
}

// ---- extract ---------------------------------------------------------------

struct ExtractArgs {
  std::string in;
  std::vector<std::string> html;
  std::string kind = "qa";
  std::string source;
  std::string rules;
  std::string hint = "train-pool";
  std::string out;
  std::string rejects;
};

int cmd_extract(const ExtractArgs& a, const ToolConfig& cfg, std::ostream& out,
                std::ostream& err) {
  if (a.in.empty() == a.html.empty()) {
    throw InputError("extract needs exactly one of --in or --html");
  }
  if (a.kind != "qa" && a.kind != "article") {
    throw InputError("--kind must be qa or article");
  }
  const std::string rules_path = !a.rules.empty() ? a.rules : cfg.rules_path;
  const ExtractionRules rules =
      rules_path.empty() ? default_rules() : ExtractionRules::load(rules_path);
  const auto tok = make_tokenizer(cfg.tokenizer);
  const SplitTag hint = split_tag_from_string(a.hint);

  struct Page {
    std::string id, url, html;
  };
  std::vector<Page> pages;
  if (!a.in.empty()) {
    for (auto& r : crawl::read_records_jsonl(a.in)) {
      pages.push_back({a.source + ":" + std::to_string(r.id), r.url, std::move(r.payload)});
    }
  } else {
    for (const auto& p : a.html) {
      pages.push_back({a.source + ":" + fs::path(p).stem().string(), p, read_file(p)});
    }
  }

  std::string text;
  std::size_t count = 0, failed = 0;
  std::vector<std::string> reject_lines;
  for (const auto& page : pages) {
    try {
      if (a.kind == "article") {
        const Document d = parse_article(page.html, a.source, rules, *tok,
                                         ArticleMeta{page.id, page.url});
        nlohmann::ordered_json j;
        j["id"] = d.id;
        j["source"] = d.source;
        j["title"] = d.title;
        j["body"] = d.body;
        j["tokens"] = d.token_count;
        j["url"] = d.url;
        text += j.dump() + "\n";
        ++count;
      } else {
        auto parsed = parse_qa(page.html, a.source, rules, *tok, hint);
        for (auto& p : parsed.pairs) {
          if (!page.url.empty()) p.extras["url"] = page.url;
          text += dataset::to_jsonl_line(p) + "\n";
          ++count;
        }
        for (const auto& r : parsed.rejects) reject_lines.push_back(to_json(r).dump());
      }
    } catch (const ExtractionError& e) {
      ++failed;
      nlohmann::ordered_json j;
      j["source"] = a.source;
      j["page"] = page.id;
      j["reason"] = std::string("rule:") + e.rule();
      reject_lines.push_back(j.dump());
      info(err, cfg.verbosity, page.id + ": " + e.what());
    }
  }
  write_file_atomic(a.out, text);
  if (!a.rejects.empty()) write_file_atomic(a.rejects, join_lines(reject_lines));
  out << "extracted: " << count << "\nrejected: " << reject_lines.size()
      << "\npages: " << pages.size() << "\nfailed pages: " << failed << '\n';
  return kExitOk;
}

// ---- clean -----------------------------------------------------------------

struct CleanArgs {
  std::string in;
  std::string split = "train";
  std::string out;
  std::string report;
  std::string review;
  std::optional<std::int64_t> min_answer_tokens;
  std::optional<double> drop_probability;
  std::optional<double> near_dup_threshold;
  std::optional<std::size_t> workers;
  std::string patterns;
  std::string quality_rules;
};

int cmd_clean(const CleanArgs& a, const ToolConfig& cfg, std::ostream& out,
              std::ostream&) {
  clean::CleaningConfig cc = cfg.cleaning;
  if (a.min_answer_tokens) cc.min_answer_tokens = *a.min_answer_tokens;
  if (a.drop_probability) cc.short_drop_probability = *a.drop_probability;
  if (a.near_dup_threshold) cc.near_dup_threshold = *a.near_dup_threshold;
  if (a.workers) cc.workers = *a.workers;
  if (!a.patterns.empty()) cc.pii_patterns = clean::PiiPatterns::load(a.patterns);
  if (!a.quality_rules.empty()) cc.quality_rules = clean::QualityRules::load(a.quality_rules);
  cc.validate();
  const auto kind = clean::split_kind_from_string(a.split);
  const auto records = dataset::load_jsonl(a.in);
  const auto result = clean::clean_pipeline(records, cc, kind);
  dataset::emit_jsonl(result.records, a.out);
  if (!a.review.empty()) dataset::emit_jsonl(result.review_queue, a.review);
  if (!a.report.empty()) {
    write_file_atomic(a.report, result.report.to_json().dump(2) + "\n");
  }
  out << result.report.summary_table();
  return kExitOk;
}

// ---- build -----------------------------------------------------------------

struct BuildArgs {
  std::vector<std::string> in;
  std::vector<std::string> train_sources;
  std::vector<std::string> test_sources;
  std::vector<std::string> external;
  std::optional<double> dev_fraction;
  std::string out_dir;
  std::string instruct_template;
};

int cmd_build(const BuildArgs& a, const ToolConfig& cfg, std::ostream& out,
              std::ostream& err) {
  dataset::SplitPolicy policy = cfg.split_policy;
  for (const auto& s : a.train_sources) policy.train_sources.insert(s);
  for (const auto& s : a.test_sources) policy.test_sources.insert(s);
  for (const auto& f : a.external) policy.external_test_files.push_back(f);
  if (a.dev_fraction) policy.dev_fraction = *a.dev_fraction;
  const std::string dir = !a.out_dir.empty() ? a.out_dir : cfg.output_dir;
  if (dir.empty()) throw InputError("build needs --out-dir");
  if (a.in.empty()) throw InputError("build needs at least one --in");

  std::vector<QAPair> records;
  for (const auto& path : a.in) {
    auto part = dataset::load_jsonl(path);
    records.insert(records.end(), std::make_move_iterator(part.begin()),
                   std::make_move_iterator(part.end()));
  }
  dataset::DatasetSplit split;
  try {
    split = dataset::build_splits(records, policy);
  } catch (const dataset::RoutingError& e) {
    err << "routing error: no split for sources:";
    for (const auto& s : e.sources()) err << ' ' << s;
    err << '\n';
    return kExitInvalid;
  }

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  const fs::path base(dir);
  dataset::emit_jsonl(split.train, (base / "train.jsonl").string());
  dataset::emit_jsonl(split.dev, (base / "dev.jsonl").string());
  dataset::emit_jsonl(split.test, (base / "test.jsonl").string());
  std::vector<std::string> conflict_lines;
  for (const auto& c : split.conflicts) {
    nlohmann::ordered_json j;
    j["id"] = c.id;
    j["source"] = c.source;
    j["reason"] = c.reason;
    conflict_lines.push_back(j.dump());
  }
  write_file_atomic((base / "conflicts.jsonl").string(), join_lines(conflict_lines));
  write_file_atomic((base / "manifest.json").string(), split.manifest.dump(2) + "\n");

  if (!a.instruct_template.empty()) {
    const std::string tmpl = a.instruct_template == "default"
                                 ? std::string(dataset::kAyaChatTemplate)
                                 : read_file(a.instruct_template);
    auto emit = [&](const std::vector<QAPair>& v, const std::string& name) {
      std::vector<std::string> lines;
      for (const auto& r : v) {
        nlohmann::ordered_json j;
        j["id"] = r.id;
        j["text"] = dataset::emit_instruction_format(r, tmpl);
        lines.push_back(j.dump());
      }
      write_file_atomic((base / name).string(), join_lines(lines));
    };
    emit(split.train, "train.instruct.jsonl");
    emit(split.dev, "dev.instruct.jsonl");
  }
  out << "train: " << split.train.size() << "\ndev: " << split.dev.size()
      << "\ntest: " << split.test.size() << "\nconflicts: " << split.conflicts.size()
      << '\n';
  return kExitOk;
}

// ---- stats -----------------------------------------------------------------

struct StatsArgs {
  std::string in;
  bool documents = false;
  std::string json;
  std::string csv;
};

int cmd_stats(const StatsArgs& a, const ToolConfig& cfg, std::ostream& out,
              std::ostream&) {
  const auto tok = make_tokenizer(cfg.tokenizer);
  const auto rep = a.documents
                       ? dataset::corpus_stats(dataset::load_documents(a.in), *tok)
                       : dataset::corpus_stats(dataset::load_jsonl(a.in), *tok);
  const std::string j = rep.to_json().dump(2) + "\n";
  if (!a.json.empty()) write_file_atomic(a.json, j);
  if (!a.csv.empty()) write_file_atomic(a.csv, rep.to_csv());
  if (a.json.empty() && a.csv.empty()) out << j;
  else out << "records: " << rep.record_count << "\ntokens: " << rep.total_tokens << '\n';
  return kExitOk;
}

// ---- sample ----------------------------------------------------------------

struct SampleArgs {
  std::string in;
  std::string out;
  bool documents = false;
  double fraction = 1.0;
  std::uint64_t seed = 0;
};

int cmd_sample(const SampleArgs& a, std::ostream& out) {
  std::size_t total = 0, kept = 0;
  if (a.documents) {
    const auto docs = dataset::load_documents(a.in);
    const auto sub = dataset::subsample(docs, a.fraction, a.seed);
    dataset::emit_documents(sub, a.out);
    total = docs.size();
    kept = sub.size();
  } else {
    const auto recs = dataset::load_jsonl(a.in);
    const auto sub = dataset::subsample(recs, a.fraction, a.seed);
    dataset::emit_jsonl(sub, a.out);
    total = recs.size();
    kept = sub.size();
  }
  out << "sampled " << kept << " of " << total << '\n';
  return kExitOk;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string benchmark;
  std::vector<std::string> responses;
  std::vector<std::string> latency;
  std::vector<std::string> verdicts;
  double threshold = eval::kPassThreshold;
  std::string csv;
  std::string table;
};

int cmd_eval(const EvalArgs& a, const ToolConfig& cfg, std::ostream& out,
             std::ostream& err) {
  const auto items = eval::load_benchmark(a.benchmark);
  std::vector<eval::ModelReport> models;
  for (const auto& arg : a.responses) {
    const auto [name, path] = split_named(arg);
    std::vector<std::string> warnings;
    eval::ModelReport m;
    m.model = name;
    m.scores = eval::score_mcq(items, eval::load_responses(path), &warnings);
    for (const auto& w : warnings) err << "warning: " << name << ": " << w << '\n';
    models.push_back(std::move(m));
  }
  for (const auto& arg : a.latency) {
    const auto [name, path] = split_named(arg);
    auto it = std::find_if(models.begin(), models.end(),
                           [&](const auto& m) { return m.model == name; });
    if (it == models.end()) {
      models.push_back({name, {}, std::nullopt});
      it = std::prev(models.end());
    }
    it->latency = eval::latency_summary(eval::load_latency(path));
  }
  const std::string table = eval::report_table(models, a.threshold);
  if (!a.csv.empty()) write_file_atomic(a.csv, eval::report_csv(models, a.threshold));
  if (!a.table.empty()) write_file_atomic(a.table, table);
  out << table;
  for (const auto& arg : a.verdicts) {
    const auto [name, path] = split_named(arg);
    const auto wr = eval::win_rate(eval::load_verdicts(path));
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s: win %.2f%% loss %.2f%% tie %.2f%%\n",
                  name.c_str(), wr.win_pct, wr.loss_pct, wr.tie_pct);
    out << buf;
  }
  (void)cfg;
  return kExitOk;
}

// ---- plan / carbon ---------------------------------------------------------

int cmd_plan(const std::string& stage, const std::string& path, std::ostream& out) {
  const std::string cfg = plan::emit_train_plan(std::string_view(stage)).to_cfg();
  if (path.empty()) {
    out << cfg;
  } else {
    write_file_atomic(path, cfg);
    out << "wrote " << path << '\n';
  }
  return kExitOk;
}

int cmd_carbon(double watts, double hours, double intensity, std::ostream& out) {
  const auto c = plan::carbon_estimate(watts, hours, intensity);
  char buf[128];
  std::snprintf(buf, sizeof buf, "energy: %.2f kWh\nco2: %.2f kg\n",
                c.energy_kwh_reported, c.co2_kg_reported);
  out << buf;
  return kExitOk;
}

}  // namespace

ToolConfig load_tool_config(const std::string& path) {
  const nlohmann::json doc = parse_config_file(path);
  if (!doc.is_object()) throw ConfigError(path + ": config must be a JSON object");
  const fs::path dir = fs::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    if (p.empty()) return p;
    const fs::path fp(p);
    return fp.is_absolute() ? p : (dir / fp).string();
  };
  ToolConfig cfg;
  std::vector<std::string> missing;
  try {
    cfg.tokenizer = doc.value("tokenizer", cfg.tokenizer);
    cfg.verbosity = doc.value("verbosity", 0);
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
    const auto paths = doc.value("paths", nlohmann::json::object());
    cfg.rules_path = resolve(paths.value("rules", std::string()));
    cfg.pii_patterns_path = resolve(paths.value("pii_patterns", std::string()));
    cfg.quality_rules_path = resolve(paths.value("quality_rules", std::string()));
    cfg.state_path = resolve(paths.value("state", std::string()));
    cfg.output_dir = resolve(paths.value("output_dir", std::string()));
    for (const auto* p : {&cfg.rules_path, &cfg.pii_patterns_path, &cfg.quality_rules_path}) {
      if (!p->empty() && !fs::exists(*p)) missing.push_back(*p);
    }
    const auto c = doc.value("cleaning", nlohmann::json::object());
    cfg.cleaning.min_answer_tokens = c.value("min_answer_tokens", cfg.cleaning.min_answer_tokens);
    cfg.cleaning.short_drop_probability =
        c.value("short_drop_probability", cfg.cleaning.short_drop_probability);
    cfg.cleaning.near_dup_threshold = c.value("near_dup_threshold", cfg.cleaning.near_dup_threshold);
    cfg.cleaning.shingle_size = c.value("shingle_size", cfg.cleaning.shingle_size);
    cfg.cleaning.workers = c.value("workers", cfg.cleaning.workers);
    cfg.cleaning.rng_seed = c.value("rng_seed", cfg.cleaning.rng_seed);
    cfg.cleaning.tokenizer = cfg.tokenizer;
    const auto sp = doc.value("split_policy", nlohmann::json::object());
    cfg.split_policy = dataset::SplitPolicy::from_json(sp);
    cfg.split_policy.tokenizer = cfg.tokenizer;
    for (auto& f : cfg.split_policy.external_test_files) {
      f = resolve(f);
      if (!fs::exists(f)) missing.push_back(f);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  if (!missing.empty()) {
    std::string msg = path + ": referenced files do not exist:";
    for (const auto& m : missing) msg += " " + m;
    throw ConfigError(msg);
  }
  if (!cfg.pii_patterns_path.empty()) {
    cfg.cleaning.pii_patterns = clean::PiiPatterns::load(cfg.pii_patterns_path);
    cfg.split_policy.external_pii = cfg.cleaning.pii_patterns;
  }
  if (!cfg.quality_rules_path.empty()) {
    cfg.cleaning.quality_rules = clean::QualityRules::load(cfg.quality_rules_path);
  }
  return cfg;
}

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"medcorpus: crawl, clean and package a medical QA corpus"};
  app.name("medcorpus");
  app.require_subcommand(1, 1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config_path, "JSON config file");
  app.add_option("--seed", g.seed, "Override every seed");
  app.add_option("--tokenizer", g.tokenizer, "whitespace | whitespace-punct");
  app.add_flag("-v,--verbose", g.verbosity, "More logging on stderr");

  CrawlArgs ca;
  auto* crawl_cmd = app.add_subcommand("crawl", "Iterated BFS crawl");
  crawl_cmd->add_option("--source", ca.source, "sim[:SEED] or a base URL");
  crawl_cmd->add_option("--state", ca.state, "Crawl state file (resumed if present)");
  crawl_cmd->add_option("--out", ca.out, "Record JSONL sink");
  crawl_cmd->add_option("--export-forum", ca.export_forum, "Write the simulated forum");
  crawl_cmd->add_option("--max-iterations", ca.max_iterations);
  crawl_cmd->add_option("--delay-ms", ca.delay_ms, "Per-host delay");
  crawl_cmd->add_option("--concurrency", ca.concurrency);
  crawl_cmd->add_option("--frontier-limit", ca.frontier_limit);
  crawl_cmd->add_option("--fetch-attempts", ca.fetch_attempts);
  crawl_cmd->add_option("--sim-records", ca.sim_records);
  crawl_cmd->add_option("--sim-window", ca.sim_window);
  crawl_cmd->add_option("--sim-related", ca.sim_related);
  crawl_cmd->add_option("--sim-arrivals", ca.sim_arrivals, "Records added per round");
  crawl_cmd->add_option("--sim-communities", ca.sim_communities);
  crawl_cmd->add_option("--sim-link", ca.sim_link, "uniform | preferential");
  crawl_cmd->add_option("--user-agent", ca.user_agent);
  crawl_cmd->add_option("--window-path", ca.window_path);
  crawl_cmd->add_option("--record-path", ca.record_path);
  crawl_cmd->add_option("--id-pattern", ca.id_pattern);
  crawl_cmd->add_flag("--ignore-robots", ca.ignore_robots);

  ExtractArgs ea;
  auto* extract_cmd = app.add_subcommand("extract", "HTML to documents or QA pairs");
  extract_cmd->add_option("--in", ea.in, "Crawled record JSONL");
  extract_cmd->add_option("--html", ea.html, "HTML files");
  extract_cmd->add_option("--kind", ea.kind, "qa | article");
  extract_cmd->add_option("--source", ea.source)->required();
  extract_cmd->add_option("--rules", ea.rules, "Extraction rules JSON");
  extract_cmd->add_option("--hint", ea.hint, "Split tag for QA pairs");
  extract_cmd->add_option("--out", ea.out)->required();
  extract_cmd->add_option("--rejects", ea.rejects);

  CleanArgs cla;
  auto* clean_cmd = app.add_subcommand("clean", "Scrub, filter and deduplicate");
  clean_cmd->add_option("--in", cla.in)->required();
  clean_cmd->add_option("--split", cla.split, "train | dev | test");
  clean_cmd->add_option("--out", cla.out)->required();
  clean_cmd->add_option("--report", cla.report);
  clean_cmd->add_option("--review", cla.review);
  clean_cmd->add_option("--min-answer-tokens", cla.min_answer_tokens);
  clean_cmd->add_option("--drop-probability", cla.drop_probability);
  clean_cmd->add_option("--near-dup-threshold", cla.near_dup_threshold);
  clean_cmd->add_option("--workers", cla.workers);
  clean_cmd->add_option("--patterns", cla.patterns, "PII patterns JSON");
  clean_cmd->add_option("--quality-rules", cla.quality_rules);

  BuildArgs ba;
  auto* build_cmd = app.add_subcommand("build", "Route records into splits");
  build_cmd->add_option("--in", ba.in);
  build_cmd->add_option("--train-source", ba.train_sources)->delimiter(',');
  build_cmd->add_option("--test-source", ba.test_sources)->delimiter(',');
  build_cmd->add_option("--external", ba.external, "External test JSONL");
  build_cmd->add_option("--dev-fraction", ba.dev_fraction);
  build_cmd->add_option("--out-dir", ba.out_dir);
  build_cmd->add_option("--instruct-template", ba.instruct_template,
                        "Template file, or 'default'");

  StatsArgs sa;
  auto* stats_cmd = app.add_subcommand("stats", "Token totals and source shares");
  stats_cmd->add_option("--in", sa.in)->required();
  stats_cmd->add_flag("--documents", sa.documents, "Input is document JSONL");
  stats_cmd->add_option("--json", sa.json);
  stats_cmd->add_option("--csv", sa.csv);

  SampleArgs spa;
  auto* sample_cmd = app.add_subcommand("sample", "Seeded subset by fraction");
  sample_cmd->add_option("--in", spa.in)->required();
  sample_cmd->add_option("--out", spa.out)->required();
  sample_cmd->add_flag("--documents", spa.documents, "Input is document JSONL");
  sample_cmd->add_option("--fraction", spa.fraction)->required();
  sample_cmd->add_option("--seed", spa.seed);

  EvalArgs va;
  auto* eval_cmd = app.add_subcommand("eval", "Score MCQ responses");
  eval_cmd->add_option("--benchmark", va.benchmark)->required();
  eval_cmd->add_option("--responses", va.responses, "MODEL=PATH");
  eval_cmd->add_option("--latency", va.latency, "MODEL=PATH");
  eval_cmd->add_option("--verdicts", va.verdicts, "NAME=PATH");
  eval_cmd->add_option("--threshold", va.threshold);
  eval_cmd->add_option("--csv", va.csv);
  eval_cmd->add_option("--table", va.table);

  std::string stage, plan_out;
  auto* plan_cmd = app.add_subcommand("plan", "Write a training plan");
  plan_cmd->add_option("--stage", stage, "finetune | instruct")->required();
  plan_cmd->add_option("--out", plan_out);

  double watts = 0, hours = 0, intensity = 0.56;
  auto* carbon_cmd = app.add_subcommand("carbon", "Energy and CO2 estimate");
  carbon_cmd->add_option("--watts", watts)->required();
  carbon_cmd->add_option("--hours", hours)->required();
  carbon_cmd->add_option("--intensity", intensity, "kg CO2e per kWh");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitInvalid;
  }

  try {
    const ToolConfig cfg = resolve_config(g);
    if (crawl_cmd->parsed()) return cmd_crawl(ca, cfg, out, err);
    if (extract_cmd->parsed()) return cmd_extract(ea, cfg, out, err);
    if (clean_cmd->parsed()) return cmd_clean(cla, cfg, out, err);
    if (build_cmd->parsed()) return cmd_build(ba, cfg, out, err);
    if (stats_cmd->parsed()) return cmd_stats(sa, cfg, out, err);
    if (sample_cmd->parsed()) return cmd_sample(spa, out);
    if (eval_cmd->parsed()) return cmd_eval(va, cfg, out, err);
    if (plan_cmd->parsed()) return cmd_plan(stage, plan_out, out);
    if (carbon_cmd->parsed()) return cmd_carbon(watts, hours, intensity, out);
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const crawl::SourceUnavailable& e) {
    err << "source unavailable: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  err << app.help();
  return kExitInvalid;
}

}  // namespace medcorpus::cli
