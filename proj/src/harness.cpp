// Copyright 2026 The vgsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "vgs/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "vgs/parallel.hpp"
#include "vgs/seed.hpp"

namespace vgs {

namespace {

using nlohmann::json;

// Dispatches to a per-difficulty Bernoulli proposer.
class LevelledProposer final : public Proposer {
 public:
  explicit LevelledProposer(const std::vector<LevelSpec>& levels, std::uint32_t label_count) {
    for (const auto& level : levels) {
      BernoulliTreeTask task;
      task.step_success_p = level.step_success_p;
      task.solution_length = level.solution_length;
      task.answer_labels.clear();
      for (std::uint32_t i = 0; i < label_count; ++i) task.answer_labels.push_back(std::to_string(i));
      by_level_.emplace(level.name, BernoulliProposer(task));
    }
  }

  GenerationStep propose(const ProposeRequest& request) const override {
    const auto it = by_level_.find(request.question.difficulty);
    if (it == by_level_.end()) {
      throw std::logic_error("no Bernoulli level named " + request.question.difficulty);
    }
    return it->second.propose(request);
  }

 private:
  std::map<std::string, BernoulliProposer> by_level_;
};

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.is_object() || !obj.contains(key) || obj[key].is_null()) return fallback;
  return obj[key].get<T>();
}

EndpointConfig parse_endpoint(const json& j, EndpointConfig base) {
  base.base_url = get_or<std::string>(j, "url", base.base_url);
  base.path = get_or<std::string>(j, "path", base.path);
  base.model = get_or<std::string>(j, "model", base.model);
  base.api_key = get_or<std::string>(j, "api_key", base.api_key);
  base.prompt_template = get_or<std::string>(j, "prompt_template", base.prompt_template);
  base.temperature = get_or<double>(j, "temperature", base.temperature);
  base.top_p = get_or<double>(j, "top_p", base.top_p);
  base.max_tokens = get_or<std::uint32_t>(j, "max_tokens", base.max_tokens);
  base.timeout = std::chrono::milliseconds(
      get_or<std::int64_t>(j, "timeout_ms", base.timeout.count()));
  base.max_retries = get_or<std::uint32_t>(j, "max_retries", base.max_retries);
  base.backoff = std::chrono::milliseconds(
      get_or<std::int64_t>(j, "backoff_ms", base.backoff.count()));
  base.max_in_flight = get_or<std::uint32_t>(j, "max_in_flight", base.max_in_flight);
  return base;
}

VerifierSpec parse_verifier(const json& j) {
  VerifierSpec v;
  const auto kind = get_or<std::string>(j, "kind", "oracle");
  if (kind == "oracle") {
    v.kind = VerifierSpec::Kind::Oracle;
  } else if (kind == "noisy") {
    v.kind = VerifierSpec::Kind::Noisy;
  } else if (kind == "flip") {
    v.kind = VerifierSpec::Kind::Flip;
    v.flip_probability = get_or<double>(j, "q", v.flip_probability);
    if (!(v.flip_probability >= 0.0 && v.flip_probability <= 1.0)) {
      throw ConfigError("verifier.q", "flip probability must lie in [0, 1]");
    }
  } else if (kind == "ensemble") {
    v.kind = VerifierSpec::Kind::Ensemble;
    if (!j.contains("members") || !j["members"].is_array() || j["members"].empty()) {
      throw ConfigError("verifier.members", "ensemble verifier needs a non-empty members list");
    }
    for (const auto& m : j["members"]) v.members.push_back(parse_verifier(m));
  } else if (kind == "remote") {
    v.kind = VerifierSpec::Kind::Remote;
    v.endpoint = parse_endpoint(j, {});
  } else {
    throw ConfigError("verifier.kind", "unknown verifier kind: " + kind);
  }
  return v;
}

TaskSpec parse_task(const json& j) {
  TaskSpec t;
  const auto kind = get_or<std::string>(j, "kind", "bernoulli");
  t.questions = get_or<std::uint32_t>(j, "questions", t.questions);
  if (kind == "bernoulli") {
    t.kind = TaskSpec::Kind::Bernoulli;
    t.label_count = get_or<std::uint32_t>(j, "labels", t.label_count);
    if (j.contains("levels")) {
      t.levels.clear();
      for (const auto& l : j["levels"]) {
        LevelSpec level;
        level.name = get_or<std::string>(l, "name", "all");
        level.step_success_p = get_or<double>(l, "p", level.step_success_p);
        level.solution_length = get_or<std::uint32_t>(l, "length", level.solution_length);
        t.levels.push_back(level);
      }
    } else {
      t.levels.front().step_success_p = get_or<double>(j, "p", 0.8);
      t.levels.front().solution_length = get_or<std::uint32_t>(j, "length", 4);
    }
    if (t.levels.empty()) throw ConfigError("task.levels", "need at least one level");
    for (const auto& l : t.levels) {
      BernoulliTreeTask probe{l.step_success_p, l.solution_length, {"a", "b"}};
      try {
        validate(probe);
      } catch (const std::invalid_argument& e) {
        throw ConfigError("task.levels", e.what());
      }
    }
    if (t.label_count < 2) throw ConfigError("task.labels", "need at least two answer labels");
  } else if (kind == "imt") {
    t.kind = TaskSpec::Kind::Imt;
    t.alphabet_size = get_or<std::uint32_t>(j, "alphabet", t.alphabet_size);
    t.target_length = get_or<std::uint32_t>(j, "length", t.target_length);
    if (t.alphabet_size < 1 || t.alphabet_size > 26) {
      throw ConfigError("task.alphabet", "IMT alphabet must be in [1, 26]");
    }
    if (t.target_length < 1) throw ConfigError("task.length", "IMT target length must be >= 1");
  } else if (kind == "scripted") {
    t.kind = TaskSpec::Kind::Scripted;
    t.scripted.step_width = get_or<std::uint32_t>(j, "step_width", t.scripted.step_width);
    t.scripted.min_depth = get_or<std::uint32_t>(j, "min_depth", t.scripted.min_depth);
    t.scripted.max_depth = get_or<std::uint32_t>(j, "max_depth", t.scripted.max_depth);
    t.scripted.stop_probability =
        get_or<double>(j, "stop_probability", t.scripted.stop_probability);
  } else if (kind == "dataset") {
    t.kind = TaskSpec::Kind::Dataset;
    t.dataset_path = get_or<std::string>(j, "path", "");
    if (t.dataset_path.empty()) throw ConfigError("task.path", "dataset task needs a path");
  } else {
    throw ConfigError("task.kind", "unknown task kind: " + kind);
  }
  if (t.kind != TaskSpec::Kind::Dataset && t.questions < 1) {
    throw ConfigError("task.questions", "need at least one question");
  }
  return t;
}

std::vector<Question> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("task.path", "cannot open dataset " + path);
  std::vector<Question> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
      Question q;
      q.id = j.contains("id") ? (j["id"].is_string() ? j["id"].get<std::string>()
                                                     : j["id"].dump())
                              : fmt::format("q{:04}", out.size());
      q.text = j.at("question").get<std::string>();
      q.answer = j.at("answer").is_string() ? j["answer"].get<std::string>() : j["answer"].dump();
      q.difficulty = get_or<std::string>(j, "difficulty", "all");
      out.push_back(std::move(q));
    } catch (const json::exception& e) {
      throw ConfigError("task.path", fmt::format("{}:{}: {}", path, line_no, e.what()));
    }
  }
  if (out.empty()) throw ConfigError("task.path", "dataset " + path + " has no questions");
  return out;
}

std::shared_ptr<const Verifier> make_verifier(const VerifierSpec& spec, const TaskSpec& task) {
  switch (spec.kind) {
    case VerifierSpec::Kind::Oracle:
      switch (task.kind) {
        case TaskSpec::Kind::Bernoulli:
          return std::make_shared<OracleVerifier>(BernoulliTreeTask{});
        case TaskSpec::Kind::Imt: return std::make_shared<ImtVerifier>(task.alphabet_size);
        case TaskSpec::Kind::Scripted: return std::make_shared<ScriptedVerifier>();
        case TaskSpec::Kind::Dataset:
          throw ConfigError("verifier.kind", "dataset tasks have no oracle verifier");
      }
      break;
    case VerifierSpec::Kind::Noisy: return std::make_shared<NoisyVerifier>();
    case VerifierSpec::Kind::Flip: {
      VerifierSpec inner;
      return std::make_shared<FlipVerifier>(make_verifier(inner, task), spec.flip_probability);
    }
    case VerifierSpec::Kind::Ensemble: {
      std::vector<std::shared_ptr<const Verifier>> members;
      for (const auto& m : spec.members) members.push_back(make_verifier(m, task));
      return std::make_shared<EnsembleVerifier>(std::move(members));
    }
    case VerifierSpec::Kind::Remote:
      return std::make_shared<RemoteVerifier>(verifier_endpoint_from_env(spec.endpoint));
  }
  throw ConfigError("verifier.kind", "unsupported verifier");
}

std::size_t digits(std::uint32_t x) { return std::to_string(x).size(); }

// Mean tokens per step of a full Bernoulli solution, averaged over labels.
double bernoulli_tokens_per_step(const LevelSpec& level, std::uint32_t label_count) {
  double label_chars = 0.0;
  for (std::uint32_t i = 0; i < label_count; ++i) label_chars += digits(i);
  label_chars /= label_count;
  double total = 9.0 + label_chars;  // "+\boxed{" + label + "}"
  for (std::uint32_t k = 1; k < level.solution_length; ++k) total += 2.0 + digits(k);
  return total;
}

std::string job_answer(const Answer& a) { return a ? *a : std::string(); }

}  // namespace

Strategy parse_strategy(std::string_view name) {
  if (name == "vg") return Strategy::VgSearch;
  if (name == "beam") return Strategy::BeamSearch;
  if (name == "bon") return Strategy::BestOfN;
  if (name == "dvts") return Strategy::Dvts;
  throw ConfigError("strategies", fmt::format("unknown strategy '{}'", name));
}

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::VgSearch: return "vg";
    case Strategy::BeamSearch: return "beam";
    case Strategy::BestOfN: return "bon";
    case Strategy::Dvts: return "dvts";
  }
  return "unknown";
}

std::uint32_t ExperimentSpec::cycles_for(std::uint32_t g) const {
  if (const auto it = cycles.find(g); it != cycles.end()) return it->second;
  return (cycle_budget + g - 1) / g;
}

ExperimentSpec parse_experiment_spec(const json& doc) {
  if (!doc.is_object()) throw ConfigError("", "experiment spec must be a JSON object");
  ExperimentSpec spec;
  try {
    spec.seed = get_or<std::uint64_t>(doc, "seed", spec.seed);
    spec.repetitions = get_or<std::uint32_t>(doc, "repetitions", spec.repetitions);
    spec.workers = get_or<std::uint32_t>(doc, "workers", spec.workers);
    spec.output_dir = get_or<std::string>(doc, "output_dir", spec.output_dir);
    if (doc.contains("strategies")) {
      spec.strategies.clear();
      for (const auto& s : doc["strategies"]) spec.strategies.push_back(parse_strategy(s.get<std::string>()));
    }
    const json grid = doc.value("grid", json::object());
    spec.g_grid = get_or<std::vector<std::uint32_t>>(grid, "g", spec.g_grid);
    spec.n_grid = get_or<std::vector<std::uint32_t>>(grid, "n", spec.n_grid);
    spec.cycle_budget = get_or<std::uint32_t>(grid, "cycle_budget", spec.cycle_budget);
    if (grid.contains("cycles")) {
      for (const auto& [k, v] : grid["cycles"].items()) {
        spec.cycles[static_cast<std::uint32_t>(std::stoul(k))] = v.get<std::uint32_t>();
      }
    }

    const json search = doc.value("search", json::object());
    spec.branch_factor = get_or<std::uint32_t>(search, "branch_factor", spec.branch_factor);
    spec.step_delimiter = get_or<std::string>(search, "step_delimiter", spec.step_delimiter);
    spec.max_tokens_per_step =
        get_or<std::uint32_t>(search, "max_tokens_per_step", spec.max_tokens_per_step);
    spec.reject_below = get_or<double>(search, "reject_below", spec.reject_below);
    spec.bon_max_steps = get_or<std::uint32_t>(search, "max_steps", spec.bon_max_steps);
    if (search.contains("dvts_subtree_width")) {
      spec.dvts_subtree_width = search["dvts_subtree_width"].get<std::uint32_t>();
    }
    spec.aggregation =
        parse_aggregation_policy(get_or<std::string>(doc, "aggregation", "majority"));

    spec.task = parse_task(doc.value("task", json::object()));
    const json proposer = doc.value("proposer", json::object());
    const auto proposer_kind = get_or<std::string>(proposer, "kind", "synthetic");
    if (proposer_kind == "remote") {
      spec.proposer.kind = ProposerSpec::Kind::Remote;
      EndpointConfig base;
      base.step_delimiter = spec.step_delimiter;
      base.max_tokens = spec.max_tokens_per_step;
      spec.proposer.endpoint = parse_endpoint(proposer, base);
    } else if (proposer_kind != "synthetic") {
      throw ConfigError("proposer.kind", "unknown proposer kind: " + proposer_kind);
    }
    spec.verifier = parse_verifier(doc.value("verifier", json::object({{"kind", "oracle"}})));

    const json cost = doc.value("cost", json::object());
    if (cost.contains("solution_length")) spec.solution_length = cost["solution_length"].get<double>();
    if (cost.contains("tokens_per_step")) spec.tokens_per_step = cost["tokens_per_step"].get<double>();
    spec.proposer_params = get_or<double>(cost, "proposer_params", spec.proposer_params);
    spec.verifier_params = get_or<double>(cost, "verifier_params", spec.verifier_params);
    spec.verifier_alpha = get_or<double>(cost, "alpha", spec.verifier_alpha);
  } catch (const json::exception& e) {
    throw ConfigError("", fmt::format("malformed experiment spec: {}", e.what()));
  } catch (const std::invalid_argument& e) {
    if (dynamic_cast<const ConfigError*>(&e) != nullptr) throw;
    throw ConfigError("", e.what());
  }

  if (spec.repetitions < 1) throw ConfigError("repetitions", "repetitions must be >= 1");
  if (spec.workers < 1) throw ConfigError("workers", "workers must be >= 1");
  if (spec.strategies.empty()) throw ConfigError("strategies", "no strategies given");
  if (spec.g_grid.empty() || spec.n_grid.empty()) throw ConfigError("grid", "empty grid");
  for (auto g : spec.g_grid) {
    if (g < 1) throw ConfigError("grid.g", "g must be >= 1");
    if (spec.cycles_for(g) < 1) throw ConfigError("grid.cycles", "I must be >= 1");
  }
  if (spec.branch_factor < 1) throw ConfigError("search.branch_factor", "B2 must be >= 1");
  for (auto n : spec.n_grid) {
    beam_width_for(n, spec.branch_factor);
    if (spec.dvts_subtree_width) {
      const auto m = *spec.dvts_subtree_width;
      if (m == 0 || n % m != 0 || m % spec.branch_factor != 0) {
        throw ConfigError("search.dvts_subtree_width",
                          fmt::format("subtree width {} must divide n = {} and be a multiple of B2",
                                      m, n));
      }
    }
  }
  if (spec.bon_max_steps < 1) throw ConfigError("search.max_steps", "max_steps must be >= 1");
  SearchConfig probe;
  probe.step_delimiter = spec.step_delimiter;
  probe.max_tokens_per_step = spec.max_tokens_per_step;
  probe.reject_below = spec.reject_below;
  validate_config(probe);
  CostParams(spec.solution_length.value_or(1.0), spec.tokens_per_step.value_or(1.0),
             spec.proposer_params, spec.verifier_params, spec.verifier_alpha);
  return spec;
}

ExperimentSpec load_experiment_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config " + path);
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("", fmt::format("{}: {}", path, e.what()));
  }
  return parse_experiment_spec(doc);
}

Workload build_workload(const ExperimentSpec& spec) {
  const TaskSpec& task = spec.task;
  std::vector<Question> questions;
  std::shared_ptr<const Proposer> proposer;
  AnswerExtractor extract = boxed_answer_extractor();
  double default_length = 1.0;
  double default_tokens = 1.0;

  switch (task.kind) {
    case TaskSpec::Kind::Bernoulli: {
      double steps = 0.0;
      double tokens = 0.0;
      for (std::uint32_t i = 0; i < task.questions; ++i) {
        const LevelSpec& level = task.levels[i % task.levels.size()];
        const auto label = seed::derive({spec.seed, 0x7175657374ULL, i}) % task.label_count;
        questions.push_back({fmt::format("q{:04}", i),
                             fmt::format("Synthetic reasoning question {}", i),
                             std::to_string(label), level.name});
        steps += level.solution_length;
        tokens += bernoulli_tokens_per_step(level, task.label_count);
      }
      default_length = steps / task.questions;
      default_tokens = tokens / steps;
      proposer = std::make_shared<LevelledProposer>(task.levels, task.label_count);
      break;
    }
    case TaskSpec::Kind::Imt: {
      for (std::uint32_t i = 0; i < task.questions; ++i) {
        questions.push_back({fmt::format("q{:04}", i), "reproduce the target",
                             imt_random_target(task.alphabet_size, task.target_length,
                                               seed::derive({spec.seed, 0x696d74ULL, i})),
                             "all"});
      }
      default_length = task.target_length;
      proposer = std::make_shared<ImtProposer>(task.alphabet_size);
      extract = [](const Trajectory& t) -> Answer {
        if (t.status != TrajectoryStatus::Completed) return std::nullopt;
        return t.joined_text("");
      };
      break;
    }
    case TaskSpec::Kind::Scripted: {
      for (std::uint32_t i = 0; i < task.questions; ++i) {
        questions.push_back({fmt::format("q{:04}", i), "scripted tree", "", "all"});
      }
      default_length = 0.5 * (task.scripted.min_depth + task.scripted.max_depth);
      default_tokens = task.scripted.step_width;
      proposer = std::make_shared<ScriptedProposer>(task.scripted);
      break;
    }
    case TaskSpec::Kind::Dataset: {
      questions = load_dataset(task.dataset_path);
      if (!spec.solution_length || !spec.tokens_per_step) {
        throw ConfigError("cost", "dataset tasks need cost.solution_length and cost.tokens_per_step");
      }
      break;
    }
  }

  if (spec.proposer.kind == ProposerSpec::Kind::Remote) {
    proposer = std::make_shared<RemoteProposer>(proposer_endpoint_from_env(spec.proposer.endpoint));
  } else if (!proposer) {
    throw ConfigError("proposer.kind", "dataset tasks need a remote proposer");
  }

  return Workload{std::move(questions), std::move(proposer), make_verifier(spec.verifier, task),
                  std::move(extract),
                  CostParams(spec.solution_length.value_or(default_length),
                             spec.tokens_per_step.value_or(default_tokens), spec.proposer_params,
                             spec.verifier_params, spec.verifier_alpha)};
}

double binomial_stderr(double p, std::size_t m) {
  if (m == 0) return 0.0;
  return std::sqrt(p * (1.0 - p) / static_cast<double>(m));
}

namespace {

struct Job {
  Strategy strategy;
  std::uint32_t g;
  std::uint32_t n;
  std::uint32_t beam_width;
  std::uint32_t branch_factor;
  std::uint32_t cycles;
  std::uint32_t repetition;
  std::size_t question;
};

void check_invariants(const SearchResult& r, const Job& job) {
  if (r.ledger.verifier_calls != r.all_candidates.size()) {
    throw InvariantViolation("ledger verifier_calls differs from the number of scored candidates");
  }
  for (const auto& t : r.final_candidates) {
    if (t.score_history.empty()) throw InvariantViolation("final candidate was never scored");
  }
  if ((job.strategy == Strategy::VgSearch || job.strategy == Strategy::BeamSearch) &&
      r.ledger.cycles_executed > job.cycles) {
    throw InvariantViolation("search ran more cycles than configured");
  }
}

}  // namespace

SweepOutput run_sweep(const ExperimentSpec& spec) {
  const Workload work = build_workload(spec);

  std::vector<Job> jobs;
  for (Strategy s : spec.strategies) {
    std::vector<std::uint32_t> gs = spec.g_grid;
    if (s == Strategy::BeamSearch) gs = {1};
    if (s == Strategy::BestOfN) gs = {spec.bon_max_steps};
    for (std::uint32_t g : gs) {
      for (std::uint32_t n : spec.n_grid) {
        Job base{s, g, n, beam_width_for(n, spec.branch_factor), spec.branch_factor,
                 spec.cycles_for(g), 0, 0};
        if (s == Strategy::BestOfN) {
          base.beam_width = n;
          base.branch_factor = 1;
          base.cycles = 1;
        }
        for (std::uint32_t rep = 0; rep < spec.repetitions; ++rep) {
          for (std::size_t q = 0; q < work.questions.size(); ++q) {
            Job job = base;
            job.repetition = rep;
            job.question = q;
            jobs.push_back(job);
          }
        }
      }
    }
  }

  std::vector<SweepRow> rows(jobs.size());
  std::vector<std::vector<std::vector<double>>> histories(jobs.size());

  parallel_for(jobs.size(), spec.workers, [&](std::size_t i) {
    const Job& job = jobs[i];
    const Question& question = work.questions[job.question];

    SearchConfig config;
    config.g = job.g;
    config.beam_width = job.beam_width;
    config.branch_factor = job.branch_factor;
    config.max_cycles = job.cycles;
    config.step_delimiter = spec.step_delimiter;
    config.max_tokens_per_step = spec.max_tokens_per_step;
    config.seed = seed::derive({spec.seed, job.repetition});
    config.reject_below = spec.reject_below;

    SearchResult result;
    SearchShape shape{static_cast<double>(job.g), static_cast<double>(job.beam_width),
                      static_cast<double>(job.branch_factor)};
    switch (job.strategy) {
      case Strategy::VgSearch:
        result = vg_search(config, *work.proposer, *work.verifier, question);
        break;
      case Strategy::BeamSearch:
        result = reference_beam_search(config, *work.proposer, *work.verifier, question);
        break;
      case Strategy::BestOfN:
        result = best_of_n(job.n, *work.proposer, *work.verifier, question, spec.bon_max_steps,
                           config.seed);
        shape = {work.cost.solution_length(), static_cast<double>(job.n), 1.0};
        break;
      case Strategy::Dvts:
        result = dvts(job.n, spec.dvts_subtree_width.value_or(spec.branch_factor), config,
                      *work.proposer, *work.verifier, question);
        break;
    }
    if (result.error) throw BackendError(*result.error, false);
    check_invariants(result, job);

    const Answer answer = aggregate_answer(result.final_candidates, spec.aggregation, work.extract);
    SweepRow& row = rows[i];
    row.strategy = job.strategy;
    row.g = job.g;
    row.n = job.n;
    row.beam_width = job.beam_width;
    row.branch_factor = job.branch_factor;
    row.cycles = job.cycles;
    row.repetition = job.repetition;
    row.question_id = question.id;
    row.difficulty = question.difficulty;
    row.correct = answer.has_value() && *answer == question.answer;
    row.ledger = result.ledger;
    row.ledger_flops = ledger_to_flops(result.ledger, work.cost);
    row.formula_flops = total_flops(work.cost, shape);
    row.selected_answer = job_answer(answer);

    for (const auto& t : result.final_candidates) {
      histories[i].push_back(t.step_scores.empty() ? t.score_history : t.step_scores);
    }
  });

  SweepOutput out;
  out.rows = std::move(rows);
  for (auto& h : histories) {
    std::move(h.begin(), h.end(), std::back_inserter(out.histories));
  }

  const std::size_t per_group = work.questions.size();
  for (std::size_t start = 0; start < out.rows.size(); start += per_group) {
    SummaryRow s;
    const SweepRow& first = out.rows[start];
    s.strategy = first.strategy;
    s.g = first.g;
    s.n = first.n;
    double correct = 0.0;
    double ledger_sum = 0.0;
    double formula_sum = 0.0;
    for (std::size_t i = start; i < start + per_group; ++i) {
      correct += out.rows[i].correct ? 1.0 : 0.0;
      ledger_sum += out.rows[i].ledger_flops;
      formula_sum += out.rows[i].formula_flops;
    }
    const double m = static_cast<double>(per_group);
    s.accuracy = correct / m;
    s.stderr_ = binomial_stderr(s.accuracy, per_group);
    s.mean_ledger_flops = ledger_sum / m;
    s.mean_formula_flops = formula_sum / m;
    s.log2_flops = s.mean_ledger_flops > 0.0 ? std::log2(s.mean_ledger_flops) : 0.0;
    out.summary.push_back(s);
  }
  return out;
}

std::string sweep_csv(const SweepOutput& out) {
  std::string text = std::string(kSweepHeader) + "\n";
  for (const auto& r : out.rows) {
    text += csv::join_row({std::string(to_string(r.strategy)), std::to_string(r.g),
                           std::to_string(r.n), std::to_string(r.beam_width),
                           std::to_string(r.branch_factor), std::to_string(r.cycles),
                           std::to_string(r.repetition), r.question_id, r.correct ? "1" : "0",
                           std::to_string(r.ledger.proposer_steps),
                           std::to_string(r.ledger.proposer_tokens),
                           std::to_string(r.ledger.verifier_calls),
                           csv::format_double(r.ledger_flops), csv::format_double(r.formula_flops),
                           r.selected_answer});
  }
  return text;
}

std::string summary_csv(const SweepOutput& out) {
  std::string text = std::string(kSummaryHeader) + "\n";
  for (const auto& s : out.summary) {
    text += csv::join_row({std::string(to_string(s.strategy)), std::to_string(s.g),
                           std::to_string(s.n), csv::format_double(s.accuracy),
                           csv::format_double(s.stderr_), csv::format_double(s.mean_ledger_flops),
                           csv::format_double(s.mean_formula_flops),
                           csv::format_double(s.log2_flops)});
  }
  return text;
}

std::string histories_text(const SweepOutput& out) {
  std::string text;
  for (const auto& h : out.histories) {
    for (std::size_t i = 0; i < h.size(); ++i) {
      if (i > 0) text.push_back(',');
      text += csv::format_double(h[i]);
    }
    text.push_back('\n');
  }
  return text;
}

AccuracyTable accuracy_table(const SweepOutput& out) {
  std::vector<ValidationRun> runs;
  bool baseline = false;
  bool levelled = false;
  for (const auto& r : out.rows) {
    if (r.strategy != Strategy::VgSearch) continue;
    runs.push_back({r.question_id, r.g, r.difficulty, r.n, r.correct});
    baseline = baseline || r.g == 1;
    levelled = levelled || r.difficulty != "all";
  }
  if (!baseline) return {};
  // Pooled cells under "all" next to the per-level ones.
  if (levelled) {
    const std::size_t per_level = runs.size();
    for (std::size_t i = 0; i < per_level; ++i) {
      if (runs[i].difficulty == "all") continue;
      ValidationRun pooled = runs[i];
      pooled.difficulty = "all";
      runs.push_back(std::move(pooled));
    }
  }
  return build_accuracy_table(runs);
}

void write_sweep_outputs(const SweepOutput& out, const std::string& output_dir) {
  std::filesystem::create_directories(output_dir);
  const std::filesystem::path dir(output_dir);
  csv::write_file((dir / "sweep.csv").string(), sweep_csv(out));
  csv::write_file((dir / "summary.csv").string(), summary_csv(out));
  csv::write_file((dir / "histories.txt").string(), histories_text(out));
  const AccuracyTable table = accuracy_table(out);
  if (!table.empty()) csv::write_file((dir / "accuracy.csv").string(), to_csv(table));
}

StabilityProfile profile_score_stability(std::span<const std::vector<double>> histories,
                                         std::size_t k, std::size_t bins) {
  if (k < 1) throw std::invalid_argument("step gap k must be >= 1");
  if (bins < 1) throw std::invalid_argument("need at least one histogram bin");

  StabilityProfile profile;
  profile.histogram.assign(bins, 0);
  double lo = 0.0;
  double hi = 0.0;
  bool seen = false;
  for (const auto& h : histories) {
    if (h.size() < k + 1) {
      ++profile.skipped_histories;
      continue;
    }
    for (double s : h) {
      lo = seen ? std::min(lo, s) : s;
      hi = seen ? std::max(hi, s) : s;
      seen = true;
    }
  }
  profile.score_range = hi - lo;

  std::size_t below = 0;
  for (const auto& h : histories) {
    if (h.size() < k + 1) continue;
    for (std::size_t i = 0; i + k < h.size(); ++i) {
      const double d =
          profile.score_range > 0.0 ? std::abs(h[i + k] - h[i]) / profile.score_range : 0.0;
      profile.deltas.push_back(d);
      const auto bin = std::min(bins - 1, static_cast<std::size_t>(d * static_cast<double>(bins)));
      ++profile.histogram[bin];
      if (d < 0.01) ++below;
    }
  }
  profile.pairs = profile.deltas.size();
  profile.fraction_below_one_percent =
      profile.pairs > 0 ? static_cast<double>(below) / static_cast<double>(profile.pairs) : 0.0;
  return profile;
}

std::vector<std::vector<double>> parse_histories(std::string_view text) {
  std::vector<std::vector<double>> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) {
      std::vector<double> h;
      std::size_t p = 0;
      while (p <= line.size()) {
        auto comma = line.find(',', p);
        if (comma == std::string_view::npos) comma = line.size();
        h.push_back(csv::to_double(line.substr(p, comma - p)));
        p = comma + 1;
      }
      out.push_back(std::move(h));
    }
    start = end + 1;
  }
  return out;
}

std::map<std::string, std::string> report_curves(const csv::Table& summary) {
  const std::size_t strategy_col = summary.column("strategy");
  const std::size_t g_col = summary.column("g");
  const std::size_t n_col = summary.column("n");
  const std::size_t acc_col = summary.column("accuracy");
  const std::size_t se_col = summary.column("stderr");
  const std::size_t flops_col = summary.column("log2_flops");

  struct Point {
    std::int64_t g;
    double log2_flops;
    std::int64_t n;
    const std::vector<std::string>* row;
  };
  std::map<std::string, std::vector<Point>> series;
  for (const auto& row : summary.rows) {
    const double acc = csv::to_double(row[acc_col]);
    if (!(acc >= 0.0 && acc <= 1.0)) {
      throw csv::CsvError(fmt::format("accuracy {} outside [0, 1]", row[acc_col]));
    }
    csv::to_double(row[se_col]);
    series[row[strategy_col]].push_back(
        {csv::to_int(row[g_col]), csv::to_double(row[flops_col]), csv::to_int(row[n_col]), &row});
  }

  std::map<std::string, std::string> files;
  for (auto& [strategy, points] : series) {
    std::stable_sort(points.begin(), points.end(), [](const Point& a, const Point& b) {
      if (a.g != b.g) return a.g < b.g;
      return a.log2_flops < b.log2_flops;
    });
    std::string text = "g,n,log2_flops,accuracy,stderr\n";
    for (const auto& p : points) {
      const auto& r = *p.row;
      text += csv::join_row({r[g_col], r[n_col], r[flops_col], r[acc_col], r[se_col]});
    }
    files["curves_" + strategy + ".csv"] = std::move(text);
  }
  return files;
}

}  // namespace vgs
