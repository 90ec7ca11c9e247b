/*
 * Copyright 2026 The consensus-select Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// consensus-select: pick the most consistent response among sampled candidates.
//
//   consensus-select select --input F --method M [--tau-prime X] [--seed S]
//                           [--toy-encode SUFFIXFILE] [--report OUT --format csv|jsonl]
//   consensus-select train-scl --input F --steps N --seed S --out SUFFIXFILE
//   consensus-select bench --sizes 2..9 --trials T --seed S --out CSV
//   consensus-select eval --input F --predictions P --ece-bins B
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 method error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "consensus/baselines.hpp"
#include "consensus/error.hpp"
#include "consensus/format.hpp"
#include "consensus/metrics.hpp"
#include "consensus/run.hpp"
#include "consensus/scl.hpp"

namespace {

using namespace consensus;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitMethod = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("CONSENSUS_SELECT_SEED")) {
    try {
      std::size_t pos = 0;
      const auto value = std::stoull(env, &pos);
      if (pos == std::string(env).size()) return value;
    } catch (const std::exception&) {
    }
    throw UsageError("CONSENSUS_SELECT_SEED is not an unsigned integer");
  }
  return 0;
}

// "2..9" or "3,5,7".
std::vector<std::size_t> parse_sizes(const std::string& spec) {
  std::vector<std::size_t> sizes;
  try {
    const auto dots = spec.find("..");
    if (dots != std::string::npos) {
      const std::size_t lo = std::stoul(spec.substr(0, dots));
      const std::size_t hi = std::stoul(spec.substr(dots + 2));
      if (lo > hi) throw UsageError("empty size range " + spec);
      for (std::size_t s = lo; s <= hi; ++s) sizes.push_back(s);
    } else {
      std::stringstream ss(spec);
      std::string item;
      while (std::getline(ss, item, ',')) sizes.push_back(std::stoul(item));
    }
  } catch (const std::logic_error&) {
    throw UsageError("cannot parse --sizes '" + spec + "'");
  }
  if (sizes.empty()) throw UsageError("--sizes is empty");
  return sizes;
}

std::vector<Method> parse_methods(const std::string& spec) {
  std::vector<Method> methods;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto m = parse_method(item);
    if (!m) throw UsageError("unknown method '" + item + "'");
    methods.push_back(*m);
  }
  if (methods.empty()) throw UsageError("--methods is empty");
  return methods;
}

struct SelectOptions {
  std::string input;
  std::string method;
  double tau_prime = 0.5;
  std::optional<std::uint64_t> seed;
  std::string toy_encode;
  std::string report;
  std::string format = "csv";
  std::size_t ece_bins = 10;
  std::string usc_url;
  std::string usc_model = "gpt-4.1";
  double usc_timeout = 30.0;
  std::size_t usc_retries = 2;
};

int run_select(const SelectOptions& opt) {
  const auto method = parse_method(opt.method);
  if (!method) throw UsageError("unknown method '" + opt.method + "'");
  if (!(opt.tau_prime > 0.0)) throw UsageError("--tau-prime must be positive");
  if (opt.ece_bins < 1) throw UsageError("--ece-bins must be at least 1");
  if (!opt.report.empty() && opt.format != "csv" && opt.format != "jsonl") {
    throw UsageError("--format must be csv or jsonl");
  }

  RunConfig cfg;
  cfg.method = *method;
  cfg.tau_prime = opt.tau_prime;
  cfg.seed = resolve_seed(opt.seed);
  cfg.ece_bins = opt.ece_bins;
  std::optional<HttplibTransport> transport;
  if (cfg.method == Method::kUsc) {
    if (opt.usc_url.empty()) throw UsageError("method usc needs --usc-url");
    if (!(opt.usc_timeout > 0.0)) throw UsageError("--usc-timeout must be positive");
    JudgeEndpointConfig judge;
    judge.url = opt.usc_url;
    judge.model_name = opt.usc_model;
    judge.timeout = std::chrono::milliseconds(static_cast<long long>(opt.usc_timeout * 1000.0));
    judge.max_retries = opt.usc_retries;
    if (const char* token = std::getenv("USC_AUTH_TOKEN")) judge.auth_token = token;
    cfg.judge = judge;
    transport.emplace();
  }

  std::vector<CandidateSet> sets = load_candidate_sets(opt.input);
  if (!opt.toy_encode.empty()) apply_toy_encoder(sets, load_suffix(opt.toy_encode));

  const RunOutput output = run_selection(sets, cfg, transport ? &*transport : nullptr);
  if (!opt.report.empty()) {
    write_report(opt.report, output.results, opt.format == "jsonl" ? ReportFormat::kJsonl : ReportFormat::kCsv);
  }
  write_summary_json(std::cout, output.summary);
  return kExitOk;
}

struct TrainOptions {
  std::string input;
  std::size_t steps = 200;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t tokens = 6;
  std::size_t dim = 64;
  double tau = 0.07;
  double learning_rate = 0.05;
  std::string cap_mode = "drop-group";
  std::string history;
};

int run_train(const TrainOptions& opt) {
  SclConfig cfg;
  cfg.steps = opt.steps;
  cfg.seed = resolve_seed(opt.seed);
  cfg.tokens = opt.tokens;
  cfg.dim = opt.dim;
  cfg.tau = opt.tau;
  cfg.learning_rate = opt.learning_rate;
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (opt.cap_mode != "drop-group" && opt.cap_mode != "downsample") {
    throw UsageError("--cap-mode must be drop-group or downsample");
  }
  const CapMode mode = opt.cap_mode == "downsample" ? CapMode::kDownsample : CapMode::kDropGroup;

  // Pseudo-labels come from each response's \boxed{} answer.
  std::vector<LabeledGroup> dataset;
  std::size_t dropped = 0;
  for (const auto& set : load_candidate_sets(opt.input)) {
    LabeledGroup group;
    for (const auto& r : set.responses) {
      if (auto answer = extract_answer(r.text)) {
        group.responses.push_back(r.text);
        group.labels.push_back(answer->normalized);
      }
    }
    group = filter_singletons(group);
    std::optional<LabeledGroup> capped;
    if (group.size() >= 2) capped = cap_majority(group, mode, cfg.seed);
    if (!capped || capped->size() < 2) {
      ++dropped;
      continue;
    }
    dataset.push_back(std::move(*capped));
  }
  if (dataset.empty()) {
    throw Error(ErrorKind::kSchemaError, "no candidate set survives curation; nothing to train on");
  }

  const TrainResult result = train_summary_embeddings(dataset, cfg);
  save_suffix(opt.out, result.u, cfg.seed);
  if (!opt.history.empty()) {
    std::ofstream hist(opt.history, std::ios::binary);
    if (!hist) throw Error(ErrorKind::kIoError, "cannot open " + opt.history + " for writing");
    hist << "epoch,mean_loss\n";
    for (std::size_t e = 0; e < result.loss_history.size(); ++e) {
      hist << e << ',' << format_float(result.loss_history[e]) << '\n';
    }
  }
  std::cout << "{\"groups\":" << dataset.size() << ",\"dropped\":" << dropped << ",\"initial_loss\":"
            << format_float(result.loss_history.front()) << ",\"final_loss\":"
            << format_float(result.loss_history.back()) << "}\n";
  return kExitOk;
}

struct BenchOptions {
  std::string sizes = "2..9";
  std::size_t trials = 1000;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t n_candidates = 10;
  double noise = 0.05;
  double separation = 0.5;
  std::size_t dimension = 16;
  std::size_t minority_cluster_size = 1;
  std::string methods = "lsc,lsc-topk,lsc-mean,random";
};

int run_bench(const BenchOptions& opt) {
  BenchConfig cfg;
  cfg.n_candidates = opt.n_candidates;
  cfg.trials = opt.trials;
  cfg.seed = resolve_seed(opt.seed);
  cfg.noise_sigma = opt.noise;
  cfg.separation = opt.separation;
  cfg.dimension = opt.dimension;
  cfg.minority_cluster_size = opt.minority_cluster_size;
  const auto sizes = parse_sizes(opt.sizes);
  const auto methods = parse_methods(opt.methods);
  try {
    for (std::size_t s : sizes) {
      BenchConfig sized = cfg;
      sized.majority_size = s;
      sized.validate();
    }
  } catch (const Error& e) {
    throw UsageError(e.what());
  }

  const auto rows = run_consistency_sweep(methods, sizes, cfg);
  std::ofstream out(opt.out, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIoError, "cannot open " + opt.out + " for writing");
  write_sweep_csv(out, rows);
  if (!out) throw Error(ErrorKind::kIoError, "failed writing " + opt.out);
  return kExitOk;
}

struct EvalOptions {
  std::string input;
  std::string predictions;
  std::size_t ece_bins = 10;
};

int run_eval(const EvalOptions& opt) {
  if (opt.ece_bins < 1) throw UsageError("--ece-bins must be at least 1");
  const auto sets = load_candidate_sets(opt.input);
  const auto predictions = load_predictions(opt.predictions);
  write_summary_json(std::cout, evaluate_predictions(sets, predictions, opt.ece_bins));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Consensus selection among sampled LLM responses"};
  app.require_subcommand(1);

  SelectOptions select_opt;
  auto* select = app.add_subcommand("select", "Select one response per question");
  select->add_option("--input", select_opt.input, "Candidate sets (JSONL)")->required();
  select->add_option("--method", select_opt.method, "lsc | lsc-topk | lsc-mean | sc | wucs | usc | random")
      ->required();
  select->add_option("--tau-prime", select_opt.tau_prime, "Temperature of the exponential weighting");
  select->add_option("--seed", select_opt.seed, "Seed (default: $CONSENSUS_SELECT_SEED or 0)");
  select->add_option("--toy-encode", select_opt.toy_encode, "Embed texts with a trained suffix file");
  select->add_option("--report", select_opt.report, "Per-question report path");
  select->add_option("--format", select_opt.format, "Report format: csv | jsonl");
  select->add_option("--ece-bins", select_opt.ece_bins, "Calibration bins");
  select->add_option("--usc-url", select_opt.usc_url, "Chat-completion endpoint for method usc");
  select->add_option("--usc-model", select_opt.usc_model, "Judge model name");
  select->add_option("--usc-timeout", select_opt.usc_timeout, "Judge timeout in seconds");
  select->add_option("--usc-retries", select_opt.usc_retries, "Judge retries on timeout or 5xx");

  TrainOptions train_opt;
  auto* train = app.add_subcommand("train-scl", "Train summary-token embeddings with the contrastive loss");
  train->add_option("--input", train_opt.input, "Candidate sets (JSONL) with \\boxed{} answers")->required();
  train->add_option("--steps", train_opt.steps, "Training epochs")->required();
  train->add_option("--seed", train_opt.seed, "Initialization seed");
  train->add_option("--out", train_opt.out, "Suffix file to write")->required();
  train->add_option("--tokens", train_opt.tokens, "Summary tokens K");
  train->add_option("--dim", train_opt.dim, "Embedding dimension d");
  train->add_option("--tau", train_opt.tau, "Contrastive temperature");
  train->add_option("--lr", train_opt.learning_rate, "Gradient descent step size");
  train->add_option("--cap-mode", train_opt.cap_mode, "drop-group | downsample");
  train->add_option("--history", train_opt.history, "Write per-epoch mean loss as CSV");

  BenchOptions bench_opt;
  auto* bench = app.add_subcommand("bench", "Consistency versus majority set size on planted clusters");
  bench->add_option("--sizes", bench_opt.sizes, "Majority sizes, e.g. 2..9 or 3,4,5");
  bench->add_option("--trials", bench_opt.trials, "Trials per size");
  bench->add_option("--seed", bench_opt.seed, "Seed");
  bench->add_option("--out", bench_opt.out, "CSV output path")->required();
  bench->add_option("--n-candidates", bench_opt.n_candidates, "Responses per instance");
  bench->add_option("--noise", bench_opt.noise, "Gaussian noise sigma per coordinate");
  bench->add_option("--separation", bench_opt.separation, "Centers have cosine <= 1 - separation");
  bench->add_option("--dimension", bench_opt.dimension, "Embedding dimension");
  bench->add_option("--minority-cluster-size", bench_opt.minority_cluster_size, "Largest minority cluster");
  bench->add_option("--methods", bench_opt.methods, "Comma-separated methods");

  EvalOptions eval_opt;
  auto* eval = app.add_subcommand("eval", "Score a prediction report against candidate sets");
  eval->add_option("--input", eval_opt.input, "Candidate sets (JSONL)")->required();
  eval->add_option("--predictions", eval_opt.predictions, "Report written by select")->required();
  eval->add_option("--ece-bins", eval_opt.ece_bins, "Calibration bins");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (select->parsed()) return run_select(select_opt);
    if (train->parsed()) return run_train(train_opt);
    if (bench->parsed()) return run_bench(bench_opt);
    if (eval->parsed()) return run_eval(eval_opt);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    switch (classify(e.kind())) {
      case ErrorClass::kData:
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
      case ErrorClass::kTransport:
        std::cerr << "judge transport error: " << e.what() << '\n';
        return kExitMethod;
      case ErrorClass::kMethod:
        std::cerr << "method error: " << e.what() << '\n';
        return kExitMethod;
    }
  }
  return kExitUsage;
}
