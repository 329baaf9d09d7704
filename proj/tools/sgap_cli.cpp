// Command-line front end: run, search, preset, enumerate, bench, synth.

#include <CLI11.hpp>

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "sgap/bench.hpp"
#include "sgap/dataset.hpp"
#include "sgap/errors.hpp"
#include "sgap/json_io.hpp"
#include "sgap/pipeline.hpp"
#include "sgap/search.hpp"

namespace {

using namespace sgap;

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text_file(out, text);
  }
}

ArchitectureConfig load_arch(const std::string& arch_arg) {
  for (auto name : preset_names()) {
    if (arch_arg == name) return preset(name).arch;
  }
  return architecture_from_json(read_json_file(arch_arg));
}

struct RunArgs {
  std::string data, arch, train, out, log, model;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::size_t train_workers = 1;
  std::string cost_scope = "full";
  bool timings = false;
};

int cmd_run(const RunArgs& a) {
  const Dataset data = load_dataset(a.data);
  TrainConfig cfg = a.train.empty() ? TrainConfig{} : train_config_from_json(read_json_file(a.train));
  cfg.seed = a.seed;
  RunOptions opt;
  opt.propagation.workers = a.workers;
  opt.train_workers = a.train_workers;
  opt.cost_scope = parse_cost_scope(a.cost_scope);
  PropagationCache cache = PropagationCache::from_environment();
  opt.cache = &cache;
  const SgapRun run = run_sgap_detailed(data, load_arch(a.arch), cfg, opt);
  emit(to_json(run.result, a.timings).dump(2) + "\n", a.out);
  if (!a.log.empty()) write_epoch_log(run.model.log, a.log);
  if (!a.model.empty()) save_model(run.model.params, a.model);
  return 0;
}

struct SearchArgs {
  std::string data, train, out, front_csv;
  bool synthetic = false;
  std::size_t budget = 60, init = 10, candidates = 500, workers = 1;
  std::uint64_t seed = 0;
  std::string cost_scope = "full";
  bool timings = false;
};

int cmd_search(const SearchArgs& a) {
  SearchOptions opt;
  opt.budget = a.budget;
  opt.seed = a.seed;
  opt.suggest.init = a.init;
  opt.suggest.n_candidates = a.candidates;
  if (a.budget < a.init) throw ValidationError("--budget must be >= --init");

  SearchResult result;
  if (a.synthetic) {
    result = search(synthetic_benchmark, opt);
  } else {
    if (a.data.empty()) throw ValidationError("search needs --data DIR or --synthetic");
    const Dataset data = load_dataset(a.data);
    TrainConfig cfg = a.train.empty() ? TrainConfig{} : train_config_from_json(read_json_file(a.train));
    cfg.seed = a.seed;
    PropagationCache cache = PropagationCache::from_environment();
    RunOptions run_opt;
    run_opt.propagation.workers = a.workers;
    run_opt.cost_scope = parse_cost_scope(a.cost_scope);
    run_opt.cache = &cache;
    result = search(
        [&](const ArchitectureConfig& arch) {
          const EvalResult r = run_sgap(data, arch, cfg, run_opt);
          return Evaluation{{r.val_error, r.normalized_cost}, r.test_accuracy, r.inference_cost};
        },
        opt);
  }
  emit(to_json(result, opt.suggest.ref, a.timings).dump(2) + "\n", a.out);
  if (!a.front_csv.empty()) write_text_file(a.front_csv, front_csv(result.front));
  return 0;
}

std::vector<std::size_t> parse_worker_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(tok, &used);
      if (used != tok.size() || v < 1) throw std::invalid_argument(tok);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw ValidationError("bad worker count '" + tok + "'");
    }
  }
  if (out.empty()) throw ValidationError("empty worker list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scalable graph neural architecture search toolkit"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Train and evaluate one architecture");
  run->add_option("--data", run_args.data, "Dataset directory")->required();
  run->add_option("--arch", run_args.arch, "Architecture JSON file or preset name")->required();
  run->add_option("--train", run_args.train, "Training config JSON file");
  run->add_option("--seed", run_args.seed, "Random seed");
  run->add_option("--out", run_args.out, "Result JSON path (stdout when omitted)");
  run->add_option("--workers", run_args.workers, "Propagation workers")->check(CLI::PositiveNumber);
  run->add_option("--train-workers", run_args.train_workers, "Asynchronous training workers (1 = deterministic)")
      ->check(CLI::PositiveNumber);
  run->add_option("--cost-scope", run_args.cost_scope, "full or online")->check(CLI::IsMember({"full", "online"}));
  run->add_option("--log", run_args.log, "Per-epoch CSV log path");
  run->add_option("--model", run_args.model, "Binary weights output path");
  run->add_flag("--timings", run_args.timings, "Include wall-clock times in the result");

  SearchArgs search_args;
  auto* srch = app.add_subcommand("search", "Multi-objective Bayesian architecture search");
  srch->add_option("--data", search_args.data, "Dataset directory");
  srch->add_flag("--synthetic", search_args.synthetic, "Use the analytic benchmark instead of training");
  srch->add_option("--train", search_args.train, "Training config JSON file");
  srch->add_option("--budget", search_args.budget, "Number of evaluations");
  srch->add_option("--init", search_args.init, "Random initial evaluations");
  srch->add_option("--candidates", search_args.candidates, "Candidates scored per iteration")
      ->check(CLI::PositiveNumber);
  srch->add_option("--seed", search_args.seed, "Random seed");
  srch->add_option("--workers", search_args.workers, "Propagation workers")->check(CLI::PositiveNumber);
  srch->add_option("--cost-scope", search_args.cost_scope, "full or online")
      ->check(CLI::IsMember({"full", "online"}));
  srch->add_option("--out", search_args.out, "pareto.json path (stdout when omitted)");
  srch->add_option("--front-csv", search_args.front_csv, "CSV export of the front");
  srch->add_flag("--timings", search_args.timings, "Include per-evaluation seconds");

  std::string preset_name, preset_out;
  auto* pre = app.add_subcommand("preset", "Print a named architecture as JSON");
  pre->add_option("--name", preset_name, "Preset name")->required();
  pre->add_option("--out", preset_out, "Output path");

  bool count_only = false;
  auto* enumerate = app.add_subcommand("enumerate", "List the design space");
  enumerate->add_flag("--count-only", count_only, "Print only the number of canonical configs");

  std::string bench_data, bench_workers = "1,2,4", bench_arch = "sgc";
  std::size_t bench_repeats = 3;
  auto* bench = app.add_subcommand("bench", "Propagation scaling across worker counts");
  bench->add_option("--data", bench_data, "Dataset directory")->required();
  bench->add_option("--workers", bench_workers, "Comma-separated worker counts");
  bench->add_option("--arch", bench_arch, "Architecture JSON file or preset name");
  bench->add_option("--repeats", bench_repeats, "Timing repeats (minimum is kept)")->check(CLI::PositiveNumber);

  SbmParams sbm;
  std::string synth_out;
  bool synth_binary = false;
  auto* synth = app.add_subcommand("synth", "Write a stochastic-block-model dataset");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--nodes", sbm.num_nodes, "Number of nodes");
  synth->add_option("--blocks", sbm.blocks, "Number of blocks (classes)");
  synth->add_option("--p-in", sbm.p_in, "Intra-block edge probability");
  synth->add_option("--p-out", sbm.p_out, "Inter-block edge probability");
  synth->add_option("--dim", sbm.feature_dim, "Feature dimension");
  synth->add_option("--noise", sbm.noise, "Feature noise standard deviation");
  synth->add_option("--seed", sbm.seed, "Random seed");
  synth->add_flag("--binary", synth_binary, "Write features.bin instead of features.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*run) return cmd_run(run_args);
    if (*srch) return cmd_search(search_args);
    if (*pre) {
      emit(to_json(preset(preset_name).arch).dump() + "\n", preset_out);
      return 0;
    }
    if (*enumerate) {
      if (count_only) {
        std::cout << space::kCanonicalSize << '\n';
      } else {
        for (const ArchitectureConfig& arch : enumerate_space()) std::cout << to_json(arch).dump() << '\n';
      }
      return 0;
    }
    if (*bench) {
      const Dataset data = load_dataset(bench_data);
      const auto rows = bench_scaling(data, load_arch(bench_arch), parse_worker_list(bench_workers), bench_repeats);
      std::cout << "workers,seconds,speedup,identical\n";
      for (const ScalingRow& r : rows) {
        std::cout << r.workers << ',' << r.seconds << ',' << r.speedup << ',' << (r.identical ? "true" : "false")
                  << '\n';
      }
      return 0;
    }
    if (*synth) {
      save_dataset(synth_sbm(sbm), synth_out, synth_binary ? FeatureFormat::Binary : FeatureFormat::Csv);
      return 0;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
