// Copyright 2026 The ndisc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// ndisc: runs discrepancy pipelines and parameter sweeps, writing CSV.
//
//   ndisc round --n 4 --m 12 --k 2 --family coverage --seed 3
//   ndisc sweep --cell round --ns 2,3,4 --seeds 1,2,3 --no-timing -o out.csv
//   ndisc fit --input out.csv --model sqrt-nlog-nk
//
// Exit status: 0 when every run converged and passed its invariant checks,
// 1 otherwise, 2 on bad input or capacity errors, 3 on internal errors.

#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "ndisc.hpp"

namespace {

using ndisc::Command;
using ndisc::ExperimentConfig;

// Flags given on the command line override values from --config.
struct Overrides {
  std::vector<std::pair<CLI::Option*, std::function<void(ExperimentConfig&)>>> items;

  template <typename T>
  void bind(CLI::App* app, const std::string& name, T ExperimentConfig::*field,
            ExperimentConfig& store, const std::string& help) {
    CLI::Option* opt = app->add_option(name, store.*field, help);
    items.emplace_back(opt, [field, &store](ExperimentConfig& c) { c.*field = store.*field; });
  }

  void apply(ExperimentConfig& c) const {
    for (const auto& [opt, set] : items) {
      if (opt->count() > 0) set(c);
    }
  }
};

struct RunCommand {
  Command command;
  CLI::App* app = nullptr;
  ExperimentConfig flags;
  Overrides overrides;
  std::string config_path;
  bool no_timing = false;
  std::string cell = "round";
  double coverage_density = 0.0;
  int coverage_universe = 0;
  double table_noise = 0.0;
};

void add_run_options(RunCommand& rc) {
  CLI::App* app = rc.app;
  ExperimentConfig& f = rc.flags;
  Overrides& o = rc.overrides;
  app->add_option("--config", rc.config_path, "JSON file with configuration keys")
      ->check(CLI::ExistingFile);
  o.bind(app, "--n", &ExperimentConfig::n, f, "number of agents");
  o.bind(app, "--m", &ExperimentConfig::m, f, "number of items");
  o.bind(app, "--k", &ExperimentConfig::k, f, "number of colors");
  o.bind(app, "--family", &ExperimentConfig::family, f,
         "additive-uniform | additive-signed | coverage | table-random-lipschitz | file");
  o.bind(app, "--seed", &ExperimentConfig::seed, f, "instance and search seed");
  o.bind(app, "--trials", &ExperimentConfig::trials, f, "rounding trials (best-of)");
  o.bind(app, "--restarts", &ExperimentConfig::restarts, f, "splitter restarts");
  o.bind(app, "--tol", &ExperimentConfig::tol, f, "splitter imbalance tolerance");
  o.bind(app, "-o,--output", &ExperimentConfig::output_path, f, "CSV output path (default stdout)");
  o.bind(app, "--instance", &ExperimentConfig::instance_path, f,
         "instance JSON, used with --family file");
  o.bind(app, "--audit-dir", &ExperimentConfig::audit_dir, f, "directory for per-run JSON reports");
  o.bind(app, "--layout", &ExperimentConfig::layout, f, "identity | shuffled item order");
  o.bind(app, "--workers", &ExperimentConfig::workers, f, "parallel workers");
  app->add_flag("--no-timing", rc.no_timing, "write 0 in wall_time_ms for byte-stable output");

  CLI::Option* universe = app->add_option("--coverage-universe", rc.coverage_universe,
                                          "coverage universe size (0: min(64, 2m))");
  CLI::Option* density =
      app->add_option("--coverage-density", rc.coverage_density, "coverage set density");
  CLI::Option* noise = app->add_option("--table-noise", rc.table_noise, "random table noise");
  o.items.emplace_back(universe, [&rc](ExperimentConfig& c) {
    c.params.coverage_universe = rc.coverage_universe;
  });
  o.items.emplace_back(density, [&rc](ExperimentConfig& c) {
    c.params.coverage_density = rc.coverage_density;
  });
  o.items.emplace_back(noise, [&rc](ExperimentConfig& c) { c.params.table_noise = rc.table_noise; });

  if (rc.command == Command::kSweep) {
    CLI::Option* cell = app->add_option("--cell", rc.cell, "command run in each cell");
    o.items.emplace_back(cell, [&rc](ExperimentConfig& c) {
      c.cell_command = ndisc::parse_command(rc.cell);
    });
    o.bind(app, "--ns", &ExperimentConfig::ns, f, "comma-separated n values");
    o.bind(app, "--ks", &ExperimentConfig::ks, f, "comma-separated k values");
    o.bind(app, "--ms", &ExperimentConfig::ms, f, "comma-separated m values");
    o.bind(app, "--seeds", &ExperimentConfig::seeds, f, "comma-separated seeds");
    for (const char* name : {"--ns", "--ks", "--ms", "--seeds"}) {
      app->get_option(name)->delimiter(',');
    }
  }
}

int execute(const RunCommand& rc) {
  ExperimentConfig config =
      rc.config_path.empty() ? ExperimentConfig{} : ndisc::load_config(rc.config_path);
  rc.overrides.apply(config);
  config.command = rc.command;
  if (rc.no_timing) config.record_timing = false;

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!config.output_path.empty()) {
    file.open(config.output_path);
    if (!file) throw ndisc::InputError("cannot write '" + config.output_path + "'");
    out = &file;
  }
  const std::vector<ndisc::ResultRecord> records = ndisc::run(config, out);
  int status = 0;
  for (const ndisc::ResultRecord& r : records) {
    if (!r.converged) {
      std::cerr << "not converged: " << r.command << " n=" << r.n << " m=" << r.m
                << " k=" << r.k << " seed=" << r.seed << '\n';
      status = 1;
    }
    if (!r.invariants_ok) {
      std::cerr << "invariant check failed: " << r.command << " n=" << r.n << " m=" << r.m
                << " k=" << r.k << " seed=" << r.seed << '\n';
      status = 1;
    }
  }
  return status;
}

int fit(const std::string& input, const std::string& model_name) {
  std::ifstream in(input);
  if (!in) throw ndisc::InputError("cannot open '" + input + "'");
  const ndisc::ScalingFit fit =
      ndisc::fit_scaling(ndisc::read_records_csv(in), ndisc::parse_model(model_name));
  ndisc::Json j;
  j["model"] = model_name;
  j["coefficient"] = fit.coefficient;
  j["residual"] = fit.residual;
  for (const ndisc::ScalingPoint& p : fit.points) {
    j["points"].push_back({{"n", p.n}, {"mean", p.mean}, {"curve", p.curve}, {"samples", p.samples}});
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-color discrepancy pipelines for non-additive valuations"};
  app.require_subcommand(1);

  const std::vector<std::pair<Command, std::string>> commands = {
      {Command::kSplit, "fractional necklace split"},
      {Command::kRound, "split followed by best-of randomized rounding"},
      {Command::kDisc, "brute-force optimal discrepancy"},
      {Command::kTransfer, "two-color pipeline on transfer-derived valuations"},
      {Command::kSubsidy, "pipeline with k = n and envy-free payments"},
      {Command::kSweep, "grid over n, k, m and seeds"},
  };
  std::vector<RunCommand> runs(commands.size());
  for (std::size_t i = 0; i < commands.size(); ++i) {
    runs[i].command = commands[i].first;
    runs[i].app = app.add_subcommand(std::string(ndisc::to_string(commands[i].first)),
                                     commands[i].second);
    add_run_options(runs[i]);
  }

  std::string fit_input;
  std::string fit_model = "sqrt-nlog-nk";
  CLI::App* fit_app = app.add_subcommand("fit", "least-squares scaling fit of a sweep CSV");
  fit_app->add_option("--input", fit_input, "sweep CSV")->required()->check(CLI::ExistingFile);
  fit_app->add_option("--model", fit_model, "sqrt-nlog-nk | n-sqrt-nlogn");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit_app->parsed()) return fit(fit_input, fit_model);
    for (const RunCommand& rc : runs) {
      if (rc.app->parsed()) return execute(rc);
    }
  } catch (const ndisc::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const ndisc::CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
