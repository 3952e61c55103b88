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

#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "ndisc/coloring.hpp"
#include "ndisc/error.hpp"
#include "ndisc/measures.hpp"
#include "ndisc/rounding.hpp"
#include "ndisc/serialization.hpp"
#include "ndisc/splitter.hpp"
#include "ndisc/subsidy.hpp"
#include "ndisc/valuations.hpp"

namespace ndisc {

// ---------------------------------------------------------------------------
// Pipeline: necklace split followed by best-of randomized rounding.

struct PipelineResult {
  SplitReport split;
  RoundingReport rounding;
};

inline PipelineResult run_pipeline(const Profile& profile, int k,
                                   const NecklaceLayout& layout,
                                   const SearchConfig& search,
                                   std::uint64_t trials, std::uint64_t seed,
                                   int workers = 1) {
  PipelineResult out;
  out.split = split_necklace(profile, k, layout, search);
  out.rounding = round_best_of(profile, out.split.coloring, trials,
                               derive_seed(seed, 0x726f756e64ULL), workers);
  return out;
}

// ---------------------------------------------------------------------------
// Experiment configuration and records

enum class Command { kSplit, kRound, kDisc, kTransfer, kSubsidy, kSweep };

inline std::string_view to_string(Command c) {
  switch (c) {
    case Command::kSplit: return "split";
    case Command::kRound: return "round";
    case Command::kDisc: return "disc";
    case Command::kTransfer: return "transfer";
    case Command::kSubsidy: return "subsidy";
    case Command::kSweep: return "sweep";
  }
  return "unknown";
}

inline Command parse_command(std::string_view s) {
  for (Command c : {Command::kSplit, Command::kRound, Command::kDisc, Command::kTransfer,
                    Command::kSubsidy, Command::kSweep}) {
    if (to_string(c) == s) return c;
  }
  throw InputError("unknown command '" + std::string(s) + "'");
}

struct ExperimentConfig {
  Command command = Command::kRound;
  int n = 2;
  int m = 8;
  int k = 2;
  std::string family = "coverage";  // a random family tag, or "file"
  std::uint64_t seed = 1;
  std::uint64_t trials = 64;
  int restarts = 32;
  double tol = 1e-6;
  std::string output_path;    // CSV destination; empty means the caller's stream
  std::string instance_path;  // read when family == "file"
  std::string audit_dir;      // per-run JSON sidecars when non-empty
  std::string layout = "identity";  // or "shuffled"
  FamilyParams params;
  int workers = 1;
  bool record_timing = true;

  // Sweep grid; each cell runs `cell_command`.
  Command cell_command = Command::kRound;
  std::vector<int> ns;
  std::vector<int> ks;
  std::vector<int> ms;
  std::vector<std::uint64_t> seeds;
};

inline void validate(const ExperimentConfig& c) {
  auto positive = [](long long v, const char* name) {
    if (v < 1) throw InputError(std::string(name) + " must be >= 1");
  };
  positive(c.n, "n");
  positive(c.m, "m");
  positive(c.k, "k");
  positive(static_cast<long long>(c.trials), "trials");
  positive(c.restarts, "restarts");
  positive(c.workers, "workers");
  if (!(c.tol > 0.0)) throw InputError("tol must be > 0");
  if (c.family != "file") parse_family(c.family);
  if (c.family == "file" && c.instance_path.empty()) {
    throw InputError("family=file needs an instance path");
  }
  if (c.layout != "identity" && c.layout != "shuffled") {
    throw InputError("layout must be 'identity' or 'shuffled'");
  }
  if (c.command == Command::kSweep) {
    if (c.cell_command == Command::kSweep) throw InputError("sweep cells cannot be sweeps");
    for (int v : c.ns) positive(v, "sweep n");
    for (int v : c.ks) positive(v, "sweep k");
    for (int v : c.ms) positive(v, "sweep m");
  }
}

// Reads a configuration document. Keys mirror the CLI flags; missing keys
// keep their defaults.
inline ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig c;
  if (!j.is_object()) throw InputError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "command") c.command = parse_command(value.get<std::string>());
      else if (key == "n") c.n = value.get<int>();
      else if (key == "m") c.m = value.get<int>();
      else if (key == "k") c.k = value.get<int>();
      else if (key == "family") c.family = value.get<std::string>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "trials") c.trials = value.get<std::uint64_t>();
      else if (key == "restarts") c.restarts = value.get<int>();
      else if (key == "tol") c.tol = value.get<double>();
      else if (key == "output") c.output_path = value.get<std::string>();
      else if (key == "instance") c.instance_path = value.get<std::string>();
      else if (key == "audit_dir") c.audit_dir = value.get<std::string>();
      else if (key == "layout") c.layout = value.get<std::string>();
      else if (key == "workers") c.workers = value.get<int>();
      else if (key == "timing") c.record_timing = value.get<bool>();
      else if (key == "coverage_universe") c.params.coverage_universe = value.get<int>();
      else if (key == "coverage_density") c.params.coverage_density = value.get<double>();
      else if (key == "table_noise") c.params.table_noise = value.get<double>();
      else if (key == "cell") c.cell_command = parse_command(value.get<std::string>());
      else if (key == "ns") c.ns = value.get<std::vector<int>>();
      else if (key == "ks") c.ks = value.get<std::vector<int>>();
      else if (key == "ms") c.ms = value.get<std::vector<int>>();
      else if (key == "seeds") c.seeds = value.get<std::vector<std::uint64_t>>();
      else throw InputError("unknown config key '" + key + "'");
    } catch (const Json::exception& e) {
      throw InputError("config key '" + key + "': " + e.what());
    }
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  try {
    return config_from_json(Json::parse(in));
  } catch (const Json::parse_error& e) {
    throw InputError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

struct ResultRecord {
  std::string command;
  std::string family;
  int n = 0;
  int m = 0;
  int k = 0;
  std::uint64_t seed = 0;
  std::uint64_t trials = 0;
  int restarts = 0;
  double tol = 0.0;
  std::optional<double> imbalance;
  std::optional<double> realized_disc;
  std::optional<double> bound_predicted;
  std::optional<double> transfer_disc;
  std::optional<double> total_subsidy;
  bool converged = true;
  double wall_time_ms = 0.0;
  // Not part of the CSV: set when a checked invariant failed.
  bool invariants_ok = true;
  std::string note;
  // Fractional items per color in the split, when a split ran.
  std::optional<int> fractional_support;
};

inline constexpr std::string_view kCsvHeader =
    "command,family,n,m,k,seed,trials,restarts,tol,imbalance,realized_disc,"
    "bound_predicted,transfer_disc,total_subsidy,converged,wall_time_ms";

// Shortest representation that parses back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline std::string csv_row(const ResultRecord& r) {
  auto opt = [](const std::optional<double>& x) {
    return x ? format_double(*x) : std::string();
  };
  std::string row;
  row += r.command + ',' + r.family + ',' + std::to_string(r.n) + ',' +
         std::to_string(r.m) + ',' + std::to_string(r.k) + ',' + std::to_string(r.seed) +
         ',' + std::to_string(r.trials) + ',' + std::to_string(r.restarts) + ',' +
         format_double(r.tol) + ',' + opt(r.imbalance) + ',' + opt(r.realized_disc) + ',' +
         opt(r.bound_predicted) + ',' + opt(r.transfer_disc) + ',' + opt(r.total_subsidy) +
         ',' + (r.converged ? "true" : "false") + ',' + format_double(r.wall_time_ms);
  return row;
}

// Parses a CSV produced by `run`. Empty optional fields stay unset.
inline std::vector<ResultRecord> read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw InputError("results CSV has an unexpected header");
  }
  std::vector<ResultRecord> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 16) {
      throw InputError("results CSV line " + std::to_string(line_no) + " has " +
                       std::to_string(f.size()) + " fields, expected 16");
    }
    auto opt = [](const std::string& x) -> std::optional<double> {
      if (x.empty()) return std::nullopt;
      return std::stod(x);
    };
    try {
      ResultRecord r;
      r.command = f[0];
      r.family = f[1];
      r.n = std::stoi(f[2]);
      r.m = std::stoi(f[3]);
      r.k = std::stoi(f[4]);
      r.seed = std::stoull(f[5]);
      r.trials = std::stoull(f[6]);
      r.restarts = std::stoi(f[7]);
      r.tol = std::stod(f[8]);
      r.imbalance = opt(f[9]);
      r.realized_disc = opt(f[10]);
      r.bound_predicted = opt(f[11]);
      r.transfer_disc = opt(f[12]);
      r.total_subsidy = opt(f[13]);
      r.converged = f[14] == "true";
      r.wall_time_ms = std::stod(f[15]);
      out.push_back(std::move(r));
    } catch (const std::logic_error& e) {
      throw InputError("results CSV line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

namespace detail {

inline Instance make_instance(const ExperimentConfig& c) {
  if (c.family == "file") return load_instance(c.instance_path);
  return random_instance(parse_family(c.family), c.n, c.m, c.seed, c.params);
}

inline NecklaceLayout make_layout(const ExperimentConfig& c, int m) {
  return c.layout == "shuffled" ? NecklaceLayout::shuffled(m, derive_seed(c.seed, 0x6c61ULL))
                                : NecklaceLayout::identity(m);
}

inline SearchConfig make_search(const ExperimentConfig& c) {
  SearchConfig s;
  s.restarts = c.restarts;
  s.tol = c.tol;
  s.seed = derive_seed(c.seed, 0x73706c6974ULL);
  return s;
}

inline std::string audit_path(const ExperimentConfig& c, const ResultRecord& r) {
  return (std::filesystem::path(c.audit_dir) /
          (r.command + "_" + r.family + "_n" + std::to_string(r.n) + "_m" +
           std::to_string(r.m) + "_k" + std::to_string(r.k) + "_s" + std::to_string(r.seed) +
           ".json"))
      .string();
}

// Splitter invariants for a necklace report.
inline bool split_invariants_hold(const SplitReport& s, int n, int k) {
  if (!s.cuts) return true;
  if (static_cast<int>(s.cuts->cuts.size()) > n * (k - 1)) return false;
  const std::vector<int> intervals = intervals_per_color(*s.cuts);
  for (int l = 0; l < k; ++l) {
    if (intervals[l] > interval_cap(n, k)) return false;
    if (s.coloring.fractional_count(l) > 2 * intervals[l]) return false;
  }
  return true;
}

inline ResultRecord run_single(const ExperimentConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  const Instance inst = make_instance(c);
  const Profile& profile = inst.valuations;
  const int n = static_cast<int>(profile.size());
  const int m = inst.m;

  ResultRecord r;
  r.command = std::string(to_string(c.command));
  r.family = c.family;
  r.n = n;
  r.m = m;
  r.k = c.command == Command::kSubsidy ? n : c.command == Command::kTransfer ? 2 : c.k;
  r.seed = c.seed;
  r.trials = c.trials;
  r.restarts = c.restarts;
  r.tol = c.tol;

  const NecklaceLayout layout = make_layout(c, m);
  const SearchConfig search = make_search(c);
  Json audit;
  audit["instance"] = instance_to_json(inst);

  switch (c.command) {
    case Command::kSplit: {
      const SplitReport s = split_necklace(profile, r.k, layout, search);
      r.imbalance = s.imbalance;
      r.converged = s.converged;
      r.fractional_support = s.max_fractional_per_color;
      r.invariants_ok = split_invariants_hold(s, n, r.k);
      audit["split"] = split_report_to_json(s);
      break;
    }
    case Command::kRound: {
      const PipelineResult p = run_pipeline(profile, r.k, layout, search, c.trials, c.seed, c.workers);
      r.imbalance = p.split.imbalance;
      r.realized_disc = p.rounding.realized_disc;
      r.bound_predicted = p.rounding.bound_predicted;
      r.converged = p.split.converged;
      r.fractional_support = p.split.max_fractional_per_color;
      r.invariants_ok = split_invariants_hold(p.split, n, r.k);
      audit["split"] = split_report_to_json(p.split);
      audit["rounding"] = rounding_report_to_json(p.rounding);
      break;
    }
    case Command::kDisc: {
      const DiscrepancyOptimum opt = disc_opt_bruteforce(profile, r.k);
      r.realized_disc = opt.disc.value;
      audit["optimum"] = discrepancy_to_json(opt.disc);
      audit["optimal_coloring"] = opt.coloring.colors();
      break;
    }
    case Command::kTransfer: {
      const Profile derived = vprime_transform(profile);
      const PipelineResult p = run_pipeline(derived, 2, layout, search, c.trials, c.seed, c.workers);
      const DiscrepancyValue t = transfer_disc_of_coloring(profile, 2, p.rounding.coloring);
      r.imbalance = p.split.imbalance;
      r.realized_disc = p.rounding.realized_disc;
      r.bound_predicted = p.rounding.bound_predicted;
      r.transfer_disc = t.value;
      r.converged = p.split.converged;
      r.fractional_support = p.split.max_fractional_per_color;
      // disc of the signed family is exactly twice the transfer discrepancy.
      r.invariants_ok = split_invariants_hold(p.split, n, 2) &&
                        2.0 * t.value == p.rounding.realized_disc;
      audit["split"] = split_report_to_json(p.split);
      audit["rounding"] = rounding_report_to_json(p.rounding);
      audit["transfer_disc"] = discrepancy_to_json(t);
      break;
    }
    case Command::kSubsidy: {
      const PipelineResult p = run_pipeline(profile, n, layout, search, c.trials, c.seed, c.workers);
      const SubsidyReport s = envy_free_with_subsidy(profile, p.rounding.coloring);
      r.imbalance = p.split.imbalance;
      r.realized_disc = s.disc.value;
      r.bound_predicted = p.rounding.bound_predicted;
      r.total_subsidy = s.total_subsidy;
      r.converged = p.split.converged;
      r.fractional_support = p.split.max_fractional_per_color;
      r.invariants_ok = split_invariants_hold(p.split, n, n) && s.per_agent_bound_holds &&
                        s.total_bound_holds && s.max_envy <= kPaymentSlack;
      audit["split"] = split_report_to_json(p.split);
      audit["rounding"] = rounding_report_to_json(p.rounding);
      audit["subsidy"] = subsidy_report_to_json(s);
      break;
    }
    case Command::kSweep:
      throw InputError("run_single cannot run a sweep");
  }

  if (c.record_timing) {
    r.wall_time_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - start)
                         .count();
  }
  if (!c.audit_dir.empty()) {
    std::filesystem::create_directories(c.audit_dir);
    save_json(audit, audit_path(c, r));
  }
  return r;
}

inline std::string describe_cell(const ExperimentConfig& c) {
  return std::string(to_string(c.command)) + " family=" + c.family + " n=" +
         std::to_string(c.n) + " m=" + std::to_string(c.m) + " k=" + std::to_string(c.k) +
         " seed=" + std::to_string(c.seed);
}

// Runs one cell, naming its parameters in any error it raises.
inline ResultRecord run_cell(const ExperimentConfig& c) {
  try {
    return run_single(c);
  } catch (const CapacityError& e) {
    throw CapacityError(std::string(e.what()) + " [" + describe_cell(c) + "]");
  } catch (const InputError& e) {
    throw InputError(std::string(e.what()) + " [" + describe_cell(c) + "]");
  } catch (const ContractViolation& e) {
    throw ContractViolation(std::string(e.what()) + " [" + describe_cell(c) + "]");
  }
}

}  // namespace detail

// Runs the configured command. Sweeps iterate n, k, m, seed (outermost to
// innermost) and stream one CSV row per cell in grid order; `csv` may be null.
inline std::vector<ResultRecord> run(const ExperimentConfig& config, std::ostream* csv = nullptr) {
  validate(config);
  std::vector<ExperimentConfig> cells;
  if (config.command != Command::kSweep) {
    cells.push_back(config);
  } else {
    const std::vector<int> ns = config.ns.empty() ? std::vector<int>{config.n} : config.ns;
    const std::vector<int> ks = config.ks.empty() ? std::vector<int>{config.k} : config.ks;
    const std::vector<int> ms = config.ms.empty() ? std::vector<int>{config.m} : config.ms;
    const std::vector<std::uint64_t> seeds =
        config.seeds.empty() ? std::vector<std::uint64_t>{config.seed} : config.seeds;
    for (int n : ns) {
      for (int k : ks) {
        for (int m : ms) {
          for (std::uint64_t s : seeds) {
            ExperimentConfig cell = config;
            cell.command = config.cell_command;
            cell.n = n;
            cell.k = k;
            cell.m = m;
            cell.seed = s;
            cells.push_back(cell);
          }
        }
      }
    }
  }

  if (csv) *csv << kCsvHeader << '\n';
  std::vector<ResultRecord> records(cells.size());
  const std::size_t workers = config.command == Command::kSweep
                                  ? static_cast<std::size_t>(config.workers)
                                  : 1;
  for (std::size_t begin = 0; begin < cells.size(); begin += workers) {
    const std::size_t end = std::min(cells.size(), begin + workers);
    if (end - begin == 1) {
      records[begin] = detail::run_cell(cells[begin]);
    } else {
      std::vector<std::exception_ptr> errors(end - begin);
      {
        std::vector<std::jthread> pool;
        for (std::size_t i = begin; i < end; ++i) {
          pool.emplace_back([&, i] {
            try {
              records[i] = detail::run_cell(cells[i]);
            } catch (...) {
              errors[i - begin] = std::current_exception();
            }
          });
        }
      }
      for (const std::exception_ptr& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }
    if (csv) {
      for (std::size_t i = begin; i < end; ++i) *csv << csv_row(records[i]) << '\n';
      csv->flush();
    }
  }
  return records;
}

inline bool all_ok(const std::vector<ResultRecord>& records) {
  return std::all_of(records.begin(), records.end(),
                     [](const ResultRecord& r) { return r.converged && r.invariants_ok; });
}

// ---------------------------------------------------------------------------
// Scaling fits

enum class ScalingModel { kSqrtNLogNK, kNSqrtNLogN };

inline ScalingModel parse_model(std::string_view s) {
  if (s == "sqrt-nlog-nk") return ScalingModel::kSqrtNLogNK;
  if (s == "n-sqrt-nlogn") return ScalingModel::kNSqrtNLogN;
  throw InputError("unknown scaling model '" + std::string(s) + "'");
}

// sqrt(n log(nk)) or n sqrt(n log n).
inline double model_curve(ScalingModel model, int n, int k) {
  const double nd = n;
  if (model == ScalingModel::kSqrtNLogNK) return std::sqrt(nd * std::log(nd * k));
  return nd * std::sqrt(nd * std::log(nd));
}

struct ScalingPoint {
  int n = 0;
  double mean = 0.0;
  double curve = 0.0;
  int samples = 0;
};

struct ScalingFit {
  double coefficient = 0.0;
  // max over n of |mean_n - c f(n)| / (c f(n)); 0 when both vanish.
  double residual = 0.0;
  std::vector<ScalingPoint> points;
};

// Least-squares fit of the per-n mean metric (realized_disc for the sqrt
// model, total_subsidy for the subsidy model) to c * f(n).
inline ScalingFit fit_scaling(const std::vector<ResultRecord>& records, ScalingModel model) {
  std::map<int, ScalingPoint> by_n;
  for (const ResultRecord& r : records) {
    const std::optional<double>& metric =
        model == ScalingModel::kSqrtNLogNK ? r.realized_disc : r.total_subsidy;
    if (!metric) continue;
    ScalingPoint& p = by_n[r.n];
    p.n = r.n;
    p.mean += *metric;
    p.curve += model_curve(model, r.n, r.k);
    ++p.samples;
  }
  if (by_n.size() < 4) {
    throw InputError("fit_scaling needs at least 4 distinct n values, got " +
                     std::to_string(by_n.size()));
  }
  ScalingFit fit;
  double num = 0.0;
  double den = 0.0;
  for (auto& [n, p] : by_n) {
    p.mean /= p.samples;
    p.curve /= p.samples;
    num += p.mean * p.curve;
    den += p.curve * p.curve;
    fit.points.push_back(p);
  }
  fit.coefficient = den > 0.0 ? num / den : 0.0;
  for (const ScalingPoint& p : fit.points) {
    const double predicted = fit.coefficient * p.curve;
    const double err = std::abs(p.mean - predicted);
    if (err == 0.0) continue;
    fit.residual = std::max(fit.residual, predicted != 0.0 ? err / std::abs(predicted)
                                                           : std::numeric_limits<double>::infinity());
  }
  return fit;
}

}  // namespace ndisc
