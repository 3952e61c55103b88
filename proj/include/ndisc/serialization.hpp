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

#include <cstdint>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "ndisc/coloring.hpp"
#include "ndisc/error.hpp"
#include "ndisc/measures.hpp"
#include "ndisc/rounding.hpp"
#include "ndisc/splitter.hpp"
#include "ndisc/subsidy.hpp"
#include "ndisc/valuations.hpp"

// JSON documents for instances and audit reports. Doubles are written in
// shortest round-trip form, so parse(dump(x)) reproduces every value exactly.
namespace ndisc {

using Json = nlohmann::json;

inline constexpr const char* kInstanceFormat = "ndisc-instance";
inline constexpr int kInstanceVersion = 1;

inline Json subset_to_json(Subset s) { return s.items(); }
inline Subset subset_from_json(const Json& j) {
  return Subset::of(j.get<std::vector<int>>());
}

inline Json valuation_to_json(const ValuationOracle& v) {
  Json j;
  j["kind"] = std::string(to_string(v.kind()));
  j["m"] = v.item_count();
  j["marginal_bound"] = v.marginal_bound();
  if (const auto* a = dynamic_cast<const AdditiveValuation*>(&v)) {
    j["weights"] = a->weights();
  } else if (const auto* t = dynamic_cast<const TableValuation*>(&v)) {
    j["table"] = t->table();
  } else if (const auto* c = dynamic_cast<const CoverageValuation*>(&v)) {
    j["universe_size"] = c->universe_size();
    Json sets = Json::array();
    for (Subset s : c->item_sets()) sets.push_back(subset_to_json(s));
    j["item_sets"] = sets;
    j["element_weights"] = c->element_weights();
  } else if (const auto* d = dynamic_cast<const TransferValuation*>(&v)) {
    j["base"] = valuation_to_json(*d->base());
  } else {
    throw InputError("custom valuations cannot be serialized");
  }
  return j;
}

inline Valuation valuation_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "additive") {
    return std::make_shared<AdditiveValuation>(j.at("weights").get<std::vector<double>>(),
                                               j.at("marginal_bound").get<double>());
  }
  if (kind == "table") {
    return std::make_shared<TableValuation>(j.at("m").get<int>(),
                                            j.at("table").get<std::vector<double>>(),
                                            j.at("marginal_bound").get<double>());
  }
  if (kind == "coverage") {
    std::vector<Subset> sets;
    for (const auto& s : j.at("item_sets")) sets.push_back(subset_from_json(s));
    return std::make_shared<CoverageValuation>(
        j.at("universe_size").get<int>(), std::move(sets),
        j.at("element_weights").get<std::vector<double>>());
  }
  if (kind == "transfer-derived") {
    return vprime_transform(valuation_from_json(j.at("base")));
  }
  throw InputError("unknown valuation kind '" + kind + "'");
}

inline Json instance_to_json(const Instance& inst) {
  Json j;
  j["format"] = kInstanceFormat;
  j["version"] = kInstanceVersion;
  j["family"] = std::string(to_string(inst.family));
  j["seed"] = inst.seed;
  j["n"] = inst.valuations.size();
  j["m"] = inst.m;
  j["params"] = {{"coverage_universe", inst.params.coverage_universe},
                 {"coverage_density", inst.params.coverage_density},
                 {"table_noise", inst.params.table_noise}};
  Json vals = Json::array();
  for (const auto& v : inst.valuations) vals.push_back(valuation_to_json(*v));
  j["valuations"] = vals;
  return j;
}

namespace detail {

inline Instance instance_from_json_unchecked(const Json& j) {
  if (!j.is_object() || j.value("format", std::string()) != kInstanceFormat) {
    throw InputError("document is not an ndisc instance");
  }
  Instance inst;
  inst.family = parse_family(j.at("family").get<std::string>());
  inst.seed = j.at("seed").get<std::uint64_t>();
  inst.m = j.at("m").get<int>();
  if (j.contains("params")) {
    const Json& p = j["params"];
    inst.params.coverage_universe = p.value("coverage_universe", 0);
    inst.params.coverage_density = p.value("coverage_density", 0.3);
    inst.params.table_noise = p.value("table_noise", 1.0);
  }
  for (const auto& v : j.at("valuations")) inst.valuations.push_back(valuation_from_json(v));
  if (inst.valuations.empty()) throw InputError("instance has no valuations");
  if (profile_items(inst.valuations) != inst.m) {
    throw InputError("instance m does not match its valuations");
  }
  if (j.at("n").get<std::size_t>() != inst.valuations.size()) {
    throw InputError("instance n does not match its valuations");
  }
  return inst;
}

}  // namespace detail

// Malformed documents raise InputError.
inline Instance instance_from_json(const Json& j) {
  try {
    return detail::instance_from_json_unchecked(j);
  } catch (const Json::exception& e) {
    throw InputError(std::string("malformed instance document: ") + e.what());
  }
}

inline Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open instance file '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw InputError("instance file '" + path + "': " + e.what());
  }
  return instance_from_json(j);
}

inline void save_json(const Json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

inline Json coloring_to_json(const FractionalColoring& chi) {
  Json rows = Json::array();
  for (int j = 0; j < chi.item_count(); ++j) {
    const auto r = chi.row(j);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

inline Json split_report_to_json(const SplitReport& r) {
  Json j;
  j["imbalance"] = r.imbalance;
  j["converged"] = r.converged;
  j["max_fractional_per_color"] = r.max_fractional_per_color;
  j["iterations"] = r.iterations;
  j["restart_index"] = r.restart_index;
  j["restarts_run"] = r.restarts_run;
  j["coloring"] = coloring_to_json(r.coloring);
  if (r.layout) j["layout"] = r.layout->order;
  if (r.cuts) {
    j["cuts"] = r.cuts->cuts;
    j["labels"] = r.cuts->labels;
    j["intervals_per_color"] = intervals_per_color(*r.cuts);
  }
  return j;
}

inline Json discrepancy_to_json(const DiscrepancyValue& d) {
  return {{"value", d.value}, {"agent", d.agent}, {"colors", {d.colors.first, d.colors.second}}};
}

inline Json rounding_report_to_json(const RoundingReport& r) {
  Json j;
  j["coloring"] = r.coloring.colors();
  j["realized_disc"] = discrepancy_to_json(r.realized);
  j["mu"] = r.mu;
  j["column_spread"] = r.column_spread;
  j["fractional_support"] = r.fractional_support;
  j["bound_predicted"] = r.bound_predicted;
  j["trials_used"] = r.trials_used;
  j["best_trial"] = r.best_trial;
  return j;
}

inline Json subsidy_report_to_json(const SubsidyReport& r) {
  Json j;
  Json bundles = Json::array();
  for (Subset b : r.allocation.bundles) bundles.push_back(subset_to_json(b));
  j["bundles"] = bundles;
  j["assignment"] = r.allocation.assignment;
  Json graph = Json::array();
  for (int i = 0; i < r.graph.size(); ++i) {
    std::vector<double> row(r.graph.size());
    for (int k = 0; k < r.graph.size(); ++k) row[k] = r.graph(i, k);
    graph.push_back(row);
  }
  j["envy_graph"] = graph;
  j["payments"] = r.payments;
  j["disc"] = discrepancy_to_json(r.disc);
  j["total_subsidy"] = r.total_subsidy;
  j["max_payment"] = r.max_payment;
  j["max_envy_after_payments"] = r.max_envy;
  j["per_agent_bound_holds"] = r.per_agent_bound_holds;
  j["total_bound_holds"] = r.total_bound_holds;
  return j;
}

}  // namespace ndisc
