#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "fedopt/bench.hpp"
#include "fedopt/cost_model.hpp"
#include "fedopt/federation.hpp"
#include "fedopt/parser.hpp"
#include "fedopt/planner.hpp"
#include "fedopt/query_model.hpp"
#include "fedopt/synth.hpp"

namespace {

using nlohmann::json;

struct CommonOptions {
  std::string method;  // empty: config file value, else struct default
  std::string strategy = "auto";
  std::string config_path;
  std::string federation_path;
  std::string input = "-";
  std::string output = "-";
  bool verbose = false;
};

void add_common_flags(CLI::App *cmd, CommonOptions &opt, bool with_federation) {
  cmd->add_option("--method", opt.method, "Cost method: vc, uvc, wuvc or jwuvc");
  cmd->add_option("--strategy", opt.strategy, "Plan strategy: exhaustive, greedy or auto");
  cmd->add_option("--config", opt.config_path, "Cost configuration JSON file");
  if (with_federation)
    cmd->add_option("--federation", opt.federation_path, "Federation manifest JSON file");
  cmd->add_option("--in", opt.input, "Input query file, or - for stdin");
  cmd->add_option("--out", opt.output, "Output file, or - for stdout");
  cmd->add_flag("--verbose", opt.verbose, "Print a plan summary to the diagnostic stream");
}

std::string read_input(const std::string &path) {
  if (path == "-") {
    std::ostringstream buffer;
    buffer << std::cin.rdbuf();
    return buffer.str();
  }
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open input file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_output(const std::string &path, const std::string &text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << text;
}

fedopt::CostConfig make_cost_config(const CommonOptions &opt) {
  fedopt::CostConfig config;
  if (!opt.config_path.empty()) config = fedopt::load_cost_config(opt.config_path);
  if (!opt.method.empty()) config.method = fedopt::parse_cost_method(opt.method);
  config.validate();
  return config;
}

bool resolve_greedy(const fedopt::FederatedQuery &q, const fedopt::CostConfig &config,
                    fedopt::StrategyChoice choice) {
  if (choice == fedopt::StrategyChoice::Greedy) return true;
  if (choice == fedopt::StrategyChoice::Exhaustive) return false;
  for (const fedopt::QuerySegment &segment : q.segments)
    if (static_cast<int>(segment.services.size()) > config.exhaustive_cap) return true;
  return false;
}

json plan_report_json(const fedopt::PlanReport &report) {
  json doc;
  doc["method"] = fedopt::to_string(report.method);
  doc["strategy"] = fedopt::to_string(report.strategy);
  doc["chosenCost"] = report.chosen_cost;
  doc["constraintsApplied"] = report.constraints_applied;
  json segments = json::array();
  for (const fedopt::SegmentPlan &segment : report.segments) {
    json s;
    s["insideOptional"] = segment.inside_optional;
    s["chosenOrder"] = segment.chosen_order;
    s["chosenCost"] = segment.chosen_cost;
    json costs = json::array();
    for (const fedopt::ServiceCostRow &row : segment.service_costs)
      costs.push_back({{"originalIndex", row.original_index},
                       {"cost", row.cost},
                       {"tieBreak", row.tie_break}});
    s["serviceCosts"] = std::move(costs);
    if (segment.permutation_table) {
      json table = json::array();
      for (const fedopt::PermutationRow &row : *segment.permutation_table)
        table.push_back({{"order", row.order}, {"cost", row.cost}});
      s["permutationTable"] = std::move(table);
    }
    segments.push_back(std::move(s));
  }
  doc["segments"] = std::move(segments);
  return doc;
}

void print_plan_summary(const fedopt::PlanReport &report) {
  std::cerr << "method=" << fedopt::to_string(report.method)
            << " strategy=" << fedopt::to_string(report.strategy)
            << " cost=" << report.chosen_cost << "\n";
  for (size_t i = 0; i < report.segments.size(); ++i) {
    const fedopt::SegmentPlan &segment = report.segments[i];
    std::cerr << "segment " << i << (segment.inside_optional ? " (optional):" : ":") << " order";
    for (int index : segment.chosen_order) std::cerr << ' ' << index;
    std::cerr << "\n";
  }
}

json simulation_json(const std::vector<std::vector<int>> &orders,
                     const fedopt::SimulationResult &result) {
  json doc;
  doc["orders"] = orders;
  json calls = json::array();
  for (const fedopt::ServiceCalls &c : result.per_service_calls)
    calls.push_back({{"originalIndex", c.original_index}, {"calls", c.calls}});
  doc["perServiceCalls"] = std::move(calls);
  doc["totalCalls"] = result.total_calls;
  doc["intermediateSizes"] = result.intermediate_sizes;
  doc["solutionCount"] = result.solutions.size();
  doc["wallSeconds"] = result.wall_seconds;
  return doc;
}

std::vector<std::vector<int>> source_orders(const fedopt::FederatedQuery &q) {
  std::vector<std::vector<int>> orders;
  for (const fedopt::QuerySegment &segment : q.segments) {
    std::vector<int> order;
    for (const fedopt::ServicePattern &s : segment.services) order.push_back(s.original_index);
    orders.push_back(std::move(order));
  }
  return orders;
}

int run_reorder(const CommonOptions &opt) {
  const fedopt::FederatedQuery q = fedopt::parse_query(read_input(opt.input));
  const fedopt::CostConfig config = make_cost_config(opt);
  const fedopt::StrategyChoice choice = fedopt::parse_strategy_choice(opt.strategy);
  const fedopt::PlanResult plan = fedopt::plan_query(q, config, choice);
  write_output(opt.output, fedopt::serialize_query(plan.query));
  if (opt.verbose) print_plan_summary(plan.report);
  return 0;
}

int run_explain(const CommonOptions &opt) {
  const fedopt::FederatedQuery q = fedopt::parse_query(read_input(opt.input));
  const fedopt::CostConfig config = make_cost_config(opt);
  const fedopt::StrategyChoice choice = fedopt::parse_strategy_choice(opt.strategy);
  const fedopt::PlanResult plan = resolve_greedy(q, config, choice)
                                      ? fedopt::greedy_plan(q, config)
                                      : fedopt::exhaustive_plan(q, config, true);
  write_output(opt.output, plan_report_json(plan.report).dump(2) + "\n");
  if (opt.verbose) print_plan_summary(plan.report);
  return 0;
}

int run_simulate(const CommonOptions &opt) {
  if (opt.federation_path.empty())
    throw std::runtime_error("simulate requires --federation <manifest>");
  const fedopt::FederatedQuery q = fedopt::parse_query(read_input(opt.input));
  const fedopt::Federation fed = fedopt::load_federation(opt.federation_path);
  const fedopt::CostConfig config = make_cost_config(opt);
  const fedopt::StrategyChoice choice = fedopt::parse_strategy_choice(opt.strategy);

  const fedopt::SimulationResult input_result = fedopt::evaluate_sequence(q, fed);
  const fedopt::PlanResult plan = fedopt::plan_query(q, config, choice);
  const fedopt::SimulationResult planned_result = fedopt::evaluate_sequence(plan.query, fed);

  json doc;
  doc["method"] = fedopt::to_string(plan.report.method);
  doc["strategy"] = fedopt::to_string(plan.report.strategy);
  doc["input"] = simulation_json(source_orders(q), input_result);
  doc["planned"] = simulation_json(plan.report.chosen_orders(), planned_result);

  bool within_cap = true;
  for (const fedopt::QuerySegment &segment : q.segments)
    if (static_cast<int>(segment.services.size()) > config.exhaustive_cap) within_cap = false;
  if (within_cap) {
    const fedopt::SimulatedOptimal optimal =
        fedopt::simulated_optimal(q, fed, config.exhaustive_cap);
    doc["simulatedOptimal"] = simulation_json(optimal.orders, optimal.result);
    doc["plannerMatchesOptimal"] = planned_result.total_calls == optimal.result.total_calls;
  } else {
    doc["simulatedOptimal"] = nullptr;
    doc["plannerMatchesOptimal"] = nullptr;
  }
  write_output(opt.output, doc.dump(2) + "\n");
  if (opt.verbose) print_plan_summary(plan.report);
  return 0;
}

struct BenchOptions {
  std::string corpus_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int instances = 20;
  int min_services = 2;
  int max_services = 6;
  int min_noise = 100;
  int max_noise = 10000;
  int timing_min = 2;
  int timing_max = 0;  // 0: up to the exhaustive cap
  bool skip_timing = false;
  bool skip_accuracy = false;
};

int run_bench(const CommonOptions &opt, const BenchOptions &bench) {
  const fedopt::CostConfig config = make_cost_config(opt);

  fedopt::SynthConfig synth;
  if (!bench.corpus_path.empty()) {
    synth = fedopt::SynthConfig::from_json_text(read_input(bench.corpus_path));
  } else {
    synth.instances = bench.instances;
    synth.min_services = bench.min_services;
    synth.max_services = bench.max_services;
    synth.min_noise_triples = bench.min_noise;
    synth.max_noise_triples = bench.max_noise;
  }
  if (bench.seed_set) synth.seed = bench.seed;
  synth.validate();

  json doc;
  doc["seed"] = synth.seed;

  std::vector<fedopt::TimingRow> timing;
  if (!bench.skip_timing) {
    const int upper = bench.timing_max > 0 ? bench.timing_max : config.exhaustive_cap;
    timing = fedopt::run_timing(bench.timing_min, upper, config);
    json rows = json::array();
    for (const fedopt::TimingRow &row : timing) {
      json r;
      r["services"] = row.service_count;
      r["exhaustiveSeconds"] = row.exhaustive_seconds;
      r["greedySeconds"] = row.greedy_seconds;
      if (auto reference = fedopt::reference_exhaustive_seconds(row.service_count))
        r["referenceSeconds"] = *reference;
      rows.push_back(std::move(r));
    }
    doc["timing"] = std::move(rows);
  }

  fedopt::AccuracyReport accuracy;
  if (!bench.skip_accuracy) {
    accuracy = fedopt::run_accuracy(synth);
    json methods = json::array();
    for (const fedopt::MethodAccuracy &entry : accuracy.methods) {
      json m;
      m["method"] = fedopt::to_string(entry.method);
      m["instances"] = entry.instances;
      m["optimalHits"] = entry.optimal_hits;
      m["hitRate"] = entry.instances ? static_cast<double>(entry.optimal_hits) / entry.instances : 0.0;
      m["greedyAgreements"] = entry.greedy_agreements;
      m["agreementRate"] =
          entry.instances ? static_cast<double>(entry.greedy_agreements) / entry.instances : 0.0;
      methods.push_back(std::move(m));
    }
    doc["accuracy"] = {{"instances", accuracy.instances}, {"methods", std::move(methods)}};
  }

  write_output(opt.output, doc.dump(2) + "\n");

  // Human-readable tables go to the diagnostic stream so the primary output
  // stays machine-parseable.
  if (!timing.empty()) {
    std::cerr << "planning time (seconds per plan)\n";
    std::cerr << std::left << std::setw(10) << "services" << std::setw(14) << "exhaustive"
              << std::setw(14) << "greedy" << std::setw(14) << "reference" << "\n";
    for (const fedopt::TimingRow &row : timing) {
      std::ostringstream reference;
      if (auto value = fedopt::reference_exhaustive_seconds(row.service_count))
        reference << *value;
      else
        reference << "-";
      std::cerr << std::left << std::setw(10) << row.service_count << std::setw(14)
                << row.exhaustive_seconds << std::setw(14) << row.greedy_seconds << std::setw(14)
                << reference.str() << "\n";
    }
  }
  if (accuracy.instances > 0) {
    std::cerr << "accuracy over " << accuracy.instances << " instances (seed " << synth.seed
              << ")\n";
    std::cerr << std::left << std::setw(8) << "method" << std::setw(13) << "optimalHits"
              << std::setw(10) << "hitRate" << std::setw(18) << "greedyAgreements"
              << std::setw(15) << "agreementRate" << "\n";
    for (const fedopt::MethodAccuracy &entry : accuracy.methods) {
      std::cerr << std::left << std::setw(8) << fedopt::to_string(entry.method) << std::setw(13)
                << entry.optimal_hits << std::setw(10)
                << (entry.instances ? static_cast<double>(entry.optimal_hits) / entry.instances
                                    : 0.0)
                << std::setw(18) << entry.greedy_agreements << std::setw(15)
                << (entry.instances
                        ? static_cast<double>(entry.greedy_agreements) / entry.instances
                        : 0.0)
                << "\n";
    }
  }
  return 0;
}

int guarded(const std::function<int()> &body) {
  try {
    return body();
  } catch (const fedopt::ParseError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind == fedopt::ParseError::Kind::UnsupportedConstruct ? 2 : 1;
  } catch (const fedopt::DependencyUnsatisfiable &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const fedopt::ExhaustiveCapExceeded &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const fedopt::UnknownEndpoint &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const fedopt::UnsupportedFilter &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 6;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 10;
  }
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Reorders the SERVICE patterns of federated SPARQL queries to cut remote calls"};
  app.require_subcommand(1);

  CommonOptions reorder_opt;
  CLI::App *reorder = app.add_subcommand("reorder", "Rewrite a query into its planned order");
  add_common_flags(reorder, reorder_opt, false);

  CommonOptions explain_opt;
  CLI::App *explain = app.add_subcommand("explain", "Report costs, tie-breaks and the chosen order");
  add_common_flags(explain, explain_opt, false);

  CommonOptions simulate_opt;
  CLI::App *simulate =
      app.add_subcommand("simulate", "Replay a query against local stores and count calls");
  add_common_flags(simulate, simulate_opt, true);

  CommonOptions bench_common;
  BenchOptions bench_opt;
  CLI::App *bench = app.add_subcommand("bench", "Planning-time sweep and accuracy scoring");
  add_common_flags(bench, bench_common, true);
  CLI::Option *seed_option = bench->add_option("--seed", bench_opt.seed, "Corpus seed");
  bench->add_option("--corpus", bench_opt.corpus_path, "Workload configuration JSON file");
  bench->add_option("--instances", bench_opt.instances, "Number of generated instances");
  bench->add_option("--min-services", bench_opt.min_services, "Minimum services per query");
  bench->add_option("--max-services", bench_opt.max_services, "Maximum services per query");
  bench->add_option("--min-noise", bench_opt.min_noise, "Minimum noise triples per store");
  bench->add_option("--max-noise", bench_opt.max_noise, "Maximum noise triples per store");
  bench->add_option("--timing-min", bench_opt.timing_min, "Smallest service count in the sweep");
  bench->add_option("--timing-max", bench_opt.timing_max,
                    "Largest service count in the sweep (default: exhaustive cap)");
  bench->add_flag("--skip-timing", bench_opt.skip_timing, "Skip the planning-time sweep");
  bench->add_flag("--skip-accuracy", bench_opt.skip_accuracy, "Skip accuracy scoring");

  CLI11_PARSE(app, argc, argv);

  if (reorder->parsed()) return guarded([&] { return run_reorder(reorder_opt); });
  if (explain->parsed()) return guarded([&] { return run_explain(explain_opt); });
  if (simulate->parsed()) return guarded([&] { return run_simulate(simulate_opt); });
  bench_opt.seed_set = seed_option->count() > 0;
  return guarded([&] { return run_bench(bench_common, bench_opt); });
}
