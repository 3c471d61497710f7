#include "fedopt/bench.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "fedopt/federation.hpp"

namespace fedopt {

namespace {

template <typename F>
double time_average(F &&run) {
  using clock = std::chrono::steady_clock;
  int reps = 1;
  for (;;) {
    const auto start = clock::now();
    for (int i = 0; i < reps; ++i) run();
    const double elapsed = std::chrono::duration<double>(clock::now() - start).count();
    if (elapsed >= 0.05 || reps >= (1 << 20)) return elapsed / reps;
    reps *= elapsed < 0.005 ? 8 : 2;
  }
}

}  // namespace

FederatedQuery chain_query(int service_count) {
  FederatedQuery q;
  q.projection = "*";
  QuerySegment segment;
  for (int i = 0; i < service_count; ++i) {
    ServicePattern s;
    s.original_index = i;
    s.endpoint = Term::iri("<http://ep" + std::to_string(i) + ".example/sparql>");
    TriplePattern link;
    link.subject = Term::variable("?c" + std::to_string(i));
    link.predicate = Term::iri("<http://ex.example/next>");
    link.object = Term::variable("?c" + std::to_string(i + 1));
    TriplePattern anchor;
    anchor.subject = Term::variable("?c" + std::to_string(i));
    anchor.predicate = Term::iri("<http://ex.example/tag" + std::to_string(i) + ">");
    anchor.object = Term::iri("<http://ex.example/e" + std::to_string(i) + ">");
    s.triples.push_back(std::move(link));
    s.triples.push_back(std::move(anchor));
    segment.services.push_back(std::move(s));
  }
  q.segments.push_back(std::move(segment));
  return q;
}

std::vector<TimingRow> run_timing(int min_services, int max_services, const CostConfig &config) {
  CostConfig lifted = config;
  if (lifted.exhaustive_cap < max_services) lifted.exhaustive_cap = max_services;
  std::vector<TimingRow> rows;
  for (int n = min_services; n <= max_services; ++n) {
    const FederatedQuery q = chain_query(n);
    TimingRow row;
    row.service_count = n;
    row.exhaustive_seconds = time_average([&] { exhaustive_plan(q, lifted, false); });
    row.greedy_seconds = time_average([&] { greedy_plan(q, lifted); });
    rows.push_back(row);
  }
  return rows;
}

double time_greedy(int service_count, const CostConfig &config) {
  const FederatedQuery q = chain_query(service_count);
  return time_average([&] { greedy_plan(q, config); });
}

std::optional<double> reference_exhaustive_seconds(int service_count) {
  switch (service_count) {
    case 5: return 0.008;
    case 6: return 0.022;
    case 7: return 0.089;
    case 8: return 0.290;
    case 9: return 2.4;
    case 10: return 25.0;
    case 11: return 360.0;
    case 12: return 4020.0;
    default: return std::nullopt;
  }
}

AccuracyReport run_accuracy(const SynthConfig &config) {
  config.validate();
  AccuracyReport report;
  for (CostMethod method :
       {CostMethod::VC, CostMethod::UVC, CostMethod::WUVC, CostMethod::JWUVC}) {
    MethodAccuracy entry;
    entry.method = method;
    report.methods.push_back(entry);
  }

  SynthRng seeds(config.seed);
  for (int k = 0; k < config.instances; ++k) {
    const std::uint64_t instance_seed = seeds.next();
    const SynthInstance instance = random_instance(instance_seed, config);
    const Federation fed = instance.federation();
    const SimulatedOptimal best = simulated_optimal(instance.query, fed);
    ++report.instances;
    for (MethodAccuracy &entry : report.methods) {
      CostConfig cost;
      cost.method = entry.method;
      const PlanResult exhaustive = exhaustive_plan(instance.query, cost, false);
      const SimulationResult planned = evaluate_sequence(exhaustive.query, fed);
      ++entry.instances;
      if (planned.total_calls == best.result.total_calls) ++entry.optimal_hits;
      const PlanResult greedy = greedy_plan(instance.query, cost);
      if (std::abs(greedy.report.chosen_cost - exhaustive.report.chosen_cost) <= 1e-9)
        ++entry.greedy_agreements;
    }
  }
  return report;
}

}  // namespace fedopt
