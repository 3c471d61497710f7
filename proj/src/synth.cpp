#include "fedopt/synth.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

#include "json.hpp"

namespace fedopt {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string entity_iri(int k) { return "http://ex.example/e" + std::to_string(k); }
std::string predicate_iri(int k) { return "http://ex.example/p" + std::to_string(k); }
// Noise predicates are disjoint from the pattern predicate pool so a
// constant-predicate pattern only matches witness and fanout rows; without
// that split, low-selectivity patterns make bind-joins explode.
std::string noise_iri(int k) { return "http://ex.example/noise" + std::to_string(k); }
std::string endpoint_iri(int k) { return "http://ep" + std::to_string(k) + ".example/sparql"; }

std::string angled(const std::string &iri) { return "<" + iri + ">"; }

}  // namespace

SynthRng::SynthRng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

std::uint64_t SynthRng::next() { return engine_(); }

int SynthRng::below(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }

int SynthRng::between(int lo, int hi) { return lo + below(hi - lo + 1); }

double SynthRng::unit() {
  return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0);
}

bool SynthRng::chance(double probability) { return unit() < probability; }

void SynthConfig::validate() const {
  auto require = [](bool ok, const char *what) {
    if (!ok) throw std::invalid_argument(std::string("synth config: ") + what);
  };
  require(instances >= 1, "instances must be at least 1");
  require(min_services >= 1, "min_services must be at least 1");
  require(max_services >= min_services, "max_services must be >= min_services");
  require(min_noise_triples >= 0, "min_noise_triples must be non-negative");
  require(max_noise_triples >= min_noise_triples, "max_noise_triples must be >= min_noise_triples");
  require(max_triples_per_service >= 1, "max_triples_per_service must be at least 1");
  require(entity_pool >= 1, "entity_pool must be at least 1");
  require(predicate_pool >= 1, "predicate_pool must be at least 1");
  require(max_pattern_fanout >= 0, "max_pattern_fanout must be non-negative");
  for (double p : {literal_object_probability, variable_endpoint_probability,
                   predicate_variable_probability, variable_reuse_probability,
                   blank_probability})
    require(p >= 0.0 && p <= 1.0, "probabilities must lie in [0, 1]");
}

std::string SynthConfig::to_json_text() const {
  nlohmann::json doc;
  doc["seed"] = seed;
  doc["instances"] = instances;
  doc["minServices"] = min_services;
  doc["maxServices"] = max_services;
  doc["minNoiseTriples"] = min_noise_triples;
  doc["maxNoiseTriples"] = max_noise_triples;
  doc["maxTriplesPerService"] = max_triples_per_service;
  doc["literalObjectProbability"] = literal_object_probability;
  doc["variableEndpointProbability"] = variable_endpoint_probability;
  doc["predicateVariableProbability"] = predicate_variable_probability;
  doc["variableReuseProbability"] = variable_reuse_probability;
  doc["blankProbability"] = blank_probability;
  doc["entityPool"] = entity_pool;
  doc["predicatePool"] = predicate_pool;
  doc["maxPatternFanout"] = max_pattern_fanout;
  return doc.dump(2) + "\n";
}

SynthConfig SynthConfig::from_json_text(const std::string &text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error &e) {
    throw std::invalid_argument(std::string("synth config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("synth config must be a JSON object");
  SynthConfig config;
  for (const auto &[key, value] : doc.items()) {
    if (key == "seed") config.seed = value.get<std::uint64_t>();
    else if (key == "instances") config.instances = value.get<int>();
    else if (key == "minServices") config.min_services = value.get<int>();
    else if (key == "maxServices") config.max_services = value.get<int>();
    else if (key == "minNoiseTriples") config.min_noise_triples = value.get<int>();
    else if (key == "maxNoiseTriples") config.max_noise_triples = value.get<int>();
    else if (key == "maxTriplesPerService") config.max_triples_per_service = value.get<int>();
    else if (key == "literalObjectProbability") config.literal_object_probability = value.get<double>();
    else if (key == "variableEndpointProbability") config.variable_endpoint_probability = value.get<double>();
    else if (key == "predicateVariableProbability") config.predicate_variable_probability = value.get<double>();
    else if (key == "variableReuseProbability") config.variable_reuse_probability = value.get<double>();
    else if (key == "blankProbability") config.blank_probability = value.get<double>();
    else if (key == "entityPool") config.entity_pool = value.get<int>();
    else if (key == "predicatePool") config.predicate_pool = value.get<int>();
    else if (key == "maxPatternFanout") config.max_pattern_fanout = value.get<int>();
    else throw std::invalid_argument("unknown synth config key: " + key);
  }
  config.validate();
  return config;
}

Federation SynthInstance::federation() const {
  Federation fed;
  for (const auto &[iri, triples] : store_triples) fed.stores.emplace(iri, TripleStore(triples));
  return fed;
}

ServicePattern random_service_pattern(SynthRng &rng, int max_triples) {
  ServicePattern s;
  s.endpoint = Term::iri(angled(endpoint_iri(0)));

  const int triple_count = rng.between(1, max_triples);
  const int var_pool = 8;
  auto pool_var = [&] { return Term::variable("?v" + std::to_string(rng.below(var_pool))); };

  int blank_counter = 0;
  for (int t = 0; t < triple_count; ++t) {
    TriplePattern triple;

    const double s_roll = rng.unit();
    if (s_roll < 0.08)
      triple.subject = Term::blank_node("_:b" + std::to_string(blank_counter++));
    else if (s_roll < 0.68)
      triple.subject = pool_var();
    else
      triple.subject = Term::iri(angled(entity_iri(rng.below(12))));

    triple.predicate = rng.chance(0.15) ? pool_var()
                                        : Term::iri(angled(predicate_iri(rng.below(6))));

    const double o_roll = rng.unit();
    if (o_roll < 0.06)
      triple.object = Term::blank_node("_:b" + std::to_string(blank_counter++));
    else if (o_roll < 0.61)
      triple.object = pool_var();
    else if (rng.chance(0.4))
      triple.object = Term::literal("\"lit" + std::to_string(rng.below(8)) + "\"");
    else
      triple.object = Term::iri(angled(entity_iri(rng.below(12))));

    auto is_const = [](const Term &term) {
      return !term.is_variable() && term.kind != TermKind::BlankNode;
    };
    if (!is_const(triple.subject) && !is_const(triple.predicate) && !is_const(triple.object))
      triple.predicate = Term::iri(angled(predicate_iri(rng.below(6))));

    s.triples.push_back(std::move(triple));
  }

  if (rng.chance(0.15)) {
    BindingSet vars;
    for (const TriplePattern &triple : s.triples)
      for (const Term *term : {&triple.subject, &triple.predicate, &triple.object})
        if (term->is_variable()) vars.insert(term->variable_name());
    if (!vars.empty()) {
      BindingSet projection;
      std::vector<std::string> names(vars.begin(), vars.end());
      const int keep = rng.between(1, static_cast<int>(names.size()));
      for (int i = 0; i < keep; ++i) projection.insert(names[static_cast<size_t>(rng.below(static_cast<int>(names.size())))]);
      s.sub_projection = std::move(projection);
    }
  }
  return s;
}

namespace {

// Shared scaffolding for query and instance generation. A witness maps each
// variable (and each service-scoped blank label) to a ground term; emitting
// the witness image of every pattern into its store guarantees a solution.
struct Builder {
  SynthRng rng;
  const SynthConfig &config;
  std::map<std::string, std::string> witness;       // variable name -> ground term
  std::vector<std::string> entity_vars;             // reusable join variables
  int var_counter = 0;
  int predicate_var_counter = 0;

  Builder(std::uint64_t seed, const SynthConfig &cfg) : rng(seed), config(cfg) {}

  std::string fresh_entity_var() {
    const std::string name = "v" + std::to_string(var_counter++);
    witness[name] = angled(entity_iri(rng.below(config.entity_pool)));
    entity_vars.push_back(name);
    return name;
  }

  std::string entity_var() {
    if (!entity_vars.empty() && rng.chance(config.variable_reuse_probability))
      return entity_vars[static_cast<size_t>(rng.below(static_cast<int>(entity_vars.size())))];
    return fresh_entity_var();
  }

  std::string predicate_var() {
    const std::string name = "pv" + std::to_string(predicate_var_counter++);
    witness[name] = angled(predicate_iri(rng.below(config.predicate_pool)));
    return name;
  }

  std::string random_literal() { return "\"lit" + std::to_string(rng.below(8)) + "\""; }

  Term random_object_constant() {
    if (rng.chance(config.literal_object_probability)) return Term::literal(random_literal());
    return Term::iri(angled(entity_iri(rng.below(config.entity_pool))));
  }

  // Variable for a subject/object slot; prefers a variable already used in
  // this service so per-service match sets stay joined rather than cartesian,
  // and links a later service's first variable to an earlier service so the
  // query's variable graph rarely splits into islands.
  std::string slot_var(std::vector<std::string> &service_vars, bool prefer_link) {
    std::string name;
    if (!service_vars.empty() && rng.chance(0.7)) {
      name = service_vars[static_cast<size_t>(rng.below(static_cast<int>(service_vars.size())))];
    } else if (prefer_link && service_vars.empty() && !entity_vars.empty() && rng.chance(0.9)) {
      name = entity_vars[static_cast<size_t>(rng.below(static_cast<int>(entity_vars.size())))];
    } else {
      name = entity_var();
    }
    service_vars.push_back(name);
    return name;
  }

  // One triple pattern plus its ground witness image. Blanks are witnessed
  // per service through `blank_witness`.
  TriplePattern random_triple(int service_index, int &blank_counter,
                              std::map<std::string, std::string> &blank_witness,
                              std::vector<std::string> &service_vars) {
    TriplePattern triple;

    const bool prefer_link = service_index > 0;
    const double s_roll = rng.unit();
    if (s_roll < config.blank_probability) {
      const std::string label = "_:b" + std::to_string(blank_counter++);
      triple.subject = Term::blank_node(label);
      blank_witness[label] = angled(entity_iri(rng.below(config.entity_pool)));
    } else if (s_roll < 0.70) {
      triple.subject = Term::variable("?" + slot_var(service_vars, prefer_link));
    } else {
      triple.subject = Term::iri(angled(entity_iri(rng.below(config.entity_pool))));
    }

    triple.predicate = rng.chance(config.predicate_variable_probability)
                           ? Term::variable("?" + predicate_var())
                           : Term::iri(angled(predicate_iri(rng.below(config.predicate_pool))));

    const double o_roll = rng.unit();
    if (o_roll < 0.6 * config.blank_probability) {
      const std::string label = "_:b" + std::to_string(blank_counter++);
      triple.object = Term::blank_node(label);
      blank_witness[label] = angled(entity_iri(rng.below(config.entity_pool)));
    } else if (o_roll < 0.62) {
      triple.object = Term::variable("?" + slot_var(service_vars, prefer_link));
    } else {
      triple.object = random_object_constant();
    }

    const bool subject_const =
        !triple.subject.is_variable() && triple.subject.kind != TermKind::BlankNode;
    const bool object_const =
        !triple.object.is_variable() && triple.object.kind != TermKind::BlankNode;
    if (!subject_const && triple.predicate.is_variable() && !object_const)
      triple.predicate = Term::iri(angled(predicate_iri(rng.below(config.predicate_pool))));
    (void)service_index;
    return triple;
  }

  std::string ground(const Term &term, const std::map<std::string, std::string> &blank_witness) {
    switch (term.kind) {
      case TermKind::Variable: return witness.at(term.variable_name());
      case TermKind::BlankNode: return blank_witness.at(term.lexical);
      default: return term.lexical;
    }
  }
};

}  // namespace

FederatedQuery random_query(std::uint64_t seed, int service_count, bool allow_optional) {
  SynthConfig config;
  Builder b(seed, config);

  std::vector<ServicePattern> services(static_cast<size_t>(service_count));
  for (int i = 0; i < service_count; ++i) {
    ServicePattern &s = services[static_cast<size_t>(i)];
    s.original_index = i;
    s.endpoint = Term::iri(angled(endpoint_iri(i)));
    const int triples = b.rng.between(1, config.max_triples_per_service);
    int blank_counter = 0;
    std::map<std::string, std::string> blank_witness;
    std::vector<std::string> service_vars;
    for (int t = 0; t < triples; ++t)
      s.triples.push_back(b.random_triple(i, blank_counter, blank_witness, service_vars));
  }

  // Variable endpoints: the endpoint variable is exposed by an earlier
  // service, so the source order itself is a valid ordering.
  for (int i = 1; i < service_count; ++i) {
    if (!b.rng.chance(config.variable_endpoint_probability)) continue;
    const std::string endpoint_var = "ep" + std::to_string(i);
    services[static_cast<size_t>(i)].endpoint = Term::variable("?" + endpoint_var);
    ServicePattern &binder = services[static_cast<size_t>(b.rng.below(i))];
    TriplePattern triple;
    triple.subject = Term::iri(angled(entity_iri(b.rng.below(config.entity_pool))));
    triple.predicate = Term::iri(angled("http://ex.example/endpointOf" + std::to_string(i)));
    triple.object = Term::variable("?" + endpoint_var);
    binder.triples.push_back(std::move(triple));
  }

  FederatedQuery q;
  q.projection = "*";
  if (allow_optional && service_count >= 3 && b.rng.chance(0.3)) {
    const int split = b.rng.between(2, service_count - 1);
    QuerySegment head;
    QuerySegment tail;
    tail.inside_optional = true;
    for (int i = 0; i < service_count; ++i)
      (i < split ? head : tail).services.push_back(std::move(services[static_cast<size_t>(i)]));
    q.segments.push_back(std::move(head));
    q.segments.push_back(std::move(tail));
  } else {
    QuerySegment segment;
    segment.services = std::move(services);
    q.segments.push_back(std::move(segment));
  }
  return q;
}

SynthInstance random_instance(std::uint64_t seed, const SynthConfig &config) {
  config.validate();
  Builder b(seed, config);

  // Min of two draws skews the mix toward small federations, where most
  // real queries live; every count in [min, max] still occurs.
  const int service_count = std::min(b.rng.between(config.min_services, config.max_services),
                                     b.rng.between(config.min_services, config.max_services));
  std::vector<ServicePattern> services(static_cast<size_t>(service_count));
  std::vector<std::vector<NTriple>> grounds(static_cast<size_t>(service_count));

  for (int i = 0; i < service_count; ++i) {
    ServicePattern &s = services[static_cast<size_t>(i)];
    s.original_index = i;
    s.endpoint = Term::iri(angled(endpoint_iri(i)));
    const int triples = b.rng.between(1, config.max_triples_per_service);
    int blank_counter = 0;
    std::map<std::string, std::string> blank_witness;
    std::vector<std::string> service_vars;
    for (int t = 0; t < triples; ++t) {
      TriplePattern triple = b.random_triple(i, blank_counter, blank_witness, service_vars);
      grounds[static_cast<size_t>(i)].push_back({b.ground(triple.subject, blank_witness),
                                                 b.ground(triple.predicate, blank_witness),
                                                 b.ground(triple.object, blank_witness)});
      s.triples.push_back(std::move(triple));
    }

    // Fanout: extra ground triples matching a pattern's constants, so joins
    // see several candidate rows instead of only the witness row.
    for (const TriplePattern &pattern : s.triples) {
      const int fanout = b.rng.below(config.max_pattern_fanout + 1);
      for (int f = 0; f < fanout; ++f) {
        auto fill = [&](const Term &term, TriplePosition position) {
          if (term.kind == TermKind::Variable || term.kind == TermKind::BlankNode) {
            if (position == TriplePosition::Predicate)
              return angled(predicate_iri(b.rng.below(config.predicate_pool)));
            if (position == TriplePosition::Object && b.rng.chance(config.literal_object_probability))
              return b.random_literal();
            return angled(entity_iri(b.rng.below(config.entity_pool)));
          }
          return term.lexical;
        };
        grounds[static_cast<size_t>(i)].push_back({fill(pattern.subject, TriplePosition::Subject),
                                                   fill(pattern.predicate, TriplePosition::Predicate),
                                                   fill(pattern.object, TriplePosition::Object)});
      }
    }
  }

  for (int i = 1; i < service_count; ++i) {
    if (!b.rng.chance(config.variable_endpoint_probability)) continue;
    const std::string endpoint_var = "ep" + std::to_string(i);
    services[static_cast<size_t>(i)].endpoint = Term::variable("?" + endpoint_var);
    const int binder = b.rng.below(i);
    const std::string anchor = angled(entity_iri(b.rng.below(config.entity_pool)));
    const std::string predicate = angled("http://ex.example/endpointOf" + std::to_string(i));
    TriplePattern triple;
    triple.subject = Term::iri(anchor);
    triple.predicate = Term::iri(predicate);
    triple.object = Term::variable("?" + endpoint_var);
    services[static_cast<size_t>(binder)].triples.push_back(std::move(triple));
    grounds[static_cast<size_t>(binder)].push_back({anchor, predicate, angled(endpoint_iri(i))});
  }

  SynthInstance instance;
  for (int i = 0; i < service_count; ++i) {
    std::vector<NTriple> &triples = grounds[static_cast<size_t>(i)];
    const int noise = b.rng.between(config.min_noise_triples, config.max_noise_triples);
    for (int t = 0; t < noise; ++t) {
      NTriple triple;
      triple.subject = angled(entity_iri(b.rng.below(config.entity_pool)));
      triple.predicate = angled(noise_iri(b.rng.below(config.predicate_pool)));
      triple.object = b.rng.chance(config.literal_object_probability)
                          ? b.random_literal()
                          : angled(entity_iri(b.rng.below(config.entity_pool)));
      triples.push_back(std::move(triple));
    }
    instance.store_triples.emplace(endpoint_iri(i), std::move(triples));
  }

  QuerySegment segment;
  segment.services = std::move(services);
  instance.query.projection = "*";
  instance.query.segments.push_back(std::move(segment));
  return instance;
}

}  // namespace fedopt
