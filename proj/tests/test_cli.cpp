#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <fstream>
#include <string>

#include <sys/wait.h>

#include "json.hpp"

#include "fedopt/parser.hpp"
#include "support.hpp"

using nlohmann::json;
using testsupport::fixture_path;
using testsupport::read_file;

namespace {

// Exit status of the tool run through the shell; stderr is captured to a
// scratch file so diagnostics stay out of the test log.
int run(const std::string &args) {
  const std::string command =
      std::string(FEDOPT_BIN) + " " + args + " 2> test_cli_stderr.txt";
  const int raw = std::system(command.c_str());
  REQUIRE(raw != -1);
  REQUIRE(WIFEXITED(raw));
  return WEXITSTATUS(raw);
}

std::string write_scratch(const std::string &name, const std::string &text) {
  std::ofstream out(name);
  out << text;
  return name;
}

json load_json(const std::string &path) { return json::parse(read_file(path)); }

}  // namespace

TEST_CASE("reorder rewrites the query in planned order") {
  const int status = run("reorder --method vc --in " + fixture_path("listing2.rq") +
                         " --out test_cli_reorder.rq");
  CHECK(status == 0);
  const fedopt::FederatedQuery q =
      fedopt::parse_query(read_file("test_cli_reorder.rq"));
  REQUIRE(q.service_count() == 2);
  CHECK(q.segments[0].services[0].endpoint.lexical == "<http://resource2>");
  CHECK(q.segments[0].services[1].endpoint.lexical == "<http://resource1>");
}

TEST_CASE("reorder reads stdin and writes stdout by default") {
  const int status = run("reorder --method uvc < " + fixture_path("listing3.rq") +
                         " > test_cli_stdout.rq");
  CHECK(status == 0);
  const fedopt::FederatedQuery q =
      fedopt::parse_query(read_file("test_cli_stdout.rq"));
  CHECK(q.segments[0].services[1].endpoint.lexical == "<http://resource3>");
}

TEST_CASE("reordering an already planned query is byte-stable") {
  REQUIRE(run("reorder --method jwuvc --in " + fixture_path("listing5.rq") +
              " --out test_cli_once.rq") == 0);
  REQUIRE(run("reorder --method jwuvc --in test_cli_once.rq --out test_cli_twice.rq") ==
          0);
  CHECK(read_file("test_cli_once.rq") == read_file("test_cli_twice.rq"));
}

TEST_CASE("verbose diagnostics stay off the data stream") {
  REQUIRE(run("reorder --method vc --verbose --in " + fixture_path("listing2.rq") +
              " --out test_cli_quiet.rq") == 0);
  CHECK_NOTHROW(fedopt::parse_query(read_file("test_cli_quiet.rq")));
  CHECK(read_file("test_cli_stderr.txt").find("order") != std::string::npos);
}

TEST_CASE("explain reports costs, tie-breaks and the permutation table") {
  REQUIRE(run("explain --method jwuvc --in " + fixture_path("listing5.rq") +
              " --out test_cli_explain.json") == 0);
  const json doc = load_json("test_cli_explain.json");
  CHECK(doc.at("method") == "jwuvc");
  CHECK(doc.at("strategy") == "exhaustive");
  CHECK(doc.at("chosenCost").get<double>() == doctest::Approx(0.05 + 1.0 / 3));
  const json &segment = doc.at("segments").at(0);
  CHECK(segment.at("insideOptional") == false);
  CHECK(segment.at("chosenOrder") == json::array({2, 1, 0}));
  const json &costs = segment.at("serviceCosts");
  REQUIRE(costs.size() == 3);
  CHECK(costs.at(0).at("originalIndex") == 0);
  CHECK(costs.at(0).at("cost").get<double>() == doctest::Approx(1.0 / 1.5));
  CHECK(costs.at(1).at("cost").get<double>() == doctest::Approx(0.5));
  CHECK(costs.at(2).at("cost").get<double>() == doctest::Approx(0.05));
  CHECK(costs.at(2).at("tieBreak") == 1);
  CHECK(segment.at("permutationTable").size() == 6);
}

TEST_CASE("explain under the greedy strategy omits the table") {
  REQUIRE(run("explain --method uvc --strategy greedy --in " +
              fixture_path("listing6.rq") + " --out test_cli_greedy.json") == 0);
  const json doc = load_json("test_cli_greedy.json");
  CHECK(doc.at("strategy") == "greedy");
  CHECK(doc.at("segments").at(0).at("chosenOrder") == json::array({1, 2, 0}));
  CHECK_FALSE(doc.at("segments").at(0).contains("permutationTable"));
}

TEST_CASE("a config file sets the method and weights") {
  write_scratch("test_cli_config.json", "{\"method\": \"wuvc\", \"w_p\": 0.3}");
  REQUIRE(run("explain --config test_cli_config.json --in " +
              fixture_path("listing4.rq") + " --out test_cli_cfg.json") == 0);
  const json doc = load_json("test_cli_cfg.json");
  CHECK(doc.at("method") == "wuvc");
  CHECK(doc.at("segments").at(0).at("serviceCosts").at(2).at("cost").get<double>() ==
        doctest::Approx(0.3));

  // An explicit flag overrides the file.
  REQUIRE(run("explain --config test_cli_config.json --method vc --in " +
              fixture_path("listing4.rq") + " --out test_cli_cfg2.json") == 0);
  CHECK(load_json("test_cli_cfg2.json").at("method") == "vc");
}

TEST_CASE("simulate scores the planned order against the true optimum") {
  REQUIRE(run("simulate --method jwuvc --federation " +
              fixture_path("fed/manifest.json") + " --in " +
              fixture_path("fed/query.rq") + " --out test_cli_sim.json") == 0);
  const json doc = load_json("test_cli_sim.json");
  CHECK(doc.at("input").at("totalCalls") == 4);
  CHECK(doc.at("planned").at("totalCalls") == 3);
  CHECK(doc.at("simulatedOptimal").at("totalCalls") == 3);
  CHECK(doc.at("plannerMatchesOptimal") == true);
  CHECK(doc.at("input").at("solutionCount") == 2);
  CHECK(doc.at("planned").at("perServiceCalls").size() == 2);
}

TEST_CASE("bench produces accuracy tables for a tiny workload") {
  REQUIRE(run("bench --skip-timing --instances 6 --min-services 2 "
              "--max-services 3 --seed 5 --out test_cli_bench.json") == 0);
  const json doc = load_json("test_cli_bench.json");
  const json &methods = doc.at("accuracy").at("methods");
  REQUIRE(methods.size() == 4);
  CHECK(methods.at(0).at("method") == "vc");
  CHECK(methods.at(3).at("method") == "jwuvc");
  for (const json &row : methods) {
    CHECK(row.at("instances") == 6);
    CHECK(row.at("optimalHits").get<int>() <= 6);
  }
}

TEST_CASE("bench accepts a committed corpus file") {
  REQUIRE(run("bench --skip-timing --skip-accuracy --corpus " +
              std::string(DATA_DIR) + "/bench_corpus.json --out test_cli_corpus.json") ==
          0);
  const json doc = load_json("test_cli_corpus.json");
  CHECK(doc.at("seed") == 2);
  CHECK_FALSE(doc.contains("accuracy"));
  CHECK_FALSE(doc.contains("timing"));
}

TEST_CASE("parse failures exit with the syntax code") {
  write_scratch("test_cli_broken.rq", "SELECT * WHERE { SERVICE }");
  CHECK(run("reorder --in test_cli_broken.rq") == 1);
}

TEST_CASE("unsupported constructs exit with their own code") {
  CHECK(run("reorder --in " + fixture_path("union.rq")) == 2);
  CHECK(run("reorder --in " + fixture_path("mixed.rq")) == 2);
}

TEST_CASE("unsatisfiable dependencies exit with their own code") {
  CHECK(run("reorder --in " + fixture_path("unsat.rq")) == 3);
}

TEST_CASE("exceeding the enumeration cap exits with its own code") {
  std::string text = "SELECT * WHERE {\n";
  for (int i = 0; i < 10; ++i)
    text += "  SERVICE <http://e" + std::to_string(i) + "> { ?s" +
            std::to_string(i) + " <http://p> ?o" + std::to_string(i) + " }\n";
  text += "}";
  write_scratch("test_cli_cap.rq", text);
  CHECK(run("reorder --strategy exhaustive --in test_cli_cap.rq") == 4);
  // Auto falls back to greedy instead.
  CHECK(run("reorder --in test_cli_cap.rq") == 0);
}

TEST_CASE("unknown endpoints exit with their own code") {
  CHECK(run("simulate --federation " + fixture_path("fed/manifest.json") +
            " --in " + fixture_path("fed/query_unknown.rq")) == 5);
}

TEST_CASE("unsupported filters exit with their own code") {
  CHECK(run("simulate --federation " + fixture_path("fed/manifest.json") +
            " --in " + fixture_path("fed/query_badfilter.rq")) == 6);
}

TEST_CASE("usage errors exit with the generic failure code") {
  CHECK(run("reorder --method sorcery --in " + fixture_path("listing2.rq")) == 10);
  CHECK(run("reorder --in /nonexistent/query.rq") == 10);
  CHECK(run("simulate --in " + fixture_path("fed/query.rq")) == 10);
  write_scratch("test_cli_badcfg.json", "{\"w_q\": 1}");
  CHECK(run("reorder --config test_cli_badcfg.json --in " +
            fixture_path("listing2.rq")) == 10);
}
