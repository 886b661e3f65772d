#include <random>

#include "doctest.h"
#include "stw/model.hpp"
#include "support/fixtures.hpp"
#include "support/model_gen.hpp"

using namespace stw;

TEST_CASE("line graph: two end nodes, one edge registered at both endpoints") {
  auto model = testsupport::load_fixture("line.ppxml");
  auto graph = build_graph(model);
  CHECK(graph.edge_index_size() == 2);
  CHECK(graph.exits("E1", Leg::tip).empty());
  CHECK(graph.exits("E2", Leg::tip).empty());
  CHECK(graph.edge_at("E1", Leg::tip) == "T1");
  CHECK(graph.edge_at("E2", Leg::tip) == "T1");
}

TEST_CASE("fork graph: point leg transitions") {
  auto model = testsupport::load_fixture("fork.ppxml");
  auto graph = build_graph(model);
  CHECK(graph.exits("P1", Leg::tip) == std::vector<Leg>{Leg::left, Leg::right});
  CHECK(graph.exits("P1", Leg::left) == std::vector<Leg>{Leg::tip});
  CHECK(graph.exits("P1", Leg::right) == std::vector<Leg>{Leg::tip});
  CHECK(graph.edge_at("P1", Leg::left) == "T2");
  CHECK(graph.edge_index_size() == 6);
}

TEST_CASE("build_graph rejects a node with two tip legs") {
  PlanningModel m;
  m.nodes = {{"E1", NodeKind::end}, {"E2", NodeKind::end}, {"X", NodeKind::end}};
  m.edges = {{"T1", "E1", Leg::tip, "X", Leg::tip, 1000},
             {"T2", "E2", Leg::tip, "X", Leg::tip, 1000}};
  CHECK_THROWS_AS(build_graph(m), StructuralError);
}

TEST_CASE("build_graph rejects a point missing a leg") {
  PlanningModel m;
  m.nodes = {{"E1", NodeKind::end}, {"E2", NodeKind::end}, {"P1", NodeKind::point}};
  m.edges = {{"T1", "E1", Leg::tip, "P1", Leg::tip, 1000},
             {"T2", "E2", Leg::tip, "P1", Leg::left, 1000}};
  CHECK_THROWS_AS(build_graph(m), StructuralError);
}

TEST_CASE("line facts are the exact frozen clauses") {
  auto model = testsupport::load_fixture("line.ppxml");
  CHECK(emit_facts(model) ==
        "edge(t1, e1, tip, e2, tip, 500.000).\n"
        "node(e1, end).\n"
        "node(e2, end).\n"
        "section(d1, t1).\n"
        "signal(s1, t1, 100.000, normal, main).\n");
}

TEST_CASE("emit_facts is deterministic") {
  auto model = testsupport::load_fixture("loop.ppxml");
  CHECK(emit_facts(model) == emit_facts(model));
}

TEST_CASE("fork facts: clause counts per predicate") {
  auto model = testsupport::load_fixture("fork.ppxml");
  std::string facts = emit_facts(model);
  auto count = [&](const std::string& prefix) {
    std::size_t n = 0, pos = 0;
    while ((pos = facts.find(prefix, pos)) != std::string::npos) {
      ++n;
      pos += prefix.size();
    }
    return n;
  };
  CHECK(count("node(") == 4);
  CHECK(count("edge(") == 3);
  CHECK(count("signal(") == 1);
  CHECK(count("section(") == 3);
}

namespace {

bool line_matches_clause_grammar(const std::string& line) {
  // name(arg1, arg2, ...).
  std::size_t open = line.find('(');
  if (open == std::string::npos || open == 0) return false;
  if (line.size() < open + 3) return false;
  if (line.substr(line.size() - 2) != ").") return false;
  for (std::size_t i = 0; i < open; ++i)
    if (!islower(static_cast<unsigned char>(line[i]))) return false;
  std::string args = line.substr(open + 1, line.size() - open - 3);
  if (args.empty()) return false;
  for (char c : args) {
    bool ok = islower(static_cast<unsigned char>(c)) || isdigit(static_cast<unsigned char>(c)) ||
              c == '_' || c == '.' || c == ',' || c == ' ';
    if (!ok) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("facts re-tokenize and count |nodes|+|edges|+|signals|+|sections|") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 25; ++i) {
    auto m = testsupport::random_model(rng);
    std::string facts = emit_facts(m);
    std::size_t lines = 0, pos = 0;
    while (pos < facts.size()) {
      std::size_t eol = facts.find('\n', pos);
      REQUIRE(eol != std::string::npos);
      CHECK(line_matches_clause_grammar(facts.substr(pos, eol - pos)));
      ++lines;
      pos = eol + 1;
    }
    CHECK(lines == m.nodes.size() + m.edges.size() + m.signals.size() + m.sections.size());
  }
}

TEST_CASE("build_graph is pure on valid random models") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 25; ++i) {
    auto m = testsupport::random_model(rng);
    auto g1 = build_graph(m);
    auto g2 = build_graph(m);
    CHECK(g1.edge_index_size() == 2 * m.edges.size());
    CHECK(g2.edge_index_size() == g1.edge_index_size());
  }
}

TEST_CASE("millimeter rendering") {
  CHECK(format_mm(500000) == "500.000");
  CHECK(format_mm(0) == "0.000");
  CHECK(format_mm(123) == "0.123");
  CHECK(format_mm(1000001) == "1000.001");
}
