#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "stw/conflict.hpp"
#include "support/fixtures.hpp"
#include "support/model_gen.hpp"

using namespace stw;

namespace {

routes::RouteSet enumerate(const PlanningModel& m) {
  return routes::enumerate_routes(m, build_graph(m));
}

}  // namespace

TEST_CASE("fork routes conflict via the shared edge and the diverging point") {
  auto rs = enumerate(testsupport::load_fixture("fork.ppxml"));
  REQUIRE(rs.routes.size() == 2);
  auto v = conflict::conflicts(rs.routes[0], rs.routes[1]);
  CHECK(v.conflicting);
  REQUIRE(v.reasons.size() == 2);
  CHECK(conflict::to_string(v.reasons[0]) == "SHARED_EDGE(T1)");
  CHECK(conflict::to_string(v.reasons[1]) == "POINT_DIVERGENCE(P1)");
}

TEST_CASE("routes on disconnected components do not conflict") {
  // Two separate plain lines in one plan.
  PlanningModel m;
  m.format_version = "1.9.0.2-S";
  m.project_id = "TWO";
  m.project_name = "Two lines";
  m.nodes = {{"E1", NodeKind::end}, {"E2", NodeKind::end},
             {"F1", NodeKind::end}, {"F2", NodeKind::end}};
  m.edges = {{"T1", "E1", Leg::tip, "E2", Leg::tip, 500000},
             {"U1", "F1", Leg::tip, "F2", Leg::tip, 500000}};
  m.signals = {{"S1", "T1", 100000, SignalDirection::normal, SignalFunction::main},
               {"S2", "U1", 100000, SignalDirection::normal, SignalFunction::main}};
  m.sections = {{"D1", {"T1"}, false}, {"D2", {"U1"}, false}};
  auto rs = enumerate(m);
  REQUIRE(rs.routes.size() == 2);
  auto v = conflict::conflicts(rs.routes[0], rs.routes[1]);
  CHECK_FALSE(v.conflicting);
  CHECK(v.reasons.empty());
}

TEST_CASE("a route conflicts with itself on every shared edge") {
  auto rs = enumerate(testsupport::load_fixture("line.ppxml"));
  auto v = conflict::conflicts(rs.routes[0], rs.routes[0]);
  CHECK(v.conflicting);
}

TEST_CASE("loop: complete conflict graph with T1 and T4 shared everywhere") {
  auto rs = enumerate(testsupport::load_fixture("loop.ppxml"));
  auto cm = conflict::conflict_matrix(rs);
  REQUIRE(cm.size() == 4);
  std::size_t conflicting_pairs = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(cm.cell(i, i));
    for (std::size_t j = i + 1; j < 4; ++j) {
      if (cm.cell(i, j)) ++conflicting_pairs;
      const auto& reasons = cm.reasons(cm.ids()[i], cm.ids()[j]);
      auto has = [&](const std::string& want) {
        for (const auto& r : reasons)
          if (conflict::to_string(r) == want) return true;
        return false;
      };
      CHECK(has("SHARED_EDGE(T1)"));
      CHECK(has("SHARED_EDGE(T4)"));
    }
  }
  CHECK(conflicting_pairs == 6);
}

TEST_CASE("same-position shared point alone is no conflict") {
  routes::Route a, b;
  a.id = "a";
  a.path = {{"X1", TravelDir::forward}};
  a.points = {{"P9", PointPosition::left}};
  b.id = "b";
  b.path = {{"X2", TravelDir::forward}};
  b.points = {{"P9", PointPosition::left}};
  CHECK_FALSE(conflict::conflicts(a, b).conflicting);
  b.points = {{"P9", PointPosition::right}};
  auto v = conflict::conflicts(a, b);
  CHECK(v.conflicting);
  REQUIRE(v.reasons.size() == 1);
  CHECK(conflict::to_string(v.reasons[0]) == "POINT_DIVERGENCE(P9)");
}

TEST_CASE("single route: 1x1 matrix with a true diagonal") {
  auto rs = enumerate(testsupport::load_fixture("line.ppxml"));
  auto cm = conflict::conflict_matrix(rs);
  REQUIRE(cm.size() == 1);
  CHECK(cm.cell(0, 0));
}

TEST_CASE("empty route set: empty matrix") {
  auto cm = conflict::conflict_matrix(routes::RouteSet{});
  CHECK(cm.size() == 0);
  CHECK(conflict::matrix_json(cm)["ids"].empty());
}

TEST_CASE("matrix properties on random models: symmetry, diagonal, soundness") {
  std::mt19937_64 rng(4242);
  for (int iter = 0; iter < 40; ++iter) {
    auto m = testsupport::random_model(rng);
    auto rs = enumerate(m);
    auto cm = conflict::conflict_matrix(rs);
    const std::size_t n = cm.size();
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(cm.cell(i, i));
      for (std::size_t j = 0; j < n; ++j) {
        CHECK(cm.cell(i, j) == cm.cell(j, i));
        if (i == j) continue;
        // Independent set-intersection oracle.
        std::set<std::string> ea, eb;
        for (const auto& s : rs.routes[i].path) ea.insert(s.edge);
        for (const auto& s : rs.routes[j].path) eb.insert(s.edge);
        bool edge_shared = std::any_of(ea.begin(), ea.end(),
                                       [&](const std::string& e) { return eb.count(e); });
        bool point_diverges = false;
        for (const auto& pa : rs.routes[i].points)
          for (const auto& pb : rs.routes[j].points)
            if (pa.point == pb.point && pa.position != pb.position) point_diverges = true;
        CHECK(cm.cell(i, j) == (edge_shared || point_diverges));
        if (edge_shared) CHECK(cm.cell(i, j));
        if (!edge_shared && !point_diverges) CHECK_FALSE(cm.cell(i, j));
        // The matrix agrees with the pairwise operation cell by cell.
        CHECK(cm.cell(i, j) == conflict::conflicts(rs.routes[i], rs.routes[j]).conflicting);
      }
    }
  }
}

TEST_CASE("matrix JSON: ids, row-major cells, reasons") {
  auto rs = enumerate(testsupport::load_fixture("fork.ppxml"));
  auto j = conflict::matrix_json(conflict::conflict_matrix(rs));
  REQUIRE(j["ids"].size() == 2);
  REQUIRE(j["cells"].size() == 4);
  CHECK(j["cells"][0] == true);   // diagonal
  CHECK(j["cells"][1] == true);   // off-diagonal pair
  CHECK(j["cells"][2] == true);
  CHECK(j["cells"][3] == true);
  std::string key =
      j["ids"][0].get<std::string>() + "|" + j["ids"][1].get<std::string>();
  REQUIRE(j["reasons"].contains(key));
  CHECK(j["reasons"][key][0] == "SHARED_EDGE(T1)");
  CHECK(j["reasons"][key][1] == "POINT_DIVERGENCE(P1)");
}
