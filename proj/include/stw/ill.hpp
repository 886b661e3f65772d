#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "stw/conflict.hpp"
#include "stw/routes.hpp"

namespace stw::ill {

// One route block of the interlocking program.
struct RouteDecl {
  std::string id;
  std::string start;  // signal id
  std::string end;    // signal or node id
  std::vector<routes::PathStep> path;
  std::vector<routes::PointRequirement> points;
  std::vector<std::string> sections;
  std::vector<std::string> conflicts;  // sorted route ids, symmetric program-wide
  friend bool operator==(const RouteDecl&, const RouteDecl&) = default;
};

struct Program {
  std::string station;
  std::vector<RouteDecl> routes;  // sorted by id

  const RouteDecl* find(const std::string& id) const;
  friend bool operator==(const Program&, const Program&) = default;
};

struct ConsistencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  enum class Kind { syntax, reference, asymmetry };
  ParseError(Kind k, int line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), kind(k), line(line) {}
  Kind kind;
  int line;
};

// Throws ConsistencyError if the matrix ids differ from the route-set ids.
Program build_program(const routes::RouteSet& rs, const conflict::ConflictMatrix& cm,
                      const std::string& station);

// Deterministic ILL text for the program. `input_digest` is the content hash
// of the canonical source document.
std::string render_ill(const Program& program, const std::string& input_digest);

// build + render, digest taken over the canonical serialization of `model`.
std::string generate_ill(const routes::RouteSet& rs, const conflict::ConflictMatrix& cm,
                         const PlanningModel& model);

// Enforces the program invariants (conflict symmetry, resolvable conflict
// references); parse(render(x)) is structurally equal to x.
Program parse_ill(std::string_view text);

}  // namespace stw::ill
