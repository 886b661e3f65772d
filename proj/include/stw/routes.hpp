#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "stw/model.hpp"

namespace stw::routes {

struct PathStep {
  std::string edge;
  TravelDir dir = TravelDir::forward;
  friend bool operator==(const PathStep&, const PathStep&) = default;
};

struct PointRequirement {
  std::string point;
  PointPosition position = PointPosition::left;
  friend bool operator==(const PointRequirement&, const PointRequirement&) = default;
};

// A locked path from a start signal to the next interesting point: the next
// same-direction main signal, or a track end.
struct Route {
  std::string id;
  std::string start_signal;
  std::vector<PathStep> path;
  std::vector<PointRequirement> points;  // path-encounter order, unique points
  std::string end_element;               // signal id or node id
  std::vector<std::string> sections;     // de-duplicated, path-ordered
  friend bool operator==(const Route&, const Route&) = default;
};

struct DiscardedPath {
  std::vector<PathStep> path;
  std::string reason;
  friend bool operator==(const DiscardedPath&, const DiscardedPath&) = default;
};

struct RouteSet {
  std::vector<Route> routes;        // sorted by id
  std::vector<DiscardedPath> discarded;
  friend bool operator==(const RouteSet&, const RouteSet&) = default;
};

struct EnumerationLimits {
  std::size_t max_depth = 64;  // edges per path
};

// Canonical id: start + "->" + end + "[" + comma-joined edge:dir + "]".
std::string route_id(const Route& r);

std::string to_string(const PathStep& s);  // "T1:+"

// Every acyclic start-signal-to-interesting-point path. Pathological paths
// (cycle bound, depth bound, contradictory point demands) land in
// `discarded`, never silently dropped.
RouteSet enumerate_routes(const PlanningModel& model, const TopologyGraph& graph,
                          const EnumerationLimits& limits = {});

nlohmann::json routeset_json(const RouteSet& rs);

}  // namespace stw::routes
