#pragma once

#include <set>
#include <string>
#include <utility>

#include "stw/model.hpp"

namespace stw::testsupport {

// Independent exhaustive depth-first route enumeration, written directly
// against the model (no TopologyGraph, no RouteSet machinery). Returns the
// set of (start signal, comma-joined edge:dir path) pairs. Used as the
// reference the production enumerator must agree with.
std::set<std::pair<std::string, std::string>> oracle_routes(const stw::PlanningModel& model);

}  // namespace stw::testsupport
