#include "stw/routes.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>

namespace stw::routes {

namespace {

struct Traversal {
  const PlanningModel& model;
  const TopologyGraph& graph;
  const EnumerationLimits& limits;
  std::map<std::string, std::string> section_of;  // edge -> section
  std::vector<Route> routes;
  std::vector<DiscardedPath> discarded;

  // Signals on `edge` that face travel direction `dir`, function main.
  // Returns the nearest one strictly ahead of `after_mm` (or from the edge
  // boundary when `after_mm` is absent).
  const Signal* next_main_signal(const std::string& edge, TravelDir dir,
                                 std::optional<Millimeters> after_mm,
                                 const std::string& exclude_id) const {
    const Signal* best = nullptr;
    for (const auto& s : model.signals) {
      if (s.edge != edge || s.function != SignalFunction::main) continue;
      if (s.id == exclude_id) continue;
      bool same_dir = (dir == TravelDir::forward) == (s.direction == SignalDirection::normal);
      if (!same_dir) continue;
      if (after_mm) {
        if (dir == TravelDir::forward ? s.offset <= *after_mm : s.offset >= *after_mm) continue;
      }
      if (!best) {
        best = &s;
        continue;
      }
      bool closer = dir == TravelDir::forward
                        ? (s.offset < best->offset ||
                           (s.offset == best->offset && s.id < best->id))
                        : (s.offset > best->offset ||
                           (s.offset == best->offset && s.id < best->id));
      if (closer) best = &s;
    }
    return best;
  }

  void emit_route(const Signal& start, const std::vector<PathStep>& path,
                  const std::vector<PointRequirement>& points, const std::string& end_element) {
    Route r;
    r.start_signal = start.id;
    r.path = path;
    r.points = points;
    r.end_element = end_element;
    for (const auto& step : path) {
      auto it = section_of.find(step.edge);
      if (it == section_of.end()) continue;  // validated models are fully covered
      if (std::find(r.sections.begin(), r.sections.end(), it->second) == r.sections.end())
        r.sections.push_back(it->second);
    }
    r.id = route_id(r);
    routes.push_back(std::move(r));
  }

  void walk(const Signal& start, const Edge& edge, TravelDir dir, std::vector<PathStep>& path,
            std::vector<PointRequirement>& points, bool first_edge) {
    path.push_back({edge.id, dir});
    struct Pop {
      std::vector<PathStep>& p;
      ~Pop() { p.pop_back(); }
    } pop{path};

    std::optional<Millimeters> after =
        first_edge ? std::optional<Millimeters>(start.offset) : std::nullopt;
    if (const Signal* stop = next_main_signal(edge.id, dir, after, start.id)) {
      emit_route(start, path, points, stop->id);
      return;
    }

    const std::string& node =
        dir == TravelDir::forward ? edge.node_b : edge.node_a;
    Leg entry = dir == TravelDir::forward ? edge.leg_b : edge.leg_a;
    if (graph.node_kind(node) == NodeKind::end) {
      emit_route(start, path, points, node);
      return;
    }

    for (Leg exit : graph.exits(node, entry)) {
      // A point entered via tip requires the exit leg's position; entered via
      // a side leg it requires that entry leg.
      PointPosition required =
          entry == Leg::tip ? (exit == Leg::left ? PointPosition::left : PointPosition::right)
                            : (entry == Leg::left ? PointPosition::left : PointPosition::right);
      auto existing = std::find_if(points.begin(), points.end(),
                                   [&](const PointRequirement& p) { return p.point == node; });
      bool added = false;
      if (existing != points.end()) {
        if (existing->position != required) {
          auto bad = path;
          discarded.push_back(
              {bad, "point " + node + " demanded in both positions (contradiction)"});
          continue;
        }
      } else {
        points.push_back({node, required});
        added = true;
      }

      const std::string& next_id = graph.edge_at(node, exit);
      const Edge* next = model.find_edge(next_id);
      if (next) {
        TravelDir next_dir = (next->node_a == node && next->leg_a == exit)
                                 ? TravelDir::forward
                                 : TravelDir::backward;
        bool revisit = std::any_of(path.begin(), path.end(), [&](const PathStep& s) {
          return s.edge == next->id && s.dir == next_dir;
        });
        if (revisit) {
          auto bad = path;
          bad.push_back({next->id, next_dir});
          discarded.push_back({bad, "cycle: edge " + next->id + " direction " +
                                        std::string(1, to_char(next_dir)) + " already traversed"});
        } else if (path.size() >= limits.max_depth) {
          auto bad = path;
          bad.push_back({next->id, next_dir});
          discarded.push_back({bad, "depth bound of " + std::to_string(limits.max_depth) +
                                        " edges exceeded"});
        } else {
          walk(start, *next, next_dir, path, points, false);
        }
      }
      if (added) points.pop_back();
    }
  }
};

}  // namespace

std::string to_string(const PathStep& s) { return s.edge + ":" + to_char(s.dir); }

std::string route_id(const Route& r) {
  std::string id = r.start_signal + "->" + r.end_element + "[";
  for (std::size_t i = 0; i < r.path.size(); ++i) {
    if (i) id += ',';
    id += to_string(r.path[i]);
  }
  return id + "]";
}

RouteSet enumerate_routes(const PlanningModel& model, const TopologyGraph& graph,
                          const EnumerationLimits& limits) {
  Traversal t{model, graph, limits, {}, {}, {}};
  for (const auto& s : model.sections)
    for (const auto& e : s.edges) t.section_of.emplace(e, s.id);

  std::vector<const Signal*> starts;
  for (const auto& s : model.signals)
    if (s.function == SignalFunction::main) starts.push_back(&s);
  std::sort(starts.begin(), starts.end(),
            [](const Signal* a, const Signal* b) { return a->id < b->id; });

  for (const Signal* s : starts) {
    const Edge* host = model.find_edge(s->edge);
    if (!host) continue;
    TravelDir dir =
        s->direction == SignalDirection::normal ? TravelDir::forward : TravelDir::backward;
    std::vector<PathStep> path;
    std::vector<PointRequirement> points;
    t.walk(*s, *host, dir, path, points, true);
  }

  std::sort(t.routes.begin(), t.routes.end(),
            [](const Route& a, const Route& b) { return a.id < b.id; });
  auto path_key = [](const DiscardedPath& d) {
    std::string key;
    for (const auto& s : d.path) key += to_string(s) + ",";
    return key + "|" + d.reason;
  };
  std::sort(t.discarded.begin(), t.discarded.end(),
            [&](const DiscardedPath& a, const DiscardedPath& b) {
              return path_key(a) < path_key(b);
            });
  return {std::move(t.routes), std::move(t.discarded)};
}

nlohmann::json routeset_json(const RouteSet& rs) {
  nlohmann::json routes = nlohmann::json::array();
  for (const auto& r : rs.routes) {
    nlohmann::json path = nlohmann::json::array();
    for (const auto& s : r.path) path.push_back(to_string(s));
    nlohmann::json points = nlohmann::json::object();
    for (const auto& p : r.points) points[p.point] = stw::to_string(p.position);
    routes.push_back({{"id", r.id},
                      {"start", r.start_signal},
                      {"end", r.end_element},
                      {"path", path},
                      {"points", points},
                      {"sections", r.sections}});
  }
  nlohmann::json discarded = nlohmann::json::array();
  for (const auto& d : rs.discarded) {
    nlohmann::json path = nlohmann::json::array();
    for (const auto& s : d.path) path.push_back(to_string(s));
    discarded.push_back({{"path", path}, {"reason", d.reason}});
  }
  return {{"routes", routes}, {"discarded", discarded}};
}

}  // namespace stw::routes
