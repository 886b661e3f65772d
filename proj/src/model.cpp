#include "stw/model.hpp"

#include <algorithm>
#include <array>
#include <sstream>

namespace stw {

const Node* PlanningModel::find_node(const std::string& id) const {
  for (const auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

const Edge* PlanningModel::find_edge(const std::string& id) const {
  for (const auto& e : edges)
    if (e.id == id) return &e;
  return nullptr;
}

const Signal* PlanningModel::find_signal(const std::string& id) const {
  for (const auto& s : signals)
    if (s.id == id) return &s;
  return nullptr;
}

std::string PlanningModel::section_for(const std::string& edge_id) const {
  for (const auto& s : sections) {
    if (std::find(s.edges.begin(), s.edges.end(), edge_id) != s.edges.end())
      return s.id;
  }
  return {};
}

TopologyGraph TopologyGraph::build(const PlanningModel& model) {
  TopologyGraph g;
  for (const auto& n : model.nodes) g.kinds_[n.id] = n.kind;
  for (const auto& e : model.edges) {
    auto claim = [&](const std::string& node, Leg leg) {
      auto key = std::make_pair(node, static_cast<int>(leg));
      auto [it, inserted] = g.edge_index_.emplace(key, e.id);
      if (!inserted)
        throw StructuralError("leg " + std::string(to_string(leg)) + " of node " + node +
                              " claimed by both " + it->second + " and " + e.id);
    };
    claim(e.node_a, e.leg_a);
    claim(e.node_b, e.leg_b);
  }
  for (const auto& n : model.nodes) {
    auto has = [&](Leg l) {
      return g.edge_index_.count(std::make_pair(n.id, static_cast<int>(l))) != 0;
    };
    if (n.kind == NodeKind::point) {
      if (!has(Leg::tip) || !has(Leg::left) || !has(Leg::right))
        throw StructuralError("point " + n.id + " must have exactly the legs tip, left, right");
    } else {
      if (!has(Leg::tip) || has(Leg::left) || has(Leg::right))
        throw StructuralError("end node " + n.id + " must have exactly one tip leg");
    }
  }
  return g;
}

TopologyGraph build_graph(const PlanningModel& model) { return TopologyGraph::build(model); }

std::vector<Leg> TopologyGraph::exits(const std::string& node, Leg entry) const {
  auto it = kinds_.find(node);
  if (it == kinds_.end() || it->second == NodeKind::end) return {};
  switch (entry) {
    case Leg::tip:
      return {Leg::left, Leg::right};
    case Leg::left:
    case Leg::right:
      return {Leg::tip};
  }
  return {};
}

const std::string& TopologyGraph::edge_at(const std::string& node, Leg leg) const {
  static const std::string empty;
  auto it = edge_index_.find(std::make_pair(node, static_cast<int>(leg)));
  return it == edge_index_.end() ? empty : it->second;
}

NodeKind TopologyGraph::node_kind(const std::string& node) const {
  auto it = kinds_.find(node);
  if (it == kinds_.end()) throw StructuralError("unknown node " + node);
  return it->second;
}

std::string emit_facts(const PlanningModel& model) {
  std::vector<std::string> lines;
  lines.reserve(model.nodes.size() + model.edges.size() + model.signals.size() +
                model.sections.size());
  for (const auto& n : model.nodes)
    lines.push_back("node(" + ascii_lower(n.id) + ", " + to_string(n.kind) + ").");
  for (const auto& e : model.edges)
    lines.push_back("edge(" + ascii_lower(e.id) + ", " + ascii_lower(e.node_a) + ", " +
                    to_string(e.leg_a) + ", " + ascii_lower(e.node_b) + ", " +
                    to_string(e.leg_b) + ", " + format_mm(e.length) + ").");
  for (const auto& s : model.signals)
    lines.push_back("signal(" + ascii_lower(s.id) + ", " + ascii_lower(s.edge) + ", " +
                    format_mm(s.offset) + ", " + to_string(s.direction) + ", " +
                    to_string(s.function) + ").");
  for (const auto& s : model.sections) {
    std::string line = "section(" + ascii_lower(s.id);
    for (const auto& e : s.edges) line += ", " + ascii_lower(e);
    lines.push_back(line + ").");
  }
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

const char* to_string(Leg l) {
  switch (l) {
    case Leg::tip: return "tip";
    case Leg::left: return "left";
    case Leg::right: return "right";
  }
  return "?";
}

const char* to_string(NodeKind k) { return k == NodeKind::point ? "point" : "end"; }

const char* to_string(SignalDirection d) {
  return d == SignalDirection::normal ? "normal" : "reverse";
}

const char* to_string(SignalFunction f) { return f == SignalFunction::main ? "main" : "shunt"; }

const char* to_string(PointPosition p) { return p == PointPosition::left ? "left" : "right"; }

char to_char(TravelDir d) { return d == TravelDir::forward ? '+' : '-'; }

std::optional<Leg> leg_from_string(const std::string& s) {
  if (s == "tip") return Leg::tip;
  if (s == "left") return Leg::left;
  if (s == "right") return Leg::right;
  return std::nullopt;
}

std::optional<NodeKind> node_kind_from_string(const std::string& s) {
  if (s == "point") return NodeKind::point;
  if (s == "end") return NodeKind::end;
  return std::nullopt;
}

std::optional<SignalDirection> signal_direction_from_string(const std::string& s) {
  if (s == "normal") return SignalDirection::normal;
  if (s == "reverse") return SignalDirection::reverse;
  return std::nullopt;
}

std::optional<SignalFunction> signal_function_from_string(const std::string& s) {
  if (s == "main") return SignalFunction::main;
  if (s == "shunt") return SignalFunction::shunt;
  return std::nullopt;
}

std::optional<PointPosition> point_position_from_string(const std::string& s) {
  if (s == "left") return PointPosition::left;
  if (s == "right") return PointPosition::right;
  return std::nullopt;
}

std::string format_mm(Millimeters mm) {
  std::ostringstream os;
  os << mm / 1000 << '.';
  Millimeters frac = mm % 1000;
  os << static_cast<char>('0' + frac / 100) << static_cast<char>('0' + (frac / 10) % 10)
     << static_cast<char>('0' + frac % 10);
  return os.str();
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

}  // namespace stw
