#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace stw {

// Typed in-memory CCS plan. Lengths and offsets are fixed-point millimeters
// so that the canonical 3-decimal rendering is exact.
using Millimeters = std::int64_t;

enum class Leg { tip, left, right };
enum class NodeKind { point, end };
enum class SignalDirection { normal, reverse };  // normal = travel nodeA -> nodeB
enum class SignalFunction { main, shunt };
enum class PointPosition { left, right };
enum class TravelDir { forward, backward };  // rendered as '+' / '-'

struct Node {
  std::string id;
  NodeKind kind = NodeKind::end;
  friend bool operator==(const Node&, const Node&) = default;
};

struct Edge {
  std::string id;
  std::string node_a;
  Leg leg_a = Leg::tip;
  std::string node_b;
  Leg leg_b = Leg::tip;
  Millimeters length = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Signal {
  std::string id;
  std::string edge;
  Millimeters offset = 0;
  SignalDirection direction = SignalDirection::normal;
  SignalFunction function = SignalFunction::main;
  friend bool operator==(const Signal&, const Signal&) = default;
};

struct TdsSection {
  std::string id;
  std::vector<std::string> edges;
  // Synthesized for uncovered edges (rule R006); omitted by the canonical
  // serializer so declared documents round-trip byte-for-byte.
  bool implicit = false;
  friend bool operator==(const TdsSection&, const TdsSection&) = default;
};

struct PlanningModel {
  std::string project_id;
  std::string project_name;
  std::string format_version;  // "1.9.0.2-S"
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::vector<Signal> signals;
  std::vector<TdsSection> sections;

  const Node* find_node(const std::string& id) const;
  const Edge* find_edge(const std::string& id) const;
  const Signal* find_signal(const std::string& id) const;

  // First declared section covering the edge, else the implicit one.
  // Empty if the edge is covered by no section at all.
  std::string section_for(const std::string& edge_id) const;

  friend bool operator==(const PlanningModel&, const PlanningModel&) = default;
};

struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Traversable view of the plan. Leg semantics at a point: entering via tip
// may exit left or right; entering via left or right must exit via tip;
// left<->right is never legal. End nodes terminate traversal.
class TopologyGraph {
 public:
  // Throws StructuralError if a node's incident legs violate its kind.
  static TopologyGraph build(const PlanningModel& model);

  // Legal exit legs for entering `node` via `entry`.
  std::vector<Leg> exits(const std::string& node, Leg entry) const;

  // Edge attached to (node, leg); empty string if none.
  const std::string& edge_at(const std::string& node, Leg leg) const;

  NodeKind node_kind(const std::string& node) const;
  std::size_t edge_index_size() const { return edge_index_.size(); }

 private:
  std::map<std::pair<std::string, int>, std::string> edge_index_;
  std::map<std::string, NodeKind> kinds_;
};

TopologyGraph build_graph(const PlanningModel& model);

// Plan as fact clauses: one `name(arg1, arg2, ...).` line per element,
// lowercased ids, 3-decimal lengths, lines sorted bytewise.
std::string emit_facts(const PlanningModel& model);

// enum <-> text
const char* to_string(Leg l);
const char* to_string(NodeKind k);
const char* to_string(SignalDirection d);
const char* to_string(SignalFunction f);
const char* to_string(PointPosition p);
char to_char(TravelDir d);  // '+' or '-'
std::optional<Leg> leg_from_string(const std::string& s);
std::optional<NodeKind> node_kind_from_string(const std::string& s);
std::optional<SignalDirection> signal_direction_from_string(const std::string& s);
std::optional<SignalFunction> signal_function_from_string(const std::string& s);
std::optional<PointPosition> point_position_from_string(const std::string& s);

// "500.000" style rendering of fixed-point millimeters.
std::string format_mm(Millimeters mm);
std::string ascii_lower(std::string_view s);

}  // namespace stw
