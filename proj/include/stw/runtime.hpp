#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "stw/ill.hpp"

namespace stw::rt {

struct UnknownIdError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class RouteState { idle, reserved, active, occupied, failed };
const char* to_string(RouteState s);

struct Event {
  enum class Kind { request_route, point_feedback, section_occupied, section_clear, reset };
  Kind kind = Kind::request_route;
  std::string route;
  std::string point;
  PointPosition position = PointPosition::left;
  std::string section;

  static Event request_route(std::string route);
  static Event point_feedback(std::string point, PointPosition pos);
  static Event section_occupied(std::string section);
  static Event section_clear(std::string section);
  static Event reset(std::string route);

  friend bool operator==(const Event&, const Event&) = default;
};

struct Command {
  enum class Kind {
    move_point,
    signal_aspect,
    route_accepted,
    route_rejected,
    route_released,
    route_failed
  };
  enum class Aspect { clear, stop };
  enum class RejectReason { already_set, conflict };
  enum class FailReason { point_mismatch };

  Kind kind = Kind::move_point;
  std::string point;
  PointPosition position = PointPosition::left;
  std::string signal;
  Aspect aspect = Aspect::stop;
  std::string route;
  RejectReason reject_reason = RejectReason::already_set;
  std::string conflicting_route;
  FailReason fail_reason = FailReason::point_mismatch;

  static Command move_point(std::string point, PointPosition pos);
  static Command signal_aspect(std::string signal, Aspect a);
  static Command route_accepted(std::string route);
  static Command route_rejected_already_set(std::string route);
  static Command route_rejected_conflict(std::string route, std::string holder);
  static Command route_released(std::string route);
  static Command route_failed_point_mismatch(std::string route);

  friend bool operator==(const Command&, const Command&) = default;
};

// NDJSON encodings, e.g. {"type":"RequestRoute","route":"..."}.
nlohmann::json to_json(const Event& e);
nlohmann::json to_json(const Command& c);
Event event_from_json(const nlohmann::json& j);      // throws std::invalid_argument
Command command_from_json(const nlohmann::json& j);  // throws std::invalid_argument

// Interprets the program as one state machine per route over a totally
// ordered event stream. Events are consumed one at a time; callers on
// multiple threads must funnel through one ordered queue.
//
// Safety invariants maintained:
//   - no two conflicting routes are simultaneously in {RESERVED, ACTIVE,
//     OCCUPIED} (FAILED also holds its footprint until reset);
//   - CLEAR is commanded for a route's start signal only once every required
//     point has a confirmed, matching position.
class Interlocking {
 public:
  explicit Interlocking(ill::Program program);

  // Applies one event; returns the emitted commands in deterministic order:
  // state notifications, then point commands in program order, then signal
  // commands. Unknown ids throw UnknownIdError and leave the state unchanged.
  std::vector<Command> handle(const Event& e);

  nlohmann::json snapshot() const;

  RouteState route_state(const std::string& route) const;
  std::optional<PointPosition> confirmed_position(const std::string& point) const;
  bool is_occupied(const std::string& section) const;

  const ill::Program& program() const { return program_; }
  const std::set<std::string>& point_ids() const { return point_ids_; }
  const std::set<std::string>& signal_ids() const { return signal_ids_; }
  const std::set<std::string>& section_ids() const { return section_ids_; }
  bool knows_element(const std::string& id) const {
    return point_ids_.count(id) || signal_ids_.count(id);
  }

 private:
  std::size_t route_index(const std::string& id) const;

  ill::Program program_;
  std::vector<RouteState> states_;
  std::vector<std::set<std::string>> seen_occupied_;  // per route
  std::map<std::string, PointPosition> confirmed_;
  std::set<std::string> occupied_;
  std::map<std::string, std::size_t> index_;
  std::set<std::string> point_ids_, signal_ids_, section_ids_;
};

}  // namespace stw::rt
