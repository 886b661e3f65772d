#include "stw/runtime.hpp"

#include <algorithm>

namespace stw::rt {

const char* to_string(RouteState s) {
  switch (s) {
    case RouteState::idle: return "IDLE";
    case RouteState::reserved: return "RESERVED";
    case RouteState::active: return "ACTIVE";
    case RouteState::occupied: return "OCCUPIED";
    case RouteState::failed: return "FAILED";
  }
  return "?";
}

Event Event::request_route(std::string route) {
  Event e;
  e.kind = Kind::request_route;
  e.route = std::move(route);
  return e;
}

Event Event::point_feedback(std::string point, PointPosition pos) {
  Event e;
  e.kind = Kind::point_feedback;
  e.point = std::move(point);
  e.position = pos;
  return e;
}

Event Event::section_occupied(std::string section) {
  Event e;
  e.kind = Kind::section_occupied;
  e.section = std::move(section);
  return e;
}

Event Event::section_clear(std::string section) {
  Event e;
  e.kind = Kind::section_clear;
  e.section = std::move(section);
  return e;
}

Event Event::reset(std::string route) {
  Event e;
  e.kind = Kind::reset;
  e.route = std::move(route);
  return e;
}

Command Command::move_point(std::string point, PointPosition pos) {
  Command c;
  c.kind = Kind::move_point;
  c.point = std::move(point);
  c.position = pos;
  return c;
}

Command Command::signal_aspect(std::string signal, Aspect a) {
  Command c;
  c.kind = Kind::signal_aspect;
  c.signal = std::move(signal);
  c.aspect = a;
  return c;
}

Command Command::route_accepted(std::string route) {
  Command c;
  c.kind = Kind::route_accepted;
  c.route = std::move(route);
  return c;
}

Command Command::route_rejected_already_set(std::string route) {
  Command c;
  c.kind = Kind::route_rejected;
  c.route = std::move(route);
  c.reject_reason = RejectReason::already_set;
  return c;
}

Command Command::route_rejected_conflict(std::string route, std::string holder) {
  Command c;
  c.kind = Kind::route_rejected;
  c.route = std::move(route);
  c.reject_reason = RejectReason::conflict;
  c.conflicting_route = std::move(holder);
  return c;
}

Command Command::route_released(std::string route) {
  Command c;
  c.kind = Kind::route_released;
  c.route = std::move(route);
  return c;
}

Command Command::route_failed_point_mismatch(std::string route) {
  Command c;
  c.kind = Kind::route_failed;
  c.route = std::move(route);
  c.fail_reason = FailReason::point_mismatch;
  return c;
}

nlohmann::json to_json(const Event& e) {
  switch (e.kind) {
    case Event::Kind::request_route:
      return {{"type", "RequestRoute"}, {"route", e.route}};
    case Event::Kind::point_feedback:
      return {{"type", "PointFeedback"}, {"point", e.point}, {"position", to_string(e.position)}};
    case Event::Kind::section_occupied:
      return {{"type", "SectionOccupied"}, {"section", e.section}};
    case Event::Kind::section_clear:
      return {{"type", "SectionClear"}, {"section", e.section}};
    case Event::Kind::reset:
      return {{"type", "Reset"}, {"route", e.route}};
  }
  return {};
}

nlohmann::json to_json(const Command& c) {
  switch (c.kind) {
    case Command::Kind::move_point:
      return {{"type", "MovePoint"}, {"point", c.point}, {"position", to_string(c.position)}};
    case Command::Kind::signal_aspect:
      return {{"type", "SignalAspect"},
              {"signal", c.signal},
              {"aspect", c.aspect == Command::Aspect::clear ? "CLEAR" : "STOP"}};
    case Command::Kind::route_accepted:
      return {{"type", "RouteAccepted"}, {"route", c.route}};
    case Command::Kind::route_rejected:
      if (c.reject_reason == Command::RejectReason::conflict)
        return {{"type", "RouteRejected"},
                {"route", c.route},
                {"reason", "CONFLICT"},
                {"conflicting_route", c.conflicting_route}};
      return {{"type", "RouteRejected"}, {"route", c.route}, {"reason", "ALREADY_SET"}};
    case Command::Kind::route_released:
      return {{"type", "RouteReleased"}, {"route", c.route}};
    case Command::Kind::route_failed:
      return {{"type", "RouteFailed"}, {"route", c.route}, {"reason", "POINT_MISMATCH"}};
  }
  return {};
}

namespace {

std::string str_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string())
    throw std::invalid_argument(std::string("missing string field \"") + key + "\"");
  return j[key].get<std::string>();
}

PointPosition pos_field(const nlohmann::json& j, const char* key) {
  auto p = point_position_from_string(str_field(j, key));
  if (!p) throw std::invalid_argument("position must be left or right");
  return *p;
}

}  // namespace

Event event_from_json(const nlohmann::json& j) {
  std::string type = str_field(j, "type");
  if (type == "RequestRoute") return Event::request_route(str_field(j, "route"));
  if (type == "PointFeedback")
    return Event::point_feedback(str_field(j, "point"), pos_field(j, "position"));
  if (type == "SectionOccupied") return Event::section_occupied(str_field(j, "section"));
  if (type == "SectionClear") return Event::section_clear(str_field(j, "section"));
  if (type == "Reset") return Event::reset(str_field(j, "route"));
  throw std::invalid_argument("unknown event type \"" + type + "\"");
}

Command command_from_json(const nlohmann::json& j) {
  std::string type = str_field(j, "type");
  if (type == "MovePoint")
    return Command::move_point(str_field(j, "point"), pos_field(j, "position"));
  if (type == "SignalAspect") {
    std::string aspect = str_field(j, "aspect");
    if (aspect != "CLEAR" && aspect != "STOP")
      throw std::invalid_argument("aspect must be CLEAR or STOP");
    return Command::signal_aspect(
        str_field(j, "signal"),
        aspect == "CLEAR" ? Command::Aspect::clear : Command::Aspect::stop);
  }
  if (type == "RouteAccepted") return Command::route_accepted(str_field(j, "route"));
  if (type == "RouteRejected") {
    std::string reason = str_field(j, "reason");
    if (reason == "ALREADY_SET")
      return Command::route_rejected_already_set(str_field(j, "route"));
    if (reason == "CONFLICT")
      return Command::route_rejected_conflict(str_field(j, "route"),
                                              str_field(j, "conflicting_route"));
    throw std::invalid_argument("unknown rejection reason \"" + reason + "\"");
  }
  if (type == "RouteReleased") return Command::route_released(str_field(j, "route"));
  if (type == "RouteFailed") return Command::route_failed_point_mismatch(str_field(j, "route"));
  throw std::invalid_argument("unknown command type \"" + type + "\"");
}

Interlocking::Interlocking(ill::Program program) : program_(std::move(program)) {
  states_.assign(program_.routes.size(), RouteState::idle);
  seen_occupied_.assign(program_.routes.size(), {});
  for (std::size_t i = 0; i < program_.routes.size(); ++i) {
    const auto& r = program_.routes[i];
    index_[r.id] = i;
    signal_ids_.insert(r.start);
    for (const auto& p : r.points) point_ids_.insert(p.point);
    for (const auto& s : r.sections) section_ids_.insert(s);
  }
}

std::size_t Interlocking::route_index(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw UnknownIdError("unknown route \"" + id + "\"");
  return it->second;
}

RouteState Interlocking::route_state(const std::string& route) const {
  return states_[route_index(route)];
}

std::optional<PointPosition> Interlocking::confirmed_position(const std::string& point) const {
  auto it = confirmed_.find(point);
  if (it == confirmed_.end()) return std::nullopt;
  return it->second;
}

bool Interlocking::is_occupied(const std::string& section) const {
  return occupied_.count(section) != 0;
}

std::vector<Command> Interlocking::handle(const Event& e) {
  // Buckets enforce the emission order: notifications, points, signals.
  std::vector<Command> notifications, point_cmds, signal_cmds;

  auto holds_footprint = [&](std::size_t i) {
    return states_[i] == RouteState::reserved || states_[i] == RouteState::active ||
           states_[i] == RouteState::occupied || states_[i] == RouteState::failed;
  };
  auto all_points_confirmed = [&](const ill::RouteDecl& r) {
    return std::all_of(r.points.begin(), r.points.end(), [&](const auto& p) {
      auto it = confirmed_.find(p.point);
      return it != confirmed_.end() && it->second == p.position;
    });
  };

  switch (e.kind) {
    case Event::Kind::request_route: {
      std::size_t i = route_index(e.route);
      const auto& r = program_.routes[i];
      if (states_[i] != RouteState::idle) {
        notifications.push_back(Command::route_rejected_already_set(e.route));
        break;
      }
      const std::string* holder = nullptr;
      for (const auto& c : r.conflicts) {
        if (holds_footprint(route_index(c))) {
          holder = &c;
          break;
        }
      }
      if (holder) {
        notifications.push_back(Command::route_rejected_conflict(e.route, *holder));
        break;
      }
      states_[i] = RouteState::reserved;
      notifications.push_back(Command::route_accepted(e.route));
      for (const auto& p : r.points) {
        auto it = confirmed_.find(p.point);
        if (it == confirmed_.end() || it->second != p.position)
          point_cmds.push_back(Command::move_point(p.point, p.position));
      }
      if (point_cmds.empty()) {
        states_[i] = RouteState::active;
        signal_cmds.push_back(Command::signal_aspect(r.start, Command::Aspect::clear));
      }
      break;
    }

    case Event::Kind::point_feedback: {
      if (!point_ids_.count(e.point))
        throw UnknownIdError("unknown point \"" + e.point + "\"");
      confirmed_[e.point] = e.position;
      for (std::size_t i = 0; i < program_.routes.size(); ++i) {
        const auto& r = program_.routes[i];
        auto req = std::find_if(r.points.begin(), r.points.end(),
                                [&](const auto& p) { return p.point == e.point; });
        if (req == r.points.end()) continue;
        bool matches = req->position == e.position;
        if (states_[i] == RouteState::reserved) {
          if (matches) {
            if (all_points_confirmed(r)) {
              states_[i] = RouteState::active;
              signal_cmds.push_back(Command::signal_aspect(r.start, Command::Aspect::clear));
            }
          } else {
            states_[i] = RouteState::failed;
            notifications.push_back(Command::route_failed_point_mismatch(r.id));
          }
        } else if ((states_[i] == RouteState::active || states_[i] == RouteState::occupied) &&
                   !matches) {
          states_[i] = RouteState::failed;
          notifications.push_back(Command::route_failed_point_mismatch(r.id));
          signal_cmds.push_back(Command::signal_aspect(r.start, Command::Aspect::stop));
        }
      }
      break;
    }

    case Event::Kind::section_occupied: {
      if (!section_ids_.count(e.section))
        throw UnknownIdError("unknown section \"" + e.section + "\"");
      occupied_.insert(e.section);
      for (std::size_t i = 0; i < program_.routes.size(); ++i) {
        const auto& r = program_.routes[i];
        bool on_route = std::find(r.sections.begin(), r.sections.end(), e.section) !=
                        r.sections.end();
        if (!on_route) continue;
        if (states_[i] == RouteState::active) {
          states_[i] = RouteState::occupied;
          seen_occupied_[i] = {e.section};
          signal_cmds.push_back(Command::signal_aspect(r.start, Command::Aspect::stop));
        } else if (states_[i] == RouteState::occupied) {
          seen_occupied_[i].insert(e.section);
        }
      }
      break;
    }

    case Event::Kind::section_clear: {
      if (!section_ids_.count(e.section))
        throw UnknownIdError("unknown section \"" + e.section + "\"");
      occupied_.erase(e.section);
      for (std::size_t i = 0; i < program_.routes.size(); ++i) {
        const auto& r = program_.routes[i];
        if (states_[i] != RouteState::occupied) continue;
        if (r.sections.back() != e.section) continue;
        if (!seen_occupied_[i].count(e.section)) continue;
        states_[i] = RouteState::idle;
        seen_occupied_[i].clear();
        notifications.push_back(Command::route_released(r.id));
      }
      break;
    }

    case Event::Kind::reset: {
      std::size_t i = route_index(e.route);
      if (states_[i] == RouteState::failed) {
        states_[i] = RouteState::idle;
        seen_occupied_[i].clear();
      }
      break;
    }
  }

  std::vector<Command> out = std::move(notifications);
  out.insert(out.end(), point_cmds.begin(), point_cmds.end());
  out.insert(out.end(), signal_cmds.begin(), signal_cmds.end());
  return out;
}

nlohmann::json Interlocking::snapshot() const {
  nlohmann::json routes = nlohmann::json::object();
  for (std::size_t i = 0; i < program_.routes.size(); ++i)
    routes[program_.routes[i].id] = to_string(states_[i]);
  nlohmann::json points = nlohmann::json::object();
  for (const auto& [point, pos] : confirmed_) points[point] = to_string(pos);
  nlohmann::json sections = nlohmann::json::object();
  for (const auto& s : section_ids_) sections[s] = occupied_.count(s) != 0;
  return {{"routes", routes}, {"points", points}, {"sections", sections}};
}

}  // namespace stw::rt
