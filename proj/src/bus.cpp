#include "stw/bus.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cstring>

namespace stw::bus {

namespace {

bool send_all(int fd, const std::string& data) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n <= 0) return false;
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

constexpr std::size_t kMaxLine = 1 << 20;

}  // namespace

struct Server::Connection {
  int fd = -1;
  std::mutex write_mu;
  std::uint64_t out_seq = 0;
  std::uint64_t expected_in_seq = 1;
  std::set<std::string> elements;
  bool closed = false;
  std::thread reader;
};

Server::Server(const ill::Program& program, Options options) : options_(std::move(options)) {
  interlocking_ = std::make_unique<rt::Interlocking>(program);
  point_ids_ = interlocking_->point_ids();
  section_ids_ = interlocking_->section_ids();
  commandable_ids_ = point_ids_;
  commandable_ids_.insert(interlocking_->signal_ids().begin(),
                          interlocking_->signal_ids().end());
  for (const auto& r : program.routes) route_ids_.insert(r.id);

  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw std::runtime_error("socket() failed");
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(options_.port);
  if (::inet_pton(AF_INET, options_.host.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    throw std::runtime_error("invalid bind address " + options_.host);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(listen_fd_);
    throw std::runtime_error("bind to " + options_.host + ":" +
                             std::to_string(options_.port) + " failed");
  }
  if (::listen(listen_fd_, 16) != 0) {
    ::close(listen_fd_);
    throw std::runtime_error("listen() failed");
  }
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);

  worker_thread_ = std::thread(&Server::worker_loop, this);
  accept_thread_ = std::thread(&Server::accept_loop, this, listen_fd_);
}

Server::~Server() { stop(); }

void Server::stop() {
  {
    std::lock_guard lock(queue_mu_);
    if (stopping_) return;
    stopping_ = true;
  }
  queue_cv_.notify_all();
  if (listen_fd_ >= 0) ::shutdown(listen_fd_, SHUT_RDWR);
  if (accept_thread_.joinable()) accept_thread_.join();  // no new connections now
  if (listen_fd_ >= 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
  std::vector<std::shared_ptr<Connection>> conns;
  {
    std::lock_guard lock(conn_mu_);
    conns = connections_;
  }
  for (auto& c : conns) {
    std::lock_guard lock(c->write_mu);
    if (!c->closed) {
      ::shutdown(c->fd, SHUT_RDWR);
      c->closed = true;
    }
  }
  if (worker_thread_.joinable()) worker_thread_.join();
  for (auto& c : conns)
    if (c->reader.joinable()) c->reader.join();  // readers close their own fd
}

void Server::accept_loop(int listen_fd) {
  for (;;) {
    int fd = ::accept(listen_fd, nullptr, nullptr);
    if (fd < 0) return;  // listener closed
    auto conn = std::make_shared<Connection>();
    conn->fd = fd;
    {
      std::lock_guard lock(conn_mu_);
      connections_.push_back(conn);
    }
    conn->reader = std::thread(&Server::reader_loop, this, conn);
  }
}

void Server::drop_connection(const std::shared_ptr<Connection>& conn) {
  {
    std::lock_guard lock(conn->write_mu);
    if (!conn->closed) {
      ::shutdown(conn->fd, SHUT_RDWR);
      conn->closed = true;
    }
  }
  std::lock_guard lock(conn_mu_);
  for (const auto& el : conn->elements) element_owner_.erase(el);
  conn->elements.clear();
}

void Server::send_message(const std::shared_ptr<Connection>& conn, const std::string& type,
                          nlohmann::json payload) {
  std::lock_guard lock(conn->write_mu);
  if (conn->closed) return;
  nlohmann::json msg = {{"v", kProtocolVersion},
                        {"seq", ++conn->out_seq},
                        {"type", type},
                        {"payload", std::move(payload)}};
  if (!send_all(conn->fd, msg.dump() + "\n")) conn->closed = true;
}

void Server::send_error(const std::shared_ptr<Connection>& conn, const std::string& code,
                        const std::string& message) {
  send_message(conn, "error", {{"code", code}, {"message", message}});
}

void Server::reader_loop(std::shared_ptr<Connection> conn) {
  std::string buffer;
  char chunk[4096];
  bool running = true;
  while (running) {
    ssize_t n = ::recv(conn->fd, chunk, sizeof(chunk), 0);
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    if (buffer.size() > kMaxLine) {
      send_error(conn, "BAD_MESSAGE", "line too long");
      break;
    }
    std::size_t start = 0;
    while (running) {
      std::size_t eol = buffer.find('\n', start);
      if (eol == std::string::npos) {
        buffer.erase(0, start);
        break;
      }
      std::string line = buffer.substr(start, eol - start);
      start = eol + 1;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      nlohmann::json msg = nlohmann::json::parse(line, nullptr, false);
      if (msg.is_discarded() || !msg.is_object()) {
        send_error(conn, "BAD_MESSAGE", "line is not a JSON object");
        running = false;
        break;
      }
      handle_message(conn, msg);
      {
        std::lock_guard lock(conn->write_mu);
        if (conn->closed) running = false;
      }
    }
  }
  drop_connection(conn);
  // The reader owns the fd; no send can start once `closed` is set.
  std::lock_guard lock(conn->write_mu);
  if (conn->fd >= 0) {
    ::close(conn->fd);
    conn->fd = -1;
  }
}

void Server::handle_message(const std::shared_ptr<Connection>& conn, const nlohmann::json& msg) {
  if (!msg.contains("v") || !msg["v"].is_number_integer() ||
      msg["v"].get<int>() != kProtocolVersion) {
    send_error(conn, "BAD_VERSION", "unsupported protocol version");
    drop_connection(conn);
    return;
  }
  if (!msg.contains("seq") || !msg["seq"].is_number_unsigned() ||
      msg["seq"].get<std::uint64_t>() != conn->expected_in_seq) {
    send_error(conn, "BAD_SEQ",
               "expected seq " + std::to_string(conn->expected_in_seq));
    drop_connection(conn);
    return;
  }
  ++conn->expected_in_seq;
  std::string type = msg.contains("type") && msg["type"].is_string()
                         ? msg["type"].get<std::string>()
                         : "";
  nlohmann::json payload =
      msg.contains("payload") ? msg["payload"] : nlohmann::json::object();

  if (type == "register") {
    if (!payload.contains("elements") || !payload["elements"].is_array()) {
      send_error(conn, "BAD_REGISTER", "payload.elements must be an array of ids");
      return;
    }
    std::vector<std::string> elements;
    for (const auto& e : payload["elements"]) {
      if (!e.is_string()) {
        send_error(conn, "BAD_REGISTER", "payload.elements must be an array of ids");
        return;
      }
      elements.push_back(e.get<std::string>());
    }
    // Atomic: any unknown or already-claimed element refuses the whole set.
    std::lock_guard lock(conn_mu_);
    for (const auto& e : elements) {
      if (!commandable_ids_.count(e)) {
        send_error(conn, "UNKNOWN_ELEMENT", "element \"" + e + "\" is not in the program");
        return;
      }
      auto it = element_owner_.find(e);
      if (it != element_owner_.end() && it->second != conn) {
        send_error(conn, "DUPLICATE_REGISTRATION",
                   "element \"" + e + "\" is already registered");
        return;
      }
    }
    for (const auto& e : elements) {
      element_owner_[e] = conn;
      conn->elements.insert(e);
    }
    send_message(conn, "register_ack", {{"elements", elements}});
  } else if (type == "feedback" || type == "event") {
    rt::Event event;
    try {
      event = rt::event_from_json(payload);
    } catch (const std::exception& e) {
      send_error(conn, "BAD_EVENT", e.what());
      return;
    }
    if (type == "feedback" && event.kind != rt::Event::Kind::point_feedback) {
      send_error(conn, "BAD_EVENT", "feedback payload must be a PointFeedback");
      return;
    }
    // Validate ids up front so the worker never throws.
    std::string unknown;
    switch (event.kind) {
      case rt::Event::Kind::request_route:
      case rt::Event::Kind::reset:
        if (!route_ids_.count(event.route)) unknown = "route \"" + event.route + "\"";
        break;
      case rt::Event::Kind::point_feedback:
        if (!point_ids_.count(event.point)) unknown = "point \"" + event.point + "\"";
        break;
      case rt::Event::Kind::section_occupied:
      case rt::Event::Kind::section_clear:
        if (!section_ids_.count(event.section)) unknown = "section \"" + event.section + "\"";
        break;
    }
    if (!unknown.empty()) {
      send_error(conn, "UNKNOWN_ID", "unknown " + unknown);
      return;
    }
    enqueue(event);
  } else if (type == "ping") {
    send_message(conn, "pong", payload);
  } else {
    send_error(conn, "UNKNOWN_TYPE", "unknown message type \"" + type + "\"");
    drop_connection(conn);
  }
}

std::uint64_t Server::enqueue(const rt::Event& e) {
  std::uint64_t ticket;
  {
    std::lock_guard lock(queue_mu_);
    ticket = next_ticket_++;
    queue_.push_back({ticket, e});
  }
  queue_cv_.notify_all();
  return ticket;
}

std::uint64_t Server::submit(const rt::Event& e) { return enqueue(e); }

void Server::worker_loop() {
  for (;;) {
    Pending item;
    {
      std::unique_lock lock(queue_mu_);
      queue_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      item = queue_.front();
      queue_.erase(queue_.begin());
    }
    std::vector<rt::Command> commands;
    {
      std::lock_guard lock(state_mu_);
      try {
        commands = interlocking_->handle(item.event);
      } catch (const rt::UnknownIdError&) {
        commands.clear();  // pre-validated; stale after a reset race
      }
      trace_.push_back({item.ticket, rt::to_json(item.event), commands});
      processed_upto_ = std::max(processed_upto_, item.ticket);
    }
    trace_cv_.notify_all();
    dispatch_commands(commands);
  }
}

void Server::dispatch_commands(const std::vector<rt::Command>& commands) {
  for (const auto& c : commands) {
    switch (c.kind) {
      case rt::Command::Kind::move_point: {
        std::shared_ptr<Connection> owner;
        {
          std::lock_guard lock(conn_mu_);
          auto it = element_owner_.find(c.point);
          if (it != element_owner_.end()) owner = it->second;
        }
        if (owner) {
          send_message(owner, "command", rt::to_json(c));
        } else {
          // Internal loopback: unregistered points behave nominally.
          enqueue(rt::Event::point_feedback(c.point, c.position));
        }
        break;
      }
      case rt::Command::Kind::signal_aspect: {
        std::shared_ptr<Connection> owner;
        {
          std::lock_guard lock(conn_mu_);
          auto it = element_owner_.find(c.signal);
          if (it != element_owner_.end()) owner = it->second;
        }
        if (owner) send_message(owner, "command", rt::to_json(c));
        break;
      }
      default: {
        // Route lifecycle notifications go to every connection.
        std::vector<std::shared_ptr<Connection>> conns;
        {
          std::lock_guard lock(conn_mu_);
          conns = connections_;
        }
        for (auto& conn : conns) send_message(conn, "command", rt::to_json(c));
        break;
      }
    }
  }
}

// Timed waits use system_clock deadlines: libstdc++ maps those to
// pthread_cond_timedwait, which ThreadSanitizer can intercept (it misses
// pthread_cond_clockwait, the steady_clock path).
bool Server::wait_processed(std::uint64_t ticket, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(state_mu_);
  return trace_cv_.wait_until(lock, std::chrono::system_clock::now() + timeout,
                              [&] { return processed_upto_ >= ticket; });
}

std::size_t Server::batch_count() const {
  std::lock_guard lock(state_mu_);
  return trace_.size();
}

std::vector<TraceBatch> Server::batches_from(std::size_t index) const {
  std::lock_guard lock(state_mu_);
  if (index >= trace_.size()) return {};
  return {trace_.begin() + static_cast<std::ptrdiff_t>(index), trace_.end()};
}

bool Server::wait_batch_count_above(std::size_t n, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(state_mu_);
  return trace_cv_.wait_until(lock, std::chrono::system_clock::now() + timeout,
                              [&] { return trace_.size() > n; });
}

std::optional<std::size_t> Server::batch_index_of(std::uint64_t ticket) const {
  std::lock_guard lock(state_mu_);
  for (std::size_t i = trace_.size(); i > 0; --i)
    if (trace_[i - 1].ticket == ticket) return i - 1;
  return std::nullopt;
}

void Server::reset_runtime() {
  {
    std::lock_guard lock(queue_mu_);
    queue_.clear();
  }
  std::lock_guard lock(state_mu_);
  interlocking_ = std::make_unique<rt::Interlocking>(interlocking_->program());
}

std::set<std::string> Server::registered_elements() const {
  std::lock_guard lock(conn_mu_);
  std::set<std::string> out;
  for (const auto& [el, conn] : element_owner_) out.insert(el);
  return out;
}

// ---------------------------------------------------------------------------

SimulatedOc::SimulatedOc(const std::string& host, std::uint16_t port,
                         std::vector<std::string> elements, Behavior behavior)
    : behavior_(behavior), elements_(elements.begin(), elements.end()) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw std::runtime_error("socket() failed");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1 ||
      ::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw std::runtime_error("connect to " + host + ":" + std::to_string(port) + " failed");
  }
  send("register", {{"elements", elements}});
  reader_ = std::thread(&SimulatedOc::reader_loop, this);
}

SimulatedOc::~SimulatedOc() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
  if (reader_.joinable()) reader_.join();
  if (fd_ >= 0) ::close(fd_);
}

void SimulatedOc::send(const std::string& type, nlohmann::json payload) {
  nlohmann::json msg = {{"v", kProtocolVersion},
                        {"seq", ++out_seq_},
                        {"type", type},
                        {"payload", std::move(payload)}};
  send_all(fd_, msg.dump() + "\n");
}

bool SimulatedOc::wait_registered(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_until(lock, std::chrono::system_clock::now() + timeout,
                 [&] { return ack_ || failed_; });
  return ack_;
}

std::optional<std::string> SimulatedOc::last_error_code() const {
  return error_code_;
}

void SimulatedOc::reader_loop() {
  std::string buffer;
  char chunk[4096];
  for (;;) {
    ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t start = 0;
    for (;;) {
      std::size_t eol = buffer.find('\n', start);
      if (eol == std::string::npos) {
        buffer.erase(0, start);
        break;
      }
      std::string line = buffer.substr(start, eol - start);
      start = eol + 1;
      nlohmann::json msg = nlohmann::json::parse(line, nullptr, false);
      if (msg.is_discarded() || !msg.is_object()) continue;
      std::string type = msg.value("type", "");
      if (type == "register_ack") {
        std::lock_guard lock(mu_);
        ack_ = true;
        cv_.notify_all();
      } else if (type == "error") {
        std::lock_guard lock(mu_);
        failed_ = true;
        error_code_ = msg["payload"].value("code", "");
        cv_.notify_all();
      } else if (type == "command") {
        const auto& payload = msg["payload"];
        if (payload.value("type", "") != "MovePoint") continue;
        std::string point = payload.value("point", "");
        if (!elements_.count(point) || behavior_ == Behavior::mute) continue;
        auto pos = point_position_from_string(payload.value("position", ""));
        if (!pos) continue;
        PointPosition reply = *pos;
        if (behavior_ == Behavior::inverted)
          reply = reply == PointPosition::left ? PointPosition::right : PointPosition::left;
        send("feedback", rt::to_json(rt::Event::point_feedback(point, reply)));
      }
    }
  }
}

// ---------------------------------------------------------------------------

std::vector<harness::Verdict> run_over_bus(Server& server,
                                           const std::vector<harness::Scenario>& scenarios,
                                           const BusRunOptions& options) {
  std::vector<harness::Verdict> verdicts;
  for (const auto& scenario : scenarios) {
    if (options.reset_between) server.reset_runtime();

    harness::Verdict v;
    v.scenario = scenario.id;
    v.passed = true;

    const std::size_t scenario_start = server.batch_count();
    std::optional<std::size_t> burst_batch;  // batch of the last submitted inject
    std::size_t burst_pos = 0;
    bool awaiting = false;  // last inject was supplied by the environment

    auto fail = [&](std::size_t step_index, const std::string& why) {
      v.passed = false;
      v.first_failed_step = step_index;
      v.detail = why;
    };

    for (std::size_t i = 0; i < scenario.steps.size() && v.passed; ++i) {
      const auto& step = scenario.steps[i];
      switch (step.kind) {
        case harness::Step::Kind::inject: {
          if (step.event.kind == rt::Event::Kind::point_feedback) {
            awaiting = true;  // OC or loopback provides it
            break;
          }
          std::uint64_t ticket = server.submit(step.event);
          if (!server.wait_processed(ticket, options.step_timeout)) {
            fail(i, "event was not processed within the timeout");
            break;
          }
          burst_batch = server.batch_index_of(ticket);
          burst_pos = 0;
          awaiting = false;
          break;
        }
        case harness::Step::Kind::expect_command: {
          if (awaiting) {
            // Await the command anywhere in this scenario's trace; commands
            // awaited this way (post-feedback CLEAR) occur at most once per
            // scenario.
            auto deadline = std::chrono::steady_clock::now() + options.step_timeout;
            bool found = false;
            std::size_t from = scenario_start;
            while (!found) {
              auto batches = server.batches_from(from);
              for (const auto& b : batches) {
                for (const auto& c : b.commands)
                  if (c == step.expected) found = true;
                ++from;
              }
              if (found) break;
              auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                  deadline - std::chrono::steady_clock::now());
              if (left.count() <= 0 || !server.wait_batch_count_above(from, left)) break;
            }
            if (!found) fail(i, step.label + " was not satisfied before the timeout");
            awaiting = false;
            break;
          }
          if (!burst_batch) {
            fail(i, "expectation without a preceding injection");
            break;
          }
          auto batches = server.batches_from(*burst_batch);
          bool found = false;
          if (!batches.empty()) {
            const auto& cmds = batches.front().commands;
            for (std::size_t k = burst_pos; k < cmds.size(); ++k) {
              if (cmds[k] == step.expected) {
                burst_pos = k + 1;
                found = true;
                break;
              }
            }
          }
          if (!found) fail(i, step.label + " was not satisfied");
          break;
        }
        case harness::Step::Kind::expect_no_command_of_type: {
          if (!burst_batch) break;
          auto batches = server.batches_from(*burst_batch);
          if (!batches.empty()) {
            for (const auto& c : batches.front().commands)
              if (c.kind == step.none_of) {
                fail(i, step.label + " was violated");
                break;
              }
          }
          break;
        }
      }
    }

    // Drain in-flight feedback (answers to the last point moves) so it
    // cannot leak into the next scenario's fresh state.
    {
      auto deadline = std::chrono::steady_clock::now() + options.step_timeout;
      for (;;) {
        auto batches = server.batches_from(scenario_start);
        std::size_t moves = 0, feedbacks = 0;
        for (const auto& b : batches) {
          if (b.event.value("type", "") == "PointFeedback") ++feedbacks;
          for (const auto& c : b.commands)
            if (c.kind == rt::Command::Kind::move_point) ++moves;
        }
        if (feedbacks >= moves) break;
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
            deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) break;  // mute controllers never answer
        if (!server.wait_batch_count_above(scenario_start + batches.size(), left)) break;
      }
    }

    for (const auto& b : server.batches_from(scenario_start)) {
      v.trace.push_back({v.trace.size() + 1, true, b.event});
      for (const auto& c : b.commands)
        v.trace.push_back({v.trace.size() + 1, false, rt::to_json(c)});
    }
    verdicts.push_back(std::move(v));
  }
  return verdicts;
}

}  // namespace stw::bus
