#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "stw/harness.hpp"
#include "stw/runtime.hpp"

namespace stw::bus {

// Wire protocol: UTF-8 NDJSON over TCP, one message per LF-terminated line.
// Every message is {"v":1,"seq":N,"type":...,"payload":{...}} with seq
// gap-free per connection and direction, starting at 1. Types: register,
// register_ack, command, feedback, event, error, ping, pong.
inline constexpr int kProtocolVersion = 1;

// The runtime's commands and the inputs of one processed event, appended
// atomically to the server trace.
struct TraceBatch {
  std::uint64_t ticket = 0;
  nlohmann::json event;
  std::vector<rt::Command> commands;
};

// Hub-and-spoke orchestrator: owns the interlocking runtime and its single
// ordered event queue. Object controllers connect as TCP clients, register
// the elements they serve, receive MovePoint/SignalAspect commands for them
// and answer with feedback. Unregistered points are simulated internally
// (nominal loopback). Route lifecycle notifications are broadcast to every
// connection.
class Server {
 public:
  struct Options {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;  // 0 = ephemeral
  };

  explicit Server(const ill::Program& program) : Server(program, Options{}) {}
  Server(const ill::Program& program, Options options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const { return port_; }
  std::string host() const { return options_.host; }

  // In-process orchestrator interface (used by the harness driver).
  std::uint64_t submit(const rt::Event& e);
  bool wait_processed(std::uint64_t ticket, std::chrono::milliseconds timeout) const;
  std::size_t batch_count() const;
  std::vector<TraceBatch> batches_from(std::size_t index) const;
  bool wait_batch_count_above(std::size_t n, std::chrono::milliseconds timeout) const;
  std::optional<std::size_t> batch_index_of(std::uint64_t ticket) const;

  // Fresh runtime state (all routes IDLE, points unknown, sections clear);
  // pending queued events are dropped. Registrations survive.
  void reset_runtime();

  std::set<std::string> registered_elements() const;
  void stop();

 private:
  struct Connection;

  void accept_loop(int listen_fd);
  void reader_loop(std::shared_ptr<Connection> conn);
  void worker_loop();
  void handle_message(const std::shared_ptr<Connection>& conn, const nlohmann::json& msg);
  void send_message(const std::shared_ptr<Connection>& conn, const std::string& type,
                    nlohmann::json payload);
  void send_error(const std::shared_ptr<Connection>& conn, const std::string& code,
                  const std::string& message);
  void drop_connection(const std::shared_ptr<Connection>& conn);
  std::uint64_t enqueue(const rt::Event& e);
  void dispatch_commands(const std::vector<rt::Command>& commands);

  Options options_;
  std::uint16_t port_ = 0;
  int listen_fd_ = -1;

  // Immutable after construction; safe to read from any thread.
  std::set<std::string> commandable_ids_;  // points + signals
  std::set<std::string> route_ids_;
  std::set<std::string> point_ids_;
  std::set<std::string> section_ids_;

  mutable std::mutex state_mu_;  // runtime + trace
  std::unique_ptr<rt::Interlocking> interlocking_;
  std::vector<TraceBatch> trace_;
  std::uint64_t processed_upto_ = 0;  // highest processed ticket
  mutable std::condition_variable trace_cv_;

  std::mutex queue_mu_;
  std::condition_variable queue_cv_;
  struct Pending {
    std::uint64_t ticket;
    rt::Event event;
  };
  std::vector<Pending> queue_;
  std::uint64_t next_ticket_ = 1;
  bool stopping_ = false;

  mutable std::mutex conn_mu_;
  std::vector<std::shared_ptr<Connection>> connections_;
  std::map<std::string, std::shared_ptr<Connection>> element_owner_;

  std::thread accept_thread_;
  std::thread worker_thread_;
};

// Test double for a remote object controller. `nominal` echoes every
// MovePoint with a matching PointFeedback, `mute` never answers, `inverted`
// answers with the opposite position.
class SimulatedOc {
 public:
  enum class Behavior { nominal, mute, inverted };

  SimulatedOc(const std::string& host, std::uint16_t port, std::vector<std::string> elements,
              Behavior behavior);
  ~SimulatedOc();
  SimulatedOc(const SimulatedOc&) = delete;
  SimulatedOc& operator=(const SimulatedOc&) = delete;

  // True once register_ack arrived; false after an error or timeout.
  bool wait_registered(std::chrono::milliseconds timeout);
  std::optional<std::string> last_error_code() const;

 private:
  void reader_loop();
  void send(const std::string& type, nlohmann::json payload);

  int fd_ = -1;
  Behavior behavior_;
  std::set<std::string> elements_;
  std::uint64_t out_seq_ = 0;
  std::mutex mu_;
  std::condition_variable cv_;
  bool ack_ = false;
  bool failed_ = false;
  std::optional<std::string> error_code_;
  std::thread reader_;
};

struct BusRunOptions {
  std::chrono::milliseconds step_timeout{2000};
  bool reset_between{true};
};

// Runs the scenarios sequentially against the server's shared runtime.
// Scripted PointFeedback injections are skipped; the environment (registered
// OCs or the internal loopback) supplies them, and the following expectation
// is awaited on the trace with a timeout.
std::vector<harness::Verdict> run_over_bus(Server& server,
                                           const std::vector<harness::Scenario>& scenarios,
                                           const BusRunOptions& options = {});

}  // namespace stw::bus
