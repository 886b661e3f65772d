#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <random>

#include "doctest.h"
#include "stw/bus.hpp"
#include "support/fixtures.hpp"

using namespace stw;
using namespace std::chrono_literals;

namespace {

ill::Program program_for(const std::string& fixture) {
  auto model = testsupport::load_fixture(fixture);
  auto rs = routes::enumerate_routes(model, build_graph(model));
  return ill::build_program(rs, conflict::conflict_matrix(rs), model.project_name);
}

// Minimal raw client for protocol-level tests.
struct RawClient {
  int fd = -1;

  explicit RawClient(std::uint16_t port) {
    fd = ::socket(AF_INET, SOCK_STREAM, 0);
    REQUIRE(fd >= 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
    REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0);
  }

  ~RawClient() {
    if (fd >= 0) ::close(fd);
  }

  void send_raw(const std::string& data) {
    REQUIRE(::send(fd, data.data(), data.size(), MSG_NOSIGNAL) ==
            static_cast<ssize_t>(data.size()));
  }

  void send_msg(std::uint64_t seq, const std::string& type, nlohmann::json payload) {
    nlohmann::json msg = {
        {"v", bus::kProtocolVersion}, {"seq", seq}, {"type", type}, {"payload", payload}};
    send_raw(msg.dump() + "\n");
  }

  // Reads lines until EOF or timeout; returns parsed messages.
  std::vector<nlohmann::json> read_until_close(int timeout_ms = 2000) {
    std::vector<nlohmann::json> out;
    std::string buffer;
    char chunk[4096];
    for (;;) {
      pollfd p{fd, POLLIN, 0};
      int r = ::poll(&p, 1, timeout_ms);
      if (r <= 0) break;
      ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
      if (n <= 0) break;
      buffer.append(chunk, static_cast<std::size_t>(n));
    }
    std::size_t start = 0;
    for (;;) {
      std::size_t eol = buffer.find('\n', start);
      if (eol == std::string::npos) break;
      auto j = nlohmann::json::parse(buffer.substr(start, eol - start), nullptr, false);
      if (!j.is_discarded()) out.push_back(std::move(j));
      start = eol + 1;
    }
    return out;
  }

  // Reads one line (blocking up to timeout).
  std::optional<nlohmann::json> read_line(int timeout_ms = 2000) {
    std::string buffer;
    char c;
    auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    for (;;) {
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                      deadline - std::chrono::steady_clock::now())
                      .count();
      if (left <= 0) return std::nullopt;
      pollfd p{fd, POLLIN, 0};
      if (::poll(&p, 1, static_cast<int>(left)) <= 0) return std::nullopt;
      ssize_t n = ::recv(fd, &c, 1, 0);
      if (n <= 0) return std::nullopt;
      if (c == '\n') {
        auto j = nlohmann::json::parse(buffer, nullptr, false);
        if (j.is_discarded()) return std::nullopt;
        return j;
      }
      buffer += c;
    }
  }
};

bool verdicts_equal(const std::vector<harness::Verdict>& a,
                    const std::vector<harness::Verdict>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].scenario != b[i].scenario || a[i].passed != b[i].passed ||
        a[i].first_failed_step != b[i].first_failed_step)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("loopback-only bus run matches the in-process verdicts") {
  auto program = program_for("loop.ppxml");
  auto scenarios = harness::generate_scenarios(program);
  auto in_process = harness::run_all(scenarios, program, 1);

  bus::Server server(program);
  auto over_bus = bus::run_over_bus(server, scenarios);
  CHECK(verdicts_equal(in_process.verdicts, over_bus));
  for (const auto& v : over_bus) CHECK(v.passed);
}

TEST_CASE("nominal object controllers over loopback TCP: transparent") {
  auto program = program_for("loop.ppxml");
  auto scenarios = harness::generate_scenarios(program);
  auto in_process = harness::run_all(scenarios, program, 1);

  bus::Server server(program);
  bus::SimulatedOc oc(server.host(), server.port(), {"PA", "PB"},
                      bus::SimulatedOc::Behavior::nominal);
  REQUIRE(oc.wait_registered(2000ms));
  CHECK(server.registered_elements() == std::set<std::string>{"PA", "PB"});

  auto over_bus = bus::run_over_bus(server, scenarios);
  CHECK(verdicts_equal(in_process.verdicts, over_bus));
}

TEST_CASE("inverted object controller: POINT_MISMATCH and failing verdict") {
  auto program = program_for("fork.ppxml");
  auto scenarios = harness::generate_scenarios(program);

  bus::Server server(program);
  bus::SimulatedOc oc(server.host(), server.port(), {"P1"},
                      bus::SimulatedOc::Behavior::inverted);
  REQUIRE(oc.wait_registered(2000ms));

  bus::BusRunOptions options;
  options.step_timeout = 500ms;
  auto verdicts = bus::run_over_bus(server, {scenarios[0]}, options);
  REQUIRE(verdicts.size() == 1);
  CHECK_FALSE(verdicts[0].passed);
  bool saw_failed = false;
  for (const auto& t : verdicts[0].trace)
    if (!t.in && t.message.value("type", "") == "RouteFailed" &&
        t.message.value("reason", "") == "POINT_MISMATCH")
      saw_failed = true;
  CHECK(saw_failed);
}

TEST_CASE("mute object controller: scenario fails at the CLEAR expectation") {
  auto program = program_for("fork.ppxml");
  auto scenarios = harness::generate_scenarios(program);

  bus::Server server(program);
  bus::SimulatedOc oc(server.host(), server.port(), {"P1"}, bus::SimulatedOc::Behavior::mute);
  REQUIRE(oc.wait_registered(2000ms));

  bus::BusRunOptions options;
  options.step_timeout = 300ms;
  auto verdicts = bus::run_over_bus(server, {scenarios[0]}, options);
  REQUIRE(verdicts.size() == 1);
  CHECK_FALSE(verdicts[0].passed);
  REQUIRE(verdicts[0].first_failed_step.has_value());
  const auto& failed = scenarios[0].steps[*verdicts[0].first_failed_step];
  CHECK(failed.kind == harness::Step::Kind::expect_command);
  CHECK(failed.expected.kind == rt::Command::Kind::signal_aspect);
  CHECK(failed.expected.aspect == rt::Command::Aspect::clear);
}

TEST_CASE("registering an unknown element is refused") {
  bus::Server server(program_for("fork.ppxml"));
  bus::SimulatedOc oc(server.host(), server.port(), {"PX"}, bus::SimulatedOc::Behavior::nominal);
  CHECK_FALSE(oc.wait_registered(2000ms));
  CHECK(oc.last_error_code() == std::string("UNKNOWN_ELEMENT"));
  CHECK(server.registered_elements().empty());
}

TEST_CASE("duplicate registration is refused") {
  bus::Server server(program_for("fork.ppxml"));
  bus::SimulatedOc first(server.host(), server.port(), {"P1"},
                         bus::SimulatedOc::Behavior::nominal);
  REQUIRE(first.wait_registered(2000ms));
  bus::SimulatedOc second(server.host(), server.port(), {"P1"},
                          bus::SimulatedOc::Behavior::nominal);
  CHECK_FALSE(second.wait_registered(2000ms));
  CHECK(second.last_error_code() == std::string("DUPLICATE_REGISTRATION"));
}

TEST_CASE("malformed line: one error, then close") {
  bus::Server server(program_for("line.ppxml"));
  RawClient client(server.port());
  client.send_raw("not json\n");
  auto msgs = client.read_until_close();
  REQUIRE(msgs.size() == 1);
  CHECK(msgs[0]["type"] == "error");
  CHECK(msgs[0]["payload"]["code"] == "BAD_MESSAGE");
}

TEST_CASE("sequence gaps close the connection") {
  bus::Server server(program_for("line.ppxml"));
  RawClient client(server.port());
  client.send_msg(1, "ping", {});
  auto pong = client.read_line();
  REQUIRE(pong.has_value());
  CHECK((*pong)["type"] == "pong");
  client.send_msg(3, "ping", {});  // gap
  auto msgs = client.read_until_close();
  REQUIRE(msgs.size() == 1);
  CHECK(msgs[0]["type"] == "error");
  CHECK(msgs[0]["payload"]["code"] == "BAD_SEQ");
}

TEST_CASE("unknown message types close the connection") {
  bus::Server server(program_for("line.ppxml"));
  RawClient client(server.port());
  client.send_msg(1, "teleport", {});
  auto msgs = client.read_until_close();
  REQUIRE(msgs.size() == 1);
  CHECK(msgs[0]["payload"]["code"] == "UNKNOWN_TYPE");
}

TEST_CASE("client events drive the runtime; unknown ids get UNKNOWN_ID") {
  bus::Server server(program_for("line.ppxml"));
  RawClient client(server.port());
  // Register the start signal so its aspect commands are routed here.
  client.send_msg(1, "register", {{"elements", {"S1"}}});
  auto ack = client.read_line();
  REQUIRE(ack.has_value());
  CHECK((*ack)["type"] == "register_ack");

  client.send_msg(2, "event", rt::to_json(rt::Event::request_route("S1->E2[T1:+]")));
  auto first = client.read_line();
  REQUIRE(first.has_value());
  CHECK((*first)["type"] == "command");
  CHECK((*first)["payload"]["type"] == "RouteAccepted");  // broadcast notification
  auto second = client.read_line();
  REQUIRE(second.has_value());
  CHECK((*second)["payload"]["type"] == "SignalAspect");  // routed to the registrant
  CHECK((*second)["payload"]["signal"] == "S1");
  CHECK((*second)["payload"]["aspect"] == "CLEAR");

  client.send_msg(3, "event", rt::to_json(rt::Event::request_route("bogus")));
  auto err = client.read_line();
  REQUIRE(err.has_value());
  CHECK((*err)["type"] == "error");
  CHECK((*err)["payload"]["code"] == "UNKNOWN_ID");

  // The connection survives semantic errors.
  client.send_msg(4, "ping", {{"n", 1}});
  auto pong = client.read_line();
  REQUIRE(pong.has_value());
  CHECK((*pong)["type"] == "pong");
  CHECK((*pong)["payload"]["n"] == 1);
}

TEST_CASE("server seq numbering is gap-free per connection") {
  bus::Server server(program_for("line.ppxml"));
  RawClient client(server.port());
  client.send_msg(1, "ping", {});
  client.send_msg(2, "ping", {});
  auto a = client.read_line();
  auto b = client.read_line();
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  CHECK((*a)["seq"] == 1);
  CHECK((*b)["seq"] == 2);
}

TEST_CASE("fuzzed byte streams never crash the server") {
  auto program = program_for("line.ppxml");
  bus::Server server(program);
  std::mt19937_64 rng(77);
  for (int i = 0; i < 30; ++i) {
    RawClient client(server.port());
    std::string blob;
    std::size_t len = 1 + rng() % 200;
    for (std::size_t k = 0; k < len; ++k) blob += static_cast<char>(rng() % 256);
    blob += '\n';
    client.send_raw(blob);
    auto msgs = client.read_until_close(200);
    std::size_t errors = 0;
    for (const auto& m : msgs)
      if (m.value("type", "") == "error") ++errors;
    CHECK(errors <= 1);
  }
  // The server still accepts healthy clients afterwards.
  RawClient client(server.port());
  client.send_msg(1, "ping", {});
  CHECK(client.read_line().has_value());
}
