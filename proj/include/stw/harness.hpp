#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "stw/runtime.hpp"

namespace stw::harness {

// One step of a scenario: inject an event, expect a specific command in the
// burst the latest injection produced, or require the burst to contain no
// command of a given type.
struct Step {
  enum class Kind { inject, expect_command, expect_no_command_of_type };
  Kind kind = Kind::inject;
  rt::Event event;        // inject
  rt::Command expected;   // expect_command
  rt::Command::Kind none_of = rt::Command::Kind::route_released;
  std::string label;
};

// One test case per route: request, probe every conflicting route for
// rejection, confirm points, sweep a one-section train over the path,
// expect release, then show a previously rejected route is accepted.
struct Scenario {
  std::string id;  // = route id
  std::vector<Step> steps;
};

std::vector<Scenario> generate_scenarios(const ill::Program& program);
std::vector<Scenario> generate_scenarios(const routes::RouteSet& rs,
                                         const conflict::ConflictMatrix& cm);

struct TraceEntry {
  std::uint64_t seq = 0;
  bool in = false;  // direction: true = injected event, false = emitted command
  nlohmann::json message;
};

struct Verdict {
  std::string scenario;
  bool passed = false;
  std::optional<std::size_t> first_failed_step;
  std::string detail;  // failure description, empty when passed
  std::vector<TraceEntry> trace;
};

// Fresh interpreter per scenario; expectation failures become verdicts,
// never aborts. Remaining steps after the first failure are skipped.
Verdict run_scenario(const Scenario& scenario, const ill::Program& program);

struct Report {
  std::size_t total = 0;
  std::size_t passed = 0;
  std::size_t failed = 0;
  std::int64_t duration_ms = 0;
  std::vector<Verdict> verdicts;  // scenario-id order, independent of parallelism
};

Report run_all(const std::vector<Scenario>& scenarios, const ill::Program& program,
               unsigned parallelism);

// 0 all passed, 1 any failure, 2 no scenarios.
int exit_code(const Report& report);

nlohmann::json report_json(const Report& report);
std::string report_text(const Report& report);
std::string trace_ndjson(const std::vector<TraceEntry>& trace);

// Writes report.json, report.txt and one scenario-NNN.ndjson trace per
// scenario into `dir` (created if missing).
void write_report_dir(const Report& report, const std::filesystem::path& dir);

}  // namespace stw::harness
