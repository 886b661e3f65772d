#include "stw/harness.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <thread>

namespace stw::harness {

namespace {

Step inject(rt::Event e) {
  Step s;
  s.kind = Step::Kind::inject;
  s.label = "inject " + rt::to_json(e).dump();
  s.event = std::move(e);
  return s;
}

Step expect(rt::Command c) {
  Step s;
  s.kind = Step::Kind::expect_command;
  s.label = "expect " + rt::to_json(c).dump();
  s.expected = std::move(c);
  return s;
}

Step expect_none(rt::Command::Kind kind, std::string what) {
  Step s;
  s.kind = Step::Kind::expect_no_command_of_type;
  s.none_of = kind;
  s.label = "expect no " + std::move(what);
  return s;
}

}  // namespace

std::vector<Scenario> generate_scenarios(const ill::Program& program) {
  std::vector<Scenario> out;
  for (const auto& r : program.routes) {
    Scenario sc;
    sc.id = r.id;

    sc.steps.push_back(inject(rt::Event::request_route(r.id)));
    sc.steps.push_back(expect(rt::Command::route_accepted(r.id)));
    if (r.points.empty())
      sc.steps.push_back(expect(rt::Command::signal_aspect(r.start, rt::Command::Aspect::clear)));

    for (const auto& c : r.conflicts) {
      sc.steps.push_back(inject(rt::Event::request_route(c)));
      sc.steps.push_back(expect(rt::Command::route_rejected_conflict(c, r.id)));
    }

    for (const auto& p : r.points)
      sc.steps.push_back(inject(rt::Event::point_feedback(p.point, p.position)));
    if (!r.points.empty())
      sc.steps.push_back(expect(rt::Command::signal_aspect(r.start, rt::Command::Aspect::clear)));

    for (std::size_t i = 0; i < r.sections.size(); ++i) {
      sc.steps.push_back(inject(rt::Event::section_occupied(r.sections[i])));
      if (i == 0)
        sc.steps.push_back(expect(rt::Command::signal_aspect(r.start, rt::Command::Aspect::stop)));
      if (i >= 1) {
        sc.steps.push_back(inject(rt::Event::section_clear(r.sections[i - 1])));
        sc.steps.push_back(expect_none(rt::Command::Kind::route_released, "RouteReleased"));
      }
    }
    sc.steps.push_back(inject(rt::Event::section_clear(r.sections.back())));
    sc.steps.push_back(expect(rt::Command::route_released(r.id)));

    if (!r.conflicts.empty()) {
      sc.steps.push_back(inject(rt::Event::request_route(r.conflicts.front())));
      sc.steps.push_back(expect(rt::Command::route_accepted(r.conflicts.front())));
    }
    out.push_back(std::move(sc));
  }
  return out;
}

std::vector<Scenario> generate_scenarios(const routes::RouteSet& rs,
                                         const conflict::ConflictMatrix& cm) {
  return generate_scenarios(ill::build_program(rs, cm, ""));
}

Verdict run_scenario(const Scenario& scenario, const ill::Program& program) {
  rt::Interlocking il(program);
  Verdict v;
  v.scenario = scenario.id;
  v.passed = true;

  std::uint64_t seq = 1;
  std::vector<rt::Command> burst;
  std::size_t burst_pos = 0;

  for (std::size_t i = 0; i < scenario.steps.size(); ++i) {
    const Step& step = scenario.steps[i];
    if (step.kind == Step::Kind::inject) {
      v.trace.push_back({seq++, true, rt::to_json(step.event)});
      try {
        burst = il.handle(step.event);
      } catch (const rt::UnknownIdError& e) {
        v.passed = false;
        v.first_failed_step = i;
        v.detail = e.what();
        break;
      }
      burst_pos = 0;
      for (const auto& c : burst) v.trace.push_back({seq++, false, rt::to_json(c)});
    } else if (step.kind == Step::Kind::expect_command) {
      bool found = false;
      for (std::size_t k = burst_pos; k < burst.size(); ++k) {
        if (burst[k] == step.expected) {
          burst_pos = k + 1;
          found = true;
          break;
        }
      }
      if (!found) {
        v.passed = false;
        v.first_failed_step = i;
        v.detail = step.label + " was not satisfied";
        break;
      }
    } else {
      bool violated = false;
      for (const auto& c : burst)
        if (c.kind == step.none_of) violated = true;
      if (violated) {
        v.passed = false;
        v.first_failed_step = i;
        v.detail = step.label + " was violated";
        break;
      }
    }
  }
  return v;
}

Report run_all(const std::vector<Scenario>& scenarios, const ill::Program& program,
               unsigned parallelism) {
  auto begin = std::chrono::steady_clock::now();
  Report report;
  report.total = scenarios.size();
  report.verdicts.resize(scenarios.size());

  if (parallelism == 0) parallelism = 1;
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= scenarios.size()) return;
      report.verdicts[i] = run_scenario(scenarios[i], program);
    }
  };
  if (parallelism == 1 || scenarios.size() <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < parallelism; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  for (const auto& v : report.verdicts) (v.passed ? report.passed : report.failed)++;
  report.duration_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - begin)
                           .count();
  return report;
}

int exit_code(const Report& report) {
  if (report.total == 0) return 2;
  return report.failed == 0 ? 0 : 1;
}

nlohmann::json report_json(const Report& report) {
  nlohmann::json results = nlohmann::json::array();
  for (std::size_t i = 0; i < report.verdicts.size(); ++i) {
    const auto& v = report.verdicts[i];
    char name[32];
    std::snprintf(name, sizeof(name), "scenario-%03zu.ndjson", i + 1);
    results.push_back({{"scenario", v.scenario},
                       {"passed", v.passed},
                       {"first_failed_step", v.first_failed_step
                                                 ? nlohmann::json(*v.first_failed_step)
                                                 : nlohmann::json(nullptr)},
                       {"detail", v.detail},
                       {"trace_file", name}});
  }
  nlohmann::json j = {{"total", report.total},
                      {"passed", report.passed},
                      {"failed", report.failed},
                      {"duration_ms", report.duration_ms},
                      {"results", results}};
  if (report.total == 0) j["note"] = "no routes";
  return j;
}

std::string report_text(const Report& report) {
  std::string out;
  for (const auto& v : report.verdicts) {
    if (v.passed) {
      out += "PASS " + v.scenario + "\n";
    } else {
      out += "FAIL " + v.scenario + " at step " +
             (v.first_failed_step ? std::to_string(*v.first_failed_step) : "?") + ": " +
             v.detail + "\n";
    }
  }
  out += std::to_string(report.total) + " scenarios: " + std::to_string(report.passed) +
         " passed, " + std::to_string(report.failed) + " failed";
  if (report.total == 0) out += " (no routes)";
  out += "\n";
  return out;
}

std::string trace_ndjson(const std::vector<TraceEntry>& trace) {
  std::string out;
  for (const auto& t : trace) {
    nlohmann::json line = {{"seq", t.seq}, {"dir", t.in ? "in" : "out"}, {"message", t.message}};
    out += line.dump() + "\n";
  }
  return out;
}

void write_report_dir(const Report& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "report.json", std::ios::binary);
    f << report_json(report).dump(2) << "\n";
  }
  {
    std::ofstream f(dir / "report.txt", std::ios::binary);
    f << report_text(report);
  }
  for (std::size_t i = 0; i < report.verdicts.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "scenario-%03zu.ndjson", i + 1);
    std::ofstream f(dir / name, std::ios::binary);
    f << trace_ndjson(report.verdicts[i].trace);
  }
}

}  // namespace stw::harness
