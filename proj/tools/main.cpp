#include <condition_variable>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include "CLI11.hpp"
#include "stw/bus.hpp"
#include "stw/conflict.hpp"
#include "stw/harness.hpp"
#include "stw/ill.hpp"
#include "stw/ppxml.hpp"
#include "stw/routes.hpp"
#include "stw/version.hpp"

namespace {

// sysexits-style process results; 0/1/2 carry subcommand meaning.
constexpr int kExitOk = 0;
constexpr int kExitFindings = 1;
constexpr int kExitNoScenarios = 2;
constexpr int kExitUsage = 64;
constexpr int kExitDataError = 65;
constexpr int kExitIoError = 66;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + " for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read error on " + path);
  return buf.str();
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << data;
  if (!out) throw IoError("write error on " + path);
}

// Parses and validates; error-severity findings gate every consumer.
stw::PlanningModel load_validated(const std::string& path) {
  auto result = stw::ppxml::parse_ppxml(read_file(path));
  if (!result.report.findings.empty())
    std::cerr << stw::ppxml::report_json(result.report).dump(2) << "\n";
  if (result.report.has_errors() || !result.model)
    throw CLI::RuntimeError("validation failed for " + path, kExitFindings);
  return *std::move(result.model);
}

stw::ill::Program load_program(const std::string& path) {
  std::string text = read_file(path);
  try {
    return stw::ill::parse_ill(text);
  } catch (const stw::ill::ParseError& e) {
    throw CLI::RuntimeError(path + ": " + e.what(), kExitDataError);
  }
}

std::pair<std::string, std::uint16_t> split_bind(const std::string& bind) {
  std::size_t colon = bind.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == bind.size())
    throw CLI::RuntimeError("--bind must be <addr:port>", kExitUsage);
  int port = 0;
  try {
    port = std::stoi(bind.substr(colon + 1));
  } catch (...) {
    port = -1;
  }
  if (port < 0 || port > 65535)
    throw CLI::RuntimeError("invalid port in --bind " + bind, kExitUsage);
  return {bind.substr(0, colon), static_cast<std::uint16_t>(port)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(stw::kToolName) +
               " - CCS plan toolchain: validate, enumerate routes, generate and "
               "exercise interlocking logic"};
  app.set_version_flag("--version", std::string(stw::kToolVersion));
  app.require_subcommand(1);

  std::string input, out_path, program_path, report_dir, bind = "127.0.0.1:9500";
  unsigned parallel = 1;

  auto* validate = app.add_subcommand("validate", "Validate a PPXML-S plan, print the report");
  validate->add_option("ppxml", input, "PPXML-S plan file")->required();

  auto* facts = app.add_subcommand("facts", "Emit the plan as fact clauses");
  facts->add_option("ppxml", input, "PPXML-S plan file")->required();

  auto* routes_cmd = app.add_subcommand("routes", "Enumerate the route superset as JSON");
  routes_cmd->add_option("ppxml", input, "PPXML-S plan file")->required();

  auto* conflicts_cmd =
      app.add_subcommand("conflicts", "Compute the route conflict matrix as JSON");
  conflicts_cmd->add_option("ppxml", input, "PPXML-S plan file")->required();

  auto* generate = app.add_subcommand("generate", "Generate the interlocking program (ILL)");
  generate->add_option("ppxml", input, "PPXML-S plan file")->required();
  generate->add_option("--out", out_path, "output ILL file")->required();

  auto* test = app.add_subcommand("test", "Run the per-route scenario suite");
  test->add_option("--program", program_path, "ILL program file")->required();
  test->add_option("--report", report_dir, "report output directory")->required();
  test->add_option("--parallel", parallel, "scenario parallelism")->check(CLI::PositiveNumber);

  auto* serve = app.add_subcommand("serve", "Serve the program on the lab bus");
  serve->add_option("--program", program_path, "ILL program file")->required();
  serve->add_option("--bind", bind, "listen address <addr:port>");

  try {
    app.parse(argc, argv);

    if (*validate) {
      auto result = stw::ppxml::parse_ppxml(read_file(input));
      std::cout << stw::ppxml::report_json(result.report).dump(2) << "\n";
      return result.report.has_errors() ? kExitFindings : kExitOk;
    }

    if (*facts) {
      std::cout << stw::emit_facts(load_validated(input));
      return kExitOk;
    }

    if (*routes_cmd) {
      auto model = load_validated(input);
      auto rs = stw::routes::enumerate_routes(model, stw::build_graph(model));
      std::cout << stw::routes::routeset_json(rs).dump(2) << "\n";
      return kExitOk;
    }

    if (*conflicts_cmd) {
      auto model = load_validated(input);
      auto rs = stw::routes::enumerate_routes(model, stw::build_graph(model));
      std::cout << stw::conflict::matrix_json(stw::conflict::conflict_matrix(rs)).dump(2)
                << "\n";
      return kExitOk;
    }

    if (*generate) {
      auto model = load_validated(input);
      auto rs = stw::routes::enumerate_routes(model, stw::build_graph(model));
      auto cm = stw::conflict::conflict_matrix(rs);
      write_file(out_path, stw::ill::generate_ill(rs, cm, model));
      return kExitOk;
    }

    if (*test) {
      auto program = load_program(program_path);
      auto scenarios = stw::harness::generate_scenarios(program);
      auto report = stw::harness::run_all(scenarios, program, parallel);
      stw::harness::write_report_dir(report, report_dir);
      std::cout << stw::harness::report_text(report);
      return stw::harness::exit_code(report);
    }

    if (*serve) {
      auto program = load_program(program_path);
      auto [host, port] = split_bind(bind);
      stw::bus::Server server(program, {host, port});
      std::cerr << "listening on " << server.host() << ":" << server.port() << "\n";
      std::mutex mu;
      std::condition_variable cv;
      std::unique_lock lock(mu);
      cv.wait(lock, [] { return false; });  // run until the process is killed
      return kExitOk;
    }
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    std::cout << stw::kToolVersion << "\n";
    return kExitOk;
  } catch (const CLI::RuntimeError& e) {
    std::cerr << e.what() << "\n";
    return e.get_exit_code();
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << e.what() << "\n";
    return kExitIoError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 70;
  }
  return kExitUsage;
}
