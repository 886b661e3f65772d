#include "support/fixtures.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace stw::testsupport {

std::string fixture_path(const std::string& name) {
  return std::string(STW_FIXTURE_DIR) + "/" + name;
}

std::string read_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name), std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture " + name);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

stw::PlanningModel load_fixture(const std::string& name) {
  auto result = stw::ppxml::parse_ppxml(read_fixture(name));
  if (!result.model || !result.report.findings.empty())
    throw std::runtime_error("fixture " + name + " did not parse cleanly");
  return *result.model;
}

}  // namespace stw::testsupport
