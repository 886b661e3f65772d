#pragma once

#include <string>

#include "stw/ppxml.hpp"

namespace stw::testsupport {

std::string fixture_path(const std::string& name);
std::string read_fixture(const std::string& name);

// Parses the fixture and requires a clean report.
stw::PlanningModel load_fixture(const std::string& name);

}  // namespace stw::testsupport
