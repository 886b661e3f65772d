#include "support/mutate.hpp"

#include <algorithm>

namespace stw::testsupport {

stw::ill::Program mutate(const stw::ill::Program& program, ProgramMutation mutation) {
  stw::ill::Program out = program;
  for (auto& r : out.routes) {
    switch (mutation) {
      case ProgramMutation::drop_conflicts:
        r.conflicts.clear();
        break;
      case ProgramMutation::drop_points:
        r.points.clear();
        break;
      case ProgramMutation::reverse_sections:
        std::reverse(r.sections.begin(), r.sections.end());
        break;
    }
  }
  return out;
}

}  // namespace stw::testsupport
