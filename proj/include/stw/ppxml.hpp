#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "stw/model.hpp"

namespace stw::ppxml {

enum class Severity { error, warning };

// Rule catalog:
//   S001 document is not well-formed XML
//   S002 unknown element, attribute, or value outside the attribute's lexical space
//   S003 missing required attribute or element
//   R001 a point node has exactly the legs {tip, left, right}
//   R002 an end node has exactly one incident leg, which is tip
//   R003 lengths and offsets carry exactly 3 fractional digits; edge lengths positive
//   R004 ids unique across the document (compared lowercased)
//   R005 signal offset lies within its edge's length
//   R006 every edge is covered by a train detection section (warning; implicit
//        one-edge section synthesized)
//   R007 references resolve, legs match the node kind, no edge in two sections
struct Finding {
  std::string rule_id;
  Severity severity = Severity::error;
  std::string subject_id;  // element id, possibly empty
  std::string message;
  int line = 0;
  int column = 0;
};

struct ValidationReport {
  std::vector<Finding> findings;
  bool schema_valid = true;
  bool rules_passed = true;

  bool has_errors() const;
};

struct ParseResult {
  std::optional<PlanningModel> model;  // absent unless schema_valid
  ValidationReport report;
};

// Accepts any byte sequence; all problems become findings, never aborts.
ParseResult parse_ppxml(std::string_view document);

// Structural rules (R001, R002, R004, R005, R006, R007) over a schema-valid
// model. R003 is lexical and reported by parse_ppxml, which sees the source.
std::vector<Finding> validate_rules(const PlanningModel& model);

// Appends an implicit one-edge section for every uncovered edge. Idempotent.
void synthesize_sections(PlanningModel& model);

// Canonical form: documented attribute order, 2-space indent, LF, UTF-8,
// 3-decimal numbers, implicit sections omitted.
std::string serialize_ppxml(const PlanningModel& model);

nlohmann::json report_json(const ValidationReport& report);

const char* to_string(Severity s);

}  // namespace stw::ppxml
