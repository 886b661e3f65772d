#include "stw/ppxml.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <set>

namespace stw::ppxml {

namespace {

// ---------------------------------------------------------------------------
// Minimal XML reader for the PPXML-S subset: elements, attributes, comments,
// an optional prolog. No namespaces, no CDATA, no DTDs.

struct RawAttr {
  std::string name;
  std::string value;
  int line = 0, col = 0;
};

struct RawElem {
  std::string name;
  std::vector<RawAttr> attrs;
  std::vector<RawElem> children;
  int line = 0, col = 0;

  const RawAttr* attr(std::string_view n) const {
    for (const auto& a : attrs)
      if (a.name == n) return &a;
    return nullptr;
  }
};

struct WellFormedError {
  std::string message;
  int line = 0, col = 0;
};

class XmlReader {
 public:
  explicit XmlReader(std::string_view text) : text_(text) {}

  // Single root element, or a well-formedness error.
  RawElem parse() {
    skip_bom();
    skip_misc();
    if (eof()) fail("document contains no element");
    RawElem root = parse_element();
    skip_misc();
    if (!eof()) fail("content after the root element");
    return root;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;

  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  bool starts_with(std::string_view s) const { return text_.substr(pos_, s.size()) == s; }

  char take() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw WellFormedError{msg, line_, col_};
  }

  void skip_bom() {
    if (starts_with("\xEF\xBB\xBF")) pos_ += 3;
  }

  static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

  void skip_ws() {
    while (!eof() && is_space(peek())) take();
  }

  // Whitespace, comments, prolog / processing instructions.
  void skip_misc() {
    for (;;) {
      skip_ws();
      if (starts_with("<!--")) {
        skip_comment();
      } else if (starts_with("<?")) {
        skip_pi();
      } else {
        return;
      }
    }
  }

  void skip_comment() {
    take();
    take();
    take();
    take();  // "<!--"
    while (!starts_with("-->")) {
      if (eof()) fail("unterminated comment");
      take();
    }
    take();
    take();
    take();
  }

  void skip_pi() {
    take();
    take();  // "<?"
    while (!starts_with("?>")) {
      if (eof()) fail("unterminated processing instruction");
      take();
    }
    take();
    take();
  }

  static bool is_name_start(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_' || c == ':';
  }
  static bool is_name_char(char c) {
    return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
  }

  std::string parse_name() {
    if (eof() || !is_name_start(peek())) fail("expected a name");
    std::string name;
    while (!eof() && is_name_char(peek())) name += take();
    return name;
  }

  void append_codepoint(std::string& out, unsigned long cp) {
    if (cp <= 0x7f) {
      out += static_cast<char>(cp);
    } else if (cp <= 0x7ff) {
      out += static_cast<char>(0xc0 | (cp >> 6));
      out += static_cast<char>(0x80 | (cp & 0x3f));
    } else if (cp <= 0xffff) {
      out += static_cast<char>(0xe0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
      out += static_cast<char>(0x80 | (cp & 0x3f));
    } else if (cp <= 0x10ffff) {
      out += static_cast<char>(0xf0 | (cp >> 18));
      out += static_cast<char>(0x80 | ((cp >> 12) & 0x3f));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
      out += static_cast<char>(0x80 | (cp & 0x3f));
    } else {
      fail("character reference out of range");
    }
  }

  std::string parse_reference() {
    take();  // '&'
    std::string ent;
    while (!eof() && peek() != ';') {
      ent += take();
      if (ent.size() > 8) fail("malformed entity reference");
    }
    if (eof()) fail("unterminated entity reference");
    take();  // ';'
    if (ent == "amp") return "&";
    if (ent == "lt") return "<";
    if (ent == "gt") return ">";
    if (ent == "quot") return "\"";
    if (ent == "apos") return "'";
    if (!ent.empty() && ent[0] == '#') {
      std::string out;
      unsigned long cp = 0;
      try {
        cp = (ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X'))
                 ? std::stoul(ent.substr(2), nullptr, 16)
                 : std::stoul(ent.substr(1), nullptr, 10);
      } catch (...) {
        fail("malformed character reference");
      }
      append_codepoint(out, cp);
      return out;
    }
    fail("unknown entity &" + ent + ";");
  }

  std::string parse_attr_value() {
    if (eof() || (peek() != '"' && peek() != '\'')) fail("expected a quoted attribute value");
    char quote = take();
    std::string value;
    for (;;) {
      if (eof()) fail("unterminated attribute value");
      char c = peek();
      if (c == quote) {
        take();
        return value;
      }
      if (c == '<') fail("'<' in attribute value");
      if (c == '&') {
        value += parse_reference();
      } else {
        value += take();
      }
    }
  }

  RawElem parse_element() {
    RawElem el;
    el.line = line_;
    el.col = col_;
    if (eof() || peek() != '<') fail("expected '<'");
    take();
    el.name = parse_name();
    for (;;) {
      bool had_ws = !eof() && is_space(peek());
      skip_ws();
      if (eof()) fail("unterminated start tag of <" + el.name + ">");
      if (peek() == '>') {
        take();
        parse_children(el);
        return el;
      }
      if (starts_with("/>")) {
        take();
        take();
        return el;
      }
      if (!had_ws) fail("expected whitespace before attribute in <" + el.name + ">");
      RawAttr a;
      a.line = line_;
      a.col = col_;
      a.name = parse_name();
      skip_ws();
      if (eof() || peek() != '=') fail("expected '=' after attribute " + a.name);
      take();
      skip_ws();
      a.value = parse_attr_value();
      if (el.attr(a.name)) fail("duplicate attribute " + a.name + " in <" + el.name + ">");
      el.attrs.push_back(std::move(a));
    }
  }

  void parse_children(RawElem& el) {
    for (;;) {
      if (eof()) fail("missing end tag </" + el.name + ">");
      if (starts_with("</")) {
        take();
        take();
        std::string close = parse_name();
        skip_ws();
        if (eof() || peek() != '>') fail("malformed end tag </" + close + ">");
        take();
        if (close != el.name)
          fail("end tag </" + close + "> does not match <" + el.name + ">");
        return;
      }
      if (starts_with("<!--")) {
        skip_comment();
      } else if (starts_with("<?")) {
        skip_pi();
      } else if (peek() == '<') {
        el.children.push_back(parse_element());
      } else {
        char c = peek();
        if (!is_space(c)) fail("text content is not allowed");
        take();
      }
    }
  }
};

// ---------------------------------------------------------------------------
// Schema walk: raw tree -> typed model + findings.

class SchemaWalk {
 public:
  SchemaWalk(std::vector<Finding>& findings) : findings_(findings) {}

  PlanningModel walk(const RawElem& root) {
    PlanningModel m;
    if (root.name != "PlanPro") {
      err("S002", "", "unknown root element <" + root.name + ">, expected <PlanPro>", root);
      return m;
    }
    check_attrs(root, {"version"});
    if (const auto* v = require_attr(root, "version", "")) {
      if (v->value != "1.9.0.2-S")
        err("S002", "", "unsupported version \"" + v->value + "\", expected \"1.9.0.2-S\"", *v);
      m.format_version = v->value;
    }
    const RawElem* project = nullptr;
    const RawElem* topology = nullptr;
    const RawElem* signals = nullptr;
    const RawElem* detection = nullptr;
    for (const auto& child : root.children) {
      auto claim = [&](const RawElem*& slot) {
        if (slot)
          err("S002", "", "duplicate element <" + child.name + ">", child);
        else
          slot = &child;
      };
      if (child.name == "Project")
        claim(project);
      else if (child.name == "Topology")
        claim(topology);
      else if (child.name == "Signals")
        claim(signals);
      else if (child.name == "TrainDetection")
        claim(detection);
      else
        err("S002", "", "unknown element <" + child.name + ">", child);
    }
    if (!project)
      err("S003", "", "missing required element <Project>", root);
    else
      walk_project(*project, m);
    if (topology) walk_topology(*topology, m);
    if (signals) walk_signals(*signals, m);
    if (detection) walk_detection(*detection, m);
    return m;
  }

 private:
  std::vector<Finding>& findings_;

  template <typename Pos>
  void err(const char* rule, const std::string& subject, const std::string& msg, const Pos& at) {
    findings_.push_back({rule, Severity::error, subject, msg, at.line, at.col});
  }

  void check_no_children(const RawElem& el) {
    for (const auto& c : el.children)
      err("S002", "", "unknown element <" + c.name + "> inside <" + el.name + ">", c);
  }

  void check_attrs(const RawElem& el, std::initializer_list<std::string_view> allowed) {
    for (const auto& a : el.attrs) {
      if (std::find(allowed.begin(), allowed.end(), a.name) == allowed.end())
        err("S002", "", "unknown attribute " + a.name + " in <" + el.name + ">", a);
    }
  }

  const RawAttr* require_attr(const RawElem& el, std::string_view name,
                              const std::string& subject) {
    if (const auto* a = el.attr(name)) return a;
    err("S003", subject, "missing required attribute " + std::string(name) + " in <" +
                             el.name + ">", el);
    return nullptr;
  }

  static bool valid_id(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
      bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
                c == '_';
      if (!ok) return false;
    }
    return true;
  }

  // Returns the id value, or empty after reporting.
  std::string take_id(const RawElem& el, std::string_view attr_name) {
    const auto* a = require_attr(el, attr_name, "");
    if (!a) return {};
    if (!valid_id(a->value)) {
      err("S002", a->value,
          "attribute " + std::string(attr_name) + " value \"" + a->value +
              "\" is not a valid id ([A-Za-z0-9_]+)",
          *a);
      return {};
    }
    return a->value;
  }

  template <typename Enum, typename Parse>
  std::optional<Enum> take_enum(const RawElem& el, const std::string& subject,
                                std::string_view attr_name, Parse parse) {
    const auto* a = require_attr(el, attr_name, subject);
    if (!a) return std::nullopt;
    auto v = parse(a->value);
    if (!v)
      err("S002", subject,
          "attribute " + std::string(attr_name) + " has unknown value \"" + a->value + "\"", *a);
    return v;
  }

  // Lexical space [0-9]+(.[0-9]+)?; R003 when the fraction is not exactly
  // three digits. Returns fixed-point millimeters.
  std::optional<Millimeters> take_decimal(const RawElem& el, const std::string& subject,
                                          std::string_view attr_name) {
    const auto* a = require_attr(el, attr_name, subject);
    if (!a) return std::nullopt;
    const std::string& s = a->value;
    std::size_t dot = s.find('.');
    std::string int_part = dot == std::string::npos ? s : s.substr(0, dot);
    std::string frac_part = dot == std::string::npos ? "" : s.substr(dot + 1);
    auto all_digits = [](const std::string& d) {
      return !d.empty() && std::all_of(d.begin(), d.end(),
                                       [](char c) { return c >= '0' && c <= '9'; });
    };
    if (!all_digits(int_part) || (dot != std::string::npos && !all_digits(frac_part)) ||
        int_part.size() > 12 || frac_part.size() > 9) {
      err("S002", subject,
          "attribute " + std::string(attr_name) + " value \"" + s + "\" is not a decimal number",
          *a);
      return std::nullopt;
    }
    if (frac_part.size() != 3)
      findings_.push_back({"R003", Severity::error, subject,
                           "attribute " + std::string(attr_name) + " value \"" + s +
                               "\" must carry exactly 3 decimal places",
                           a->line, a->col});
    Millimeters mm = std::stoll(int_part) * 1000;
    std::string frac = frac_part.substr(0, 3);
    while (frac.size() < 3) frac += '0';
    mm += std::stoll("0" + frac);
    return mm;
  }

  void walk_project(const RawElem& el, PlanningModel& m) {
    check_attrs(el, {"id", "name"});
    check_no_children(el);
    m.project_id = take_id(el, "id");
    if (const auto* a = require_attr(el, "name", "")) m.project_name = a->value;
  }

  void walk_topology(const RawElem& el, PlanningModel& m) {
    check_attrs(el, {});
    for (const auto& c : el.children) {
      if (c.name == "Node") {
        check_attrs(c, {"id", "kind"});
        check_no_children(c);
        Node n;
        n.id = take_id(c, "id");
        auto kind = take_enum<NodeKind>(c, n.id, "kind", node_kind_from_string);
        if (n.id.empty() || !kind) continue;
        n.kind = *kind;
        m.nodes.push_back(std::move(n));
      } else if (c.name == "Edge") {
        check_attrs(c, {"id", "nodeA", "legA", "nodeB", "legB", "length"});
        check_no_children(c);
        Edge e;
        e.id = take_id(c, "id");
        e.node_a = take_id(c, "nodeA");
        e.node_b = take_id(c, "nodeB");
        auto la = take_enum<Leg>(c, e.id, "legA", leg_from_string);
        auto lb = take_enum<Leg>(c, e.id, "legB", leg_from_string);
        auto len = take_decimal(c, e.id, "length");
        if (e.id.empty() || e.node_a.empty() || e.node_b.empty() || !la || !lb || !len) continue;
        e.leg_a = *la;
        e.leg_b = *lb;
        e.length = *len;
        if (e.length <= 0)
          findings_.push_back(
              {"R003", Severity::error, e.id, "edge length must be positive", c.line, c.col});
        m.edges.push_back(std::move(e));
      } else {
        err("S002", "", "unknown element <" + c.name + "> inside <Topology>", c);
      }
    }
  }

  void walk_signals(const RawElem& el, PlanningModel& m) {
    check_attrs(el, {});
    for (const auto& c : el.children) {
      if (c.name != "Signal") {
        err("S002", "", "unknown element <" + c.name + "> inside <Signals>", c);
        continue;
      }
      check_attrs(c, {"id", "edge", "offset", "direction", "function"});
      check_no_children(c);
      Signal s;
      s.id = take_id(c, "id");
      s.edge = take_id(c, "edge");
      auto off = take_decimal(c, s.id, "offset");
      auto dir = take_enum<SignalDirection>(c, s.id, "direction", signal_direction_from_string);
      auto fun = take_enum<SignalFunction>(c, s.id, "function", signal_function_from_string);
      if (s.id.empty() || s.edge.empty() || !off || !dir || !fun) continue;
      s.offset = *off;
      s.direction = *dir;
      s.function = *fun;
      m.signals.push_back(std::move(s));
    }
  }

  void walk_detection(const RawElem& el, PlanningModel& m) {
    check_attrs(el, {});
    for (const auto& c : el.children) {
      if (c.name != "Section") {
        err("S002", "", "unknown element <" + c.name + "> inside <TrainDetection>", c);
        continue;
      }
      check_attrs(c, {"id", "edges"});
      check_no_children(c);
      TdsSection s;
      s.id = take_id(c, "id");
      const auto* edges = require_attr(c, "edges", s.id);
      if (s.id.empty() || !edges) continue;
      std::string token;
      bool bad = false;
      auto flush = [&] {
        if (token.empty()) return;
        if (!valid_id(token)) {
          err("S002", s.id, "edges token \"" + token + "\" is not a valid id", *edges);
          bad = true;
        }
        s.edges.push_back(token);
        token.clear();
      };
      for (char ch : edges->value) {
        if (ch == ' ')
          flush();
        else
          token += ch;
      }
      flush();
      if (s.edges.empty()) {
        err("S003", s.id, "attribute edges in <Section> must list at least one edge", *edges);
        continue;
      }
      if (bad) continue;
      m.sections.push_back(std::move(s));
    }
  }
};

bool is_rule_finding(const Finding& f) { return !f.rule_id.empty() && f.rule_id[0] == 'R'; }

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

bool ValidationReport::has_errors() const {
  return std::any_of(findings.begin(), findings.end(),
                     [](const Finding& f) { return f.severity == Severity::error; });
}

ParseResult parse_ppxml(std::string_view document) {
  ParseResult result;
  auto& findings = result.report.findings;
  std::optional<RawElem> root;
  try {
    root = XmlReader(document).parse();
  } catch (const WellFormedError& e) {
    findings.push_back(
        {"S001", Severity::error, "", "not well-formed: " + e.message, e.line, e.col});
  }
  PlanningModel model;
  if (root) model = SchemaWalk(findings).walk(*root);

  result.report.schema_valid =
      std::none_of(findings.begin(), findings.end(), [](const Finding& f) {
        return f.severity == Severity::error && !f.rule_id.empty() && f.rule_id[0] == 'S';
      });
  if (result.report.schema_valid) {
    auto structural = validate_rules(model);
    findings.insert(findings.end(), structural.begin(), structural.end());
    synthesize_sections(model);
    result.model = std::move(model);
  }
  result.report.rules_passed =
      std::none_of(findings.begin(), findings.end(), [](const Finding& f) {
        return f.severity == Severity::error && is_rule_finding(f);
      });
  return result;
}

std::vector<Finding> validate_rules(const PlanningModel& model) {
  std::vector<Finding> out;
  auto add = [&](const char* rule, Severity sev, const std::string& subject,
                 const std::string& msg) {
    out.push_back({rule, sev, subject, msg, 0, 0});
  };

  // R004: one id namespace, compared lowercased (fact emission lowercases).
  std::map<std::string, std::string> seen;
  auto claim_id = [&](const std::string& id) {
    if (id.empty()) return;
    auto lowered = ascii_lower(id);
    auto [it, inserted] = seen.emplace(lowered, id);
    if (!inserted)
      add("R004", Severity::error, id,
          "id \"" + id + "\" collides with \"" + it->second + "\" (ids are one namespace)");
  };
  claim_id(model.project_id);
  for (const auto& n : model.nodes) claim_id(n.id);
  for (const auto& e : model.edges) claim_id(e.id);
  for (const auto& s : model.signals) claim_id(s.id);
  for (const auto& s : model.sections) claim_id(s.id);

  // Incident legs per node; dangling and kind-mismatched references (R007).
  std::map<std::string, std::vector<Leg>> legs;
  for (const auto& e : model.edges) {
    auto endpoint = [&](const std::string& node_id, Leg leg) {
      const Node* n = model.find_node(node_id);
      if (!n) {
        add("R007", Severity::error, e.id,
            "edge " + e.id + " references unknown node \"" + node_id + "\"");
        return;
      }
      if (n->kind == NodeKind::end && leg != Leg::tip)
        add("R007", Severity::error, e.id,
            "edge " + e.id + " attaches to end node " + node_id + " via leg " +
                to_string(leg) + "; end nodes only have a tip");
      legs[node_id].push_back(leg);
    };
    endpoint(e.node_a, e.leg_a);
    endpoint(e.node_b, e.leg_b);
  }

  // R001 / R002: exact leg sets per node kind.
  for (const auto& n : model.nodes) {
    auto& ls = legs[n.id];
    std::array<int, 3> count{0, 0, 0};
    for (Leg l : ls) ++count[static_cast<int>(l)];
    if (n.kind == NodeKind::point) {
      if (count[0] != 1 || count[1] != 1 || count[2] != 1)
        add("R001", Severity::error, n.id,
            "point " + n.id + " must have exactly the legs tip, left, right (has " +
                std::to_string(ls.size()) + " incident legs)");
    } else {
      if (count[0] != 1 || count[1] != 0 || count[2] != 0)
        add("R002", Severity::error, n.id,
            "end node " + n.id + " must have exactly one incident tip leg");
    }
  }

  // R005: signal offset within host edge; R007 for dangling edge refs.
  for (const auto& s : model.signals) {
    const Edge* e = model.find_edge(s.edge);
    if (!e) {
      add("R007", Severity::error, s.id,
          "signal " + s.id + " references unknown edge \"" + s.edge + "\"");
      continue;
    }
    if (s.offset < 0 || s.offset > e->length)
      add("R005", Severity::error, s.id,
          "signal " + s.id + " offset " + format_mm(s.offset) + " exceeds edge " + e->id +
              " length " + format_mm(e->length));
  }

  // Section references and single-coverage (R007), then coverage gaps (R006).
  std::map<std::string, std::string> covered_by;
  for (const auto& s : model.sections) {
    if (s.implicit) continue;
    for (const auto& edge_id : s.edges) {
      if (!model.find_edge(edge_id)) {
        add("R007", Severity::error, s.id,
            "section " + s.id + " references unknown edge \"" + edge_id + "\"");
        continue;
      }
      auto [it, inserted] = covered_by.emplace(edge_id, s.id);
      if (!inserted)
        add("R007", Severity::error, s.id,
            "edge " + edge_id + " already belongs to section " + it->second);
    }
  }
  for (const auto& e : model.edges) {
    if (!covered_by.count(e.id))
      add("R006", Severity::warning, e.id,
          "edge " + e.id +
              " is not covered by any train detection section; implicit section synthesized");
  }
  return out;
}

void synthesize_sections(PlanningModel& model) {
  std::set<std::string> taken;
  taken.insert(ascii_lower(model.project_id));
  for (const auto& n : model.nodes) taken.insert(ascii_lower(n.id));
  for (const auto& e : model.edges) taken.insert(ascii_lower(e.id));
  for (const auto& s : model.signals) taken.insert(ascii_lower(s.id));
  for (const auto& s : model.sections) taken.insert(ascii_lower(s.id));

  std::set<std::string> covered;
  for (const auto& s : model.sections)
    for (const auto& e : s.edges) covered.insert(e);

  for (const auto& e : model.edges) {
    if (covered.count(e.id)) continue;
    std::string id = "implicit_" + ascii_lower(e.id);
    while (taken.count(ascii_lower(id))) id += "_";
    taken.insert(ascii_lower(id));
    model.sections.push_back({id, {e.id}, true});
  }
}

std::string serialize_ppxml(const PlanningModel& m) {
  std::string out;
  out += "<PlanPro version=\"" + xml_escape(m.format_version) + "\">\n";
  out += "  <Project id=\"" + xml_escape(m.project_id) + "\" name=\"" +
         xml_escape(m.project_name) + "\"/>\n";

  if (m.nodes.empty() && m.edges.empty()) {
    out += "  <Topology/>\n";
  } else {
    out += "  <Topology>\n";
    for (const auto& n : m.nodes)
      out += "    <Node id=\"" + xml_escape(n.id) + "\" kind=\"" + to_string(n.kind) + "\"/>\n";
    for (const auto& e : m.edges)
      out += "    <Edge id=\"" + xml_escape(e.id) + "\" nodeA=\"" + xml_escape(e.node_a) +
             "\" legA=\"" + to_string(e.leg_a) + "\" nodeB=\"" + xml_escape(e.node_b) +
             "\" legB=\"" + to_string(e.leg_b) + "\" length=\"" + format_mm(e.length) + "\"/>\n";
    out += "  </Topology>\n";
  }

  if (m.signals.empty()) {
    out += "  <Signals/>\n";
  } else {
    out += "  <Signals>\n";
    for (const auto& s : m.signals)
      out += "    <Signal id=\"" + xml_escape(s.id) + "\" edge=\"" + xml_escape(s.edge) +
             "\" offset=\"" + format_mm(s.offset) + "\" direction=\"" + to_string(s.direction) +
             "\" function=\"" + to_string(s.function) + "\"/>\n";
    out += "  </Signals>\n";
  }

  bool any_declared =
      std::any_of(m.sections.begin(), m.sections.end(), [](const auto& s) { return !s.implicit; });
  if (!any_declared) {
    out += "  <TrainDetection/>\n";
  } else {
    out += "  <TrainDetection>\n";
    for (const auto& s : m.sections) {
      if (s.implicit) continue;
      std::string edges;
      for (const auto& e : s.edges) {
        if (!edges.empty()) edges += ' ';
        edges += e;
      }
      out += "    <Section id=\"" + xml_escape(s.id) + "\" edges=\"" + xml_escape(edges) +
             "\"/>\n";
    }
    out += "  </TrainDetection>\n";
  }
  out += "</PlanPro>\n";
  return out;
}

nlohmann::json report_json(const ValidationReport& report) {
  nlohmann::json findings = nlohmann::json::array();
  for (const auto& f : report.findings) {
    findings.push_back({{"rule_id", f.rule_id},
                        {"severity", to_string(f.severity)},
                        {"subject_id", f.subject_id},
                        {"message", f.message},
                        {"line", f.line},
                        {"column", f.column}});
  }
  return {{"findings", findings},
          {"schema_valid", report.schema_valid},
          {"rules_passed", report.rules_passed}};
}

const char* to_string(Severity s) { return s == Severity::error ? "error" : "warning"; }

}  // namespace stw::ppxml
