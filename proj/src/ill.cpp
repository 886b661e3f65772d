#include "stw/ill.hpp"

#include <algorithm>
#include <set>

#include "stw/digest.hpp"
#include "stw/ppxml.hpp"
#include "stw/version.hpp"

namespace stw::ill {

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_spaces(const std::string& s) {
  std::vector<std::string> out;
  std::string token;
  for (char c : s) {
    if (c == ' ') {
      if (!token.empty()) out.push_back(std::move(token));
      token.clear();
    } else {
      token += c;
    }
  }
  if (!token.empty()) out.push_back(std::move(token));
  return out;
}

}  // namespace

const RouteDecl* Program::find(const std::string& id) const {
  for (const auto& r : routes)
    if (r.id == id) return &r;
  return nullptr;
}

Program build_program(const routes::RouteSet& rs, const conflict::ConflictMatrix& cm,
                      const std::string& station) {
  std::vector<std::string> rs_ids;
  for (const auto& r : rs.routes) rs_ids.push_back(r.id);
  if (rs_ids != cm.ids())
    throw ConsistencyError("conflict matrix route ids do not match the route set");

  Program p;
  p.station = station;
  for (std::size_t i = 0; i < rs.routes.size(); ++i) {
    const auto& r = rs.routes[i];
    RouteDecl d;
    d.id = r.id;
    d.start = r.start_signal;
    d.end = r.end_element;
    d.path = r.path;
    d.points = r.points;
    d.sections = r.sections;
    for (std::size_t j = 0; j < rs.routes.size(); ++j)
      if (j != i && cm.cell(i, j)) d.conflicts.push_back(rs.routes[j].id);
    p.routes.push_back(std::move(d));
  }
  return p;
}

std::string render_ill(const Program& program, const std::string& input_digest) {
  std::string out;
  out += "ill 1\n";
  out += "station " + quote(program.station) + "\n";
  out += std::string("# generated-by: ") + kToolName + " " + kToolVersion +
         " input-digest: " + input_digest + "\n";
  for (const auto& r : program.routes) {
    out += "route " + r.id + " {\n";
    out += "  start " + r.start + "\n";
    out += "  end " + r.end + "\n";
    out += "  path";
    for (const auto& s : r.path) out += " " + routes::to_string(s);
    out += "\n";
    if (!r.points.empty()) {
      out += "  points";
      for (const auto& p : r.points)
        out += " " + p.point + "=" + to_string(p.position);
      out += "\n";
    }
    out += "  sections";
    for (const auto& s : r.sections) out += " " + s;
    out += "\n";
    if (!r.conflicts.empty()) {
      out += "  conflicts";
      for (const auto& c : r.conflicts) out += " " + c;
      out += "\n";
    }
    out += "}\n";
  }
  return out;
}

std::string generate_ill(const routes::RouteSet& rs, const conflict::ConflictMatrix& cm,
                         const PlanningModel& model) {
  Program p = build_program(rs, cm, model.project_name);
  return render_ill(p, digest_hex(ppxml::serialize_ppxml(model)));
}

namespace {

class IllParser {
 public:
  explicit IllParser(std::string_view text) : text_(text) {}

  Program parse() {
    expect_header();
    Program p;
    p.station = expect_station();
    while (next_content_line()) {
      p.routes.push_back(parse_route_block());
    }
    check_references(p);
    return p;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  int line_no_ = 0;
  std::string line_;
  bool have_line_ = false;

  [[noreturn]] void syntax(const std::string& msg) const {
    throw ParseError(ParseError::Kind::syntax, line_no_, msg);
  }

  // Reads the next non-blank, non-comment line into line_.
  bool next_content_line() {
    while (pos_ < text_.size() || have_line_) {
      if (!have_line_) {
        std::size_t eol = text_.find('\n', pos_);
        if (eol == std::string_view::npos) eol = text_.size();
        line_ = std::string(text_.substr(pos_, eol - pos_));
        pos_ = eol + 1;
        ++line_no_;
        have_line_ = true;
      }
      std::string trimmed = trim(line_);
      if (trimmed.empty() || trimmed[0] == '#') {
        have_line_ = false;
        continue;
      }
      line_ = trimmed;
      return true;
    }
    return false;
  }

  void consume_line() { have_line_ = false; }

  static std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  void expect_header() {
    if (!next_content_line()) syntax("missing header 'ill 1'");
    if (line_ != "ill 1") syntax("expected header 'ill 1', got '" + line_ + "'");
    consume_line();
  }

  std::string expect_station() {
    if (!next_content_line()) syntax("missing 'station' line");
    if (line_.rfind("station ", 0) != 0) syntax("expected 'station \"<name>\"'");
    std::string rest = trim(line_.substr(8));
    if (rest.size() < 2 || rest.front() != '"' || rest.back() != '"')
      syntax("station name must be quoted");
    std::string name;
    for (std::size_t i = 1; i + 1 < rest.size(); ++i) {
      if (rest[i] == '\\' && i + 2 < rest.size()) {
        ++i;
        name += rest[i];
      } else if (rest[i] == '"') {
        syntax("malformed station name quoting");
      } else {
        name += rest[i];
      }
    }
    consume_line();
    return name;
  }

  RouteDecl parse_route_block() {
    // Current line: route <id> {
    if (line_.rfind("route ", 0) != 0) syntax("expected 'route <id> {', got '" + line_ + "'");
    if (line_.size() < 8 || line_.substr(line_.size() - 2) != " {")
      syntax("route line must end in ' {'");
    RouteDecl d;
    d.id = trim(line_.substr(6, line_.size() - 8));
    if (d.id.empty() || d.id.find(' ') != std::string::npos) syntax("malformed route id");
    consume_line();

    bool closed = false, saw_start = false, saw_end = false, saw_path = false,
         saw_sections = false;
    while (next_content_line()) {
      if (line_ == "}") {
        consume_line();
        closed = true;
        break;
      }
      auto tokens = split_spaces(line_);
      consume_line();
      const std::string& key = tokens[0];
      if (key == "start") {
        if (tokens.size() != 2) syntax("'start' takes exactly one signal id");
        d.start = tokens[1];
        saw_start = true;
      } else if (key == "end") {
        if (tokens.size() != 2) syntax("'end' takes exactly one element id");
        d.end = tokens[1];
        saw_end = true;
      } else if (key == "path") {
        if (tokens.size() < 2) syntax("'path' needs at least one edge:dir entry");
        for (std::size_t i = 1; i < tokens.size(); ++i) {
          const std::string& t = tokens[i];
          std::size_t colon = t.rfind(':');
          if (colon == std::string::npos || colon == 0 || colon + 2 != t.size() ||
              (t[colon + 1] != '+' && t[colon + 1] != '-'))
            syntax("malformed path entry '" + t + "' (want <edge>:<+|->)");
          d.path.push_back({t.substr(0, colon), t[colon + 1] == '+' ? TravelDir::forward
                                                                    : TravelDir::backward});
        }
        saw_path = true;
      } else if (key == "points") {
        for (std::size_t i = 1; i < tokens.size(); ++i) {
          const std::string& t = tokens[i];
          std::size_t eq = t.find('=');
          if (eq == std::string::npos || eq == 0) syntax("malformed points entry '" + t + "'");
          auto pos = point_position_from_string(t.substr(eq + 1));
          if (!pos) syntax("point position must be left or right in '" + t + "'");
          d.points.push_back({t.substr(0, eq), *pos});
        }
      } else if (key == "sections") {
        if (tokens.size() < 2) syntax("'sections' needs at least one section id");
        d.sections.assign(tokens.begin() + 1, tokens.end());
        saw_sections = true;
      } else if (key == "conflicts") {
        d.conflicts.assign(tokens.begin() + 1, tokens.end());
      } else {
        syntax("unknown directive '" + key + "' in route block");
      }
    }
    if (!closed) syntax("unterminated route block for " + d.id);
    if (!saw_start) syntax("route " + d.id + " is missing 'start'");
    if (!saw_end) syntax("route " + d.id + " is missing 'end'");
    if (!saw_path) syntax("route " + d.id + " is missing 'path'");
    if (!saw_sections) syntax("route " + d.id + " is missing 'sections'");
    return d;
  }

  void check_references(const Program& p) {
    std::set<std::string> ids;
    for (const auto& r : p.routes) {
      if (!ids.insert(r.id).second)
        throw ParseError(ParseError::Kind::reference, line_no_,
                         "duplicate route id " + r.id);
    }
    for (const auto& r : p.routes) {
      for (const auto& c : r.conflicts) {
        if (!ids.count(c))
          throw ParseError(ParseError::Kind::reference, line_no_,
                           "route " + r.id + " lists unknown conflict " + c);
        const RouteDecl* other = p.find(c);
        if (std::find(other->conflicts.begin(), other->conflicts.end(), r.id) ==
            other->conflicts.end())
          throw ParseError(ParseError::Kind::asymmetry, line_no_,
                           "route " + r.id + " lists conflict " + c +
                               " but not vice versa");
      }
    }
  }
};

}  // namespace

Program parse_ill(std::string_view text) { return IllParser(text).parse(); }

}  // namespace stw::ill
