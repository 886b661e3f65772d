#include "stw/conflict.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace stw::conflict {

std::string to_string(const Reason& r) {
  return (r.kind == Reason::Kind::shared_edge ? std::string("SHARED_EDGE(")
                                              : std::string("POINT_DIVERGENCE(")) +
         r.element + ")";
}

ConflictVerdict conflicts(const routes::Route& a, const routes::Route& b) {
  ConflictVerdict v;
  std::set<std::string> edges_a;
  for (const auto& s : a.path) edges_a.insert(s.edge);
  std::set<std::string> shared;
  for (const auto& s : b.path)
    if (edges_a.count(s.edge)) shared.insert(s.edge);
  for (const auto& e : shared) v.reasons.push_back({Reason::Kind::shared_edge, e});

  for (const auto& pa : a.points)
    for (const auto& pb : b.points)
      if (pa.point == pb.point && pa.position != pb.position)
        v.reasons.push_back({Reason::Kind::point_divergence, pa.point});

  std::sort(v.reasons.begin(), v.reasons.end());
  v.reasons.erase(std::unique(v.reasons.begin(), v.reasons.end()), v.reasons.end());
  v.conflicting = !v.reasons.empty();
  return v;
}

bool ConflictMatrix::cell(const std::string& a, const std::string& b) const {
  auto ia = std::find(ids_.begin(), ids_.end(), a);
  auto ib = std::find(ids_.begin(), ids_.end(), b);
  if (ia == ids_.end() || ib == ids_.end()) throw std::out_of_range("unknown route id");
  return cell(static_cast<std::size_t>(ia - ids_.begin()),
              static_cast<std::size_t>(ib - ids_.begin()));
}

const std::vector<Reason>& ConflictMatrix::reasons(const std::string& a,
                                                   const std::string& b) const {
  static const std::vector<Reason> empty;
  auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  auto it = reasons_.find(key);
  return it == reasons_.end() ? empty : it->second;
}

ConflictMatrix conflict_matrix(const routes::RouteSet& rs) {
  std::vector<std::string> ids;
  ids.reserve(rs.routes.size());
  for (const auto& r : rs.routes) ids.push_back(r.id);

  const std::size_t n = ids.size();
  std::vector<bool> cells(n * n, false);
  std::map<std::pair<std::string, std::string>, std::vector<Reason>> reasons;
  for (std::size_t i = 0; i < n; ++i) {
    cells[i * n + i] = true;
    for (std::size_t j = i + 1; j < n; ++j) {
      auto v = conflicts(rs.routes[i], rs.routes[j]);
      cells[i * n + j] = v.conflicting;
      cells[j * n + i] = v.conflicting;
      if (v.conflicting) reasons.emplace(std::make_pair(ids[i], ids[j]), std::move(v.reasons));
    }
  }
  return ConflictMatrix(std::move(ids), std::move(cells), std::move(reasons));
}

nlohmann::json matrix_json(const ConflictMatrix& cm) {
  nlohmann::json cells = nlohmann::json::array();
  for (std::size_t i = 0; i < cm.size(); ++i)
    for (std::size_t j = 0; j < cm.size(); ++j) cells.push_back(cm.cell(i, j));
  nlohmann::json reasons = nlohmann::json::object();
  for (std::size_t i = 0; i < cm.size(); ++i) {
    for (std::size_t j = i + 1; j < cm.size(); ++j) {
      if (!cm.cell(i, j)) continue;
      nlohmann::json list = nlohmann::json::array();
      for (const auto& r : cm.reasons(cm.ids()[i], cm.ids()[j])) list.push_back(to_string(r));
      reasons[cm.ids()[i] + "|" + cm.ids()[j]] = list;
    }
  }
  return {{"ids", cm.ids()}, {"cells", cells}, {"reasons", reasons}};
}

}  // namespace stw::conflict
