#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "stw/routes.hpp"

namespace stw::conflict {

// Why two routes exclude each other.
struct Reason {
  enum class Kind { shared_edge, point_divergence };
  Kind kind = Kind::shared_edge;
  std::string element;  // edge id or point id
  friend bool operator==(const Reason&, const Reason&) = default;
  friend auto operator<=>(const Reason&, const Reason&) = default;
};

std::string to_string(const Reason& r);  // "SHARED_EDGE(T1)"

struct ConflictVerdict {
  bool conflicting = false;
  std::vector<Reason> reasons;  // sorted, unique; conflicting <=> non-empty
};

// SHARED_EDGE for every edge on both paths regardless of direction;
// POINT_DIVERGENCE for every point the two routes demand in different
// positions. Shared points in agreeing positions are compatible.
ConflictVerdict conflicts(const routes::Route& a, const routes::Route& b);

// Symmetric boolean relation over the route ids; the diagonal is true by
// definition (a set route excludes its own re-request).
class ConflictMatrix {
 public:
  ConflictMatrix() = default;
  ConflictMatrix(std::vector<std::string> ids, std::vector<bool> cells,
                 std::map<std::pair<std::string, std::string>, std::vector<Reason>> reasons)
      : ids_(std::move(ids)), cells_(std::move(cells)), reasons_(std::move(reasons)) {}

  const std::vector<std::string>& ids() const { return ids_; }
  std::size_t size() const { return ids_.size(); }
  bool cell(std::size_t i, std::size_t j) const { return cells_[i * ids_.size() + j]; }
  bool cell(const std::string& a, const std::string& b) const;
  // Reasons for a conflicting off-diagonal pair; key order-insensitive.
  const std::vector<Reason>& reasons(const std::string& a, const std::string& b) const;

 private:
  std::vector<std::string> ids_;
  std::vector<bool> cells_;  // row-major
  std::map<std::pair<std::string, std::string>, std::vector<Reason>> reasons_;
};

ConflictMatrix conflict_matrix(const routes::RouteSet& rs);

nlohmann::json matrix_json(const ConflictMatrix& cm);

}  // namespace stw::conflict
