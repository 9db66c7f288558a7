#pragma once
// Incremental exact row echelon form over Q with sparse rows indexed by monomials.

#include <map>
#include <vector>

#include "rotflow/scalar_expr.hpp"

namespace rotflow {

class RowSpace {
 public:
  using Row = std::map<Monomial, Rational>;

  static Row row_of(const ScalarExpr& e) { return Row(e.terms().begin(), e.terms().end()); }

  [[nodiscard]] std::size_t rank() const { return pivots_.size(); }

  /// Adds `e` if independent of the rows so far; returns whether it was added.
  bool add(const ScalarExpr& e) {
    Row r = reduce(row_of(e));
    if (r.empty()) return false;
    const Monomial pivot = r.begin()->first;
    const Rational lead = r.begin()->second;
    for (auto& [m, c] : r) c /= lead;
    // keep the basis fully reduced so reduce() needs one pass
    for (auto& [pm, prow] : pivots_) {
      auto it = prow.find(pivot);
      if (it == prow.end()) continue;
      const Rational f = it->second;
      axpy(prow, r, -f);
    }
    pivots_.emplace(pivot, std::move(r));
    return true;
  }

  [[nodiscard]] bool contains(const ScalarExpr& e) const { return reduce(row_of(e)).empty(); }

  /// True when every row of `other` lies in this space.
  [[nodiscard]] bool contains_all(const std::vector<ScalarExpr>& rows) const {
    for (const auto& r : rows)
      if (!contains(r)) return false;
    return true;
  }

 private:
  static void axpy(Row& target, const Row& src, const Rational& f) {
    for (const auto& [m, c] : src) {
      auto [it, inserted] = target.try_emplace(m, f * c);
      if (!inserted) {
        it->second += f * c;
        if (it->second == 0) target.erase(it);
      }
    }
  }

  [[nodiscard]] Row reduce(Row r) const {
    for (const auto& [pm, prow] : pivots_) {
      auto it = r.find(pm);
      if (it == r.end()) continue;
      const Rational f = -it->second;
      axpy(r, prow, f);
    }
    return r;
  }

  std::map<Monomial, Row> pivots_;
};

}  // namespace rotflow
