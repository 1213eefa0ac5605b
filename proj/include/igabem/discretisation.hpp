#pragma once

/// Boundary discretisations consumed by the assembler. Two implementations
/// exist: IgaDiscretisation (NURBS basis straight from the CAD curve) and
/// LagrangeDiscretisation (continuous quadratic elements, lagrange.hpp).

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "igabem/errors.hpp"
#include "igabem/nurbs.hpp"
#include "igabem/quadrature.hpp"

namespace igabem {

/// An element that contains a collocation point, with its parent coordinate.
struct Owner {
  std::size_t element = 0;
  double xi_hat = 0.0;
};

struct CollocationPoint {
  double param = 0.0;
  Vec2 point = Vec2::Zero();
  /// One owner inside an element, two at an element junction: the element on
  /// the left (xi_hat = +1) first, then the one on the right (xi_hat = -1).
  std::vector<Owner> owners;
};

using CollocationSet = std::vector<CollocationPoint>;

/// Field prescribed along a parameter range: value at (xi, outward normal).
using RangeField = std::function<Vec2(double xi, const Vec2& normal)>;

/// Coefficient fitted on a range, reported once per traction slot that the
/// range's elements use for it (see element_traction_slots).
struct FittedCoefficient {
  std::size_t dof = 0;
  std::size_t slot = 0;
  Vec2 value = Vec2::Zero();
};

/// Displacement is continuous, but traction may jump at C0 junctions
/// (corners). Every junction coefficient therefore owns two traction slots:
/// the DOF slot (used by the element on the left) and an extra slot
/// dof_count() + k (used by the element on the right), where junction_dofs()[k]
/// names the DOF. Elements report their slots via element_traction_slots().
template <class D>
concept BoundaryDiscretisation = requires(const D& d, std::size_t e, double x, const RangeField& f) {
  { d.element_count() } -> std::convertible_to<std::size_t>;
  { d.dof_count() } -> std::convertible_to<std::size_t>;
  { d.element(e).sample(x) } -> std::same_as<ElementSample>;
  { d.element(e).local_count() } -> std::convertible_to<std::size_t>;
  { d.element_dofs(e) } -> std::convertible_to<std::span<const std::size_t>>;
  { d.element_traction_slots(e) } -> std::convertible_to<std::span<const std::size_t>>;
  { d.junction_dofs() } -> std::convertible_to<std::span<const std::size_t>>;
  { d.element_range(e) } -> std::convertible_to<ElementRange>;
  { d.collocation() } -> std::convertible_to<const CollocationSet&>;
  { d.locate(x) } -> std::convertible_to<std::pair<std::size_t, double>>;
  { d.fit_range(x, x, f) } -> std::convertible_to<std::vector<FittedCoefficient>>;
};

/// Element view over one knot span of a NURBS curve.
class IgaElement {
 public:
  IgaElement(const NurbsCurve& curve, const ElementRange& range) : curve_(&curve), range_(range) {}

  std::size_t local_count() const { return static_cast<std::size_t>(curve_->degree()) + 1; }

  ElementSample sample(double xi_hat) const {
    const auto w = nurbs_derivs_in_span(*curve_, range_.span, range_.param(xi_hat), 1);
    ElementSample s;
    s.point = curve_derivative(*curve_, w, 0);
    s.tangent = curve_derivative(*curve_, w, 1) * range_.jacobian_parent();
    s.count = w.size();
    for (std::size_t l = 0; l < w.size(); ++l) s.shape[l] = w(0, l);
    return s;
  }

 private:
  const NurbsCurve* curve_;
  ElementRange range_;
};

namespace detail {

/// Owners of a parameter value given the element ranges of a curve.
inline std::vector<Owner> resolve_owners(std::span<const ElementRange> ranges, double xi, bool closed) {
  std::vector<Owner> owners;
  const double lo = ranges.front().begin;
  const double hi = ranges.back().end;
  if (closed && xi == lo) owners.push_back({ranges.size() - 1, 1.0});
  for (std::size_t e = 0; e < ranges.size(); ++e) {
    const auto& r = ranges[e];
    if (xi == r.end) {
      owners.push_back({e, 1.0});
    } else if (xi == r.begin) {
      owners.push_back({e, -1.0});
    } else if (xi > r.begin && xi < r.end) {
      owners.push_back({e, 2.0 * (xi - r.begin) / (r.end - r.begin) - 1.0});
    }
  }
  if (closed && xi == hi) owners.push_back({0, -1.0});
  if (owners.empty()) throw DomainError("collocation parameter outside the curve domain");
  std::stable_sort(owners.begin(), owners.end(),
                   [](const Owner& a, const Owner& b) { return a.xi_hat > b.xi_hat; });
  return owners;
}

/// Element index and parent coordinate of a parameter (left element at junctions).
inline std::pair<std::size_t, double> locate_in(std::span<const ElementRange> ranges, double xi) {
  if (!(xi >= ranges.front().begin && xi <= ranges.back().end)) {
    throw DomainError("parameter outside the curve domain");
  }
  auto it = std::lower_bound(ranges.begin(), ranges.end(), xi,
                             [](const ElementRange& r, double v) { return r.end < v; });
  if (it == ranges.end()) it = std::prev(ranges.end());
  const auto e = static_cast<std::size_t>(it - ranges.begin());
  return {e, 2.0 * (xi - it->begin) / (it->end - it->begin) - 1.0};
}

/// Traction slots that elements inside [begin, end] use for `dof`.
template <class Slots, class Dofs>
std::vector<std::size_t> slots_in_range(std::span<const ElementRange> ranges, const Slots& slots,
                                        const Dofs& dofs, std::size_t dof, double begin, double end) {
  std::vector<std::size_t> out;
  for (std::size_t e = 0; e < ranges.size(); ++e) {
    if (ranges[e].begin < begin || ranges[e].end > end) continue;
    for (std::size_t l = 0; l < dofs[e].size(); ++l) {
      if (dofs[e][l] == dof && std::find(out.begin(), out.end(), slots[e][l]) == out.end()) {
        out.push_back(slots[e][l]);
      }
    }
  }
  return out;
}

/// Element lying inside [begin, end] that touches xi.
inline std::pair<std::size_t, double> locate_inside(std::span<const ElementRange> ranges, double xi,
                                                    double begin, double end) {
  for (std::size_t e = 0; e < ranges.size(); ++e) {
    const auto& r = ranges[e];
    if (r.begin >= begin && r.end <= end && xi >= r.begin && xi <= r.end) {
      return {e, 2.0 * (xi - r.begin) / (r.end - r.begin) - 1.0};
    }
  }
  throw ModelError("no element inside the range contains the parameter");
}

}  // namespace detail

/// Collocation points at the Greville abscissae. A closed curve drops the
/// final abscissa, which maps to the same point as the first.
inline CollocationSet locate_collocation(const NurbsCurve& curve) {
  const auto ranges = element_ranges(curve.knots());
  auto params = greville_abscissae(curve.knots(), curve.degree());
  if (curve.closed()) params.pop_back();
  CollocationSet out;
  out.reserve(params.size());
  for (double xi : params) {
    out.push_back({xi, eval_curve(curve, xi), detail::resolve_owners(ranges, xi, curve.closed())});
  }
  return out;
}

/// Isogeometric discretisation: one coefficient per control point (the last
/// control point of a closed curve shares the first one's coefficient).
class IgaDiscretisation {
 public:
  explicit IgaDiscretisation(NurbsCurve curve)
      : curve_(std::move(curve)),
        table_(make_element_table(curve_)),
        greville_(greville_abscissae(curve_.knots(), curve_.degree())),
        collocation_(locate_collocation(curve_)) {
    build_traction_slots();
  }

  const NurbsCurve& curve() const { return curve_; }
  const ElementTable& table() const { return table_; }
  const std::vector<double>& greville() const { return greville_; }

  std::size_t element_count() const { return table_.ranges.size(); }
  std::size_t dof_count() const { return curve_.size() - (curve_.closed() ? 1 : 0); }
  IgaElement element(std::size_t e) const { return IgaElement(curve_, table_.ranges[e]); }
  std::span<const std::size_t> element_dofs(std::size_t e) const { return table_.conn[e]; }
  std::span<const std::size_t> element_traction_slots(std::size_t e) const { return slots_[e]; }
  std::span<const std::size_t> junction_dofs() const { return junctions_; }
  ElementRange element_range(std::size_t e) const { return table_.ranges[e]; }
  const CollocationSet& collocation() const { return collocation_; }
  std::pair<std::size_t, double> locate(double xi) const { return detail::locate_in(table_.ranges, xi); }

  std::size_t dof_of_basis(std::size_t a) const {
    return curve_.closed() && a + 1 == curve_.size() ? 0 : a;
  }

  /// Interpolate a field at the Greville points lying in [begin, end] using
  /// the basis functions those points belong to. Exact when the range ends
  /// at C0 junctions, where outside functions vanish.
  std::vector<FittedCoefficient> fit_range(double begin, double end, const RangeField& field) const {
    std::vector<std::size_t> basis;
    for (std::size_t a = 0; a < greville_.size(); ++a) {
      if (greville_[a] >= begin && greville_[a] <= end) basis.push_back(a);
    }
    const auto m = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
    Eigen::MatrixXd rhs(m, 2);
    for (Eigen::Index c = 0; c < m; ++c) {
      const double xi = greville_[basis[c]];
      const auto w = nurbs_basis(curve_, xi);
      for (Eigen::Index k = 0; k < m; ++k) {
        const std::size_t a = basis[k];
        if (a >= w.first && a < w.first + w.size()) M(c, k) = w[a - w.first];
      }
      const auto [e, xi_hat] = detail::locate_inside(table_.ranges, xi, begin, end);
      const auto s = element(e).sample(xi_hat);
      rhs.row(c) = field(xi, s.normal()).transpose();
    }
    const Eigen::MatrixXd coef = M.partialPivLu().solve(rhs);
    std::vector<FittedCoefficient> out;
    for (Eigen::Index k = 0; k < m; ++k) {
      const std::size_t dof = dof_of_basis(basis[k]);
      for (std::size_t slot : detail::slots_in_range(table_.ranges, slots_, table_.conn, dof, begin, end)) {
        out.push_back({dof, slot, Vec2(coef(k, 0), coef(k, 1))});
      }
    }
    return out;
  }

 private:
  /// C0 junctions are knots of multiplicity p (and the closure point).
  void build_traction_slots() {
    slots_ = table_.conn;
    const auto& U = curve_.knots();
    const int p = curve_.degree();
    for (std::size_t e = 0; e < table_.ranges.size(); ++e) {
      const auto& r = table_.ranges[e];
      bool junction;
      if (e == 0) {
        junction = curve_.closed();
      } else {
        junction = static_cast<int>(std::count(U.begin(), U.end(), r.begin)) == p;
      }
      if (!junction) continue;
      slots_[e][0] = dof_count() + junctions_.size();
      junctions_.push_back(table_.conn[e][0]);
    }
  }

  NurbsCurve curve_;
  ElementTable table_;
  std::vector<double> greville_;
  CollocationSet collocation_;
  std::vector<std::vector<std::size_t>> slots_;
  std::vector<std::size_t> junctions_;
};

static_assert(BoundaryDiscretisation<IgaDiscretisation>);

}  // namespace igabem
