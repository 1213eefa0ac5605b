#pragma once

/// Conventional collocation BEM with continuous quadratic Lagrange elements.
/// Nodes are sampled from the NURBS boundary at equal parameter steps within
/// each knot span, so every corner of the curve is a node.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "igabem/discretisation.hpp"
#include "igabem/nurbs.hpp"

namespace igabem {

struct LagrangeShape {
  std::array<double, 3> value;
  std::array<double, 3> derivative;
};

inline LagrangeShape lagrange_shape(double eta) {
  return {{0.5 * eta * (eta - 1.0), 1.0 - eta * eta, 0.5 * eta * (eta + 1.0)},
          {eta - 0.5, -2.0 * eta, eta + 0.5}};
}

struct LagrangeMesh {
  std::vector<Vec2> nodes;
  std::vector<double> node_params;
  std::vector<std::array<std::size_t, 3>> elements;
  std::vector<ElementRange> ranges;  // parameter range of each element
  bool closed = false;
};

inline LagrangeMesh generate_mesh(const NurbsCurve& curve, int elements_per_span) {
  if (elements_per_span < 1) throw ModelError("elements per span must be at least 1");
  LagrangeMesh mesh;
  mesh.closed = curve.closed();
  for (const auto& span : element_ranges(curve.knots())) {
    for (int k = 0; k < elements_per_span; ++k) {
      const double h = (span.end - span.begin) / elements_per_span;
      const double a = span.begin + k * h;
      const double b = k + 1 == elements_per_span ? span.end : a + h;
      mesh.ranges.push_back({a, b, span.span});
    }
  }
  const std::size_t ne = mesh.ranges.size();
  for (std::size_t e = 0; e < ne; ++e) {
    const auto& r = mesh.ranges[e];
    for (double xi : {r.begin, 0.5 * (r.begin + r.end)}) {
      mesh.node_params.push_back(xi);
      mesh.nodes.push_back(eval_curve(curve, xi));
    }
  }
  if (!mesh.closed) {
    mesh.node_params.push_back(curve.back());
    mesh.nodes.push_back(eval_curve(curve, curve.back()));
  }
  const std::size_t nn = mesh.nodes.size();
  for (std::size_t e = 0; e < ne; ++e) {
    mesh.elements.push_back({2 * e, 2 * e + 1, (2 * e + 2) % nn});
  }
  return mesh;
}

class LagrangeElement {
 public:
  explicit LagrangeElement(std::array<Vec2, 3> nodes) : nodes_(nodes) {}

  std::size_t local_count() const { return 3; }

  ElementSample sample(double eta) const {
    const auto sh = lagrange_shape(eta);
    ElementSample s;
    s.count = 3;
    for (std::size_t b = 0; b < 3; ++b) {
      s.point += sh.value[b] * nodes_[b];
      s.tangent += sh.derivative[b] * nodes_[b];
      s.shape[b] = sh.value[b];
    }
    return s;
  }

 private:
  std::array<Vec2, 3> nodes_;
};

/// Nodal discretisation over a LagrangeMesh: collocation at every node.
class LagrangeDiscretisation {
 public:
  explicit LagrangeDiscretisation(LagrangeMesh mesh) : mesh_(std::move(mesh)) {
    for (std::size_t i = 0; i < mesh_.nodes.size(); ++i) {
      collocation_.push_back({mesh_.node_params[i], mesh_.nodes[i],
                              detail::resolve_owners(mesh_.ranges, mesh_.node_params[i], mesh_.closed)});
    }
    // Every shared end node is a C0 junction.
    for (std::size_t e = 0; e < mesh_.elements.size(); ++e) {
      auto slots = mesh_.elements[e];
      if (e > 0 || mesh_.closed) {
        slots[0] = dof_count() + junctions_.size();
        junctions_.push_back(mesh_.elements[e][0]);
      }
      slots_.push_back(slots);
    }
  }

  const LagrangeMesh& mesh() const { return mesh_; }

  std::size_t element_count() const { return mesh_.elements.size(); }
  std::size_t dof_count() const { return mesh_.nodes.size(); }
  LagrangeElement element(std::size_t e) const {
    const auto& el = mesh_.elements[e];
    return LagrangeElement({mesh_.nodes[el[0]], mesh_.nodes[el[1]], mesh_.nodes[el[2]]});
  }
  std::span<const std::size_t> element_dofs(std::size_t e) const { return mesh_.elements[e]; }
  std::span<const std::size_t> element_traction_slots(std::size_t e) const { return slots_[e]; }
  std::span<const std::size_t> junction_dofs() const { return junctions_; }
  ElementRange element_range(std::size_t e) const { return mesh_.ranges[e]; }
  const CollocationSet& collocation() const { return collocation_; }
  std::pair<std::size_t, double> locate(double xi) const { return detail::locate_in(mesh_.ranges, xi); }

  /// Nodal values are physical values; the field is sampled at each node in
  /// [begin, end], with the normal taken from an element inside the range.
  std::vector<FittedCoefficient> fit_range(double begin, double end, const RangeField& field) const {
    std::vector<FittedCoefficient> out;
    const double hi = mesh_.ranges.back().end;
    for (std::size_t i = 0; i < mesh_.nodes.size(); ++i) {
      std::vector<double> params{mesh_.node_params[i]};
      if (mesh_.closed && i == 0) params.push_back(hi);
      for (double xi : params) {
        if (xi < begin || xi > end) continue;
        const auto [e, eta] = detail::locate_inside(mesh_.ranges, xi, begin, end);
        const Vec2 value = field(xi, element(e).sample(eta).normal());
        for (std::size_t slot : detail::slots_in_range(mesh_.ranges, slots_, mesh_.elements, i, begin, end)) {
          out.push_back({i, slot, value});
        }
      }
    }
    return out;
  }

 private:
  LagrangeMesh mesh_;
  CollocationSet collocation_;
  std::vector<std::array<std::size_t, 3>> slots_;
  std::vector<std::size_t> junctions_;
};

static_assert(BoundaryDiscretisation<LagrangeDiscretisation>);

}  // namespace igabem
