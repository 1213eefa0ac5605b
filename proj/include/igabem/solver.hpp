#pragma once

/// Collocation BEM system: assembly of H and G, boundary-condition
/// rearrangement into A x = z, dense solve, and recovery of the boundary
/// fields. Everything is generic over a BoundaryDiscretisation, so the same
/// code drives both the isogeometric and the quadratic Lagrange variants.
///
/// DOF ordering: column/row 2 a + j for coefficient a and direction j.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "igabem/discretisation.hpp"
#include "igabem/errors.hpp"
#include "igabem/kernels.hpp"
#include "igabem/lagrange.hpp"
#include "igabem/quadrature.hpp"

namespace igabem {

struct QuadratureConfig {
  int regular = 12;
  int near = 32;
  int telles = 16;
  int sst = 16;
  double near_factor = 2.0;  // near-singular if within this many element lengths
};

enum class BcKind { displacement, traction };
enum class BcDirection { x, y, normal };

/// Field prescription on a parameter range. A traction along "normal" is a
/// pressure: t = -value * n.
struct BoundaryCondition {
  double begin = 0.0;
  double end = 0.0;
  BcKind kind = BcKind::traction;
  BcDirection direction = BcDirection::x;
  double value = 0.0;

  bool prescribes(int j) const { return direction == BcDirection::normal || static_cast<int>(direction) == j; }

  Vec2 field(const Vec2& normal) const {
    switch (direction) {
      case BcDirection::x: return Vec2(value, 0.0);
      case BcDirection::y: return Vec2(0.0, value);
      case BcDirection::normal: return -value * normal;
    }
    return Vec2::Zero();
  }
};

/// Known quantity of one displacement coefficient and direction.
struct DofPrescription {
  bool displacement_known = false;
  double value = 0.0;
};

/// Known traction on one traction slot and direction.
struct SlotPrescription {
  bool known = false;
  double value = 0.0;
};

/// Resolved boundary data. `dofs` has 2n entries, `slots` 2(n + m) where m
/// is the number of junctions; junction k adds slot n + k for DOF
/// junction_dofs[k].
struct Prescriptions {
  std::vector<DofPrescription> dofs;
  std::vector<SlotPrescription> slots;
  std::vector<std::size_t> junction_dofs;
};

/// H and G act on continuous coefficients. G_right holds the part of G
/// contributed by elements on the right of each junction, so a traction that
/// jumps at junction k multiplies G_right column 2k + j by the right value
/// and G - G_right by the left one.
struct DenseSystem {
  Eigen::MatrixXd H;
  Eigen::MatrixXd G;
  Eigen::MatrixXd G_right;
  std::vector<std::size_t> junction_dofs;
  Eigen::MatrixXd A;
  Eigen::VectorXd z;
  Prescriptions prescriptions;

  /// G column acting on traction slot s, direction j.
  Eigen::VectorXd slot_column(std::size_t s, int j) const {
    const std::size_t n = static_cast<std::size_t>(G.cols()) / 2;
    if (s >= n) return G_right.col(static_cast<Eigen::Index>(2 * (s - n) + j));
    Eigen::VectorXd col = G.col(static_cast<Eigen::Index>(2 * s + j));
    for (std::size_t k = 0; k < junction_dofs.size(); ++k) {
      if (junction_dofs[k] == s) col -= G_right.col(static_cast<Eigen::Index>(2 * k + j));
    }
    return col;
  }

  /// G q for a traction vector over all slots.
  Eigen::VectorXd traction_product(const Eigen::VectorXd& q) const {
    const Eigen::Index n2 = G.cols();
    Eigen::VectorXd out = G * q.head(n2);
    for (std::size_t k = 0; k < junction_dofs.size(); ++k) {
      const auto e = static_cast<Eigen::Index>(2 * k);
      const auto d = static_cast<Eigen::Index>(2 * junction_dofs[k]);
      out += G_right.middleCols<2>(e) * (q.segment<2>(n2 + e) - q.segment<2>(d));
    }
    return out;
  }
};

namespace detail {

inline double distance_to_samples(const Vec2& src, std::span<const ElementSample> samples) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) d = std::min(d, (s.point - src).norm());
  return d;
}

}  // namespace detail

/// Fill H (T-kernel integrals plus jump terms) and G (U-kernel integrals).
/// Elements owning the collocation point use the singular routines; elements
/// within near_factor element lengths use the elevated regular rule.
template <BoundaryDiscretisation D, class Kernel>
DenseSystem assemble(const D& disc, const Kernel& kernel, const QuadratureConfig& cfg = {}) {
  const std::size_t ne = disc.element_count();
  const auto& colloc = disc.collocation();
  const auto nrow = static_cast<Eigen::Index>(2 * colloc.size());
  const auto ncol = static_cast<Eigen::Index>(2 * disc.dof_count());
  DenseSystem sys;
  sys.H = Eigen::MatrixXd::Zero(nrow, ncol);
  sys.G = Eigen::MatrixXd::Zero(nrow, ncol);
  const auto junctions = disc.junction_dofs();
  sys.junction_dofs.assign(junctions.begin(), junctions.end());
  sys.G_right = Eigen::MatrixXd::Zero(nrow, static_cast<Eigen::Index>(2 * junctions.size()));

  const QuadratureRule& reg = gauss_legendre(cfg.regular);
  const QuadratureRule& near = gauss_legendre(cfg.near);
  const QuadratureRule& telles = gauss_legendre(cfg.telles);
  const QuadratureRule& sst = gauss_legendre(cfg.sst);

  std::vector<std::vector<ElementSample>> reg_samples(ne), near_samples(ne);
  std::vector<double> lengths(ne, 0.0);
  for (std::size_t e = 0; e < ne; ++e) {
    const auto el = disc.element(e);
    for (double x : reg.points) reg_samples[e].push_back(el.sample(x));
    for (std::size_t g = 0; g < near.size(); ++g) {
      near_samples[e].push_back(el.sample(near.points[g]));
      lengths[e] += near.weights[g] * near_samples[e].back().jacobian();
    }
    near_samples[e].push_back(el.sample(-1.0));
    near_samples[e].push_back(el.sample(1.0));
  }

  for (std::size_t c = 0; c < colloc.size(); ++c) {
    const auto& cp = colloc[c];
    const auto row = static_cast<Eigen::Index>(2 * c);
    auto scatter = [&](Eigen::MatrixXd& M, std::size_t e, const ElementBlock& block) {
      const auto dofs = disc.element_dofs(e);
      for (std::size_t l = 0; l < dofs.size(); ++l) {
        M.block<2, 2>(row, static_cast<Eigen::Index>(2 * dofs[l])) += block.middleCols<2>(2 * l);
      }
    };
    auto scatter_g = [&](std::size_t e, const ElementBlock& block) {
      scatter(sys.G, e, block);
      const auto slots = disc.element_traction_slots(e);
      const std::size_t n = disc.dof_count();
      for (std::size_t l = 0; l < slots.size(); ++l) {
        if (slots[l] < n) continue;
        sys.G_right.block<2, 2>(row, static_cast<Eigen::Index>(2 * (slots[l] - n))) += block.middleCols<2>(2 * l);
      }
    };

    // Jump term C_ij(x') sum_l N_l(xi_hat') d_j^l on the owning element.
    const Owner& first = cp.owners.front();
    const Owner& last = cp.owners.back();
    const ElementSample at_first = disc.element(first.element).sample(first.xi_hat);
    const ElementSample at_last = disc.element(last.element).sample(last.xi_hat);
    const Mat2 C = kernel.jump(at_first.tangent.normalized(), at_last.tangent.normalized());
    {
      ElementBlock block = ElementBlock::Zero(2, 2 * static_cast<Eigen::Index>(at_first.count));
      for (std::size_t l = 0; l < at_first.count; ++l) block.middleCols<2>(2 * l) = C * at_first.shape[l];
      scatter(sys.H, first.element, block);
    }

    for (std::size_t e = 0; e < ne; ++e) {
      const auto owner = std::find_if(cp.owners.begin(), cp.owners.end(),
                                      [e](const Owner& o) { return o.element == e; });
      try {
        if (owner != cp.owners.end()) {
          const auto el = disc.element(e);
          scatter(sys.H, e, strong_singular_integral(cp.point, el, owner->xi_hat, sst, kernel));
          scatter_g(e, weak_singular_integral(cp.point, el, owner->xi_hat, telles, kernel));
          continue;
        }
        const bool is_near =
            detail::distance_to_samples(cp.point, near_samples[e]) <= cfg.near_factor * lengths[e];
        const auto blocks =
            is_near ? regular_element_integral(cp.point, std::span<const ElementSample>(near_samples[e]).first(near.size()), near, kernel)
                    : regular_element_integral(cp.point, std::span<const ElementSample>(reg_samples[e]), reg, kernel);
        scatter(sys.H, e, blocks.H);
        scatter_g(e, blocks.G);
      } catch (const Error& err) {
        std::ostringstream msg;
        msg << "integration failed for collocation point " << c << " (xi = " << cp.param
            << ") on element " << e << ": " << err.what();
        throw SolverError(msg.str());
      }
    }
  }
  return sys;
}

/// Turn range prescriptions into one unknown per coefficient and direction.
/// A displacement prescription takes precedence where ranges meet; the
/// unknown is then the traction on every side not prescribed, merged into
/// one value if both sides of a junction are free. Without a displacement
/// prescription each side keeps its own known traction.
template <BoundaryDiscretisation D>
Prescriptions resolve_boundary_conditions(const D& disc, std::span<const BoundaryCondition> bcs) {
  const std::size_t n = disc.dof_count();
  const auto junctions = disc.junction_dofs();
  const std::size_t ns = n + junctions.size();
  std::vector<std::vector<double>> disp(2 * n), trac(2 * ns);
  for (const auto& bc : bcs) {
    const auto fitted = disc.fit_range(bc.begin, bc.end,
                                       [&bc](double, const Vec2& normal) { return bc.field(normal); });
    for (const auto& f : fitted) {
      for (int j = 0; j < 2; ++j) {
        if (!bc.prescribes(j)) continue;
        if (bc.kind == BcKind::displacement) {
          disp[2 * f.dof + j].push_back(f.value[j]);
        } else {
          trac[2 * f.slot + j].push_back(f.value[j]);
        }
      }
    }
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto name = [](std::size_t a, int j) { return std::to_string(a) + (j == 0 ? " (x)" : " (y)"); };

  Prescriptions out;
  out.dofs.resize(2 * n);
  out.slots.resize(2 * ns);
  out.junction_dofs.assign(junctions.begin(), junctions.end());
  for (std::size_t s = 0; s < 2 * ns; ++s) {
    if (!trac[s].empty()) out.slots[s] = {true, mean(trac[s])};
  }
  for (std::size_t a = 0; a < n; ++a) {
    std::vector<std::size_t> slots{a};
    for (std::size_t k = 0; k < junctions.size(); ++k) {
      if (junctions[k] == a) slots.push_back(n + k);
    }
    for (int j = 0; j < 2; ++j) {
      const auto& dv = disp[2 * a + j];
      const bool any_free = std::any_of(slots.begin(), slots.end(),
                                        [&](std::size_t s) { return !out.slots[2 * s + j].known; });
      if (!dv.empty()) {
        const auto [lo, hi] = std::minmax_element(dv.begin(), dv.end());
        if (*hi - *lo > 1e-12 * std::max({1.0, std::abs(*lo), std::abs(*hi)})) {
          throw ModelError("conflicting displacement values prescribed on coefficient " + name(a, j));
        }
        if (!any_free) {
          throw ModelError("displacement and traction both prescribed on coefficient " + name(a, j));
        }
        out.dofs[2 * a + j] = {true, mean(dv)};
      } else if (any_free) {
        throw ModelError("no boundary condition covers coefficient " + name(a, j));
      }
    }
  }
  return out;
}

/// Rearrange H d = G q into A x = z. Unknown displacements keep their H
/// column; where the displacement is known the unknown is the traction on
/// the free slots, whose negated G columns go into A. Known values are
/// carried to the right-hand side.
inline void apply_bcs(DenseSystem& sys, Prescriptions p) {
  const std::size_t n = static_cast<std::size_t>(sys.H.cols()) / 2;
  if (p.dofs.size() != 2 * n || p.slots.size() != 2 * (n + sys.junction_dofs.size())) {
    throw ModelError("prescription count does not match the number of DOFs");
  }
  sys.prescriptions = std::move(p);
  const auto& pr = sys.prescriptions;
  sys.A.resize(sys.H.rows(), sys.H.cols());
  sys.z = Eigen::VectorXd::Zero(sys.H.rows());
  for (Eigen::Index k = 0; k < sys.H.cols(); ++k) {
    const auto& d = pr.dofs[static_cast<std::size_t>(k)];
    if (d.displacement_known) {
      sys.A.col(k).setZero();
      sys.z -= sys.H.col(k) * d.value;
    } else {
      sys.A.col(k) = sys.H.col(k);
    }
  }
  for (std::size_t s = 0; s < pr.slots.size() / 2; ++s) {
    const std::size_t a = s < n ? s : sys.junction_dofs[s - n];
    for (int j = 0; j < 2; ++j) {
      const auto& t = pr.slots[2 * s + j];
      if (t.known) {
        sys.z += sys.slot_column(s, j) * t.value;
      } else {
        sys.A.col(static_cast<Eigen::Index>(2 * a + j)) -= sys.slot_column(s, j);
      }
    }
  }
}

/// Reciprocal condition estimate (after column scaling) below which the
/// system is reported singular.
inline constexpr double kSingularRcond = 1e-11;

/// Dense LU solve with a rank check and a residual check. Columns are scaled
/// to unit norm first: A mixes H and G columns whose magnitudes differ by
/// the shear modulus.
inline Eigen::VectorXd solve_dense(const Eigen::MatrixXd& A, const Eigen::VectorXd& z) {
  if (A.rows() != A.cols() || A.rows() != z.size()) throw SolverError("system is not square");
  Eigen::VectorXd scale = A.colwise().norm().transpose();
  for (Eigen::Index k = 0; k < scale.size(); ++k) {
    if (!(scale[k] > 0.0) || !std::isfinite(scale[k])) {
      throw SolverError("system matrix column " + std::to_string(k) + " is zero or not finite");
    }
    scale[k] = 1.0 / scale[k];
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A * scale.asDiagonal());
  const double rcond = lu.rcond();
  if (!(rcond > kSingularRcond)) {
    std::ostringstream msg;
    msg << "system matrix is singular (rcond " << rcond
        << "); the boundary conditions leave a rigid-body mode unconstrained";
    throw SolverError(msg.str());
  }
  Eigen::VectorXd x = scale.asDiagonal() * lu.solve(z);
  const double zn = z.norm();
  const double res = (A * x - z).norm();
  if (zn > 0.0 && res > 1e-10 * zn) {
    throw SolverError("dense solve residual " + std::to_string(res / zn) + " exceeds 1e-10");
  }
  return x;
}

/// Boundary fields of a solved problem. Coefficients are not point values
/// for NURBS bases; evaluate the fields to obtain displacements/tractions.
template <BoundaryDiscretisation D>
class BoundarySolution {
 public:
  BoundarySolution(std::shared_ptr<const D> disc, Eigen::VectorXd d, Eigen::VectorXd q)
      : disc_(std::move(disc)), d_(std::move(d)), q_(std::move(q)) {}

  const D& discretisation() const { return *disc_; }
  const Eigen::VectorXd& displacement_coeffs() const { return d_; }
  const Eigen::VectorXd& traction_coeffs() const { return q_; }

  /// Fields at a curve parameter (left element at junctions).
  Vec2 displacement(double xi) const {
    const auto [e, xi_hat] = disc_->locate(xi);
    return displacement_on(e, xi_hat);
  }
  Vec2 traction(double xi) const {
    const auto [e, xi_hat] = disc_->locate(xi);
    return traction_on(e, xi_hat);
  }

  /// Field value on element e at parent coordinate xi_hat.
  Vec2 displacement_on(std::size_t e, double xi_hat) const {
    return interpolate_on(d_, disc_->element_dofs(e), e, xi_hat);
  }
  Vec2 traction_on(std::size_t e, double xi_hat) const {
    return interpolate_on(q_, disc_->element_traction_slots(e), e, xi_hat);
  }

 private:
  Vec2 interpolate_on(const Eigen::VectorXd& v, std::span<const std::size_t> index, std::size_t e,
                      double xi_hat) const {
    const auto s = disc_->element(e).sample(xi_hat);
    Vec2 out = Vec2::Zero();
    for (std::size_t l = 0; l < index.size(); ++l) {
      out += s.shape[l] * v.segment<2>(2 * static_cast<Eigen::Index>(index[l]));
    }
    return out;
  }

  std::shared_ptr<const D> disc_;
  Eigen::VectorXd d_;
  Eigen::VectorXd q_;
};

/// Scatter the solved unknowns and the prescribed values into the full
/// displacement vector (2n) and traction vector over all slots.
template <BoundaryDiscretisation D>
BoundarySolution<D> recover_solution(std::shared_ptr<const D> disc, const DenseSystem& sys,
                                     const Eigen::VectorXd& x) {
  const auto& pr = sys.prescriptions;
  const std::size_t n = pr.dofs.size() / 2;
  Eigen::VectorXd d(2 * n), q(pr.slots.size());
  for (std::size_t k = 0; k < 2 * n; ++k) {
    d[k] = pr.dofs[k].displacement_known ? pr.dofs[k].value : x[k];
  }
  for (std::size_t s = 0; s < pr.slots.size() / 2; ++s) {
    const std::size_t a = s < n ? s : pr.junction_dofs[s - n];
    for (std::size_t j = 0; j < 2; ++j) {
      const auto& t = pr.slots[2 * s + j];
      q[2 * s + j] = t.known ? t.value : x[2 * a + j];
    }
  }
  return BoundarySolution<D>(std::move(disc), std::move(d), std::move(q));
}

/// ||H d - G q|| relative to the larger of ||H d|| and ||G q||.
template <BoundaryDiscretisation D>
double bc_roundtrip_residual(const DenseSystem& sys, const BoundarySolution<D>& sol) {
  const Eigen::VectorXd hd = sys.H * sol.displacement_coeffs();
  const Eigen::VectorXd gq = sys.traction_product(sol.traction_coeffs());
  const double scale = std::max({hd.norm(), gq.norm(), std::numeric_limits<double>::min()});
  return (hd - gq).norm() / scale;
}

/// sqrt(int_Gamma |u|^2 dGamma) over the discretisation's own boundary.
template <BoundaryDiscretisation D>
double l2_norm(const BoundarySolution<D>& sol, int q = 12) {
  const auto& rule = gauss_legendre(q);
  const auto& disc = sol.discretisation();
  double sum = 0.0;
  for (std::size_t e = 0; e < disc.element_count(); ++e) {
    const auto el = disc.element(e);
    for (std::size_t g = 0; g < rule.size(); ++g) {
      const auto s = el.sample(rule.points[g]);
      sum += rule.weights[g] * sol.displacement_on(e, rule.points[g]).squaredNorm() * s.jacobian();
    }
  }
  return std::sqrt(sum);
}

/// sqrt(int_Gamma |f(xi, x)|^2 dGamma) along the exact NURBS boundary.
template <class Field>
double curve_l2(const NurbsCurve& curve, const Field& f, int q = 12) {
  const auto& rule = gauss_legendre(q);
  double sum = 0.0;
  for (const auto& r : element_ranges(curve.knots())) {
    const IgaElement el(curve, r);
    for (std::size_t g = 0; g < rule.size(); ++g) {
      const auto s = el.sample(rule.points[g]);
      const Vec2 v = f(r.param(rule.points[g]), s.point);
      sum += rule.weights[g] * v.squaredNorm() * s.jacobian();
    }
  }
  return std::sqrt(sum);
}

struct SolveDiagnostics {
  double solve_residual = 0.0;      // ||A x - z|| / ||z||
  double roundtrip_residual = 0.0;  // ||H d - G q|| relative
};

template <BoundaryDiscretisation D>
struct SolveResult {
  DenseSystem system;
  Eigen::VectorXd x;
  BoundarySolution<D> solution;
  SolveDiagnostics diagnostics;
};

/// Assemble, apply boundary conditions, solve and recover in one call.
template <BoundaryDiscretisation D>
SolveResult<D> solve_problem(std::shared_ptr<const D> disc, const Material& material,
                             std::span<const BoundaryCondition> bcs, const QuadratureConfig& cfg = {}) {
  material.validate();
  DenseSystem sys = assemble(*disc, KelvinKernel{material}, cfg);
  apply_bcs(sys, resolve_boundary_conditions(*disc, bcs));
  Eigen::VectorXd x = solve_dense(sys.A, sys.z);
  auto sol = recover_solution(disc, sys, x);
  SolveDiagnostics diag;
  const double zn = sys.z.norm();
  diag.solve_residual = zn > 0.0 ? (sys.A * x - sys.z).norm() / zn : (sys.A * x).norm();
  diag.roundtrip_residual = bc_roundtrip_residual(sys, sol);
  return {std::move(sys), std::move(x), std::move(sol), diag};
}

/// Conventional quadratic-element BEM on a mesh sampled from the curve.
inline SolveResult<LagrangeDiscretisation> conventional_solve(const LagrangeMesh& mesh, const Material& material,
                                                              std::span<const BoundaryCondition> bcs,
                                                              const QuadratureConfig& cfg = {}) {
  return solve_problem(std::make_shared<const LagrangeDiscretisation>(mesh), material, bcs, cfg);
}

}  // namespace igabem
