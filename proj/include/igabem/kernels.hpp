#pragma once

/// Kelvin fundamental solutions for 2D isotropic elastostatics, the corner
/// jump term, and the surface frame (normal and Jacobians) of a curve element.

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "igabem/errors.hpp"
#include "igabem/nurbs.hpp"

namespace igabem {

using Mat2 = Eigen::Matrix2d;

enum class Regime { plane_strain, plane_stress };

struct Material {
  double shear_modulus = 1.0;
  double poisson = 0.0;
  Regime regime = Regime::plane_strain;

  static Material from_youngs(double youngs, double poisson, Regime regime) {
    return {youngs / (2.0 * (1.0 + poisson)), poisson, regime};
  }

  /// nu for plane strain, nu / (1 + nu) for plane stress.
  double effective_poisson() const {
    return regime == Regime::plane_strain ? poisson : poisson / (1.0 + poisson);
  }

  void validate() const {
    if (!(shear_modulus > 0.0)) throw ModelError("shear modulus must be positive");
    if (!(poisson > -1.0 && poisson < 0.5)) throw ModelError("Poisson ratio must lie in (-1, 0.5)");
  }
};

namespace detail {

struct RayGeometry {
  double r;
  Vec2 dr;  // r_{,i}: unit vector from source to field point
};

inline RayGeometry ray(const Vec2& src, const Vec2& fld) {
  const Vec2 d = fld - src;
  const double r = d.norm();
  if (!(r > 0.0) || !std::isfinite(1.0 / r)) {
    throw SingularityError("kernel evaluated at coincident source and field points");
  }
  return {r, d / r};
}

}  // namespace detail

/// Displacement kernel U_ij(x', x).
inline Mat2 kelvin_U(const Vec2& src, const Vec2& fld, const Material& mat) {
  const auto [r, dr] = detail::ray(src, fld);
  const double nu = mat.effective_poisson();
  const double c = 1.0 / (8.0 * std::numbers::pi * mat.shear_modulus * (1.0 - nu));
  const double log_term = (3.0 - 4.0 * nu) * std::log(1.0 / r);
  Mat2 U;
  U(0, 0) = c * (log_term + dr.x() * dr.x());
  U(1, 1) = c * (log_term + dr.y() * dr.y());
  U(0, 1) = U(1, 0) = c * dr.x() * dr.y();
  return U;
}

/// Traction kernel T_ij(x', x) for the outward unit normal n at x.
inline Mat2 kelvin_T(const Vec2& src, const Vec2& fld, const Vec2& normal, const Material& mat) {
  const auto [r, dr] = detail::ray(src, fld);
  const double nu = mat.effective_poisson();
  const double c = -1.0 / (4.0 * std::numbers::pi * (1.0 - nu) * r);
  const double drdn = dr.dot(normal);
  const double a = 1.0 - 2.0 * nu;
  Mat2 T;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double delta = i == j ? 1.0 : 0.0;
      T(i, j) = c * (drdn * (a * delta + 2.0 * dr[i] * dr[j]) - a * (dr[i] * normal[j] - dr[j] * normal[i]));
    }
  }
  return T;
}

/// Jump term for a boundary point where the material occupies the wedge of
/// polar angles swept counter-clockwise from theta2 to theta1.
inline Mat2 jump_term(double theta1, double theta2, const Material& mat) {
  const double nu = mat.effective_poisson();
  const double c = 1.0 / (8.0 * std::numbers::pi * (1.0 - nu));
  const double diag = 4.0 * (1.0 - nu) * (theta1 - theta2);
  const double s = std::sin(2.0 * theta1) - std::sin(2.0 * theta2);
  const double off = std::cos(2.0 * theta2) - std::cos(2.0 * theta1);
  Mat2 C;
  C << c * (diag + s), c * off, c * off, c * (diag - s);
  return C;
}

/// Wedge angles from the tangents of the boundary arriving at and leaving a
/// collocation point on a counter-clockwise boundary. The material wedge runs
/// from the outgoing tangent to the reversed incoming tangent; a smooth point
/// gives theta1 - theta2 = pi.
inline std::pair<double, double> wedge_angles(const Vec2& tangent_before, const Vec2& tangent_after) {
  const Vec2 back = -tangent_before;
  const double theta2 = std::atan2(tangent_after.y(), tangent_after.x());
  double opening = std::atan2(tangent_after.x() * back.y() - tangent_after.y() * back.x(),
                              tangent_after.dot(back));
  if (opening <= 0.0) opening += 2.0 * std::numbers::pi;
  return {theta2 + opening, theta2};
}

inline Mat2 jump_term_from_tangents(const Vec2& tangent_before, const Vec2& tangent_after,
                                    const Material& mat) {
  const auto [theta1, theta2] = wedge_angles(tangent_before, tangent_after);
  return jump_term(theta1, theta2, mat);
}

/// Outward normal of a counter-clockwise boundary from a tangent vector.
inline Vec2 outward_normal(const Vec2& tangent) {
  return Vec2(tangent.y(), -tangent.x()).normalized();
}

struct SurfaceFrame {
  Vec2 point;
  Vec2 tangent_derivative;  // dx/dxi
  Vec2 normal;
  double jacobian_param = 0.0;   // dGamma/dxi
  double jacobian_parent = 0.0;  // dxi/dxi_hat
  double jacobian() const { return jacobian_param * jacobian_parent; }
};

inline SurfaceFrame surface_frame(const NurbsCurve& curve, const ElementRange& element, double xi_hat) {
  if (!(xi_hat >= -1.0 && xi_hat <= 1.0)) throw DomainError("parent coordinate outside [-1, 1]");
  const double xi = element.param(xi_hat);
  const auto w = nurbs_derivs_in_span(curve, element.span, xi, 1);
  SurfaceFrame f;
  f.point = curve_derivative(curve, w, 0);
  f.tangent_derivative = curve_derivative(curve, w, 1);
  f.jacobian_param = f.tangent_derivative.norm();
  f.jacobian_parent = element.jacobian_parent();
  if (!(f.jacobian_param > 0.0)) {
    throw GeometryError("zero tangent on element [" + std::to_string(element.begin) + ", " +
                        std::to_string(element.end) + "]");
  }
  f.normal = Vec2(f.tangent_derivative.y(), -f.tangent_derivative.x()) / f.jacobian_param;
  return f;
}

/// Kelvin kernel policy used by the element integrators.
struct KelvinKernel {
  Material material;

  Mat2 U(const Vec2& src, const Vec2& fld) const { return kelvin_U(src, fld, material); }
  Mat2 T(const Vec2& src, const Vec2& fld, const Vec2& normal) const {
    return kelvin_T(src, fld, normal, material);
  }
  /// lim (xi_hat - xi_hat') * T * J as the field point approaches the source
  /// along a curve with unit tangent t and normal n at the source.
  Mat2 T_laurent(const Vec2& t, const Vec2& n) const {
    const double nu = material.effective_poisson();
    const double c = (1.0 - 2.0 * nu) / (4.0 * std::numbers::pi * (1.0 - nu));
    Mat2 F;
    F << 0.0, c * (t.x() * n.y() - t.y() * n.x()), c * (t.y() * n.x() - t.x() * n.y()), 0.0;
    return F;
  }
  Mat2 jump(const Vec2& tangent_before, const Vec2& tangent_after) const {
    return jump_term_from_tangents(tangent_before, tangent_after, material);
  }
};

}  // namespace igabem
