#pragma once

/// Fixtures and independent oracles shared by the test programs.

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "igabem/nurbs.hpp"
#include "igabem/solver.hpp"

namespace igabem::test {

/// Reactor boundary: 23 control points, quadratic, C0 at every knot.
inline NurbsCurve reactor_curve() {
  const double w = std::sqrt(2.0) / 2.0;
  const std::vector<std::array<double, 3>> p = {
      {0, 0, 1},     {20, 0, 1},    {40, 0, 1},    {40, 60, w},   {100, 60, 1},  {100, 80, 1},
      {100, 100, 1}, {72.5, 100, 1}, {45, 100, 1},  {45, 87.5, 1}, {45, 75, 1},   {35, 75, 1},
      {25, 75, 1},   {25, 57.5, 1}, {25, 40, 1},   {17.5, 40, 1}, {10, 40, 1},   {10, 27.5, 1},
      {10, 15, 1},   {5, 15, 1},    {0, 15, 1},    {0, 7.5, 1},   {0, 0, 1}};
  std::vector<ControlPoint> cps;
  for (const auto& a : p) cps.push_back({Vec2(a[0], a[1]), a[2]});
  std::vector<double> knots{0, 0, 0};
  for (int i = 1; i <= 10; ++i) knots.insert(knots.end(), {double(i), double(i)});
  knots.insert(knots.end(), {11, 11, 11});
  return NurbsCurve(2, knots, cps);
}

/// Symmetry on y = 0 and x = 100, pressure on the arc, free elsewhere.
inline std::vector<BoundaryCondition> reactor_bcs(double pressure) {
  return {{0, 1, BcKind::displacement, BcDirection::y, 0},  {0, 1, BcKind::traction, BcDirection::x, 0},
          {1, 2, BcKind::traction, BcDirection::normal, pressure},
          {2, 3, BcKind::displacement, BcDirection::x, 0},  {2, 3, BcKind::traction, BcDirection::y, 0},
          {3, 11, BcKind::traction, BcDirection::x, 0},     {3, 11, BcKind::traction, BcDirection::y, 0}};
}

/// Quarter annulus a <= r <= b, counter-clockwise from (a, 0).
inline NurbsCurve annulus_curve(double a, double b) {
  const double w = std::sqrt(2.0) / 2.0;
  const std::vector<std::array<double, 3>> p = {{a, 0, 1}, {(a + b) / 2, 0, 1}, {b, 0, 1},
                                                {b, b, w}, {0, b, 1},           {0, (a + b) / 2, 1},
                                                {0, a, 1}, {a, a, w},           {a, 0, 1}};
  std::vector<ControlPoint> cps;
  for (const auto& c : p) cps.push_back({Vec2(c[0], c[1]), c[2]});
  return NurbsCurve(2, {0, 0, 0, 1, 1, 2, 2, 3, 3, 4, 4, 4}, cps);
}

inline std::vector<BoundaryCondition> annulus_bcs(double pressure) {
  return {{0, 1, BcKind::displacement, BcDirection::y, 0}, {0, 1, BcKind::traction, BcDirection::x, 0},
          {1, 2, BcKind::traction, BcDirection::x, 0},     {1, 2, BcKind::traction, BcDirection::y, 0},
          {2, 3, BcKind::displacement, BcDirection::x, 0}, {2, 3, BcKind::traction, BcDirection::y, 0},
          {3, 4, BcKind::traction, BcDirection::normal, pressure}};
}

/// Thick-cylinder radial displacement written out independently of the
/// library: plane strain, E and nu.
inline double lame_ur(double r, double a, double b, double p, double E, double nu) {
  return p * a * a * (1.0 + nu) / (E * (b * b - a * a)) * ((1.0 - 2.0 * nu) * r + b * b / r);
}

/// Relative boundary L2 error of a solved quarter annulus (a = 1, b = 2,
/// p = 100, E = 200000, nu = 0.3) against the thick-cylinder solution,
/// integrated over the exact curve.
template <class D>
double lame_error(const BoundarySolution<D>& sol, const NurbsCurve& exact) {
  auto exact_u = [](const Vec2& x) {
    const double r = x.norm();
    return Vec2(x / r * lame_ur(r, 1.0, 2.0, 100.0, 200000.0, 0.3));
  };
  const auto& d = sol.discretisation();
  double err = 0.0;
  double ref = 0.0;
  const auto& rule = gauss_legendre(12);
  for (std::size_t e = 0; e < d.element_count(); ++e) {
    const auto range = d.element_range(e);
    for (std::size_t g = 0; g < rule.size(); ++g) {
      const double xi = range.param(rule.points[g]);
      const auto [span_e, xh] = detail::locate_in(element_ranges(exact.knots()), xi);
      const auto s = IgaElement(exact, element_ranges(exact.knots())[span_e]).sample(xh);
      const double w = rule.weights[g] * s.jacobian() * range.jacobian_parent() /
                       element_ranges(exact.knots())[span_e].jacobian_parent();
      const Vec2 u = exact_u(s.point);
      err += w * (sol.displacement_on(e, rule.points[g]) - u).squaredNorm();
      ref += w * u.squaredNorm();
    }
  }
  return std::sqrt(err / ref);
}

/// Cox-de Boor recursion evaluated literally for basis a (0/0 := 0). The
/// final parameter belongs to the last non-degenerate span.
inline double naive_bspline(const std::vector<double>& U, int p, std::size_t a, double xi) {
  if (p == 0) {
    const double last = U.back();
    if (xi == last) {
      std::size_t i = U.size() - 2;
      while (i > 0 && U[i] == U[i + 1]) --i;
      return a == i ? 1.0 : 0.0;
    }
    return U[a] <= xi && xi < U[a + 1] ? 1.0 : 0.0;
  }
  double v = 0.0;
  const double d1 = U[a + p] - U[a];
  const double d2 = U[a + p + 1] - U[a + 1];
  if (d1 > 0.0) v += (xi - U[a]) / d1 * naive_bspline(U, p - 1, a, xi);
  if (d2 > 0.0) v += (U[a + p + 1] - xi) / d2 * naive_bspline(U, p - 1, a + 1, xi);
  return v;
}

/// Full rational basis vector from the naive B-spline values.
inline std::vector<double> naive_nurbs(const NurbsCurve& c, double xi) {
  const auto& cps = c.control_points();
  std::vector<double> r(cps.size());
  double W = 0.0;
  for (std::size_t a = 0; a < cps.size(); ++a) {
    r[a] = naive_bspline(c.knots(), c.degree(), a, xi) * cps[a].weight;
    W += r[a];
  }
  for (double& v : r) v /= W;
  return r;
}

/// Random open knot vector on [0, 1] with n basis functions of degree p and
/// interior multiplicities at most p.
inline std::vector<double> random_open_knots(std::mt19937& rng, int p, int interior) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  std::uniform_int_distribution<int> mult(1, p);
  std::vector<double> in;
  while (static_cast<int>(in.size()) < interior) {
    const double k = std::round(u(rng) * 1000.0) / 1000.0;
    const int m = std::min(mult(rng), interior - static_cast<int>(in.size()));
    if (std::find(in.begin(), in.end(), k) != in.end()) continue;
    for (int i = 0; i < m; ++i) in.push_back(k);
  }
  std::sort(in.begin(), in.end());
  std::vector<double> U(p + 1, 0.0);
  U.insert(U.end(), in.begin(), in.end());
  U.insert(U.end(), p + 1, 1.0);
  return U;
}

inline NurbsCurve random_curve(std::mt19937& rng, int p, int interior) {
  const auto U = random_open_knots(rng, p, interior);
  std::uniform_real_distribution<double> c(-10.0, 10.0);
  std::uniform_real_distribution<double> w(0.3, 2.0);
  std::vector<ControlPoint> cps(U.size() - p - 1);
  for (auto& cp : cps) cp = {Vec2(c(rng), c(rng)), w(rng)};
  return NurbsCurve(p, U, cps);
}

}  // namespace igabem::test
