#pragma once

/// NURBS curve kernel: basis functions and derivatives, curve evaluation,
/// knot insertion, order elevation, element ranges, connectivity and
/// Greville abscissae.
///
/// Indices are 0-based throughout. A curve with n control points and degree
/// p carries n + p + 1 knots; the knot vector must be open (first and last
/// p + 1 knots repeated) with interior multiplicity at most p.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "igabem/errors.hpp"

namespace igabem {

using Vec2 = Eigen::Vector2d;

inline constexpr int kMaxDegree = 10;

struct ControlPoint {
  Vec2 position = Vec2::Zero();
  double weight = 1.0;
};

/// Values (and optionally derivatives) of the p + 1 basis functions that are
/// non-zero on one knot span. Row k holds the k-th derivative.
struct BasisWindow {
  std::size_t first = 0;  // global index of the first non-zero function
  int degree = 0;
  int order = 0;
  std::array<double, (kMaxDegree + 1) * (kMaxDegree + 1)> data;

  std::size_t size() const noexcept { return static_cast<std::size_t>(degree) + 1; }
  double& operator()(int k, std::size_t l) { return data[k * (degree + 1) + l]; }
  double operator()(int k, std::size_t l) const { return data[k * (degree + 1) + l]; }
  double operator[](std::size_t l) const { return (*this)(0, l); }
};

namespace detail {

inline std::size_t basis_count(std::span<const double> knots, int p) {
  return knots.size() - static_cast<std::size_t>(p) - 1;
}

}  // namespace detail

/// Index i of the knot span with knots[i] <= xi < knots[i+1]. The right end of
/// the domain is clamped into the last non-degenerate span.
inline std::size_t find_span(std::span<const double> knots, int p, double xi) {
  const std::size_t n = detail::basis_count(knots, p);
  const double lo = knots[p];
  const double hi = knots[n];
  if (!(xi >= lo && xi <= hi)) {
    throw DomainError("parameter " + std::to_string(xi) + " outside [" + std::to_string(lo) +
                      ", " + std::to_string(hi) + "]");
  }
  if (xi == hi) {
    std::size_t i = n - 1;
    while (i > static_cast<std::size_t>(p) && !(knots[i] < knots[i + 1])) --i;
    return i;
  }
  auto it = std::upper_bound(knots.begin() + p, knots.begin() + n + 1, xi);
  return static_cast<std::size_t>(it - knots.begin()) - 1;
}

/// B-spline basis values and derivatives up to order k on a given span
/// (Cox-de Boor triangle with the alpha recursion for derivatives).
/// Derivatives above p are zero.
inline BasisWindow bspline_derivs_in_span(std::span<const double> knots, int p, std::size_t span,
                                          double xi, int k) {
  if (p < 0 || p > kMaxDegree) throw ModelError("unsupported degree " + std::to_string(p));
  BasisWindow out;
  out.first = span - static_cast<std::size_t>(p);
  out.degree = p;
  out.order = std::min(k, kMaxDegree);
  const int nk = std::min(out.order, p);

  double ndu[kMaxDegree + 1][kMaxDegree + 1];
  double left[kMaxDegree + 1];
  double right[kMaxDegree + 1];
  ndu[0][0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = xi - knots[span + 1 - j];
    right[j] = knots[span + j] - xi;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu[j][r] = right[r + 1] + left[j - r];
      const double temp = ndu[r][j - 1] / ndu[j][r];
      ndu[r][j] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu[j][j] = saved;
  }
  for (int j = 0; j <= p; ++j) out(0, j) = ndu[j][p];

  double a[2][kMaxDegree + 1];
  for (int r = 0; r <= p; ++r) {
    int s1 = 0;
    int s2 = 1;
    a[0][0] = 1.0;
    for (int kk = 1; kk <= nk; ++kk) {
      double d = 0.0;
      const int rk = r - kk;
      const int pk = p - kk;
      if (r >= kk) {
        a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
        d = a[s2][0] * ndu[rk][pk];
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? kk - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
        d += a[s2][j] * ndu[rk + j][pk];
      }
      if (r <= pk) {
        a[s2][kk] = -a[s1][kk - 1] / ndu[pk + 1][r];
        d += a[s2][kk] * ndu[r][pk];
      }
      out(kk, r) = d;
      std::swap(s1, s2);
    }
  }
  double factor = p;
  for (int kk = 1; kk <= nk; ++kk) {
    for (int j = 0; j <= p; ++j) out(kk, j) *= factor;
    factor *= (p - kk);
  }
  for (int kk = nk + 1; kk <= out.order; ++kk) {
    for (int j = 0; j <= p; ++j) out(kk, j) = 0.0;
  }
  return out;
}

inline BasisWindow bspline_derivs(std::span<const double> knots, int p, double xi, int k) {
  return bspline_derivs_in_span(knots, p, find_span(knots, p, xi), xi, k);
}

inline BasisWindow bspline_basis(std::span<const double> knots, int p, double xi) {
  return bspline_derivs(knots, p, xi, 0);
}

class NurbsCurve {
 public:
  NurbsCurve() = default;

  NurbsCurve(int degree, std::vector<double> knots, std::vector<ControlPoint> control_points)
      : degree_(degree), knots_(std::move(knots)), cps_(std::move(control_points)) {
    validate();
    closed_ = detect_closure();
  }

  int degree() const noexcept { return degree_; }
  const std::vector<double>& knots() const noexcept { return knots_; }
  const std::vector<ControlPoint>& control_points() const noexcept { return cps_; }
  std::size_t size() const noexcept { return cps_.size(); }
  bool closed() const noexcept { return closed_; }
  double front() const { return knots_[degree_]; }
  double back() const { return knots_[cps_.size()]; }

  /// Diagonal of the control-point bounding box; the model length scale.
  double scale() const {
    Vec2 lo = cps_.front().position;
    Vec2 hi = lo;
    for (const auto& cp : cps_) {
      lo = lo.cwiseMin(cp.position);
      hi = hi.cwiseMax(cp.position);
    }
    return (hi - lo).norm();
  }

 private:
  void validate() const {
    if (degree_ < 1 || degree_ > kMaxDegree) {
      throw ModelError("degree must lie in [1, " + std::to_string(kMaxDegree) + "], got " +
                       std::to_string(degree_));
    }
    const std::size_t p = static_cast<std::size_t>(degree_);
    if (cps_.size() < p + 1) throw ModelError("need at least degree + 1 control points");
    if (knots_.size() != cps_.size() + p + 1) {
      throw ModelError("knot vector length " + std::to_string(knots_.size()) +
                       " != control points + degree + 1 = " + std::to_string(cps_.size() + p + 1));
    }
    for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
      if (!(knots_[i] <= knots_[i + 1])) throw ModelError("knot vector is not non-decreasing");
    }
    for (std::size_t i = 1; i <= p; ++i) {
      if (knots_[i] != knots_[0] || knots_[knots_.size() - 1 - i] != knots_.back()) {
        throw ModelError("knot vector is not open (end knots must repeat degree + 1 times)");
      }
    }
    if (!(knots_.front() < knots_.back())) throw ModelError("knot vector spans an empty domain");
    if (knots_[p + 1] == knots_.front() || knots_[cps_.size() - 1] == knots_.back()) {
      throw ModelError("end knots repeat more than degree + 1 times");
    }
    std::size_t run = 1;
    for (std::size_t i = p + 1; i < cps_.size(); ++i) {
      run = knots_[i] == knots_[i - 1] ? run + 1 : 1;
      if (run > p) throw ModelError("interior knot multiplicity exceeds the degree");
    }
    for (const auto& cp : cps_) {
      if (!(cp.weight > 0.0) || !std::isfinite(cp.weight)) {
        throw ModelError("control point weights must be positive");
      }
      if (!cp.position.allFinite()) throw ModelError("control point coordinates must be finite");
    }
  }

  bool detect_closure() const {
    const double tol = 1e-12 * std::max(scale(), 1e-300);
    return (cps_.front().position - cps_.back().position).norm() <= tol;
  }

  int degree_ = 0;
  std::vector<double> knots_;
  std::vector<ControlPoint> cps_;
  bool closed_ = false;
};

/// Rational basis derivatives from the B-spline ones:
/// R^(k) = (A^(k) - sum_{b=1..k} C(k,b) W^(b) R^(k-b)) / W.
inline BasisWindow nurbs_derivs_in_span(const NurbsCurve& curve, std::size_t span, double xi, int k) {
  const int p = curve.degree();
  BasisWindow ders = bspline_derivs_in_span(curve.knots(), p, span, xi, k);
  const auto& cps = curve.control_points();
  const std::size_t m = ders.size();

  std::array<double, kMaxDegree + 1> wd{};  // W^(j)
  for (int j = 0; j <= ders.order; ++j) {
    double s = 0.0;
    for (std::size_t l = 0; l < m; ++l) {
      ders(j, l) *= cps[ders.first + l].weight;  // A^(j)
      s += ders(j, l);
    }
    wd[j] = s;
  }
  BasisWindow out = ders;
  for (int j = 0; j <= ders.order; ++j) {
    for (std::size_t l = 0; l < m; ++l) {
      double v = ders(j, l);
      double binom = 1.0;
      for (int b = 1; b <= j; ++b) {
        binom = binom * (j - b + 1) / b;
        v -= binom * wd[b] * out(j - b, l);
      }
      out(j, l) = v / wd[0];
    }
  }
  return out;
}

inline BasisWindow nurbs_derivs(const NurbsCurve& curve, double xi, int k) {
  return nurbs_derivs_in_span(curve, find_span(curve.knots(), curve.degree(), xi), xi, k);
}

inline BasisWindow nurbs_basis(const NurbsCurve& curve, double xi) {
  return nurbs_derivs(curve, xi, 0);
}

/// k-th parametric derivative of the curve using a precomputed window.
inline Vec2 curve_derivative(const NurbsCurve& curve, const BasisWindow& w, int k = 0) {
  Vec2 x = Vec2::Zero();
  for (std::size_t l = 0; l < w.size(); ++l) {
    x += w(k, l) * curve.control_points()[w.first + l].position;
  }
  return x;
}

inline Vec2 eval_curve(const NurbsCurve& curve, double xi) {
  return curve_derivative(curve, nurbs_basis(curve, xi));
}

/// Insert one knot, keeping the curve geometrically and parametrically
/// unchanged. Works on homogeneous (w x, w y, w) coordinates.
inline NurbsCurve insert_knot(const NurbsCurve& curve, double xi_new) {
  const int p = curve.degree();
  const auto& U = curve.knots();
  if (!(xi_new > curve.front() && xi_new < curve.back())) {
    throw RefinementError("knot " + std::to_string(xi_new) + " is not strictly inside the domain");
  }
  const auto mult = std::count(U.begin(), U.end(), xi_new);
  if (mult + 1 > p) {
    throw RefinementError("inserting " + std::to_string(xi_new) +
                          " would raise its multiplicity above the degree");
  }
  const std::size_t k = find_span(U, p, xi_new);
  const auto& P = curve.control_points();
  const std::size_t n = P.size();

  auto homogeneous = [](const ControlPoint& cp) {
    return Eigen::Vector3d(cp.weight * cp.position.x(), cp.weight * cp.position.y(), cp.weight);
  };
  std::vector<ControlPoint> Q(n + 1);
  for (std::size_t a = 0; a <= n; ++a) {
    Eigen::Vector3d q;
    if (a + p <= k) {
      q = homogeneous(P[a]);
    } else if (a > k) {
      q = homogeneous(P[a - 1]);
    } else {
      const double alpha = (xi_new - U[a]) / (U[a + p] - U[a]);
      q = alpha * homogeneous(P[a]) + (1.0 - alpha) * homogeneous(P[a - 1]);
    }
    Q[a].weight = q.z();
    Q[a].position = q.head<2>() / q.z();
  }
  std::vector<double> knots(U.begin(), U.end());
  knots.insert(knots.begin() + static_cast<std::ptrdiff_t>(k) + 1, xi_new);
  return NurbsCurve(p, std::move(knots), std::move(Q));
}

struct ElementRange {
  double begin = 0.0;
  double end = 0.0;
  std::size_t span = 0;  // knot span index: knots[span] == begin
  double jacobian_parent() const { return 0.5 * (end - begin); }
  double param(double xi_hat) const { return begin + 0.5 * (xi_hat + 1.0) * (end - begin); }
  bool contains(double xi) const { return xi >= begin && xi <= end; }
};

/// One element per pair of consecutive distinct knot values.
inline std::vector<ElementRange> element_ranges(std::span<const double> knots) {
  std::vector<ElementRange> out;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    if (knots[i] < knots[i + 1]) out.push_back({knots[i], knots[i + 1], i});
  }
  return out;
}

/// Global basis indices non-zero on each element, ascending. For a closed
/// curve the last basis function is identified with the first.
inline std::vector<std::vector<std::size_t>> build_connectivity(std::span<const double> knots, int p,
                                                                bool closed) {
  const std::size_t n = detail::basis_count(knots, p);
  std::vector<std::vector<std::size_t>> conn;
  for (const auto& el : element_ranges(knots)) {
    std::vector<std::size_t> row;
    for (std::size_t a = el.span - p; a <= el.span; ++a) row.push_back(closed && a == n - 1 ? 0 : a);
    conn.push_back(std::move(row));
  }
  return conn;
}

/// Greville abscissae: the average of the p knots following each basis index.
inline std::vector<double> greville_abscissae(std::span<const double> knots, int p) {
  const std::size_t n = detail::basis_count(knots, p);
  std::vector<double> out(n);
  for (std::size_t a = 0; a < n; ++a) {
    double s = 0.0;
    for (int j = 1; j <= p; ++j) s += knots[a + j];
    out[a] = s / p;
  }
  return out;
}

struct ElementTable {
  std::vector<ElementRange> ranges;
  std::vector<std::vector<std::size_t>> conn;
};

inline ElementTable make_element_table(const NurbsCurve& curve) {
  return {element_ranges(curve.knots()),
          build_connectivity(curve.knots(), curve.degree(), curve.closed())};
}

/// Raise the degree by one. Every distinct knot gains one multiplicity; the
/// new homogeneous control points are recovered by interpolating the
/// (unchanged) homogeneous curve at the Greville points of the elevated
/// space, which contains it exactly.
inline NurbsCurve elevate_order(const NurbsCurve& curve) {
  const int p = curve.degree();
  if (p + 1 > kMaxDegree) throw RefinementError("degree limit reached");
  const auto& U = curve.knots();
  std::vector<double> knots;
  for (std::size_t i = 0; i < U.size(); ++i) {
    knots.push_back(U[i]);
    if (i + 1 == U.size() || U[i + 1] != U[i]) knots.push_back(U[i]);
  }
  const int q = p + 1;
  const std::size_t n = knots.size() - static_cast<std::size_t>(q) - 1;
  const auto params = greville_abscissae(knots, q);

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::MatrixXd rhs(static_cast<Eigen::Index>(n), 3);
  const auto& P = curve.control_points();
  for (std::size_t c = 0; c < n; ++c) {
    const auto bw = bspline_basis(knots, q, params[c]);
    for (std::size_t l = 0; l < bw.size(); ++l) M(c, bw.first + l) = bw[l];
    const auto old = bspline_basis(U, p, params[c]);
    Eigen::Vector3d h = Eigen::Vector3d::Zero();
    for (std::size_t l = 0; l < old.size(); ++l) {
      const auto& cp = P[old.first + l];
      h += old[l] * Eigen::Vector3d(cp.weight * cp.position.x(), cp.weight * cp.position.y(), cp.weight);
    }
    rhs.row(static_cast<Eigen::Index>(c)) = h.transpose();
  }
  const Eigen::MatrixXd sol = M.partialPivLu().solve(rhs);
  std::vector<ControlPoint> Q(n);
  for (std::size_t a = 0; a < n; ++a) {
    Q[a].weight = sol(a, 2);
    Q[a].position = Vec2(sol(a, 0), sol(a, 1)) / sol(a, 2);
  }
  // End points are interpolatory; pin them to avoid round-off drift.
  Q.front() = P.front();
  Q.back() = P.back();
  return NurbsCurve(q, std::move(knots), std::move(Q));
}

}  // namespace igabem
