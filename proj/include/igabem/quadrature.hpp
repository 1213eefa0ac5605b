#pragma once

/// Gauss-Legendre rules, the Telles cubic transformation, and the regular,
/// weakly singular and strongly singular element integrators.
///
/// Integrators work on any element exposing
///   ElementSample sample(double xi_hat) const;
///   std::size_t local_count() const;
/// and on any kernel policy exposing U, T and T_laurent (see KelvinKernel).
/// Element blocks are 2 x 2m matrices with column 2l + j for local basis l
/// and field direction j.

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "igabem/errors.hpp"
#include "igabem/kernels.hpp"

namespace igabem {

struct QuadratureRule {
  std::vector<double> points;
  std::vector<double> weights;
  std::size_t size() const noexcept { return points.size(); }
};

inline constexpr int kMaxGaussOrder = 64;

namespace detail {

inline QuadratureRule compute_gauss_legendre(int q) {
  QuadratureRule rule;
  rule.points.resize(q);
  rule.weights.resize(q);
  for (int i = 0; i < (q + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= q; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = q * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.points[i] = -x;
    rule.points[q - 1 - i] = x;
    rule.weights[i] = rule.weights[q - 1 - i] = w;
  }
  if (q % 2 == 1) rule.points[q / 2] = 0.0;
  return rule;
}

}  // namespace detail

/// q-point Gauss-Legendre rule on [-1, 1]. Rules are built once and shared.
inline const QuadratureRule& gauss_legendre(int q) {
  if (q < 1 || q > kMaxGaussOrder) {
    throw ConfigError("Gauss-Legendre order " + std::to_string(q) + " outside [1, " +
                      std::to_string(kMaxGaussOrder) + "]");
  }
  static const std::array<QuadratureRule, kMaxGaussOrder + 1> rules = [] {
    std::array<QuadratureRule, kMaxGaussOrder + 1> r;
    for (int k = 1; k <= kMaxGaussOrder; ++k) r[k] = detail::compute_gauss_legendre(k);
    return r;
  }();
  return rules[q];
}

/// Image gamma' of the singular point under the Telles cubic map.
inline double telles_gamma(double xi_hat_src) {
  const double e = xi_hat_src * xi_hat_src - 1.0;
  return std::cbrt(xi_hat_src * e + std::abs(e)) + std::cbrt(xi_hat_src * e - std::abs(e)) + xi_hat_src;
}

struct TellesPoint {
  double xi_hat;
  double jacobian;  // dxi_hat / dgamma
};

/// Telles map gamma -> xi_hat for a singularity at xi_hat_src.
inline TellesPoint telles_map(double gamma, double xi_hat_src) {
  const double g = telles_gamma(xi_hat_src);
  const double denom = 1.0 + 3.0 * g * g;
  const double d = gamma - g;
  return {(d * d * d + g * (g * g + 3.0)) / denom, 3.0 * d * d / denom};
}

inline constexpr std::size_t kMaxLocal = kMaxDegree + 1;

/// Geometry and shape values of an element at one parent coordinate.
struct ElementSample {
  Vec2 point = Vec2::Zero();
  Vec2 tangent = Vec2::Zero();  // dx/dxi_hat
  std::array<double, kMaxLocal> shape{};
  std::size_t count = 0;

  double jacobian() const { return tangent.norm(); }
  Vec2 normal() const { return Vec2(tangent.y(), -tangent.x()) / tangent.norm(); }
};

using ElementBlock = Eigen::Matrix<double, 2, Eigen::Dynamic>;

struct ElementBlocks {
  ElementBlock H;
  ElementBlock G;
};

namespace detail {

template <class Kernel>
void add_regular_sample(const Vec2& src, const ElementSample& s, double w, const Kernel& kernel,
                        ElementBlock* H, ElementBlock* G) {
  const double J = s.jacobian();
  if (H != nullptr) {
    const Mat2 T = kernel.T(src, s.point, s.normal()) * (w * J);
    for (std::size_t l = 0; l < s.count; ++l) H->middleCols<2>(2 * l) += T * s.shape[l];
  }
  if (G != nullptr) {
    const Mat2 U = kernel.U(src, s.point) * (w * J);
    for (std::size_t l = 0; l < s.count; ++l) G->middleCols<2>(2 * l) += U * s.shape[l];
  }
}

}  // namespace detail

/// Gauss sum over precomputed samples (one per rule point).
template <class Kernel>
ElementBlocks regular_element_integral(const Vec2& src, std::span<const ElementSample> samples,
                                       const QuadratureRule& rule, const Kernel& kernel) {
  const auto m = static_cast<Eigen::Index>(samples.empty() ? 0 : samples.front().count);
  ElementBlocks out{ElementBlock::Zero(2, 2 * m), ElementBlock::Zero(2, 2 * m)};
  for (std::size_t g = 0; g < rule.size(); ++g) {
    detail::add_regular_sample(src, samples[g], rule.weights[g], kernel, &out.H, &out.G);
  }
  return out;
}

template <class Element, class Kernel>
ElementBlocks regular_element_integral(const Vec2& src, const Element& element,
                                       const QuadratureRule& rule, const Kernel& kernel) {
  std::vector<ElementSample> samples;
  samples.reserve(rule.size());
  for (double x : rule.points) samples.push_back(element.sample(x));
  return regular_element_integral(src, std::span<const ElementSample>(samples), rule, kernel);
}

/// U-kernel block for a source lying on the element at xi_hat_src. Telles
/// transformation in gamma, split at gamma' so no rule point sits on it.
template <class Element, class Kernel>
ElementBlock weak_singular_integral(const Vec2& src, const Element& element, double xi_hat_src,
                                    const QuadratureRule& rule, const Kernel& kernel) {
  const auto m = static_cast<Eigen::Index>(element.local_count());
  ElementBlock G = ElementBlock::Zero(2, 2 * m);
  const double g0 = telles_gamma(xi_hat_src);
  const double denom = 1.0 + 3.0 * g0 * g0;
  for (const auto& [a, b] : {std::pair{-1.0, g0}, std::pair{g0, 1.0}}) {
    if (!(b - a > 1e-14)) continue;
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t g = 0; g < rule.size(); ++g) {
      const double gamma = mid + half * rule.points[g];
      const double d = gamma - g0;
      const double xi_hat = (d * d * d + g0 * (g0 * g0 + 3.0)) / denom;
      const double jac = 3.0 * d * d / denom;
      detail::add_regular_sample(src, element.sample(xi_hat), rule.weights[g] * half * jac, kernel,
                                 nullptr, &G);
    }
  }
  return G;
}

/// Laurent coefficient F and source sample used by the singularity subtraction.
struct SingularPart {
  ElementSample source;
  Mat2 F;
};

template <class Element, class Kernel>
SingularPart singular_part(const Element& element, double xi_hat_src, const Kernel& kernel) {
  const ElementSample s0 = element.sample(xi_hat_src);
  const Vec2 t = s0.tangent / s0.jacobian();
  return {s0, kernel.T_laurent(t, s0.normal())};
}

/// Regular remainder T N J - F N(xi_hat') / (xi_hat - xi_hat') of the strongly
/// singular integrand at one parent coordinate.
template <class Element, class Kernel>
ElementBlock sst_remainder(const Vec2& src, const Element& element, const SingularPart& sp,
                           double xi_hat_src, double xi_hat, const Kernel& kernel) {
  const auto m = static_cast<Eigen::Index>(element.local_count());
  ElementBlock R = ElementBlock::Zero(2, 2 * m);
  const ElementSample s = element.sample(xi_hat);
  const Mat2 TJ = kernel.T(src, s.point, s.normal()) * s.jacobian();
  const Mat2 Fs = sp.F / (xi_hat - xi_hat_src);
  for (std::size_t l = 0; l < s.count; ++l) {
    R.middleCols<2>(2 * l) = TJ * s.shape[l] - Fs * sp.source.shape[l];
  }
  return R;
}

/// Cauchy principal value of the T-kernel block for a source on the element
/// (singularity subtraction). The remainder is integrated by Gauss on each
/// side of the source; the subtracted term is integrated analytically. For a
/// source at an element end the principal value only exists in combination
/// with the neighbouring element; each side contributes +-ln(2 J) where J is
/// the one-sided parent Jacobian, so the sum over both sides is exact.
template <class Element, class Kernel>
ElementBlock strong_singular_integral(const Vec2& src, const Element& element, double xi_hat_src,
                                      const QuadratureRule& rule, const Kernel& kernel) {
  const auto m = static_cast<Eigen::Index>(element.local_count());
  ElementBlock H = ElementBlock::Zero(2, 2 * m);
  const SingularPart sp = singular_part(element, xi_hat_src, kernel);
  for (const auto& [a, b] : {std::pair{-1.0, xi_hat_src}, std::pair{xi_hat_src, 1.0}}) {
    if (!(b - a > 1e-14)) continue;
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t g = 0; g < rule.size(); ++g) {
      const double x = mid + half * rule.points[g];
      H += (rule.weights[g] * half) * sst_remainder(src, element, sp, xi_hat_src, x, kernel);
    }
  }
  double log_term;
  if (xi_hat_src >= 1.0) {
    log_term = -std::log(2.0 * sp.source.jacobian());
  } else if (xi_hat_src <= -1.0) {
    log_term = std::log(2.0 * sp.source.jacobian());
  } else {
    log_term = std::log((1.0 - xi_hat_src) / (1.0 + xi_hat_src));
  }
  for (std::size_t l = 0; l < sp.source.count; ++l) {
    H.middleCols<2>(2 * l) += sp.F * (sp.source.shape[l] * log_term);
  }
  return H;
}

}  // namespace igabem
