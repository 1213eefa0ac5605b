#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "igabem/kernels.hpp"
#include "igabem/quadrature.hpp"
#include "support.hpp"

using namespace igabem;
using std::numbers::pi;

namespace {

const Material kMat{1.0, 0.25, Regime::plane_strain};

/// Traction on a surface with normal n produced by the displacement field
/// u_j(x) = U_ij(src, x) of a unit load in direction i, by central
/// differences of U and Hooke's law.
Mat2 traction_by_differences(const Vec2& src, const Vec2& x, const Vec2& n, const Material& mat) {
  const double h = 1e-5;
  const double mu = mat.shear_modulus;
  const double nu = mat.effective_poisson();
  const double lambda = 2.0 * mu * nu / (1.0 - 2.0 * nu);
  Mat2 out;
  for (int i = 0; i < 2; ++i) {
    Mat2 grad;  // grad(j, k) = d u_j / d x_k
    for (int k = 0; k < 2; ++k) {
      Vec2 d = Vec2::Zero();
      d[k] = h;
      const Mat2 up = kelvin_U(src, x + d, mat);
      const Mat2 um = kelvin_U(src, x - d, mat);
      for (int j = 0; j < 2; ++j) grad(j, k) = (up(i, j) - um(i, j)) / (2 * h);
    }
    const Mat2 eps = 0.5 * (grad + grad.transpose());
    const Mat2 sigma = lambda * eps.trace() * Mat2::Identity() + 2.0 * mu * eps;
    out.row(i) = (sigma * n).transpose();
  }
  return out;
}

/// Jump term of a wedge from the T kernel on an arc of radius 1 inside the
/// material: the straight edges contribute equal and opposite amounts.
Mat2 jump_by_arc(double theta2, double theta1, const Material& mat) {
  const auto& rule = gauss_legendre(40);
  Mat2 sum = Mat2::Zero();
  const double half = 0.5 * (theta1 - theta2);
  for (std::size_t g = 0; g < rule.size(); ++g) {
    const double th = theta2 + half * (rule.points[g] + 1.0);
    const Vec2 x(std::cos(th), std::sin(th));
    sum += rule.weights[g] * half * kelvin_T(Vec2::Zero(), x, x, mat);
  }
  return -sum;
}

}  // namespace

TEST(KelvinU, ClosedFormAtKnownPoint) {
  const Mat2 U = kelvin_U(Vec2(0, 0), Vec2(3, 4), kMat);
  const double c = 1.0 / (8.0 * pi * 0.75);
  EXPECT_NEAR(U(0, 0), c * (2.0 * std::log(0.2) + 0.36), 1e-15);
  EXPECT_NEAR(U(1, 1), c * (2.0 * std::log(0.2) + 0.64), 1e-15);
  EXPECT_NEAR(U(0, 1), c * 0.48, 1e-15);
}

TEST(KelvinU, SymmetricAndReciprocal) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int t = 0; t < 20; ++t) {
    const Vec2 a(u(rng), u(rng));
    const Vec2 b(u(rng), u(rng));
    const Mat2 U = kelvin_U(a, b, kMat);
    EXPECT_NEAR(U(0, 1), U(1, 0), 1e-15);
    EXPECT_TRUE(U.isApprox(kelvin_U(b, a, kMat), 1e-14));
  }
}

TEST(KelvinU, CoincidentPointsThrow) {
  EXPECT_THROW(kelvin_U(Vec2(1, 2), Vec2(1, 2), kMat), SingularityError);
  EXPECT_THROW(kelvin_T(Vec2(1, 2), Vec2(1, 2), Vec2(1, 0), kMat), SingularityError);
}

TEST(KelvinT, MatchesHookeTractionOfU) {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-3, 3);
  for (const Material mat : {kMat, Material{2.5, 0.3, Regime::plane_strain}, Material{1.0, 0.3, Regime::plane_stress}}) {
    for (int t = 0; t < 10; ++t) {
      const Vec2 src(u(rng), u(rng));
      const Vec2 x = src + Vec2(u(rng), u(rng));
      const Vec2 n = Vec2(u(rng), u(rng)).normalized();
      const Mat2 T = kelvin_T(src, x, n, mat);
      const Mat2 ref = traction_by_differences(src, x, n, mat);
      EXPECT_LT((T - ref).norm(), 1e-6 * std::max(1.0, ref.norm()));
    }
  }
}

TEST(KelvinT, TangentialNormalGivesAntisymmetricKernel) {
  const Mat2 T = kelvin_T(Vec2(0, 0), Vec2(2, 0), Vec2(0, -1), kMat);
  EXPECT_NEAR(T(0, 0), 0.0, 1e-16);
  EXPECT_NEAR(T(1, 1), 0.0, 1e-16);
  EXPECT_NEAR(T(0, 1), -T(1, 0), 1e-16);
}

TEST(KelvinT, ClosedCircleAroundSourceIntegratesToMinusIdentity) {
  const auto& rule = gauss_legendre(32);
  Mat2 sum = Mat2::Zero();
  const Vec2 c(0.3, -0.7);
  const double R = 2.5;
  for (std::size_t g = 0; g < rule.size(); ++g) {
    const double th = pi * (rule.points[g] + 1.0);
    const Vec2 n(std::cos(th), std::sin(th));
    sum += rule.weights[g] * pi * R * kelvin_T(c, c + R * n, n, kMat);
  }
  EXPECT_LT((sum + Mat2::Identity()).norm(), 1e-13);
}

TEST(JumpTerm, SmoothPointIsHalfIdentity) {
  EXPECT_LT((jump_term(pi, 0.0, kMat) - 0.5 * Mat2::Identity()).norm(), 1e-15);
  EXPECT_LT((jump_term(1.0 + pi, 1.0, kMat) - 0.5 * Mat2::Identity()).norm(), 1e-15);
  const Mat2 C = jump_term_from_tangents(Vec2(1, 1), Vec2(2, 2), kMat);
  EXPECT_LT((C - 0.5 * Mat2::Identity()).norm(), 1e-15);
}

TEST(JumpTerm, MatchesArcIntegralForWedges) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> ang(-pi, pi);
  std::uniform_real_distribution<double> open(0.2, 2 * pi - 0.2);
  for (int t = 0; t < 20; ++t) {
    const double t2 = ang(rng);
    const double t1 = t2 + open(rng);
    EXPECT_LT((jump_term(t1, t2, kMat) - jump_by_arc(t2, t1, kMat)).norm(), 1e-13);
  }
}

TEST(JumpTerm, ReactorOriginCorner) {
  // Boundary arrives going down x = 0 and leaves along y = 0: a 90 degree wedge.
  const Mat2 C = jump_term_from_tangents(Vec2(0, -1), Vec2(1, 0), kMat);
  EXPECT_LT((C - jump_by_arc(0.0, pi / 2, kMat)).norm(), 1e-13);
  EXPECT_NEAR(C(0, 0), 0.25, 1e-15);
  EXPECT_NEAR(C(0, 1), 1.0 / (4.0 * pi * 0.75), 1e-15);
}

TEST(JumpTerm, ReentrantCorner) {
  // Boundary arrives going right and turns down: 270 degrees of material.
  const Mat2 C = jump_term_from_tangents(Vec2(1, 0), Vec2(0, -1), kMat);
  EXPECT_LT((C - jump_by_arc(-pi / 2, pi, kMat)).norm(), 1e-13);
  EXPECT_NEAR(C.trace(), 1.5, 1e-14);
}

TEST(Normals, OutwardForCounterClockwiseCircle) {
  EXPECT_TRUE(outward_normal(Vec2(0, 3)).isApprox(Vec2(1, 0)));
  EXPECT_TRUE(outward_normal(Vec2(-1, 0)).isApprox(Vec2(0, 1)));
}

TEST(Normals, ReactorArcPointsToTheHoleCentre) {
  const auto c = test::reactor_curve();
  const auto ranges = element_ranges(c.knots());
  const auto f = surface_frame(c, ranges[1], 0.0);
  const double s = std::sqrt(0.5);
  EXPECT_NEAR((f.point - Vec2(100 - 60 * s, 60 * s)).norm(), 0.0, 1e-10);
  EXPECT_NEAR((f.normal - Vec2(s, -s)).norm(), 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(f.jacobian_parent, 0.5);
  EXPECT_THROW(surface_frame(c, ranges[1], 1.5), DomainError);
}

TEST(Normals, StraightEdgeFrame) {
  const auto c = test::reactor_curve();
  const auto f = surface_frame(c, element_ranges(c.knots())[0], -0.5);
  EXPECT_TRUE(f.normal.isApprox(Vec2(0, -1)));
  EXPECT_NEAR(f.jacobian(), 20.0, 1e-12);
}

TEST(Material, PlaneStressUsesEffectivePoisson) {
  const Material ps{1.0, 0.3, Regime::plane_stress};
  EXPECT_NEAR(ps.effective_poisson(), 0.3 / 1.3, 1e-15);
  const Material pe{1.0, 0.3, Regime::plane_strain};
  EXPECT_EQ(pe.effective_poisson(), 0.3);
  const Material ps_as_strain{1.0, 0.3 / 1.3, Regime::plane_strain};
  EXPECT_TRUE(kelvin_U(Vec2(0, 0), Vec2(1, 2), ps).isApprox(kelvin_U(Vec2(0, 0), Vec2(1, 2), ps_as_strain)));
}

TEST(Material, FromYoungsAndValidation) {
  const auto m = Material::from_youngs(260.0, 0.3, Regime::plane_strain);
  EXPECT_DOUBLE_EQ(m.shear_modulus, 100.0);
  EXPECT_NO_THROW(m.validate());
  EXPECT_THROW((Material{0.0, 0.3}.validate()), ModelError);
  EXPECT_THROW((Material{1.0, 0.5}.validate()), ModelError);
  EXPECT_THROW((Material{1.0, -1.0}.validate()), ModelError);
}

TEST(Laurent, MatchesScaledKernelNearSource) {
  const KelvinKernel k{kMat};
  const Vec2 t = Vec2(3, 4).normalized();
  const Vec2 n(t.y(), -t.x());
  const double J = 2.0;
  const Mat2 F = k.T_laurent(t, n);
  for (double d : {1e-3, -1e-3}) {
    const Mat2 approx = k.T(Vec2(1, 1), Vec2(1, 1) + t * (J * d), n) * J * d;
    EXPECT_LT((approx - F).norm(), 1e-12);
  }
  EXPECT_NEAR(F(0, 1), -0.5 / (4.0 * pi * 0.75), 1e-15);
}
