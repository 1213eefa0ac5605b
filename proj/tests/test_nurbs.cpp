#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "igabem/nurbs.hpp"
#include "support.hpp"

using namespace igabem;
using igabem::test::reactor_curve;

namespace {

const std::vector<double> kUniform{0, 0, 0, 1, 2, 3, 4, 4, 4};

/// Sample parameters across the whole domain, ends included.
std::vector<double> samples(const NurbsCurve& c, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(c.front() + (c.back() - c.front()) * i / (n - 1));
  return out;
}

}  // namespace

TEST(FindSpan, InteriorParameter) {
  const auto i = find_span(kUniform, 2, 1.5);
  EXPECT_EQ(kUniform[i], 1.0);
  EXPECT_EQ(kUniform[i + 1], 2.0);
}

TEST(FindSpan, RightEndClampsToLastSpan) {
  const auto i = find_span(kUniform, 2, 4.0);
  EXPECT_EQ(kUniform[i], 3.0);
  EXPECT_EQ(kUniform[i + 1], 4.0);
}

TEST(FindSpan, SingleSpanCurve) {
  const std::vector<double> U{0, 0, 1, 1};
  EXPECT_EQ(find_span(U, 1, 0.0), 1u);
}

TEST(FindSpan, OutsideDomainThrows) {
  EXPECT_THROW(find_span(kUniform, 2, -0.1), DomainError);
  EXPECT_THROW(find_span(kUniform, 2, 4.1), DomainError);
}

TEST(BsplineBasis, LeftEndIsInterpolatory) {
  const auto w = bspline_basis(kUniform, 2, 0.0);
  EXPECT_EQ(w.first, 0u);
  EXPECT_DOUBLE_EQ(w[0], 1.0);
  EXPECT_DOUBLE_EQ(w[1], 0.0);
  EXPECT_DOUBLE_EQ(w[2], 0.0);
}

TEST(BsplineBasis, LinearHats) {
  const std::vector<double> U{0, 0, 1, 1};
  const auto w = bspline_basis(U, 1, 0.5);
  EXPECT_DOUBLE_EQ(w[0], 0.5);
  EXPECT_DOUBLE_EQ(w[1], 0.5);
}

TEST(BsplineBasis, MatchesNaiveRecursion) {
  const std::vector<double> U{0, 0, 0, 1, 2, 3, 3, 3};
  for (double xi : {0.0, 0.5, 1.0, 1.7, 2.5, 3.0}) {
    const auto w = bspline_basis(U, 2, xi);
    for (std::size_t a = 0; a + 3 < U.size(); ++a) {
      const double expect = test::naive_bspline(U, 2, a, xi);
      const double got = a >= w.first && a < w.first + w.size() ? w[a - w.first] : 0.0;
      EXPECT_NEAR(got, expect, 1e-15) << "a=" << a << " xi=" << xi;
    }
  }
}

TEST(BsplineDerivs, LinearSlope) {
  const std::vector<double> U{0, 0, 1, 1};
  for (double xi : {0.1, 0.5, 0.9}) EXPECT_DOUBLE_EQ(bspline_derivs(U, 1, xi, 1)(1, 0), -1.0);
}

TEST(BsplineDerivs, SumOfDerivativesVanishes) {
  for (double xi : {0.3, 1.2, 2.9, 3.5}) {
    const auto w = bspline_derivs(kUniform, 2, xi, 2);
    double s1 = 0.0;
    double s2 = 0.0;
    for (std::size_t l = 0; l < w.size(); ++l) {
      s1 += w(1, l);
      s2 += w(2, l);
    }
    EXPECT_NEAR(s1, 0.0, 1e-13);
    EXPECT_NEAR(s2, 0.0, 1e-12);
  }
}

TEST(BsplineDerivs, HigherThanDegreeAreZero) {
  const auto w = bspline_derivs(kUniform, 2, 1.3, 4);
  for (int k = 3; k <= 4; ++k) {
    for (std::size_t l = 0; l < w.size(); ++l) EXPECT_EQ(w(k, l), 0.0);
  }
}

TEST(BsplineDerivs, SecondDerivativeMatchesFiniteDifference) {
  const std::vector<double> U{0, 0, 0, 0, 0.4, 0.7, 1, 1, 1, 1};
  const double h = 1e-4;
  for (double xi : {0.2, 0.55, 0.85}) {
    const auto w = bspline_derivs(U, 3, xi, 2);
    const auto wp = bspline_derivs_in_span(U, 3, find_span(U, 3, xi), xi + h, 1);
    const auto wm = bspline_derivs_in_span(U, 3, find_span(U, 3, xi), xi - h, 1);
    for (std::size_t l = 0; l < w.size(); ++l) {
      EXPECT_NEAR(w(2, l), (wp(1, l) - wm(1, l)) / (2 * h), 1e-5 * std::max(1.0, std::abs(w(2, l))));
    }
  }
}

TEST(NurbsBasis, UnitWeightsReduceToBspline) {
  std::vector<ControlPoint> cps(6);
  for (std::size_t i = 0; i < cps.size(); ++i) cps[i].position = Vec2(double(i), std::sin(double(i)));
  const NurbsCurve c(2, kUniform, cps);
  for (double xi : {0.0, 0.4, 1.0, 2.2, 3.9, 4.0}) {
    const auto r = nurbs_derivs(c, xi, 1);
    const auto b = bspline_derivs(kUniform, 2, xi, 1);
    for (std::size_t l = 0; l < r.size(); ++l) {
      EXPECT_DOUBLE_EQ(r(0, l), b(0, l));
      EXPECT_NEAR(r(1, l), b(1, l), 1e-14);
    }
  }
}

TEST(NurbsBasis, PartitionOfUnityOnReactor) {
  const auto c = reactor_curve();
  for (double xi : samples(c, 97)) {
    const auto r = nurbs_basis(c, xi);
    double s = 0.0;
    for (std::size_t l = 0; l < r.size(); ++l) s += r[l];
    EXPECT_NEAR(s, 1.0, 1e-14);
  }
}

TEST(NurbsBasis, ReactorMidArcMatchesDirectRationalFormula) {
  const auto c = reactor_curve();
  for (double xi : {1.5, 1.25, 1.9}) {
    const auto r = nurbs_basis(c, xi);
    const auto full = test::naive_nurbs(c, xi);
    for (std::size_t a = 0; a < full.size(); ++a) {
      const double got = a >= r.first && a < r.first + r.size() ? r[a - r.first] : 0.0;
      EXPECT_NEAR(got, full[a], 1e-14);
    }
  }
}

TEST(NurbsDerivs, SumOfDerivativesVanishes) {
  const auto c = reactor_curve();
  for (double xi : {0.3, 1.5, 4.7, 10.2}) {
    const auto r = nurbs_derivs(c, xi, 2);
    double s1 = 0.0;
    double s2 = 0.0;
    for (std::size_t l = 0; l < r.size(); ++l) {
      s1 += r(1, l);
      s2 += r(2, l);
    }
    EXPECT_NEAR(s1, 0.0, 1e-13);
    EXPECT_NEAR(s2, 0.0, 1e-12);
  }
}

TEST(NurbsDerivs, ReactorMatchesFiniteDifference) {
  const auto c = reactor_curve();
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 11.0);
  const double h = 1e-6;
  for (int t = 0; t < 40; ++t) {
    double xi = u(rng);
    const double frac = xi - std::floor(xi);
    if (frac < 1e-3 || frac > 1 - 1e-3) continue;
    const std::size_t span = find_span(c.knots(), 2, xi);
    const auto r = nurbs_derivs_in_span(c, span, xi, 1);
    const auto rp = nurbs_derivs_in_span(c, span, xi + h, 0);
    const auto rm = nurbs_derivs_in_span(c, span, xi - h, 0);
    for (std::size_t l = 0; l < r.size(); ++l) {
      const double fd = (rp(0, l) - rm(0, l)) / (2 * h);
      EXPECT_NEAR(r(1, l), fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(EvalCurve, ReactorEndpoints) {
  const auto c = reactor_curve();
  EXPECT_EQ(eval_curve(c, 0.0), Vec2(0, 0));
  EXPECT_NEAR((eval_curve(c, 11.0) - Vec2(0, 0)).norm(), 0.0, 1e-15);
  EXPECT_TRUE(c.closed());
}

TEST(EvalCurve, ReactorArcIsQuarterCircle) {
  const auto c = reactor_curve();
  for (double xi : samples(c, 1101)) {
    if (xi < 1.0 || xi > 2.0) continue;
    EXPECT_NEAR((eval_curve(c, xi) - Vec2(100, 0)).norm(), 60.0, 1e-10);
  }
  EXPECT_NEAR((eval_curve(c, 1.5) - Vec2(100, 0)).norm(), 60.0, 1e-10);
}

TEST(EvalCurve, StraightElementsInterpolateControlPolygon) {
  const auto c = reactor_curve();
  EXPECT_NEAR((eval_curve(c, 0.5) - Vec2(20, 0)).norm(), 0.0, 1e-12);
  EXPECT_NEAR((eval_curve(c, 7.5) - Vec2(17.5, 40)).norm(), 0.0, 1e-12);
}

TEST(NurbsCurve, ConstructionValidates) {
  std::vector<ControlPoint> cps(6);
  EXPECT_THROW(NurbsCurve(2, {0, 0, 0, 1, 2, 3, 4, 4}, cps), ModelError);       // length
  EXPECT_THROW(NurbsCurve(2, {0, 0, 0, 2, 1, 3, 4, 4, 4}, cps), ModelError);    // decreasing
  EXPECT_THROW(NurbsCurve(2, {0, 0, 0.5, 1, 2, 3, 4, 4, 4}, cps), ModelError);  // not open
  EXPECT_THROW(NurbsCurve(2, {0, 0, 0, 1, 1, 1, 4, 4, 4}, cps), ModelError);    // multiplicity > p
  EXPECT_THROW(NurbsCurve(0, {0, 1}, std::vector<ControlPoint>(1)), ModelError);
  cps[2].weight = 0.0;
  EXPECT_THROW(NurbsCurve(2, kUniform, cps), ModelError);
  cps[2].weight = -1.0;
  EXPECT_THROW(NurbsCurve(2, kUniform, cps), ModelError);
}

TEST(InsertKnot, PreservesGeometryAndCounts) {
  const auto c = reactor_curve();
  const auto r = insert_knot(c, 0.5);
  EXPECT_EQ(r.size(), 24u);
  EXPECT_EQ(r.knots().size(), c.knots().size() + 1);
  EXPECT_TRUE(std::is_sorted(r.knots().begin(), r.knots().end()));
  for (double xi : samples(c, 64)) {
    EXPECT_NEAR((eval_curve(r, xi) - eval_curve(c, xi)).norm(), 0.0, 1e-12);
    const auto w = nurbs_basis(r, xi);
    double s = 0.0;
    for (std::size_t l = 0; l < w.size(); ++l) s += w[l];
    EXPECT_NEAR(s, 1.0, 1e-14);
  }
}

TEST(InsertKnot, OnCircularArcKeepsCircle) {
  const auto r = insert_knot(reactor_curve(), 1.3);
  for (int i = 0; i <= 50; ++i) {
    EXPECT_NEAR((eval_curve(r, 1.0 + i / 50.0) - Vec2(100, 0)).norm(), 60.0, 1e-10);
  }
}

TEST(InsertKnot, MultiplicityOverflowThrows) {
  EXPECT_THROW(insert_knot(reactor_curve(), 1.0), RefinementError);
  EXPECT_THROW(insert_knot(reactor_curve(), 0.0), RefinementError);
  EXPECT_THROW(insert_knot(reactor_curve(), 11.0), RefinementError);
}

TEST(ElevateOrder, PreservesGeometry) {
  const auto c = reactor_curve();
  const auto e = elevate_order(c);
  EXPECT_EQ(e.degree(), 3);
  for (double xi : samples(c, 128)) EXPECT_NEAR((eval_curve(e, xi) - eval_curve(c, xi)).norm(), 0.0, 1e-10);
  EXPECT_EQ(e.control_points().front().position, c.control_points().front().position);
  EXPECT_EQ(e.control_points().back().position, c.control_points().back().position);
}

TEST(ElevateOrder, KnotMultiplicitiesGrowByOne) {
  const auto c = reactor_curve();
  const auto e = elevate_order(c);
  for (double k = 0; k <= 11; k += 1) {
    EXPECT_EQ(std::count(e.knots().begin(), e.knots().end(), k), std::count(c.knots().begin(), c.knots().end(), k) + 1);
  }
  EXPECT_EQ(e.size(), c.size() + 11);
}

TEST(ElevateOrder, StraightSegmentStaysCollinear) {
  const NurbsCurve seg(1, {0, 0, 1, 1}, {{Vec2(1, 2), 1.0}, {Vec2(4, 6), 1.0}});
  const auto e = elevate_order(elevate_order(seg));
  EXPECT_EQ(e.degree(), 3);
  const Vec2 d = Vec2(3, 4).normalized();
  for (const auto& cp : e.control_points()) {
    const Vec2 v = cp.position - Vec2(1, 2);
    EXPECT_NEAR(v.x() * d.y() - v.y() * d.x(), 0.0, 1e-13);
  }
}

TEST(ElevateOrder, RandomCurvesPreserveGeometry) {
  std::mt19937 rng(11);
  for (int t = 0; t < 5; ++t) {
    const auto c = test::random_curve(rng, 1 + t % 3, 4);
    const auto e = elevate_order(c);
    for (double xi : samples(c, 50)) EXPECT_NEAR((eval_curve(e, xi) - eval_curve(c, xi)).norm(), 0.0, 1e-10);
  }
}

TEST(ElementRanges, UniqueConsecutivePairs) {
  const auto r = element_ranges(kUniform);
  ASSERT_EQ(r.size(), 4u);
  for (std::size_t e = 0; e < 4; ++e) {
    EXPECT_EQ(r[e].begin, double(e));
    EXPECT_EQ(r[e].end, double(e + 1));
  }
  EXPECT_EQ(element_ranges(std::vector<double>{0, 0, 1, 1}).size(), 1u);
  EXPECT_EQ(element_ranges(reactor_curve().knots()).size(), 11u);
}

TEST(Connectivity, ReactorRowsAndClosureWrap) {
  const auto c = reactor_curve();
  const auto conn = build_connectivity(c.knots(), 2, true);
  ASSERT_EQ(conn.size(), 11u);
  for (std::size_t e = 0; e < 10; ++e) {
    EXPECT_EQ(conn[e], (std::vector<std::size_t>{2 * e, 2 * e + 1, 2 * e + 2}));
  }
  EXPECT_EQ(conn[10], (std::vector<std::size_t>{20, 21, 0}));
}

TEST(Connectivity, RowsListTheNonZeroFunctions) {
  std::mt19937 rng(3);
  for (int t = 0; t < 5; ++t) {
    const auto c = test::random_curve(rng, 1 + t % 3, 5);
    const auto ranges = element_ranges(c.knots());
    const auto conn = build_connectivity(c.knots(), c.degree(), false);
    for (std::size_t e = 0; e < ranges.size(); ++e) {
      const double mid = 0.5 * (ranges[e].begin + ranges[e].end);
      for (std::size_t a = 0; a < c.size(); ++a) {
        const bool listed = std::find(conn[e].begin(), conn[e].end(), a) != conn[e].end();
        if (!listed) EXPECT_EQ(test::naive_bspline(c.knots(), c.degree(), a, mid), 0.0);
      }
    }
  }
}

TEST(Greville, OpenArcAndReactor) {
  EXPECT_EQ(greville_abscissae(std::vector<double>{0, 0, 0, 1, 1, 1}, 2), (std::vector<double>{0, 0.5, 1}));
  const auto g = greville_abscissae(reactor_curve().knots(), 2);
  ASSERT_EQ(g.size(), 23u);
  for (std::size_t a = 0; a < g.size(); ++a) EXPECT_DOUBLE_EQ(g[a], 0.5 * a);
}
