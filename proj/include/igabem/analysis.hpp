#pragma once

/// Solve and convergence drivers on top of a BemModel, plus the CSV tables
/// they emit. All tables are deterministic for a fixed model and options.

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "igabem/lagrange.hpp"
#include "igabem/model_io.hpp"
#include "igabem/solver.hpp"

namespace igabem {

/// Shortest text that parses back to the same double.
inline std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct BoundarySample {
  double xi;
  Vec2 point;
  Vec2 displacement;
  Vec2 traction;
};

/// `per_element` evenly spaced samples on every element, ends included.
/// Junctions appear twice so a traction jump at a corner stays visible.
template <BoundaryDiscretisation D>
std::vector<BoundarySample> sample_boundary(const BoundarySolution<D>& sol, int per_element) {
  if (per_element < 2) throw ConfigError("need at least 2 samples per element");
  const auto& disc = sol.discretisation();
  std::vector<BoundarySample> out;
  for (std::size_t e = 0; e < disc.element_count(); ++e) {
    const auto r = disc.element_range(e);
    const auto el = disc.element(e);
    for (int k = 0; k < per_element; ++k) {
      const double xi_hat = -1.0 + 2.0 * k / (per_element - 1);
      out.push_back({r.param(xi_hat), el.sample(xi_hat).point, sol.displacement_on(e, xi_hat),
                     sol.traction_on(e, xi_hat)});
    }
  }
  return out;
}

struct SolveOptions {
  std::optional<Method> method;  // defaults to the model's method
  int h_refine = 0;
  int p_refine = 0;
  std::optional<int> quad_regular;
  std::optional<int> quad_singular;  // Telles and SST orders
  int samples = 11;                  // per element
};

struct SolveReport {
  Method method = Method::igabem;
  std::size_t elements = 0;
  std::size_t dofs = 0;  // 2 x coefficients
  SolveDiagnostics diagnostics;
  std::vector<BoundarySample> samples;
  double l2_norm = 0.0;
};

namespace detail {

inline QuadratureConfig quadrature_for(const BemModel& m, const SolveOptions& o) {
  QuadratureConfig q = m.solver.quadrature;
  if (o.quad_regular) q.regular = *o.quad_regular;
  if (o.quad_singular) q.telles = q.sst = *o.quad_singular;
  for (int v : {q.regular, q.telles, q.sst}) {
    if (v < 1 || v > kMaxGaussOrder) {
      throw ConfigError("quadrature order " + std::to_string(v) + " outside [1, " +
                        std::to_string(kMaxGaussOrder) + "]");
    }
  }
  return q;
}

/// Elements per knot span of the conventional mesh at refinement level l.
inline int lagrange_elements_per_span(int level) { return 1 << level; }

}  // namespace detail

/// sqrt(int |f|^2 dGamma) on the exact curve, each span split into `pieces`.
template <class Field>
double curve_l2_fine(const NurbsCurve& curve, const Field& f, int pieces, int q = 12) {
  const auto& rule = gauss_legendre(q);
  double sum = 0.0;
  for (const auto& span : element_ranges(curve.knots())) {
    for (int k = 0; k < pieces; ++k) {
      const double h = (span.end - span.begin) / pieces;
      const ElementRange r{span.begin + k * h, k + 1 == pieces ? span.end : span.begin + (k + 1) * h, span.span};
      const IgaElement el(curve, r);
      for (std::size_t g = 0; g < rule.size(); ++g) {
        const auto s = el.sample(rule.points[g]);
        const Vec2 v = f(r.param(rule.points[g]), s.point);
        sum += rule.weights[g] * v.squaredNorm() * s.jacobian();
      }
    }
  }
  return std::sqrt(sum);
}

/// Refine, assemble, solve and sample one model.
inline SolveReport run_solve(const BemModel& model, const SolveOptions& opts = {}) {
  const Method method = opts.method.value_or(model.solver.method);
  if (opts.h_refine < 0 || opts.p_refine < 0) throw ConfigError("refinement levels must be non-negative");
  if (method == Method::lagrange && opts.p_refine > 0) {
    throw ConfigError("p-refinement applies to the isogeometric method only");
  }
  const QuadratureConfig q = detail::quadrature_for(model, opts);
  BemModel m = refine_model(model, RefineStrategy::h, opts.h_refine);
  m = refine_model(std::move(m), RefineStrategy::p, opts.p_refine);

  SolveReport rep;
  rep.method = method;
  auto finish = [&](const auto& res, const auto& disc) {
    rep.elements = disc->element_count();
    rep.dofs = 2 * disc->dof_count();
    rep.diagnostics = res.diagnostics;
    rep.samples = sample_boundary(res.solution, opts.samples);
    rep.l2_norm = curve_l2(m.curve, [&](double xi, const Vec2&) { return res.solution.displacement(xi); });
  };
  if (method == Method::igabem) {
    auto disc = std::make_shared<const IgaDiscretisation>(m.curve);
    finish(solve_problem(disc, m.material, m.bcs, q), disc);
  } else {
    auto disc = std::make_shared<const LagrangeDiscretisation>(generate_mesh(m.curve, 1));
    finish(solve_problem(disc, m.material, m.bcs, q), disc);
  }
  return rep;
}

/// xi, x, y, u_x, u_y, t_x, t_y
inline std::string boundary_csv(const SolveReport& rep) {
  std::ostringstream os;
  os << "xi,x,y,u_x,u_y,t_x,t_y\n";
  for (const auto& s : rep.samples) {
    os << format_number(s.xi) << ',' << format_number(s.point.x()) << ',' << format_number(s.point.y()) << ','
       << format_number(s.displacement.x()) << ',' << format_number(s.displacement.y()) << ','
       << format_number(s.traction.x()) << ',' << format_number(s.traction.y()) << '\n';
  }
  return os.str();
}

/// Undeformed and deformed boundary polylines (displacement scaled by `factor`).
inline std::string deformed_csv(const SolveReport& rep, double factor) {
  std::ostringstream os;
  os << "xi,x,y,x_deformed,y_deformed\n";
  for (const auto& s : rep.samples) {
    const Vec2 d = s.point + factor * s.displacement;
    os << format_number(s.xi) << ',' << format_number(s.point.x()) << ',' << format_number(s.point.y()) << ','
       << format_number(d.x()) << ',' << format_number(d.y()) << '\n';
  }
  return os.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
}

struct ConvergenceRecord {
  Method method = Method::igabem;
  int level = 0;
  std::size_t dofs = 0;
  double l2_norm = 0.0;
  double relative_error = 0.0;
  double wall_time = 0.0;  // seconds
};

struct ConvergenceOptions {
  int levels = 3;  // refinement levels 0 .. levels-1
  std::vector<Method> methods{Method::igabem, Method::lagrange};
  /// Level of the conventional reference solve used when the model has no
  /// analytic reference; defaults to two levels beyond the finest.
  std::optional<int> reference_level;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRecord> records;
  std::string reference;  // description of the reference solution
};

/// h-refinement study. Errors are relative L2 displacement errors on the
/// exact boundary against the analytic solution when the model declares one,
/// otherwise against a fine conventional solve shared by all methods.
inline ConvergenceStudy run_convergence(const BemModel& model, const ConvergenceOptions& opts = {}) {
  if (opts.levels < 1) throw ConfigError("at least one refinement level is required");
  if (opts.methods.empty()) throw ConfigError("no methods requested");
  const QuadratureConfig q = model.solver.quadrature;
  const int finest = opts.levels - 1;
  const int ref_level = opts.reference_level.value_or(finest + 2);
  const int pieces = detail::lagrange_elements_per_span(std::max(finest, ref_level));

  ConvergenceStudy study;
  std::function<Vec2(double, const Vec2&)> u_ref;
  std::shared_ptr<const LagrangeDiscretisation> ref_disc;
  std::optional<BoundarySolution<LagrangeDiscretisation>> ref_sol;
  if (model.reference) {
    const LameReference lame = *model.reference;
    const Material mat = model.material;
    u_ref = [lame, mat](double, const Vec2& x) { return lame.displacement(x, mat); };
    study.reference = "analytic";
  } else {
    ref_disc = std::make_shared<const LagrangeDiscretisation>(
        generate_mesh(model.curve, detail::lagrange_elements_per_span(ref_level)));
    ref_sol = solve_problem(ref_disc, model.material, model.bcs, q).solution;
    u_ref = [&ref_sol](double xi, const Vec2&) { return ref_sol->displacement(xi); };
    study.reference = "lagrange level " + std::to_string(ref_level) + " (" +
                      std::to_string(2 * ref_disc->dof_count()) + " dofs)";
  }
  const double ref_norm = curve_l2_fine(model.curve, u_ref, pieces);
  if (!(ref_norm > 0.0)) throw SolverError("reference solution is identically zero");

  for (Method method : opts.methods) {
    for (int level = 0; level <= finest; ++level) {
      const auto t0 = std::chrono::steady_clock::now();
      ConvergenceRecord rec;
      rec.method = method;
      rec.level = level;
      auto measure = [&](const auto& sol) {
        rec.l2_norm = curve_l2_fine(
            model.curve, [&](double xi, const Vec2&) { return sol.displacement(xi); }, pieces);
        rec.relative_error =
            curve_l2_fine(
                model.curve,
                [&](double xi, const Vec2& x) -> Vec2 { return sol.displacement(xi) - u_ref(xi, x); }, pieces) /
            ref_norm;
      };
      if (method == Method::igabem) {
        const BemModel m = refine_model(model, RefineStrategy::h, level);
        auto disc = std::make_shared<const IgaDiscretisation>(m.curve);
        rec.dofs = 2 * disc->dof_count();
        measure(solve_problem(disc, m.material, m.bcs, q).solution);
      } else {
        auto disc = std::make_shared<const LagrangeDiscretisation>(
            generate_mesh(model.curve, detail::lagrange_elements_per_span(level)));
        rec.dofs = 2 * disc->dof_count();
        measure(solve_problem(disc, model.material, model.bcs, q).solution);
      }
      rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      study.records.push_back(rec);
    }
  }
  return study;
}

/// Log-log interpolation of a method's error at a given DOF count; empty
/// outside the range covered by that method's records.
inline std::optional<double> error_at_dofs(const ConvergenceStudy& study, Method method, std::size_t dofs) {
  std::vector<const ConvergenceRecord*> rs;
  for (const auto& r : study.records) {
    if (r.method == method) rs.push_back(&r);
  }
  for (std::size_t i = 0; i < rs.size(); ++i) {
    if (rs[i]->dofs == dofs) return rs[i]->relative_error;
    if (i + 1 < rs.size() && rs[i]->dofs < dofs && dofs < rs[i + 1]->dofs) {
      const double x0 = std::log(static_cast<double>(rs[i]->dofs));
      const double x1 = std::log(static_cast<double>(rs[i + 1]->dofs));
      const double y0 = std::log(rs[i]->relative_error);
      const double y1 = std::log(rs[i + 1]->relative_error);
      const double t = (std::log(static_cast<double>(dofs)) - x0) / (x1 - x0);
      return std::exp(y0 + t * (y1 - y0));
    }
  }
  return std::nullopt;
}

/// method, level, dofs, l2_norm, relative_error [, wall_time]
inline std::string convergence_csv(const ConvergenceStudy& study, bool timings = false) {
  std::ostringstream os;
  os << "method,level,dofs,l2_norm,relative_error" << (timings ? ",wall_time" : "") << '\n';
  for (const auto& r : study.records) {
    os << to_string(r.method) << ',' << r.level << ',' << r.dofs << ',' << format_number(r.l2_norm) << ','
       << format_number(r.relative_error);
    if (timings) os << ',' << format_number(r.wall_time);
    os << '\n';
  }
  return os.str();
}

/// One row per DOF count reached by any method, with every method's error
/// at that count (exact or log-log interpolated; blank outside its range).
inline std::string comparison_csv(const ConvergenceStudy& study, const std::vector<Method>& methods) {
  std::vector<std::size_t> dofs;
  for (const auto& r : study.records) dofs.push_back(r.dofs);
  std::sort(dofs.begin(), dofs.end());
  dofs.erase(std::unique(dofs.begin(), dofs.end()), dofs.end());
  std::ostringstream os;
  os << "dofs";
  for (Method m : methods) os << ',' << to_string(m) << "_error";
  os << '\n';
  for (std::size_t n : dofs) {
    os << n;
    for (Method m : methods) {
      os << ',';
      if (const auto e = error_at_dofs(study, m, n)) os << format_number(*e);
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace igabem
