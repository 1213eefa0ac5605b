#pragma once

/// Model files: JSON documents (schema version 1) describing the boundary
/// curve, material, boundary conditions and solver settings.
///
///   {
///     "version": 1,
///     "name": "reactor",
///     "degree": 2,
///     "knots": [0, 0, 0, 1, 1, ...],
///     "control_points": [[0, 0, 1], [40, 60, "sqrt(2)/2"], ...],
///     "material": {"youngs_modulus": 200e3, "poisson": 0.3, "regime": "plane_strain"},
///     "boundary_conditions": [
///       {"param_range": [1, 2], "kind": "traction", "direction": "normal", "value": 10}
///     ],
///     "solver": {"method": "igabem", "quadrature": {"regular": 12}},
///     "reference": {"type": "lame", "centre": [0, 0], "inner_radius": 1,
///                   "outer_radius": 2, "pressure": 100}
///   }
///
/// Any number may be given as an expression string ("sqrt(2)/2", "3*pi/4").

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "igabem/errors.hpp"
#include "igabem/kernels.hpp"
#include "igabem/nurbs.hpp"
#include "igabem/quadrature.hpp"
#include "igabem/solver.hpp"

namespace igabem {

inline constexpr int kModelVersion = 1;

enum class Method { igabem, lagrange };

inline std::string to_string(Method m) { return m == Method::igabem ? "igabem" : "lagrange"; }

inline Method parse_method(std::string_view s) {
  if (s == "igabem") return Method::igabem;
  if (s == "lagrange") return Method::lagrange;
  throw ConfigError("unknown method '" + std::string(s) + "' (expected igabem or lagrange)");
}

/// Thick cylinder under internal pressure, centred at `centre`.
struct LameReference {
  Vec2 centre = Vec2::Zero();
  double inner_radius = 1.0;
  double outer_radius = 2.0;
  double pressure = 0.0;

  /// Radial displacement at radius r.
  double radial_displacement(double r, const Material& mat) const {
    const double a2 = inner_radius * inner_radius;
    const double b2 = outer_radius * outer_radius;
    const double nu = mat.effective_poisson();
    return pressure * a2 * r / (2.0 * mat.shear_modulus * (b2 - a2)) * (1.0 - 2.0 * nu + b2 / (r * r));
  }

  Vec2 displacement(const Vec2& x, const Material& mat) const {
    const Vec2 d = x - centre;
    const double r = d.norm();
    return radial_displacement(r, mat) * d / r;
  }
};

struct SolverSettings {
  Method method = Method::igabem;
  QuadratureConfig quadrature;
};

struct BemModel {
  std::string name;
  NurbsCurve curve;
  Material material;
  std::optional<double> youngs_modulus;  // set when the file gave E rather than mu
  std::vector<BoundaryCondition> bcs;
  SolverSettings solver;
  std::optional<LameReference> reference;
};

namespace detail {

/// Recursive-descent evaluator for numeric expressions.
class ExpressionParser {
 public:
  explicit ExpressionParser(std::string_view text) : s_(text) {}

  double parse() {
    const double v = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw ModelError("bad expression \"" + std::string(s_) + "\": " + why);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  double expr() {
    double v = term();
    for (;;) {
      if (eat('+')) {
        v += term();
      } else if (eat('-')) {
        v -= term();
      } else {
        return v;
      }
    }
  }

  double term() {
    double v = unary();
    for (;;) {
      if (eat('*')) {
        v *= unary();
      } else if (eat('/')) {
        v /= unary();
      } else {
        return v;
      }
    }
  }

  double unary() {
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    const double base = primary();
    if (eat('^')) return std::pow(base, unary());
    return base;
  }

  double primary() {
    skip();
    if (eat('(')) {
      const double v = expr();
      if (!eat(')')) fail("missing ')'");
      return v;
    }
    if (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string id(s_.substr(start, pos_ - start));
      if (id == "pi") return std::numbers::pi;
      static const std::map<std::string, double (*)(double)> functions = {
          {"sqrt", [](double x) { return std::sqrt(x); }}, {"sin", [](double x) { return std::sin(x); }},
          {"cos", [](double x) { return std::cos(x); }},   {"tan", [](double x) { return std::tan(x); }},
          {"exp", [](double x) { return std::exp(x); }},   {"log", [](double x) { return std::log(x); }},
          {"abs", [](double x) { return std::abs(x); }}};
      const auto it = functions.find(id);
      if (it == functions.end()) fail("unknown name '" + id + "'");
      if (!eat('(')) fail("expected '(' after " + id);
      const double arg = expr();
      if (!eat(')')) fail("missing ')'");
      return it->second(arg);
    }
    char* end = nullptr;
    const std::string rest(s_.substr(pos_));
    const double v = std::strtod(rest.c_str(), &end);
    const auto used = static_cast<std::size_t>(end - rest.c_str());
    if (used == 0) fail(pos_ < s_.size() ? "unexpected '" + std::string(1, s_[pos_]) + "'" : "unexpected end");
    pos_ += used;
    return v;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

using Json = nlohmann::json;

inline void check_keys(const Json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ModelError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ModelError("unknown key '" + key + "' in " + where);
    }
  }
}

inline const Json& require(const Json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ModelError("missing key '" + std::string(key) + "' in " + where);
  return *it;
}

inline double number(const Json& v, const std::string& where) {
  double out;
  if (v.is_number()) {
    out = v.get<double>();
  } else if (v.is_string()) {
    out = ExpressionParser(v.get<std::string>()).parse();
  } else {
    throw ModelError(where + " must be a number or an expression string");
  }
  if (!std::isfinite(out)) throw ModelError(where + " is not finite");
  return out;
}

inline int integer(const Json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ModelError(where + " must be an integer");
  return v.get<int>();
}

inline std::string text(const Json& v, const std::string& where) {
  if (!v.is_string()) throw ModelError(where + " must be a string");
  return v.get<std::string>();
}

inline std::size_t line_of(std::string_view doc, std::size_t byte) {
  const std::size_t end = std::min(byte, doc.size());
  return 1 + static_cast<std::size_t>(std::count(doc.begin(), doc.begin() + static_cast<std::ptrdiff_t>(end), '\n'));
}

inline BcKind parse_kind(const std::string& s, const std::string& where) {
  if (s == "displacement") return BcKind::displacement;
  if (s == "traction") return BcKind::traction;
  throw ModelError(where + ": kind must be displacement or traction, got '" + s + "'");
}

inline BcDirection parse_direction(const std::string& s, const std::string& where) {
  if (s == "x") return BcDirection::x;
  if (s == "y") return BcDirection::y;
  if (s == "normal") return BcDirection::normal;
  throw ModelError(where + ": direction must be x, y or normal, got '" + s + "'");
}

inline const char* kind_name(BcKind k) { return k == BcKind::displacement ? "displacement" : "traction"; }

inline const char* direction_name(BcDirection d) {
  switch (d) {
    case BcDirection::x: return "x";
    case BcDirection::y: return "y";
    case BcDirection::normal: return "normal";
  }
  return "x";
}

}  // namespace detail

/// Signed area enclosed by a closed curve, positive when counter-clockwise.
inline double signed_area(const NurbsCurve& curve, int q = 16) {
  const auto& rule = gauss_legendre(q);
  double a = 0.0;
  for (const auto& r : element_ranges(curve.knots())) {
    for (std::size_t g = 0; g < rule.size(); ++g) {
      const auto w = nurbs_derivs_in_span(curve, r.span, r.param(rule.points[g]), 1);
      const Vec2 x = curve_derivative(curve, w, 0);
      const Vec2 dx = curve_derivative(curve, w, 1);
      a += 0.5 * rule.weights[g] * r.jacobian_parent() * (x.x() * dx.y() - x.y() * dx.x());
    }
  }
  return a;
}

/// Arc length of the curve by Gauss quadrature on each element.
inline double perimeter(const NurbsCurve& curve, int q = 24) {
  const auto& rule = gauss_legendre(q);
  double len = 0.0;
  for (const auto& r : element_ranges(curve.knots())) {
    for (std::size_t g = 0; g < rule.size(); ++g) {
      const auto w = nurbs_derivs_in_span(curve, r.span, r.param(rule.points[g]), 1);
      len += rule.weights[g] * r.jacobian_parent() * curve_derivative(curve, w, 1).norm();
    }
  }
  return len;
}

/// Check closure, orientation, material and boundary-condition coverage.
/// Every element must receive exactly one prescription per direction.
inline void validate_model(const BemModel& m) {
  const auto& c = m.curve;
  if (!c.closed()) throw ModelError("boundary curve is not closed (first and last control points differ)");
  const double area = signed_area(c);
  if (!(area > 0.0)) {
    throw ModelError("boundary curve is oriented clockwise (signed area " + std::to_string(area) +
                     "); reverse the control point order");
  }
  m.material.validate();

  const auto ranges = element_ranges(c.knots());
  std::set<double> knot_values(c.knots().begin(), c.knots().end());
  for (std::size_t i = 0; i < m.bcs.size(); ++i) {
    const auto& bc = m.bcs[i];
    const std::string where = "boundary condition " + std::to_string(i);
    if (!(bc.begin < bc.end)) throw ModelError(where + ": empty parameter range");
    if (!knot_values.contains(bc.begin) || !knot_values.contains(bc.end)) {
      throw ModelError(where + ": range [" + std::to_string(bc.begin) + ", " + std::to_string(bc.end) +
                       "] does not start and end at knot values");
    }
    if (bc.kind == BcKind::displacement && bc.direction == BcDirection::normal) {
      throw ModelError(where + ": normal direction is only supported for tractions (pressure)");
    }
    if (!std::isfinite(bc.value)) throw ModelError(where + ": value is not finite");
  }
  for (const auto& r : ranges) {
    for (int j = 0; j < 2; ++j) {
      int count = 0;
      for (const auto& bc : m.bcs) {
        if (bc.begin <= r.begin && bc.end >= r.end && bc.prescribes(j)) ++count;
      }
      if (count != 1) {
        std::ostringstream msg;
        msg << "element [" << r.begin << ", " << r.end << "] has " << count << " boundary conditions in "
            << (j == 0 ? "x" : "y") << "; exactly one is required";
        throw ModelError(msg.str());
      }
    }
  }
  const auto& qc = m.solver.quadrature;
  for (int q : {qc.regular, qc.near, qc.telles, qc.sst}) {
    if (q < 1 || q > kMaxGaussOrder) {
      throw ConfigError("quadrature order " + std::to_string(q) + " outside [1, " +
                        std::to_string(kMaxGaussOrder) + "]");
    }
  }
  if (!(qc.near_factor >= 0.0)) throw ConfigError("near_factor must be non-negative");
}

/// Parse and validate a model document. Syntax errors carry the line number.
inline BemModel parse_model(std::string_view doc) {
  using detail::Json;
  Json root;
  try {
    root = Json::parse(doc.begin(), doc.end());
  } catch (const Json::parse_error& e) {
    std::string what = e.what();
    if (const auto p = what.find("parse error"); p != std::string::npos) what = what.substr(p);
    throw ParseError(what, detail::line_of(doc, e.byte == 0 ? 0 : e.byte - 1));
  }
  detail::check_keys(root, "model",
                     {"version", "name", "degree", "knots", "control_points", "material",
                      "boundary_conditions", "solver", "reference"});
  const int version = detail::integer(detail::require(root, "version", "model"), "version");
  if (version != kModelVersion) {
    throw ModelError("unsupported model version " + std::to_string(version) + " (expected " +
                     std::to_string(kModelVersion) + ")");
  }

  BemModel m;
  if (root.contains("name")) m.name = detail::text(root["name"], "name");

  const int degree = detail::integer(detail::require(root, "degree", "model"), "degree");
  const Json& jk = detail::require(root, "knots", "model");
  if (!jk.is_array()) throw ModelError("knots must be a list");
  std::vector<double> knots;
  for (std::size_t i = 0; i < jk.size(); ++i) knots.push_back(detail::number(jk[i], "knots[" + std::to_string(i) + "]"));
  const Json& jc = detail::require(root, "control_points", "model");
  if (!jc.is_array()) throw ModelError("control_points must be a list");
  std::vector<ControlPoint> cps;
  for (std::size_t i = 0; i < jc.size(); ++i) {
    const std::string where = "control_points[" + std::to_string(i) + "]";
    if (!jc[i].is_array() || jc[i].size() != 3) throw ModelError(where + " must be [x, y, w]");
    cps.push_back({Vec2(detail::number(jc[i][0], where), detail::number(jc[i][1], where)),
                   detail::number(jc[i][2], where)});
  }
  m.curve = NurbsCurve(degree, std::move(knots), std::move(cps));

  const Json& jm = detail::require(root, "material", "model");
  detail::check_keys(jm, "material", {"shear_modulus", "youngs_modulus", "poisson", "regime"});
  const double nu = detail::number(detail::require(jm, "poisson", "material"), "material.poisson");
  Regime regime = Regime::plane_strain;
  if (jm.contains("regime")) {
    const auto r = detail::text(jm["regime"], "material.regime");
    if (r == "plane_stress") {
      regime = Regime::plane_stress;
    } else if (r != "plane_strain") {
      throw ModelError("material.regime must be plane_strain or plane_stress, got '" + r + "'");
    }
  }
  const bool has_mu = jm.contains("shear_modulus");
  const bool has_e = jm.contains("youngs_modulus");
  if (has_mu == has_e) throw ModelError("material needs exactly one of shear_modulus and youngs_modulus");
  if (has_mu) {
    m.material = {detail::number(jm["shear_modulus"], "material.shear_modulus"), nu, regime};
  } else {
    m.youngs_modulus = detail::number(jm["youngs_modulus"], "material.youngs_modulus");
    m.material = Material::from_youngs(*m.youngs_modulus, nu, regime);
  }

  const Json& jb = detail::require(root, "boundary_conditions", "model");
  if (!jb.is_array()) throw ModelError("boundary_conditions must be a list");
  for (std::size_t i = 0; i < jb.size(); ++i) {
    const std::string where = "boundary_conditions[" + std::to_string(i) + "]";
    detail::check_keys(jb[i], where, {"param_range", "kind", "direction", "value"});
    const Json& pr = detail::require(jb[i], "param_range", where);
    if (!pr.is_array() || pr.size() != 2) throw ModelError(where + ".param_range must be [begin, end]");
    BoundaryCondition bc;
    bc.begin = detail::number(pr[0], where + ".param_range");
    bc.end = detail::number(pr[1], where + ".param_range");
    bc.kind = detail::parse_kind(detail::text(detail::require(jb[i], "kind", where), where + ".kind"), where);
    bc.direction = detail::parse_direction(
        detail::text(detail::require(jb[i], "direction", where), where + ".direction"), where);
    bc.value = detail::number(detail::require(jb[i], "value", where), where + ".value");
    m.bcs.push_back(bc);
  }

  if (root.contains("solver")) {
    const Json& js = root["solver"];
    detail::check_keys(js, "solver", {"method", "quadrature"});
    if (js.contains("method")) m.solver.method = parse_method(detail::text(js["method"], "solver.method"));
    if (js.contains("quadrature")) {
      const Json& jq = js["quadrature"];
      detail::check_keys(jq, "solver.quadrature", {"regular", "near", "telles", "sst", "near_factor"});
      auto& q = m.solver.quadrature;
      if (jq.contains("regular")) q.regular = detail::integer(jq["regular"], "quadrature.regular");
      if (jq.contains("near")) q.near = detail::integer(jq["near"], "quadrature.near");
      if (jq.contains("telles")) q.telles = detail::integer(jq["telles"], "quadrature.telles");
      if (jq.contains("sst")) q.sst = detail::integer(jq["sst"], "quadrature.sst");
      if (jq.contains("near_factor")) q.near_factor = detail::number(jq["near_factor"], "quadrature.near_factor");
    }
  }

  if (root.contains("reference")) {
    const Json& jr = root["reference"];
    detail::check_keys(jr, "reference", {"type", "centre", "inner_radius", "outer_radius", "pressure"});
    const auto type = detail::text(detail::require(jr, "type", "reference"), "reference.type");
    if (type != "lame") throw ModelError("reference.type must be lame, got '" + type + "'");
    LameReference ref;
    if (jr.contains("centre")) {
      const Json& c = jr["centre"];
      if (!c.is_array() || c.size() != 2) throw ModelError("reference.centre must be [x, y]");
      ref.centre = Vec2(detail::number(c[0], "reference.centre"), detail::number(c[1], "reference.centre"));
    }
    ref.inner_radius = detail::number(detail::require(jr, "inner_radius", "reference"), "reference.inner_radius");
    ref.outer_radius = detail::number(detail::require(jr, "outer_radius", "reference"), "reference.outer_radius");
    ref.pressure = detail::number(detail::require(jr, "pressure", "reference"), "reference.pressure");
    if (!(ref.inner_radius > 0.0 && ref.outer_radius > ref.inner_radius)) {
      throw ModelError("reference radii must satisfy 0 < inner_radius < outer_radius");
    }
    m.reference = ref;
  }

  validate_model(m);
  return m;
}

inline BemModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open model file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

/// Serialise a model. Numbers are written in shortest round-trip form, so
/// parse_model(write_model(m)) reproduces every value exactly.
inline std::string write_model(const BemModel& m) {
  using detail::Json;
  Json root = Json::object();
  root["version"] = kModelVersion;
  if (!m.name.empty()) root["name"] = m.name;
  root["degree"] = m.curve.degree();
  root["knots"] = m.curve.knots();
  Json cps = Json::array();
  for (const auto& cp : m.curve.control_points()) cps.push_back({cp.position.x(), cp.position.y(), cp.weight});
  root["control_points"] = cps;

  Json mat = Json::object();
  if (m.youngs_modulus) {
    mat["youngs_modulus"] = *m.youngs_modulus;
  } else {
    mat["shear_modulus"] = m.material.shear_modulus;
  }
  mat["poisson"] = m.material.poisson;
  mat["regime"] = m.material.regime == Regime::plane_strain ? "plane_strain" : "plane_stress";
  root["material"] = mat;

  Json bcs = Json::array();
  for (const auto& bc : m.bcs) {
    bcs.push_back({{"param_range", {bc.begin, bc.end}},
                   {"kind", detail::kind_name(bc.kind)},
                   {"direction", detail::direction_name(bc.direction)},
                   {"value", bc.value}});
  }
  root["boundary_conditions"] = bcs;

  const auto& q = m.solver.quadrature;
  root["solver"] = {{"method", to_string(m.solver.method)},
                    {"quadrature",
                     {{"regular", q.regular},
                      {"near", q.near},
                      {"telles", q.telles},
                      {"sst", q.sst},
                      {"near_factor", q.near_factor}}}};
  if (m.reference) {
    const auto& r = *m.reference;
    root["reference"] = {{"type", "lame"},
                         {"centre", {r.centre.x(), r.centre.y()}},
                         {"inner_radius", r.inner_radius},
                         {"outer_radius", r.outer_radius},
                         {"pressure", r.pressure}};
  }
  return root.dump(2) + "\n";
}

/// Bisect every non-degenerate knot span once.
inline NurbsCurve bisect_spans(const NurbsCurve& curve) {
  NurbsCurve out = curve;
  for (const auto& r : element_ranges(curve.knots())) out = insert_knot(out, 0.5 * (r.begin + r.end));
  return out;
}

enum class RefineStrategy { h, p };

/// h: bisect every span per level; p: one order elevation per level. The
/// parameterisation is unchanged, so boundary-condition ranges stay valid.
inline BemModel refine_model(BemModel m, RefineStrategy strategy, int levels) {
  if (levels < 0) throw ConfigError("refinement levels must be non-negative");
  for (int l = 0; l < levels; ++l) {
    m.curve = strategy == RefineStrategy::h ? bisect_spans(m.curve) : elevate_order(m.curve);
  }
  return m;
}

}  // namespace igabem
