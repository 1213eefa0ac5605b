// Command-line front end: solve, converge, info, refine.
//
// Exit codes: 0 success, 2 invalid model / options, 3 solver failure.

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "igabem/analysis.hpp"
#include "igabem/model_io.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;

std::vector<igabem::Method> parse_methods(const std::string& list) {
  std::vector<igabem::Method> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(igabem::parse_method(item));
  }
  if (out.empty()) throw igabem::ConfigError("no methods given");
  return out;
}

void print_info(const igabem::BemModel& m, std::ostream& os) {
  using namespace igabem;
  const auto& c = m.curve;
  const IgaDiscretisation disc(c);
  os << "model        " << (m.name.empty() ? "(unnamed)" : m.name) << '\n'
     << "degree       " << c.degree() << '\n'
     << "control pts  " << c.size() << '\n'
     << "closed       " << (c.closed() ? "yes" : "no") << '\n'
     << "elements     " << disc.element_count() << '\n'
     << "dofs         " << 2 * disc.dof_count() << '\n'
     << "signed area  " << format_number(signed_area(c)) << '\n'
     << "perimeter    " << format_number(perimeter(c)) << '\n'
     << "material     mu=" << format_number(m.material.shear_modulus)
     << " nu=" << format_number(m.material.poisson)
     << (m.material.regime == Regime::plane_strain ? " plane strain" : " plane stress") << "\n\n";

  os << "element  range              connectivity\n";
  const auto& t = disc.table();
  for (std::size_t e = 0; e < t.ranges.size(); ++e) {
    std::ostringstream range;
    range << '[' << format_number(t.ranges[e].begin) << ", " << format_number(t.ranges[e].end) << ']';
    os << std::left << std::setw(9) << e << std::setw(19) << range.str();
    for (std::size_t a : t.conn[e]) os << ' ' << a;
    os << '\n';
  }
  os << "\ncollocation  xi          x            y\n";
  const auto& col = disc.collocation();
  for (std::size_t i = 0; i < col.size(); ++i) {
    os << std::left << std::setw(13) << i << std::setw(12) << format_number(col[i].param) << std::setw(13)
       << format_number(col[i].point.x()) << format_number(col[i].point.y()) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Isogeometric boundary element solver for 2D elastostatics"};
  app.require_subcommand(1);

  std::string model_path;
  std::string out_dir = ".";

  auto* solve = app.add_subcommand("solve", "Solve a model and write boundary.csv and deformed.csv");
  std::string method;
  igabem::SolveOptions sopts;
  int quad_regular = 0;
  int quad_singular = 0;
  double exaggerate = 1.0;
  solve->add_option("model", model_path, "Model file")->required();
  solve->add_option("--method", method, "igabem or lagrange (default: the model's method)");
  solve->add_option("--h-refine", sopts.h_refine, "Uniform span bisections")->check(CLI::NonNegativeNumber);
  solve->add_option("--p-refine", sopts.p_refine, "Order elevations (after h-refinement)")
      ->check(CLI::NonNegativeNumber);
  solve->add_option("--quad-regular", quad_regular, "Gauss order for regular integrals");
  solve->add_option("--quad-singular", quad_singular, "Gauss order for the singular integrals");
  solve->add_option("--samples", sopts.samples, "Samples per element in the output tables");
  solve->add_option("--exaggerate", exaggerate, "Displacement scale for deformed.csv");
  solve->add_option("--out", out_dir, "Output directory");

  auto* converge = app.add_subcommand("converge", "h-refinement convergence study");
  int levels = 3;
  std::string methods = "igabem,lagrange";
  bool timings = false;
  converge->add_option("model", model_path, "Model file")->required();
  converge->add_option("--levels", levels, "Number of refinement levels (0 .. N-1)");
  converge->add_option("--methods", methods, "Comma-separated list of methods");
  converge->add_flag("--timings", timings, "Add wall-clock times to convergence.csv");
  converge->add_option("--out", out_dir, "Output directory");

  auto* info = app.add_subcommand("info", "Print element table, connectivity and collocation points");
  info->add_option("model", model_path, "Model file")->required();

  auto* refine = app.add_subcommand("refine", "Write a refined copy of a model");
  int h_levels = 0;
  int p_levels = 0;
  std::string refined_path;
  refine->add_option("model", model_path, "Model file")->required();
  refine->add_option("--h-refine", h_levels, "Uniform span bisections")->check(CLI::NonNegativeNumber);
  refine->add_option("--p-refine", p_levels, "Order elevations (after h-refinement)")
      ->check(CLI::NonNegativeNumber);
  refine->add_option("-o,--output", refined_path, "Output model file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    const igabem::BemModel model = igabem::load_model(model_path);
    const std::filesystem::path out(out_dir);

    if (*solve) {
      if (!method.empty()) sopts.method = igabem::parse_method(method);
      if (quad_regular > 0) sopts.quad_regular = quad_regular;
      if (quad_singular > 0) sopts.quad_singular = quad_singular;
      const auto rep = igabem::run_solve(model, sopts);
      igabem::write_text(out / "boundary.csv", igabem::boundary_csv(rep));
      igabem::write_text(out / "deformed.csv", igabem::deformed_csv(rep, exaggerate));
      std::cout << "method " << igabem::to_string(rep.method) << ", " << rep.elements << " elements, " << rep.dofs
                << " dofs\n"
                << "solve residual " << rep.diagnostics.solve_residual << ", round-trip residual "
                << rep.diagnostics.roundtrip_residual << '\n'
                << "L2 norm of displacement " << igabem::format_number(rep.l2_norm) << '\n'
                << "wrote " << (out / "boundary.csv").string() << " and " << (out / "deformed.csv").string()
                << '\n';
    } else if (*converge) {
      igabem::ConvergenceOptions copts;
      copts.levels = levels;
      copts.methods = parse_methods(methods);
      const auto study = igabem::run_convergence(model, copts);
      const std::string table = igabem::convergence_csv(study, timings);
      igabem::write_text(out / "convergence.csv", table);
      igabem::write_text(out / "comparison.csv", igabem::comparison_csv(study, copts.methods));
      std::cout << "reference: " << study.reference << '\n' << table;
    } else if (*info) {
      print_info(model, std::cout);
    } else if (*refine) {
      auto m = igabem::refine_model(model, igabem::RefineStrategy::h, h_levels);
      m = igabem::refine_model(std::move(m), igabem::RefineStrategy::p, p_levels);
      igabem::write_text(refined_path, igabem::write_model(m));
      std::cout << "wrote " << refined_path << " (degree " << m.curve.degree() << ", " << m.curve.size()
                << " control points)\n";
    }
  } catch (const igabem::SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const igabem::SingularityError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const igabem::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return 0;
}
