// Command-line front end: apply f(H), verify the spectral mapping, run
// refinement studies, and inspect the extension/bound machinery.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "hscalc/config.hpp"
#include "hscalc/hs_calculus.hpp"
#include "hscalc/matrix_io.hpp"
#include "hscalc/norms.hpp"
#include "hscalc/seeley.hpp"
#include "hscalc/smt.hpp"

namespace {

using namespace hscalc;

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  double tol = 0.0;  // 0 = keep config/default
  int levels = 0;
  std::string n_spec;  // "auto" or integer
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required = true) {
  auto* c = cmd->add_option("--config", opts.config_path, "structured config file");
  if (config_required) c->required();
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--tol", opts.tol, "override quadrature target tolerance");
  cmd->add_option("--levels", opts.levels, "override refinement levels");
  cmd->add_option("--n", opts.n_spec, "Taylor order: auto or an integer");
}

QuadratureSpec quad_from(const Config& cfg, const CommonOpts& opts) {
  QuadratureSpec q;
  if (cfg.has_section("quadrature")) q = quadrature_from_config(cfg.section("quadrature"));
  if (opts.tol > 0.0) q.target_tol = opts.tol;
  if (opts.levels > 0) q.refinement_levels = opts.levels;
  q.validate();
  return q;
}

int taylor_order(const Config& cfg, const CommonOpts& opts, const ResolventBound& bound) {
  if (!opts.n_spec.empty()) {
    if (opts.n_spec == "auto") return default_taylor_order(bound.alpha);
    return std::stoi(opts.n_spec);
  }
  if (cfg.has_section("quadrature"))
    return taylor_order_from_config(cfg.section("quadrature"), bound);
  return default_taylor_order(bound.alpha);
}

std::string out_path(const CommonOpts& opts, const std::string& name) {
  if (opts.out_dir.empty()) return name;
  std::filesystem::create_directories(opts.out_dir);
  return (std::filesystem::path(opts.out_dir) / name).string();
}

ExtendedElement extended_from(const Config& cfg) {
  const ConfigBlock& blk = cfg.section("function");
  cplx scalar(0.0);
  if (blk.has("scalar")) scalar = blk.get_complex("scalar");
  return ExtendedElement{scalar, function_from_config(blk)};
}

int cmd_apply(const CommonOpts& opts) {
  Config cfg = load_config(opts.config_path);
  OperatorSetup op = operator_from_config(cfg.section("operator"));
  QuadratureSpec quad = quad_from(cfg, opts);
  ExtendedElement phi = extended_from(cfg);
  const int n = taylor_order(cfg, opts, op.bound);
  CalculusResult r = hs_apply_extended(phi, op.h, n, quad, op.bound);
  std::string path = out_path(opts, "result.txt");
  write_matrix_file(path, r.value);
  std::cout << r.summary() << "\n";
  std::cout << "wrote " << path << "\n";
  return 0;  // non-convergence is flagged in the summary, not fatal
}

int cmd_verify_smt(const CommonOpts& opts, bool json_line, bool suite) {
  Config cfg = load_config(opts.config_path);
  OperatorSetup op = operator_from_config(cfg.section("operator"));
  if (!op.factory)
    fail(errc::bad_config, "verify-smt needs a factory operator (spectrum known by construction)");
  QuadratureSpec quad = quad_from(cfg, opts);
  const int n = taylor_order(cfg, opts, op.bound);
  const double kappa = op.factory->kappa();
  const double gate = 10.0 * quad.target_tol * kappa;

  std::vector<std::pair<std::string, ExtendedElement>> cases;
  if (suite) {
    cases.emplace_back("g_i", ExtendedElement{cplx(0.0), inverse_linear(cplx(0.0, 1.0))});
    cases.emplace_back("bracket^-1", ExtendedElement{cplx(0.0), bracket_power(-1.0)});
    cases.emplace_back("bracket^-2", ExtendedElement{cplx(0.0), bracket_power(-2.0)});
    cases.emplace_back("bump[-1,3]", ExtendedElement{cplx(0.0), bump(-1.0, 3.0)});
    cases.emplace_back("char[-1,3]", ExtendedElement{cplx(0.0), approx_char(-1.0, 3.0, 0.25)});
    cases.emplace_back("1+bracket^-2", ExtendedElement{cplx(1.0), bracket_power(-2.0)});
  } else {
    cases.emplace_back(cfg.section("function").get("kind"), extended_from(cfg));
  }

  bool all_ok = true;
  std::ofstream csv;
  if (!opts.out_dir.empty()) {
    csv.open(out_path(opts, "smt_report.csv"));
    csv << SmtReport::csv_header() << "\n";
  }
  for (const auto& [fid, phi] : cases) {
    SmtReport rep = verify_spectral_mapping(phi, *op.factory, n, quad, op.id, fid);
    bool ok = rep.offdiag_norm <= gate && rep.reverse_defect <= gate;
    all_ok = all_ok && ok;
    if (json_line) {
      nlohmann::json j{{"operator", rep.operator_id},
                       {"function", rep.function_id},
                       {"forward_defect", rep.forward_defect},
                       {"reverse_defect", rep.reverse_defect},
                       {"offdiag_norm", rep.offdiag_norm},
                       {"quad_estimate", rep.quad_estimate},
                       {"kappa", kappa},
                       {"pass", ok}};
      std::cout << j.dump() << "\n";
    } else {
      std::cout << rep.csv_row() << (ok ? ",pass" : ",FAIL") << "\n";
    }
    if (csv.is_open()) csv << rep.csv_row() << "\n";
  }
  return all_ok ? 0 : 1;
}

int cmd_convergence(const CommonOpts& opts, int levels) {
  Config cfg = load_config(opts.config_path);
  OperatorSetup op = operator_from_config(cfg.section("operator"));
  if (!op.factory) fail(errc::bad_config, "convergence-table needs a factory operator");
  QuadratureSpec quad = quad_from(cfg, opts);
  const int n = taylor_order(cfg, opts, op.bound);
  CkFunction f = function_from_config(cfg.section("function"));
  auto rows = convergence_table(f, *op.factory, levels, quad, n);
  std::string csv = convergence_csv(rows);
  if (!opts.out_dir.empty()) {
    std::ofstream os(out_path(opts, "convergence.csv"));
    os << csv;
  }
  std::cout << csv;
  return 0;
}

int cmd_seeley(const CommonOpts& opts, int K, double x_min, double x_max, int points,
               int orders) {
  SeeleyCoefficients sc = seeley_coefficients(K);
  std::cout << "K = " << K << "\n";
  for (int k = 0; k <= K; ++k)
    std::cout << "a_" << k << " = " << sc.a[static_cast<std::size_t>(k)]
              << "   b_" << k << " = " << sc.b[static_cast<std::size_t>(k)] << "\n";

  if (!opts.config_path.empty()) {
    Config cfg = load_config(opts.config_path);
    HalfLineFunction f = half_line_from_config(cfg.section("function"));
    CkFunction ext = seeley_extend(f, sc);
    std::ostringstream csv;
    csv << "x";
    for (int r = 0; r <= orders; ++r) csv << ",F_deriv" << r << "_re,F_deriv" << r << "_im";
    csv << "\n";
    csv.precision(17);
    for (int i = 0; i <= points; ++i) {
      double x = x_min + (x_max - x_min) * i / points;
      csv << x;
      Jet j = ext.jet(x, orders);
      for (int r = 0; r <= orders; ++r) {
        cplx d = j.derivative(r);
        csv << "," << d.real() << "," << d.imag();
      }
      csv << "\n";
    }
    std::string path = out_path(opts, "extension.csv");
    std::ofstream os(path);
    os << csv.str();
    std::cout << "wrote " << path << "\n";
  }
  return 0;
}

int cmd_fit_bound(const CommonOpts& opts) {
  Config cfg = load_config(opts.config_path);
  OperatorSetup op = operator_from_config(cfg.section("operator"));
  ResolventGridSpec grid;
  grid.re_lo = op.enclosure.lo - 10.0;
  grid.re_hi = op.enclosure.hi + 10.0;
  ResolventBoundFit fit = fit_resolvent_bound(op.h, grid);
  std::cout << "c=" << fit.c << " alpha=" << fit.alpha << " samples=" << fit.samples.size()
            << " max_log_residual=" << fit.max_log_residual << "\n";
  if (!opts.out_dir.empty()) {
    std::ofstream os(out_path(opts, "bound_samples.csv"));
    os << "re,im,norm,envelope\n";
    os.precision(12);
    for (const auto& [z, nrm] : fit.samples)
      os << z.real() << "," << z.imag() << "," << nrm << "," << fit.bound().evaluate(z) << "\n";
  }
  return 0;
}

int cmd_char_one(const CommonOpts& opts, double a, double b, double eps, double delta) {
  Config cfg = load_config(opts.config_path);
  OperatorSetup op = operator_from_config(cfg.section("operator"));
  QuadratureSpec quad = quad_from(cfg, opts);
  double dev = char_one_check(op.h, a, b, eps, quad, op.enclosure, op.bound, delta);
  std::cout << "deviation=" << dev << "\n";
  return dev <= quad.target_tol ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Functional calculus for matrices with real spectrum"};
  app.require_subcommand(1);

  CommonOpts apply_opts, smt_opts, conv_opts, seeley_opts, fit_opts, char_opts;

  auto* apply = app.add_subcommand("apply", "compute f(H) and write the matrix");
  add_common(apply, apply_opts);

  auto* smt = app.add_subcommand("verify-smt", "check the spectral mapping defects");
  add_common(smt, smt_opts);
  bool json_line = false, suite = false;
  smt->add_flag("--json", json_line, "machine-readable JSON line per case");
  smt->add_flag("--suite", suite, "run the built-in function family");

  auto* conv = app.add_subcommand("convergence-table", "refinement study vs the exact oracle");
  add_common(conv, conv_opts);
  int conv_levels = 3;
  conv->add_option("--study-levels", conv_levels, "number of study rows (>= 3)");

  auto* seeley = app.add_subcommand("seeley-extend", "exact coefficients and extension dump");
  add_common(seeley, seeley_opts, /*config_required=*/false);
  int K = 4, points = 200, orders = 2;
  double x_min = -3.0, x_max = 3.0;
  seeley->add_option("--K", K, "truncation order (<= 24)");
  seeley->add_option("--x-min", x_min, "dump range start");
  seeley->add_option("--x-max", x_max, "dump range end");
  seeley->add_option("--points", points, "dump sample count");
  seeley->add_option("--orders", orders, "derivative orders in the dump");

  auto* fit = app.add_subcommand("fit-bound", "fit the resolvent growth envelope");
  add_common(fit, fit_opts);

  auto* chr = app.add_subcommand("char-one", "deviation of chi_{[a,b],eps}(H) from I");
  add_common(chr, char_opts);
  double ca = 0.0, cb = 0.0, ceps = 0.25, cdelta = 0.5;
  chr->add_option("--a", ca, "left edge (must be < inf spectrum)")->required();
  chr->add_option("--b", cb, "right edge (must be > sup spectrum)")->required();
  chr->add_option("--eps", ceps, "ramp width");
  chr->add_option("--delta", cdelta, "rectangle contour half-height");

  CLI11_PARSE(app, argc, argv);

  try {
    if (apply->parsed()) return cmd_apply(apply_opts);
    if (smt->parsed()) return cmd_verify_smt(smt_opts, json_line, suite);
    if (conv->parsed()) return cmd_convergence(conv_opts, conv_levels);
    if (seeley->parsed())
      return cmd_seeley(seeley_opts, K, x_min, x_max, points, orders);
    if (fit->parsed()) return cmd_fit_bound(fit_opts);
    if (chr->parsed()) return cmd_char_one(char_opts, ca, cb, ceps, cdelta);
  } catch (const hscalc::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
