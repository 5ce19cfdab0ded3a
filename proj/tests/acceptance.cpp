// Acceptance suite: runs every criterion at its pinned tolerance and prints
// one pass/fail line per criterion. Exit code 0 only if all pass.

#include "kaefam/bergman.hpp"
#include "kaefam/runner.hpp"
#include "kaefam/verifier.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace kaefam;

namespace {

const cplx kTauI(0.0, 1.0);

struct CorpusFamily {
  std::string name;
  BetaFamily family;
  std::vector<cplx> base_points;
  bool strictly_positive; // beta positive definite on the sampled set
};

std::vector<CorpusFamily> corpus() {
  std::vector<CorpusFamily> v;
  v.push_back({"flat",
               BetaFamily(parse_potential("0"), BackgroundForm{1, 1, cplx(0, 0)}, kTauI),
               {cplx(0, 0), cplx(0.3, -0.2)},
               true});
  v.push_back({"degenerate-base",
               BetaFamily(parse_potential("0"), BackgroundForm{0, 1, cplx(0, 0)}, kTauI),
               {cplx(0, 0), cplx(0.2, 0.1)},
               false});
  v.push_back({"re-t",
               BetaFamily(parse_potential("0.1*re(t)*cosm(1,0)"),
                          BackgroundForm{1, 1, cplx(0, 0)}, kTauI),
               {cplx(0, 0), cplx(0.2, 0.0), cplx(0.0, 0.4)},
               true});
  v.push_back({"mixed",
               BetaFamily(parse_potential("0.05*abs2(t)*cosm(1,1) + 0.04*im(t)*sinm(1,0) "
                                          "+ 0.02*re(t)*cosm(0,1)"),
                          BackgroundForm{1, 1, cplx(0.1, 0.05)}, kTauI),
               {cplx(0.1, 0.05), cplx(-0.2, 0.1)},
               true});
  return v;
}

BetaFamily re_t_family() {
  return BetaFamily(parse_potential("0.1*re(t)*cosm(1,0)"), BackgroundForm{1, 1, cplx(0, 0)},
                    kTauI);
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Criterion = std::function<Outcome()>;

Outcome c1_exact_constant_solve() {
  TorusGrid g(64, kTauI);
  FiberSolution sol = solve_fiber_ke(Field::constant(g, std::exp(2.0)));
  double err = sup_norm(sol.psi - Field::constant(g, 2.0));
  std::ostringstream os;
  os << "sup|psi - 2| = " << err << ", newton iters = " << sol.newton_iters;
  return {err <= 1e-12 && sol.newton_iters <= 6, os.str()};
}

Outcome c2_conservation() {
  TorusGrid g(64, kTauI);
  double worst = 0.0;
  for (const CorpusFamily& cf : corpus())
    for (cplx t : cf.base_points) {
      BetaEval beta = cf.family.at(t, g);
      FiberSolution sol = solve_fiber_ke(beta.beta_zz);
      double ib = integrate(beta.beta_zz).real();
      worst = std::max(worst, std::abs(sol.fiber_volume - ib) / ib);
    }
  std::ostringstream os;
  os << "worst relative volume defect = " << worst;
  return {worst <= 1e-10, os.str()};
}

Outcome c3_closed_forms() {
  TorusGrid g(64, kTauI);
  const double A = -0.05 * kPi * kPi / (kPi * kPi + 1.0);
  BasePointAnalysis a = analyze_base_point(re_t_family(), cplx(0, 0), g);

  double e_psit = 0, e_psitt = 0, e_gtz = 0, e_c = 0;
  for (int k = 0; k < g.n; ++k)
    for (int j = 0; j < g.n; ++j) {
      double x = double(j) / g.n;
      double c1 = std::cos(2 * kPi * x), s1 = std::sin(2 * kPi * x);
      double c2 = std::cos(4 * kPi * x);
      double psit = A * c1;
      double psitt = -A * A / 2 - A * A * c2 / (2 * (4 * kPi * kPi + 1));
      double gtz = -kPi * s1 * (0.05 + A);
      double cw = 1.0 + psitt - kPi * kPi * s1 * s1 * (0.05 + A) * (0.05 + A);
      e_psit = std::max(e_psit, std::abs(a.derivs.psi_t(j, k) - psit));
      e_psitt = std::max(e_psitt, std::abs(a.derivs.psi_ttbar(j, k) - psitt));
      e_gtz = std::max(e_gtz, std::abs(a.rho.g_tz(j, k) - gtz));
      e_c = std::max(e_c, std::abs(a.geo.c(j, k) - cw));
    }
  double worst = std::max({e_psit, e_psitt, e_gtz, e_c});
  std::ostringstream os;
  os << "sup errors: psi_t " << e_psit << ", psi_ttbar " << e_psitt << ", g_tz " << e_gtz
     << ", c " << e_c;
  return {worst <= 1e-9, os.str()};
}

Outcome c4_identity_residual() {
  const std::vector<cplx> pts{cplx(0, 0), cplx(0.2, 0.0), cplx(0.0, 0.4)};
  const double solver_tol = 1e-12;
  std::vector<double> sups;
  for (int n : {16, 32, 64}) {
    TorusGrid g(n, kTauI);
    double s = 0.0;
    for (cplx t : pts)
      s = std::max(s, analyze_base_point(re_t_family(), t, g).residual.sup);
    sups.push_back(s);
  }
  bool decay_ok = true;
  for (std::size_t i = 0; i + 1 < sups.size(); ++i)
    decay_ok = decay_ok && (sups[i + 1] <= sups[i] / 10.0 || sups[i] <= 100.0 * solver_tol);
  std::ostringstream os;
  os << "sup residuals at n=16,32,64: " << sups[0] << ", " << sups[1] << ", " << sups[2];
  return {sups[2] <= 1e-8 && decay_ok, os.str()};
}

Outcome c5_positivity() {
  TorusGrid g(64, kTauI);
  double worst_floor = 0.0;
  double worst_strict = 1.0;
  bool hypotheses_ok = true;
  for (const CorpusFamily& cf : corpus()) {
    SemiPositiveReport psd = check_semipositive(cf.family, cf.base_points, g);
    hypotheses_ok = hypotheses_ok && !psd.violated &&
                    (!cf.strictly_positive || psd.min_eig > 0.0);
    for (cplx t : cf.base_points) {
      BasePointAnalysis a = analyze_base_point(cf.family, t, g);
      worst_floor = std::min(worst_floor, a.geo.min_eig_rho);
      if (cf.strictly_positive) worst_strict = std::min(worst_strict, a.geo.min_eig_rho);
    }
  }
  std::ostringstream os;
  os << "min eig over corpus = " << worst_floor << "; min over strict families = "
     << worst_strict;
  if (!hypotheses_ok) os << " (corpus hypothesis check failed)";
  return {hypotheses_ok && worst_floor >= -1e-10 && worst_strict > 0.0, os.str()};
}

Outcome c6_argmin_gap() {
  TorusGrid g(64, kTauI);
  double worst = 0.0;
  for (const CorpusFamily& cf : corpus())
    for (cplx t : cf.base_points) {
      BasePointAnalysis a = analyze_base_point(cf.family, t, g);
      worst = std::min(worst, a.bound.argmin_gap);
    }
  std::ostringstream os;
  os << "worst argmin gap = " << worst;
  return {worst >= -1e-8, os.str()};
}

Outcome c7_bound_ratio() {
  TorusGrid g(64, kTauI);
  BasePointAnalysis flat = analyze_base_point(
      BetaFamily(parse_potential("0"), BackgroundForm{1, 1, cplx(0, 0)}, kTauI), cplx(0, 0),
      g);
  BasePointAnalysis tw = analyze_base_point(re_t_family(), cplx(0.2, 0.0), g);
  std::ostringstream os;
  os << "flat ratio = " << flat.bound.ratio << ", twisted ratio = " << tw.bound.ratio;
  bool ok = !flat.bound.degenerate && std::abs(flat.bound.ratio - 1.0) <= 1e-12 &&
            !tw.bound.degenerate && tw.bound.ratio > 0.0;
  return {ok, os.str()};
}

Outcome c8_sweep() {
  TorusGrid g(64, kTauI);
  BetaFamily flat(parse_potential("0"), BackgroundForm{1, 1, cplx(0, 0)}, kTauI);
  std::vector<cplx> origin{cplx(0, 0)};

  std::vector<double> eps_flat{1.0, 0.5, 0.1};
  auto flat_rows = epsilon_sweep(flat, eps_flat, origin, g);
  double flat_err = 0.0;
  for (const auto& r : flat_rows) {
    if (!r.ok) return {false, "flat sweep row failed: " + r.error};
    flat_err = std::max(flat_err, std::abs(r.min_eig_rho - r.eps));
  }

  std::vector<double> eps_tw{1.0, 0.5, 0.25, 0.1, 0.05};
  std::vector<cplx> pt{cplx(0.2, 0.0)};
  auto rows = epsilon_sweep(re_t_family(), eps_tw, pt, g);
  bool positive = true, monotone = true;
  double prev = 0.0;
  for (const auto& r : rows) { // ascending eps
    if (!r.ok) return {false, "twisted sweep row failed: " + r.error};
    positive = positive && r.min_eig_rho > 0.0;
    monotone = monotone && r.min_eig_rho > prev;
    prev = r.min_eig_rho;
  }
  double smallest = rows.front().min_eig_rho;
  std::ostringstream os;
  os << "flat |min_eig - eps| = " << flat_err << "; twisted min_eig at eps=0.05: "
     << smallest;
  return {flat_err <= 1e-12 && positive && monotone && smallest < 0.1, os.str()};
}

Outcome c9_fd_oracle() {
  TorusGrid g(64, kTauI);
  const double h = 1e-4;
  double worst1 = 0.0, worst2 = 0.0;
  std::vector<std::pair<BetaFamily, cplx>> cases;
  cases.emplace_back(re_t_family(), cplx(0.1, 0.05));
  cases.emplace_back(
      BetaFamily(parse_potential("0.05*abs2(t)*cosm(1,1) + 0.04*im(t)*sinm(1,0) + "
                                 "0.02*re(t)*cosm(0,1)"),
                 BackgroundForm{1, 1, cplx(0.1, 0.05)}, kTauI),
      cplx(0.1, 0.05));
  for (const auto& [fam, t] : cases) {
    SolverOptions opt;
    opt.tol = 1e-13;
    auto solve_at = [&](cplx tt) {
      BetaEval b = fam.at(tt, g);
      return solve_fiber_ke(b.beta_zz, {}, opt);
    };
    auto derivs_at = [&](cplx tt) {
      BetaEval b = fam.at(tt, g);
      FiberSolution s = solve_fiber_ke(b.beta_zz, {}, opt);
      return compute_t_derivatives(s, b, 1e-12);
    };

    FamilyDerivatives d = derivs_at(t);

    Field dre = (1.0 / (2 * h)) * (solve_at(t + h).psi - solve_at(t - h).psi);
    Field dim =
        (1.0 / (2 * h)) * (solve_at(t + cplx(0, h)).psi - solve_at(t - cplx(0, h)).psi);
    Field psi_t_fd = 0.5 * (dre - cplx(0, 1) * dim);
    worst1 = std::max(worst1, sup_norm(d.psi_t - psi_t_fd) / sup_norm(d.psi_t));

    Field dtre = (1.0 / (2 * h)) * (derivs_at(t + h).psi_t - derivs_at(t - h).psi_t);
    Field dtim = (1.0 / (2 * h)) *
                 (derivs_at(t + cplx(0, h)).psi_t - derivs_at(t - cplx(0, h)).psi_t);
    Field psi_ttbar_fd = 0.5 * (dtre + cplx(0, 1) * dtim);
    worst2 = std::max(worst2, sup_norm(d.psi_ttbar - psi_ttbar_fd) / sup_norm(d.psi_ttbar));
  }
  std::ostringstream os;
  os << "relative sup errors: psi_t " << worst1 << ", psi_ttbar " << worst2;
  return {worst1 <= 1e-6 && worst2 <= 1e-6, os.str()};
}

Outcome c10_bergman() {
  BergmanChart chart;
  chart.radius = 1.0;
  chart.weight = parse_potential("abs2(t)");
  chart.degree = 24;
  chart.quadrature = 64;
  std::vector<cplx> origin{cplx(0, 0)};
  double worst = 0.0;
  std::vector<double> errors;
  for (int m : {10, 20, 40}) {
    BergmanChart c = chart;
    c.m = m;
    KernelDiagResult res = bergman_kernel_diag(c, origin);
    double want = (m + 1.0) / (kPi * (1.0 - std::exp(-(m + 1.0))));
    worst = std::max(worst, std::abs(res.kernel[0] - want) / want);
    errors.push_back(std::abs(res.values[0])); // weight at the origin is 0
  }
  bool decreasing = errors[0] > errors[1] && errors[1] > errors[2];
  std::ostringstream os;
  os << "worst kernel relative error = " << worst << "; value errors " << errors[0] << " > "
     << errors[1] << " > " << errors[2];
  return {worst <= 1e-8 && decreasing, os.str()};
}

Outcome c11_determinism() {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "kaefam_acceptance";
  fs::create_directories(dir);
  fs::path cfg_path = dir / "acceptance_config.json";
  {
    std::ofstream out(cfg_path, std::ios::binary | std::ios::trunc);
    out << R"cfg({
  "grid": {"resolution": 64},
  "family": {
    "potential": "0.1*re(t)*cosm(1,0)",
    "base_points": [[0.0, 0.0], [0.2, 0.0], [0.0, 0.4]],
    "epsilon_list": [1.0, 0.5, 0.25, 0.1, 0.05]
  },
  "bergman": {"m_list": [10, 20, 40], "degree": 24, "quadrature": 64}
})cfg";
  }
  LoadedConfig lc = load_config_file(cfg_path.string());

  auto run_all = [&]() {
    std::vector<std::pair<std::string, std::string>> files;
    for (const char* cmd : {"verify", "sweep", "bergman"}) {
      RunResult r = run_experiment(lc, cmd);
      if (r.exit_code != kExitOk)
        throw std::runtime_error(std::string("command failed: ") + cmd);
      for (auto& f : r.bundle.files)
        files.emplace_back(std::string(cmd) + "/" + f.first, std::move(f.second));
    }
    return files;
  };

  auto a = run_all();
  auto b = run_all();
  if (a.size() != b.size()) return {false, "bundle file counts differ"};
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].first != b[i].first) return {false, "file name mismatch: " + a[i].first};
    if (a[i].second != b[i].second)
      return {false, "byte mismatch in " + a[i].first};
  }
  std::ostringstream os;
  os << a.size() << " files byte-identical across two runs";
  return {true, os.str()};
}

} // namespace

int main() {
  std::vector<std::pair<std::string, Criterion>> criteria = {
      {"exact constant solve", c1_exact_constant_solve},
      {"fiber volume conservation", c2_conservation},
      {"closed-form family check", c3_closed_forms},
      {"elliptic identity residual", c4_identity_residual},
      {"fibered metric positivity", c5_positivity},
      {"maximum-principle gap", c6_argmin_gap},
      {"infimum bound ratio", c7_bound_ratio},
      {"nef sweep", c8_sweep},
      {"implicit vs finite-difference derivatives", c9_fd_oracle},
      {"Bergman kernel oracle", c10_bergman},
      {"bit-identical report bundles", c11_determinism},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %2zu. %s: %s\n", out.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), out.detail.c_str());
    if (!out.pass) ++failures;
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
