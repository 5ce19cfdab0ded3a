#include "kaefam/runner.hpp"

#include "kaefam/bergman.hpp"
#include "kaefam/verifier.hpp"

#include "json.hpp"

#include <algorithm>
#include <future>
#include <sstream>

namespace kaefam {

using nlohmann::json;

namespace {

template <class F>
auto parallel_map(std::size_t count, F&& f) {
  using R = std::invoke_result_t<F, std::size_t>;
  std::vector<std::future<R>> futs;
  futs.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    futs.push_back(std::async(std::launch::async, f, i));
  std::vector<R> out;
  out.reserve(count);
  for (auto& fu : futs) out.push_back(fu.get()); // collected in work-item order
  return out;
}

bool wants(const RunConfig& c, const std::string& fmt) {
  return std::find(c.output.formats.begin(), c.output.formats.end(), fmt) !=
         c.output.formats.end();
}

json manifest_json(const LoadedConfig& lc, const std::string& command) {
  return json{{"tool", kToolVersion},
              {"command", command},
              {"config_hash", lc.hash},
              {"config", json::parse(lc.config.to_json_text())}};
}

struct ItemOutcome {
  bool ok = false;
  std::string error;
  BasePointAnalysis analysis; // valid when ok
};

ItemOutcome analyze_item(const BetaFamily& family, cplx t, const TorusGrid& grid,
                         const SolverOptions& opt) {
  ItemOutcome o;
  try {
    o.analysis = analyze_base_point(family, t, grid, opt);
    o.ok = true;
  } catch (const std::exception& e) {
    o.error = e.what();
  }
  return o;
}

SolverOptions solver_options(const RunConfig& c) {
  SolverOptions opt;
  opt.tol = c.solver.tol;
  opt.max_iters = c.solver.max_iters;
  return opt;
}

/// beta PSD precheck shared by solve/verify/sweep. Returns true when the
/// pipeline may proceed.
bool psd_gate(const RunConfig& c, const BetaFamily& family, const TorusGrid& grid,
              json& summary) {
  SemiPositiveReport psd =
      check_semipositive(family, c.family.base_points, grid, 1e-10);
  summary["beta_min_eig"] = psd.min_eig;
  summary["beta_psd"] = !psd.violated;
  if (psd.violated && !c.family.allow_non_psd) {
    summary["skipped"] = "twist form is not positive semidefinite on the sampled set "
                         "(set family.allow_non_psd to override)";
    return false;
  }
  return true;
}

std::string cert_name(std::size_t eps_idx, std::size_t t_idx) {
  std::ostringstream os;
  os << "certificates/cert_eps" << eps_idx << "_t" << t_idx << ".csv";
  return os.str();
}

std::string field_csv(const Field& f) {
  CsvTable t({"j", "k", "value"});
  for (int k = 0; k < f.n(); ++k)
    for (int j = 0; j < f.n(); ++j)
      t.add_row({std::to_string(j), std::to_string(k), format_float(f(j, k).real())});
  return t.str();
}

std::string plot_script(const std::string& command) {
  std::string s = "# gnuplot script over the emitted CSV tables\n"
                  "set datafile separator ','\n"
                  "set key autotitle columnhead\n"
                  "set terminal pngcairo\n";
  if (command == "verify")
    s += "set output 'verify.png'\n"
         "plot 'verify.csv' using 0:4 with linespoints title 'min eig rho'\n";
  else if (command == "sweep")
    s += "set output 'sweep.png'\n"
         "set logscale xy\n"
         "plot 'sweep.csv' using 1:5 with points title 'min eig rho vs epsilon'\n";
  else if (command == "bergman")
    s += "set output 'bergman.png'\n"
         "set logscale y\n"
         "plot 'bergman.csv' using 1:5 with linespoints title 'abs error vs m'\n";
  else
    s += "set output 'solve.png'\n"
         "plot 'solve.csv' using 0:5 with linespoints title 'fiber volume'\n";
  return s;
}

int run_solve(const LoadedConfig& lc, RunResult& res, json& summary) {
  const RunConfig& c = lc.config;
  TorusGrid grid = c.make_grid();
  BetaFamily family(parse_potential(c.family.potential), c.background(), c.tau());
  if (!psd_gate(c, family, grid, summary)) return kExitVerificationFailure;

  SolverOptions opt = solver_options(c);
  auto outcomes = parallel_map(c.family.base_points.size(), [&](std::size_t i) {
    ItemOutcome o;
    try {
      BetaEval beta = family.at(c.family.base_points[i], grid);
      o.analysis.sol = solve_fiber_ke(beta.beta_zz, {}, opt);
      o.ok = true;
    } catch (const std::exception& e) {
      o.error = e.what();
    }
    return o;
  });

  CsvTable table({"t_re", "t_im", "residual_sup", "newton_iters", "fiber_volume"});
  json rows = json::array();
  bool any_failed = false;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    cplx t = c.family.base_points[i];
    const ItemOutcome& o = outcomes[i];
    json row{{"t_re", t.real()}, {"t_im", t.imag()}, {"ok", o.ok}};
    if (o.ok) {
      const FiberSolution& s = o.analysis.sol;
      table.add_row({format_float(t.real()), format_float(t.imag()),
                     format_float(s.residual_sup), std::to_string(s.newton_iters),
                     format_float(s.fiber_volume)});
      row["residual_sup"] = s.residual_sup;
      row["newton_iters"] = s.newton_iters;
      row["fiber_volume"] = s.fiber_volume;
      if (s.small_class_flagged) row["small_class"] = true;
    } else {
      any_failed = true;
      table.add_row({format_float(t.real()), format_float(t.imag()), "nan", "-1", "nan"});
      row["error"] = o.error;
    }
    rows.push_back(row);
  }
  summary["rows"] = rows;
  if (wants(c, "csv")) res.bundle.add("solve.csv", table.str());
  return any_failed ? kExitNumericalFailure : kExitOk;
}

int run_verify(const LoadedConfig& lc, RunResult& res, json& summary) {
  const RunConfig& c = lc.config;
  TorusGrid grid = c.make_grid();
  BetaFamily family(parse_potential(c.family.potential), c.background(), c.tau());
  if (!psd_gate(c, family, grid, summary)) return kExitVerificationFailure;

  SolverOptions opt = solver_options(c);
  auto outcomes = parallel_map(c.family.base_points.size(), [&](std::size_t i) {
    return analyze_item(family, c.family.base_points[i], grid, opt);
  });

  const VerifyThresholds th;
  CsvTable table({"t_re", "t_im", "min_c", "min_eig_rho", "residual_sup", "residual_l2",
                  "ratio_35", "argmin_gap"});
  json rows = json::array();
  bool any_failed = false;
  bool all_pass = true;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    cplx t = c.family.base_points[i];
    const ItemOutcome& o = outcomes[i];
    json row{{"t_re", t.real()}, {"t_im", t.imag()}, {"ok", o.ok}};
    if (o.ok) {
      const BasePointAnalysis& a = o.analysis;
      table.add_row({format_float(t.real()), format_float(t.imag()),
                     format_float(a.geo.min_c), format_float(a.geo.min_eig_rho),
                     format_float(a.residual.sup), format_float(a.residual.l2),
                     a.bound.degenerate ? "nan" : format_float(a.bound.ratio),
                     format_float(a.bound.argmin_gap)});
      row["min_c"] = a.geo.min_c;
      row["min_eig_rho"] = a.geo.min_eig_rho;
      row["residual_sup"] = a.residual.sup;
      row["residual_l2"] = a.residual.l2;
      row["ratio_degenerate"] = a.bound.degenerate;
      if (!a.bound.degenerate) row["ratio"] = a.bound.ratio;
      row["argmin_gap"] = a.bound.argmin_gap;
      bool pass = a.geo.min_eig_rho >= th.eig_floor && a.bound.argmin_gap >= th.gap_floor &&
                  a.residual.sup <= th.residual_max;
      row["pass"] = pass;
      all_pass = all_pass && pass;
    } else {
      any_failed = true;
      table.add_row({format_float(t.real()), format_float(t.imag()), "nan", "nan", "nan",
                     "nan", "nan", "nan"});
      row["error"] = o.error;
    }
    rows.push_back(row);
  }
  summary["rows"] = rows;
  summary["passed"] = all_pass && !any_failed;
  if (wants(c, "csv")) res.bundle.add("verify.csv", table.str());
  if (any_failed) return kExitNumericalFailure;
  return all_pass ? kExitOk : kExitVerificationFailure;
}

int run_sweep(const LoadedConfig& lc, RunResult& res, json& summary) {
  const RunConfig& c = lc.config;
  TorusGrid grid = c.make_grid();
  BetaFamily family(parse_potential(c.family.potential), c.background(), c.tau());
  if (!psd_gate(c, family, grid, summary)) return kExitVerificationFailure;

  // library op already orders rows by (eps, t); parallelize across rows here
  std::vector<double> eps_sorted = c.family.epsilon_list;
  std::sort(eps_sorted.begin(), eps_sorted.end());
  std::vector<cplx> pts_sorted = c.family.base_points;
  std::sort(pts_sorted.begin(), pts_sorted.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });

  std::vector<BetaFamily> scaled;
  scaled.reserve(eps_sorted.size());
  for (double e : eps_sorted) scaled.push_back(family.scaled(e));

  SolverOptions opt = solver_options(c);
  const std::size_t npts = pts_sorted.size();
  auto outcomes = parallel_map(eps_sorted.size() * npts, [&](std::size_t idx) {
    return analyze_item(scaled[idx / npts], pts_sorted[idx % npts], grid, opt);
  });

  CsvTable table({"epsilon", "t_re", "t_im", "min_c", "min_eig_rho"});
  json rows = json::array();
  bool any_failed = false;
  for (std::size_t idx = 0; idx < outcomes.size(); ++idx) {
    const double eps = eps_sorted[idx / npts];
    const cplx t = pts_sorted[idx % npts];
    const ItemOutcome& o = outcomes[idx];
    json row{{"epsilon", eps}, {"t_re", t.real()}, {"t_im", t.imag()}, {"ok", o.ok}};
    if (o.ok) {
      table.add_row({format_float(eps), format_float(t.real()), format_float(t.imag()),
                     format_float(o.analysis.geo.min_c),
                     format_float(o.analysis.geo.min_eig_rho)});
      row["min_c"] = o.analysis.geo.min_c;
      row["min_eig_rho"] = o.analysis.geo.min_eig_rho;
      std::string cert = cert_name(idx / npts, idx % npts);
      res.bundle.add(cert, field_csv(o.analysis.sol.psi));
      row["certificate"] = cert;
    } else {
      any_failed = true;
      table.add_row({format_float(eps), format_float(t.real()), format_float(t.imag()),
                     "nan", "nan"});
      row["error"] = o.error;
    }
    rows.push_back(row);
  }
  summary["rows"] = rows;
  if (wants(c, "csv")) res.bundle.add("sweep.csv", table.str());
  return any_failed ? kExitNumericalFailure : kExitOk;
}

int run_bergman(const LoadedConfig& lc, RunResult& res, json& summary) {
  const RunConfig& c = lc.config;
  BergmanChart chart;
  chart.radius = c.bergman.radius;
  chart.weight = parse_potential(c.bergman.weight);
  chart.degree = c.bergman.degree;
  chart.quadrature = c.bergman.quadrature;

  struct MOutcome {
    bool ok = false;
    std::string error;
    KernelDiagResult kernel;
  };
  auto outcomes = parallel_map(c.bergman.m_list.size(), [&](std::size_t i) {
    MOutcome o;
    try {
      BergmanChart ch = chart;
      ch.m = c.bergman.m_list[i];
      o.kernel = bergman_kernel_diag(ch, c.bergman.points);
      o.ok = true;
    } catch (const std::exception& e) {
      o.error = e.what();
    }
    return o;
  });

  CsvTable table({"m", "x_re", "x_im", "value", "abs_error"});
  json rows = json::array();
  bool any_failed = false;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const int m = c.bergman.m_list[i];
    const MOutcome& o = outcomes[i];
    if (!o.ok) {
      any_failed = true;
      rows.push_back(json{{"m", m}, {"ok", false}, {"error", o.error}});
      for (cplx x : c.bergman.points)
        table.add_row({std::to_string(m), format_float(x.real()), format_float(x.imag()),
                       "nan", "nan"});
      continue;
    }
    for (std::size_t p = 0; p < c.bergman.points.size(); ++p) {
      cplx x = c.bergman.points[p];
      double tau_x = chart.weight.eval_at(x).real();
      double err = std::abs(o.kernel.values[p] - tau_x);
      table.add_row({std::to_string(m), format_float(x.real()), format_float(x.imag()),
                     format_float(o.kernel.values[p]), format_float(err)});
      json row{{"m", m},      {"ok", true},
               {"x_re", x.real()}, {"x_im", x.imag()},
               {"value", o.kernel.values[p]}, {"abs_error", err}};
      if (!o.kernel.warnings.empty()) row["warnings"] = o.kernel.warnings;
      rows.push_back(row);
    }
  }
  summary["rows"] = rows;
  if (wants(c, "csv")) res.bundle.add("bergman.csv", table.str());
  return any_failed ? kExitNumericalFailure : kExitOk;
}

} // namespace

RunResult run_experiment(const LoadedConfig& lc, const std::string& command) {
  RunResult res;
  json summary;
  summary["command"] = command;

  int code;
  if (command == "solve")
    code = run_solve(lc, res, summary);
  else if (command == "verify")
    code = run_verify(lc, res, summary);
  else if (command == "sweep")
    code = run_sweep(lc, res, summary);
  else if (command == "bergman")
    code = run_bergman(lc, res, summary);
  else
    throw ConfigError("unknown command '" + command +
                      "' (expected solve, verify, sweep or bergman)");

  summary["exit_code"] = code;
  res.bundle.add("manifest.json", manifest_json(lc, command).dump(2) + "\n");
  if (wants(lc.config, "json")) res.bundle.add("summary.json", summary.dump(2) + "\n");
  if (wants(lc.config, "csv")) res.bundle.add("plots.gnuplot", plot_script(command));

  res.exit_code = code;
  switch (code) {
    case kExitOk:
      res.status = command + ": ok";
      break;
    case kExitVerificationFailure:
      res.status = command + ": verification failed";
      break;
    case kExitNumericalFailure:
      res.status = command + ": numerical failure in at least one work item";
      break;
    default:
      res.status = command + ": error";
  }
  return res;
}

} // namespace kaefam
