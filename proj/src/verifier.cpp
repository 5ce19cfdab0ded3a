#include "kaefam/verifier.hpp"

#include <algorithm>
#include <cmath>

namespace kaefam {

IdentityResidual check_elliptic_identity(GeometryReport& report, const RhoField& rho) {
  Field lap_c = spectral_derivative(report.c, Deriv::DzDzbar);
  Field residual = require_real(
      -1.0 * (reciprocal(rho.g_zz) * lap_c) + report.c - report.dbar_v_sq - report.beta_vv,
      1e-10);
  IdentityResidual out;
  out.sup = sup_norm(residual);
  out.l2 = std::sqrt(integrate(abs2(residual)).real());
  report.identity_residual_sup = out.sup;
  report.identity_residual_l2 = out.l2;
  return out;
}

PositivityResult check_positivity(const RhoField& rho, const BetaEval& beta,
                                  const std::optional<FormField>& lower_bound) {
  PositivityResult res;
  res.min_eig_rho = form_eigmin(FormField{rho.g_tt, rho.g_tz, rho.g_zz});
  if (lower_bound) {
    FormField excess;
    excess.tt = require_real(rho.g_tt - beta.beta_tt - lower_bound->tt);
    excess.tz = rho.g_tz - beta.beta_tz - lower_bound->tz;
    excess.zz = require_real(rho.g_zz - beta.beta_zz - lower_bound->zz);
    res.min_eig_excess = form_eigmin(excess);
  }
  return res;
}

BoundCheck check_curvature_bound(const GeometryReport& report, const RhoField& rho) {
  BoundCheck out;
  Field density = (report.dbar_v_sq + report.beta_vv) * rho.g_zz;
  out.denominator = integrate(density).real();
  out.degenerate = std::abs(out.denominator) < 1e-14;

  int j, k;
  double cmin = min_real(report.c, j, k);
  out.ratio = out.degenerate ? 0.0 : cmin / out.denominator;
  out.argmin_gap =
      cmin - (report.dbar_v_sq(j, k).real() + report.beta_vv(j, k).real());
  return out;
}

BasePointAnalysis analyze_base_point(const BetaFamily& family, cplx t,
                                     const TorusGrid& grid, const SolverOptions& opt,
                                     double lin_tol) {
  BasePointAnalysis a;
  BetaEval beta = family.at(t, grid);
  a.sol = solve_fiber_ke(beta.beta_zz, {}, opt);
  a.derivs = compute_t_derivatives(a.sol, beta, lin_tol);
  a.rho = assemble_rho(a.sol, a.derivs, beta);
  a.geo = geometry_report(a.rho, beta);
  a.residual = check_elliptic_identity(a.geo, a.rho);
  a.bound = check_curvature_bound(a.geo, a.rho);
  return a;
}

VerificationReport verify_family(const BetaFamily& family, std::span<const cplx> base_points,
                                 const TorusGrid& grid, const SolverOptions& opt,
                                 const VerifyThresholds& thresholds) {
  VerificationReport rep;

  SemiPositiveReport psd = check_semipositive(family, base_points, grid, thresholds.psd_tol);
  rep.beta_psd = !psd.violated;
  rep.beta_min_eig = psd.min_eig;

  bool first = true;
  for (cplx t : base_points) {
    BasePointAnalysis a = analyze_base_point(family, t, grid, opt);
    BasePointVerification row;
    row.t = t;
    row.min_c = a.geo.min_c;
    row.min_eig_rho = a.geo.min_eig_rho;
    row.residual_sup = a.residual.sup;
    row.residual_l2 = a.residual.l2;
    row.bound_ratio = a.bound.ratio;
    row.ratio_degenerate = a.bound.degenerate;
    row.argmin_gap = a.bound.argmin_gap;
    row.newton_iters = a.sol.newton_iters;
    row.fiber_volume = a.sol.fiber_volume;
    rep.rows.push_back(row);

    if (first) {
      rep.identity_residual_sup = row.residual_sup;
      rep.identity_residual_l2 = row.residual_l2;
      rep.min_c = row.min_c;
      rep.min_eig_rho = row.min_eig_rho;
      rep.argmin_bound_gap = row.argmin_gap;
      first = false;
    } else {
      rep.identity_residual_sup = std::max(rep.identity_residual_sup, row.residual_sup);
      rep.identity_residual_l2 = std::max(rep.identity_residual_l2, row.residual_l2);
      rep.min_c = std::min(rep.min_c, row.min_c);
      rep.min_eig_rho = std::min(rep.min_eig_rho, row.min_eig_rho);
      rep.argmin_bound_gap = std::min(rep.argmin_bound_gap, row.argmin_gap);
    }
  }

  rep.passed = rep.beta_psd && !rep.rows.empty() &&
               rep.min_eig_rho >= thresholds.eig_floor &&
               rep.argmin_bound_gap >= thresholds.gap_floor &&
               rep.identity_residual_sup <= thresholds.residual_max;
  return rep;
}

std::vector<SweepRow> epsilon_sweep(const BetaFamily& family, std::span<const double> eps_list,
                                    std::span<const cplx> base_points, const TorusGrid& grid,
                                    const SolverOptions& opt) {
  std::vector<double> eps_sorted(eps_list.begin(), eps_list.end());
  std::sort(eps_sorted.begin(), eps_sorted.end());
  std::vector<cplx> pts_sorted(base_points.begin(), base_points.end());
  std::sort(pts_sorted.begin(), pts_sorted.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });

  std::vector<SweepRow> rows;
  for (double eps : eps_sorted) {
    if (!(eps > 0.0))
      throw std::invalid_argument("epsilon_sweep: every eps must be positive");
    BetaFamily scaled = family.scaled(eps);
    for (cplx t : pts_sorted) {
      SweepRow row;
      row.eps = eps;
      row.t = t;
      try {
        BasePointAnalysis a = analyze_base_point(scaled, t, grid, opt);
        row.min_c = a.geo.min_c;
        row.min_eig_rho = a.geo.min_eig_rho;
        row.certificate = a.sol.psi;
        row.ok = true;
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

} // namespace kaefam
