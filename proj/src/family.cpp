#include "kaefam/family.hpp"

#include <cmath>

namespace kaefam {

FamilyDerivatives compute_t_derivatives(const FiberSolution& sol, const BetaEval& beta,
                                        double lin_tol) {
  Field e_psi = exp(sol.psi);

  FamilyDerivatives d;
  d.psi_t = detail::solve_linearized_coeff(e_psi, -1.0 * beta.dt_beta_zz, lin_tol);
  Field rhs_ttbar = e_psi * abs2(d.psi_t) - beta.dtdtbar_beta_zz;
  d.psi_ttbar = require_real(
      detail::solve_linearized_coeff(e_psi, require_real(rhs_ttbar), lin_tol));
  d.psi_tzbar = spectral_derivative(d.psi_t, Deriv::Dzbar);
  return d;
}

RhoField assemble_rho(const FiberSolution& sol, const FamilyDerivatives& derivs,
                      const BetaEval& beta) {
  RhoField rho;
  rho.g_tt = require_real(beta.beta_tt + derivs.psi_ttbar);
  rho.g_tz = beta.beta_tz + derivs.psi_tzbar;
  rho.g_tz.set_tag(FieldTag::Complex);
  // strictly positive by construction; beta_zz + psi_zz agrees to solver tol
  rho.g_zz = exp(sol.psi);
  return rho;
}

Field geodesic_curvature(const RhoField& rho) {
  return require_real(rho.g_tt - abs2(rho.g_tz) * reciprocal(rho.g_zz));
}

HorizontalLift horizontal_lift(const RhoField& rho) {
  HorizontalLift lift;
  lift.a = rho.g_tz * reciprocal(rho.g_zz);
  lift.a.set_tag(FieldTag::Complex);
  lift.dbar_v_sq = abs2(spectral_derivative(lift.a, Deriv::Dzbar));
  return lift;
}

Field beta_along_lift(const BetaEval& beta, const Field& a) {
  Field cross = conj(a) * beta.beta_tz;
  Field out = beta.beta_tt - 2.0 * real_part(cross) + abs2(a) * beta.beta_zz;
  return require_real(out);
}

RelativeCurvature relative_canonical_curvature(const RhoField& rho, const BetaEval& beta) {
  RelativeCurvature rc;
  rc.theta.tt = require_real(rho.g_tt - beta.beta_tt);
  rc.theta.tz = rho.g_tz - beta.beta_tz;
  rc.theta.zz = require_real(rho.g_zz - beta.beta_zz);
  rc.min_eig_rho = form_eigmin(FormField{rho.g_tt, rho.g_tz, rho.g_zz});
  return rc;
}

GeometryReport geometry_report(const RhoField& rho, const BetaEval& beta) {
  GeometryReport rep;
  rep.c = geodesic_curvature(rho);
  HorizontalLift lift = horizontal_lift(rho);
  rep.a = lift.a;
  rep.dbar_v_sq = lift.dbar_v_sq;
  rep.beta_vv = beta_along_lift(beta, lift.a);
  rep.min_c = min_real(rep.c);
  rep.min_eig_rho = form_eigmin(FormField{rho.g_tt, rho.g_tz, rho.g_zz});
  return rep;
}

} // namespace kaefam
