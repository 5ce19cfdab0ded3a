#pragma once

#include "kaefam/expr.hpp"
#include "kaefam/ma_solver.hpp"
#include "kaefam/torus.hpp"

namespace kaefam {

/// First and mixed second t-derivatives of the solved fiber potential,
/// obtained by implicit differentiation of psi_zz + beta_zz = e^psi:
///   L[psi_t]     = -dt beta_zz
///   L[psi_ttbar] = e^psi |psi_t|^2 - dtdtbar beta_zz
/// with L[u] = u_zz - e^psi u; psi_tzbar = dzbar(psi_t).
struct FamilyDerivatives {
  Field psi_t;      // complex
  Field psi_ttbar;  // real
  Field psi_tzbar;  // complex
};

FamilyDerivatives compute_t_derivatives(const FiberSolution& sol, const BetaEval& beta,
                                        double lin_tol = 1e-11);

/// Components of the fibered metric form rho = beta + i ddbar psi at one base
/// point. g_zz = e^psi by the fiber equation.
struct RhoField {
  Field g_tt; // real
  Field g_tz; // complex
  Field g_zz; // real, strictly positive
};

RhoField assemble_rho(const FiberSolution& sol, const FamilyDerivatives& derivs,
                      const BetaEval& beta);

/// c(rho) = g_tt - |g_tz|^2 / g_zz; positive together with g_zz > 0 exactly
/// when the 2x2 matrix of rho is positive definite.
Field geodesic_curvature(const RhoField& rho);

/// Horizontal lift v = d/dt - a d/dz with a = g_tz / g_zz, and the pointwise
/// squared norm |dbar v|^2 = |dzbar a|^2 (the two metric contractions cancel
/// in one fiber dimension).
struct HorizontalLift {
  Field a;          // complex
  Field dbar_v_sq;  // real
};

HorizontalLift horizontal_lift(const RhoField& rho);

/// beta contracted along the lift: beta_tt - 2 Re(conj(a) beta_tz) + |a|^2 beta_zz.
Field beta_along_lift(const BetaEval& beta, const Field& a);

/// Curvature form of the induced metric on the relative canonical bundle:
/// components (g - beta)_ab = (ddbar psi)_ab, plus the minimum eigenvalue of
/// rho = theta + beta over the grid.
struct RelativeCurvature {
  FormField theta;
  double min_eig_rho = 0.0;
};

RelativeCurvature relative_canonical_curvature(const RhoField& rho, const BetaEval& beta);

/// Assembled pointwise diagnostics at one base point. The identity residual
/// fields are filled by the verifier.
struct GeometryReport {
  Field c;          // geodesic curvature, real
  Field a;          // lift coefficient, complex
  Field dbar_v_sq;  // real
  Field beta_vv;    // real
  double identity_residual_sup = 0.0;
  double identity_residual_l2 = 0.0;
  double min_c = 0.0;
  double min_eig_rho = 0.0;
};

GeometryReport geometry_report(const RhoField& rho, const BetaEval& beta);

} // namespace kaefam
