#pragma once

#include "kaefam/family.hpp"

#include <optional>
#include <string>
#include <vector>

namespace kaefam {

struct IdentityResidual {
  double sup = 0.0;
  double l2 = 0.0;
};

/// Residual norms of the elliptic identity satisfied by the geodesic
/// curvature:  -e^{-psi} dzdzbar c + c - |dbar v|^2 - beta(v, vbar).
/// Fills the residual fields of the report and returns them.
IdentityResidual check_elliptic_identity(GeometryReport& report, const RhoField& rho);

struct PositivityResult {
  double min_eig_rho = 0.0;
  /// min eigenvalue of rho - beta - bound when a lower-bound form is given;
  /// choosing bound = gamma - beta checks rho >= gamma pointwise.
  std::optional<double> min_eig_excess;
};

PositivityResult check_positivity(const RhoField& rho, const BetaEval& beta,
                                  const std::optional<FormField>& lower_bound = {});

/// Structure of the infimum bound: realized ratio inf c / integral of
/// (|dbar v|^2 + beta(v,vbar)) dV_rho, and the value of
/// c - (|dbar v|^2 + beta(v,vbar)) at the grid argmin of c, which the weak
/// maximum principle forces to be nonnegative up to the residual tolerance.
struct BoundCheck {
  double ratio = 0.0;
  bool degenerate = false; // denominator below 1e-14
  double denominator = 0.0;
  double argmin_gap = 0.0;
};

BoundCheck check_curvature_bound(const GeometryReport& report, const RhoField& rho);

/// Full per-base-point pipeline: fiber solve, implicit t-derivatives,
/// metric assembly, diagnostics.
struct BasePointAnalysis {
  FiberSolution sol;
  FamilyDerivatives derivs;
  RhoField rho;
  GeometryReport geo;
  IdentityResidual residual;
  BoundCheck bound;
};

BasePointAnalysis analyze_base_point(const BetaFamily& family, cplx t,
                                     const TorusGrid& grid, const SolverOptions& opt = {},
                                     double lin_tol = 1e-11);

struct VerifyThresholds {
  double psd_tol = 1e-10;
  double eig_floor = -1e-10;       // min eigenvalue of rho
  double gap_floor = -1e-8;        // argmin gap
  double residual_max = 1e-8;      // identity residual sup
};

struct BasePointVerification {
  cplx t{0.0, 0.0};
  double min_c = 0.0;
  double min_eig_rho = 0.0;
  double residual_sup = 0.0;
  double residual_l2 = 0.0;
  double bound_ratio = 0.0;
  bool ratio_degenerate = false;
  double argmin_gap = 0.0;
  int newton_iters = 0;
  double fiber_volume = 0.0;
};

struct VerificationReport {
  std::vector<BasePointVerification> rows;
  double identity_residual_sup = 0.0; // max over rows
  double identity_residual_l2 = 0.0;  // max over rows
  double min_c = 0.0;                 // min over rows
  double min_eig_rho = 0.0;           // min over rows
  double argmin_bound_gap = 0.0;      // min over rows
  bool beta_psd = true;
  double beta_min_eig = 0.0;
  bool passed = false;
};

VerificationReport verify_family(const BetaFamily& family, std::span<const cplx> base_points,
                                 const TorusGrid& grid, const SolverOptions& opt = {},
                                 const VerifyThresholds& thresholds = {});

/// One row of the nef sweep: the full pipeline with the twist scaled to
/// eps * beta. The solved potential is the certificate for that eps.
struct SweepRow {
  double eps = 0.0;
  cplx t{0.0, 0.0};
  double min_c = 0.0;
  double min_eig_rho = 0.0;
  bool ok = false;
  std::string error;
  Field certificate; // psi_eps
};

/// Rows sorted by eps ascending, then by (Re t, Im t). Per-row solver errors
/// are captured in the row; other rows are still produced.
std::vector<SweepRow> epsilon_sweep(const BetaFamily& family, std::span<const double> eps_list,
                                    std::span<const cplx> base_points, const TorusGrid& grid,
                                    const SolverOptions& opt = {});

} // namespace kaefam
