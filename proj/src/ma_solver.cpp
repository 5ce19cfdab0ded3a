#include "kaefam/ma_solver.hpp"

#include <cmath>

namespace kaefam {

namespace {

// A[u] = e_psi * u - u_zz  (positive definite counterpart of -L)
Field apply_op(const Field& e_psi, const Field& u) {
  return e_psi * u - spectral_derivative(u, Deriv::DzDzbar);
}

// (c - dzdzbar)^-1 applied spectrally, c > 0
Field const_coeff_inverse(const Field& r, double c) {
  const TorusGrid& g = r.grid();
  const int n = g.n;
  const double imtau2 = g.tau.imag() * g.tau.imag();
  std::vector<cplx> hat(r.samples().begin(), r.samples().end());
  detail::fft2_forward(g, hat);
  for (int b = 0; b < n; ++b) {
    const int nn = detail::mode_index(b, n);
    for (int a = 0; a < n; ++a) {
      const int m = detail::mode_index(a, n);
      const cplx q = double(nn) - double(m) * g.tau;
      const double lambda = kPi * kPi * std::norm(q) / imtau2;
      hat[std::size_t(b) * n + a] /= (c + lambda);
    }
  }
  detail::fft2_inverse(g, hat);
  Field out(g, r.tag());
  if (r.is_real())
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = hat[i].real();
  else
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = hat[i];
  return out;
}

double dot_real(const Field& f, const Field& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i].real() * g[i].real();
  return s;
}

// preconditioned CG on A x = b for real fields
Field pcg_solve(const Field& e_psi, const Field& b, double tol) {
  const TorusGrid& g = b.grid();
  const double c = mean(e_psi).real();
  Field x(g, FieldTag::Real);
  Field r = b;
  const double b_norm = sup_norm(r);
  if (b_norm <= tol) return x;

  Field z = const_coeff_inverse(r, c);
  Field p = z;
  double rz = dot_real(r, z);
  const int cap = 5000;
  int stalls = 0;
  double best_true = -1.0;
  for (int it = 0; it < cap; ++it) {
    Field ap = apply_op(e_psi, p);
    double pap = dot_real(p, ap);
    if (!(pap > 0.0) || !std::isfinite(pap)) {
      std::vector<double> hist{sup_norm(r)};
      throw ConvergenceFailure("linear solve lost positive definiteness", hist);
    }
    double alpha = rz / pap;
    x = x + alpha * p;
    r = r - alpha * ap;
    double sup_rec = sup_norm(r);
    // past the rounding floor the recurrence drifts upward; stop before it
    // degrades the iterate
    if (!std::isfinite(sup_rec) || sup_rec > 10.0 * b_norm) {
      std::vector<double> hist{sup_rec};
      throw ConvergenceFailure("linear solve diverged past its rounding floor "
                               "(requested tolerance too tight)",
                               hist);
    }
    if (sup_rec <= tol) {
      // recurrence drift guard: confirm against the true residual
      Field rt = b - apply_op(e_psi, x);
      double true_res = sup_norm(rt);
      if (true_res <= tol) return x;
      // keep polishing while the true residual still improves; a stall means
      // the rounding floor sits above the requested tolerance
      if (best_true >= 0.0 && true_res > 0.95 * best_true) {
        if (++stalls >= 3) {
          std::vector<double> hist{true_res};
          throw ConvergenceFailure("linear solve reached its rounding floor above the "
                                   "requested tolerance",
                                   hist);
        }
      } else {
        stalls = 0;
      }
      if (best_true < 0.0 || true_res < best_true) best_true = true_res;
      r = rt;
    }
    z = const_coeff_inverse(r, c);
    double rz_new = dot_real(r, z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  std::vector<double> hist{sup_norm(r)};
  throw ConvergenceFailure("linear solve stagnated", hist);
}

} // namespace

namespace detail {

Field solve_linearized_coeff(const Field& e_psi, const Field& rhs, double tol) {
  rhs.check_finite("solve_linearized rhs");
  if (rhs.is_real()) {
    // L[u] = rhs  <=>  (e^psi - dzdzbar) u = -rhs
    return pcg_solve(e_psi, -1.0 * rhs, tol);
  }
  Field re = pcg_solve(e_psi, -1.0 * real_part(rhs), 0.5 * tol);
  Field im = pcg_solve(e_psi, -1.0 * imag_part(rhs), 0.5 * tol);
  Field out(rhs.grid(), FieldTag::Complex);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = cplx(re[i].real(), im[i].real());
  return out;
}

} // namespace detail

Field solve_linearized(const Field& psi, const Field& rhs, double tol) {
  Field e_psi = exp(require_real(psi));
  return detail::solve_linearized_coeff(e_psi, rhs, tol);
}

FiberSolution solve_fiber_ke(const Field& beta_zz, std::optional<Field> init,
                             const SolverOptions& opt) {
  if (!beta_zz.is_real())
    throw std::invalid_argument("solve_fiber_ke: beta_zz must be real");
  beta_zz.check_finite("solve_fiber_ke beta_zz");
  const TorusGrid& g = beta_zz.grid();

  const double mean_b = mean(beta_zz).real();
  if (!(mean_b > 0.0))
    throw KahlerClassViolation("fiber class integral of beta_zz is not positive (mean " +
                               std::to_string(mean_b) + ")");

  FiberSolution sol;
  sol.small_class_flagged = mean_b < opt.small_class_threshold;

  // iterate on the mean-shifted unknown u = psi - log(mean beta): the
  // equation becomes u_zz + beta_zz = mean_b e^u, and keeping the stored
  // field small keeps the Laplacian's rounding floor far below tol even when
  // log(mean beta) is large
  const double shift = std::log(mean_b);
  Field u = init ? require_real(require_real(*init) - shift) : Field(g, FieldTag::Real);

  auto nonlinearity = [&](const Field& w) {
    Field e = mean_b * exp(w);
    return opt.dealias ? dealias_two_thirds(e) : e;
  };
  auto residual = [&](const Field& w, const Field& e_psi) {
    return spectral_derivative(w, Deriv::DzDzbar) + beta_zz - e_psi;
  };

  Field e_psi = nonlinearity(u);
  Field r = residual(u, e_psi);
  double res = sup_norm(r);
  sol.residual_history.push_back(res);

  while (res > opt.tol) {
    if (sol.newton_iters >= opt.max_iters)
      throw ConvergenceFailure("Newton iteration did not reach tolerance",
                               sol.residual_history);
    // 0.01 * residual during globalization, tightening to 0.01 * residual^2
    // near the solution so the linear solves never break the quadratic tail
    const double lin_tol = std::max(0.01 * std::min(res, res * res), 1e-16);
    Field delta = pcg_solve(e_psi, r, lin_tol);

    bool accepted = false;
    double step = 1.0;
    Field trial_u, trial_e, trial_r;
    double trial_res = 0.0;
    for (int h = 0; h <= opt.max_halvings; ++h) {
      trial_u = u + step * delta;
      trial_e = nonlinearity(trial_u);
      trial_r = residual(trial_u, trial_e);
      trial_res = sup_norm(trial_r);
      if (trial_res <= (1.0 - 0.25 * step) * res) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted)
      throw ConvergenceFailure("Newton step rejected at full damping",
                               sol.residual_history);
    u = trial_u;
    e_psi = trial_e;
    r = trial_r;
    res = trial_res;
    sol.residual_history.push_back(res);
    ++sol.newton_iters;
  }

  sol.residual_sup = res;
  sol.psi = require_real(u + shift);
  sol.fiber_volume = integrate(exp(sol.psi)).real();
  return sol;
}

} // namespace kaefam
