#pragma once

#include "kaefam/torus.hpp"

#include <optional>

namespace kaefam {

/// The fiber class integral(beta_zz) must be positive for the fiber equation
/// to be solvable.
class KahlerClassViolation : public std::runtime_error {
public:
  explicit KahlerClassViolation(const std::string& msg) : std::runtime_error(msg) {}
};

class ConvergenceFailure : public std::runtime_error {
public:
  ConvergenceFailure(const std::string& msg, std::vector<double> history)
      : std::runtime_error(msg), residual_history(std::move(history)) {}
  std::vector<double> residual_history;
};

struct SolverOptions {
  double tol = 1e-12;        // sup-norm residual target
  int max_iters = 50;        // Newton steps
  int max_halvings = 30;     // Armijo damping
  bool dealias = false;      // 2/3-rule filter on e^psi (stress-test switch)
  double small_class_threshold = 1e-8;
};

/// Solved fiber potential: psi_zz + beta_zz = e^psi on the torus fiber.
struct FiberSolution {
  Field psi; // real
  double residual_sup = 0.0;
  int newton_iters = 0;
  double fiber_volume = 0.0; // integral of e^psi
  bool small_class_flagged = false;
  std::vector<double> residual_history;
};

/// Damped Newton iteration for psi_zz + beta_zz = e^psi. The solution is
/// unique, hence independent of init; default init is log(mean(beta_zz)).
FiberSolution solve_fiber_ke(const Field& beta_zz, std::optional<Field> init = {},
                             const SolverOptions& opt = {});

/// Solves L[u] = u_zz - e^psi u = rhs. L has a strictly negative zeroth-order
/// term, so it is invertible; conjugate gradients preconditioned by the
/// constant-coefficient symbol (dzdzbar - mean(e^psi))^-1. Complex rhs is
/// split into two real solves.
Field solve_linearized(const Field& psi, const Field& rhs, double tol = 1e-11);

namespace detail {
/// Same solve with a precomputed coefficient field e^psi.
Field solve_linearized_coeff(const Field& e_psi, const Field& rhs, double tol);
} // namespace detail

} // namespace kaefam
