#pragma once

#include "kaefam/torus.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace kaefam {

/// Parse error with 0-based character position.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& msg, std::size_t pos)
      : std::runtime_error(msg + " (at position " + std::to_string(pos) + ")"),
        position(pos) {}
  std::size_t position;
};

/// Expression tree for twist potentials. The source grammar admits
///   real literals, re(t), im(t), abs2(t), cosm(m,n), sinm(m,n), + - *, ( )
/// with '*' requiring at least one factor free of fiber modes. Derivative
/// trees additionally contain complex constants and the leaves t, conj(t).
struct ExprNode {
  enum class Kind { Const, ReT, ImT, Abs2T, T, ConjT, Cos, Sin, Sum, Prod };

  Kind kind = Kind::Const;
  cplx value{0.0, 0.0}; // Const
  int m = 0, n = 0;     // Cos / Sin mode indices
  std::vector<ExprNode> kids;

  static ExprNode constant(cplx v) {
    ExprNode e;
    e.kind = Kind::Const;
    e.value = v;
    return e;
  }
  static ExprNode leaf(Kind k) {
    ExprNode e;
    e.kind = k;
    return e;
  }
  static ExprNode mode(Kind k, int m, int n) {
    ExprNode e;
    e.kind = k;
    e.m = m;
    e.n = n;
    return e;
  }

  bool depends_on_fiber() const;
  bool is_zero() const { return kind == Kind::Const && value == cplx(0.0, 0.0); }
};

class PotentialExpr {
public:
  PotentialExpr() : root_(ExprNode::constant(0.0)) {}
  explicit PotentialExpr(ExprNode root) : root_(std::move(root)) {}

  const ExprNode& root() const { return root_; }

  /// Value at base point t and fiber point (x, y) (lattice coordinates).
  cplx eval_at(cplx t, double x, double y) const;
  /// Value for fiber-free expressions.
  cplx eval_at(cplx t) const;

  /// Sampled values on the grid at base point t. Real-tagged when the tree
  /// has no complex coefficients.
  Field sample(cplx t, const TorusGrid& grid) const;

  bool depends_on_fiber() const { return root_.depends_on_fiber(); }

  /// Canonical printable form (used by tests and diagnostics).
  std::string to_string() const;

private:
  ExprNode root_;
};

/// parse_potential: text -> expression tree. Throws ParseError; in particular
/// bare fiber variables (x, y, z) are rejected, as are non-integer mode
/// arguments and products of two fiber-dependent subtrees.
PotentialExpr parse_potential(const std::string& text);

enum class Wirtinger { Dt, Dtbar, Dz, Dzbar };

/// Exact symbolic derivative. Fiber derivatives use the lattice chain rule
///   x = (conj(tau) z - tau conj(z)) / (conj(tau) - tau),
///   y = (z - conj(z)) / (tau - conj(tau)),
/// so the result depends on the modulus tau (Im tau > 0 required).
PotentialExpr differentiate(const PotentialExpr& e, Wirtinger which, cplx tau);

/// Constant Hermitian background part of the twist form, rows/cols (t, z).
struct BackgroundForm {
  double h_tt = 1.0;
  double h_zz = 1.0;
  cplx h_tz{0.0, 0.0};

  double eigmin() const { return hermitian2_eigmin(h_tt, h_tz, h_zz); }
  void validate(double psd_tol = 1e-10) const;
};

/// Coefficient fields of the twist form beta = H + i ddbar Phi at one base
/// point, together with the t-derivatives of beta_zz used by implicit
/// differentiation. beta_zt = conj(beta_tz) throughout.
struct BetaEval {
  cplx t{0.0, 0.0};
  Field beta_tt;          // real
  Field beta_tz;          // complex
  Field beta_zz;          // real
  Field dt_beta_zz;       // complex
  Field dtdtbar_beta_zz;  // real
};

/// All six fields of BetaEval sampled at base point t.
BetaEval eval_beta(const PotentialExpr& phi, const BackgroundForm& h, cplx t,
                   const TorusGrid& grid);

/// Cached symbolic derivatives of one potential; evaluates BetaEval at many
/// base points without re-deriving the trees.
class BetaFamily {
public:
  BetaFamily(PotentialExpr phi, BackgroundForm h, cplx tau);

  BetaEval at(cplx t, const TorusGrid& grid) const;
  const BackgroundForm& background() const { return h_; }
  const PotentialExpr& potential() const { return phi_; }
  cplx tau() const { return tau_; }

  /// Same family with the twist scaled by eps (H and Phi both scaled).
  BetaFamily scaled(double eps) const;

private:
  PotentialExpr phi_;
  BackgroundForm h_;
  cplx tau_;
  PotentialExpr d_tt_, d_tz_, d_zz_, dt_d_zz_, dttbar_d_zz_;
};

/// Result of the sampled semi-positivity scan.
struct SemiPositiveReport {
  double min_eig = 0.0;
  cplx argmin_t{0.0, 0.0};
  int argmin_j = 0;
  int argmin_k = 0;
  bool violated = false;
};

/// Minimum over all sampled (t, z) of the smaller eigenvalue of the 2x2
/// coefficient matrix of beta; flags violation below -psd_tol.
SemiPositiveReport check_semipositive(const BetaFamily& family,
                                      std::span<const cplx> base_samples,
                                      const TorusGrid& grid, double psd_tol = 1e-10);

} // namespace kaefam
