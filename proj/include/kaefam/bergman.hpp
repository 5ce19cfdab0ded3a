#pragma once

#include "kaefam/expr.hpp"

#include <span>
#include <string>
#include <vector>

namespace kaefam {

/// The Gram matrix could not be factorized at the stated monomial degree.
class ConditioningFailure : public std::runtime_error {
public:
  ConditioningFailure(const std::string& msg, int degree)
      : std::runtime_error(msg), degree(degree) {}
  int degree;
};

/// Weighted Bergman space on the disk chart |z| < radius. The weight is a
/// strictly plurisubharmonic expression in re(t), im(t), abs2(t) with t read
/// as the chart coordinate. Norm: integral of |f|^2 e^{-m tau - |z|^2}
/// tau_zz dLebesgue over the chart.
struct BergmanChart {
  double radius = 1.0;
  PotentialExpr weight;
  int m = 1;
  int degree = 24;     // monomial basis z^0 .. z^degree
  int quadrature = 64; // radial Gauss-Legendre nodes; angular nodes = 4x

  void validate() const;
};

struct KernelDiagResult {
  std::vector<double> kernel; // K_m(x, x)
  std::vector<double> values; // (1/m) log K_m(x, x)
  std::vector<std::string> warnings;
};

/// Reproducing-kernel diagonal through the orthonormalized monomial basis:
/// K_m(x,x) = sum_j |e_j(x)|^2, which realizes the supremum of log |f(x)|^2
/// over the unit ball of the space.
KernelDiagResult bergman_kernel_diag(const BergmanChart& chart,
                                     std::span<const cplx> points);

struct ConvergenceRow {
  int m = 0;
  double sup_error = 0.0; // sup over points of |(1/m) log K_m(x,x) - tau(x)|
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  /// fitted constant in (1/m) log K_m <= tau + C log(m)/m, reported only
  double fitted_overshoot = 0.0;
};

ConvergenceStudy convergence_study(const BergmanChart& chart_template,
                                   std::span<const int> m_list,
                                   std::span<const cplx> points);

namespace detail {
/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre_01(int q, std::vector<double>& nodes, std::vector<double>& weights);
} // namespace detail

} // namespace kaefam
