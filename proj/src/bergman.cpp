#include "kaefam/bergman.hpp"

#include <cmath>
#include <sstream>

namespace kaefam {

namespace detail {

void gauss_legendre_01(int q, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.resize(q);
  weights.resize(q);
  // Newton iteration on Legendre polynomials, symmetric roots on [-1, 1]
  for (int i = 0; i < (q + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (q + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= q; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = q * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    nodes[i] = 0.5 * (1.0 - x); // descending root -> ascending node
    nodes[q - 1 - i] = 0.5 * (1.0 + x);
    weights[i] = 0.5 * w;
    weights[q - 1 - i] = 0.5 * w;
  }
}

} // namespace detail

void BergmanChart::validate() const {
  if (!(radius > 0.0)) throw std::invalid_argument("chart radius must be positive");
  if (m < 1) throw std::invalid_argument("m must be a positive integer");
  if (degree < 0) throw std::invalid_argument("degree must be nonnegative");
  if (quadrature < 8) throw std::invalid_argument("quadrature resolution too small");
  if (weight.depends_on_fiber())
    throw std::invalid_argument("chart weight must not contain fiber modes");
}

namespace {

struct GramSetup {
  int dim;                          // degree + 1
  std::vector<cplx> gram;           // row-major (dim x dim)
  std::vector<double> scale;        // sqrt of diagonal
  std::vector<cplx> chol;           // lower-triangular factor of scaled Gram
  double tau_zz_max = 0.0;
  double tau_zz_min = 0.0;
};

GramSetup assemble_and_factor(const BergmanChart& chart) {
  chart.validate();
  const int dim = chart.degree + 1;
  const int q = chart.quadrature;
  const int n_ang = 4 * q;

  // dd^c of the weight in the chart coordinate; the t-rules are independent
  // of the lattice modulus, any valid tau works here
  PotentialExpr tau_zz = differentiate(differentiate(chart.weight, Wirtinger::Dt, cplx(0, 1)),
                                       Wirtinger::Dtbar, cplx(0, 1));

  std::vector<double> rn, rw;
  detail::gauss_legendre_01(q, rn, rw);

  GramSetup s;
  s.dim = dim;
  s.gram.assign(std::size_t(dim) * dim, cplx(0.0, 0.0));
  bool first = true;

  std::vector<cplx> pow(dim);
  for (int i = 0; i < q; ++i) {
    const double r = chart.radius * rn[i];
    const double wr = chart.radius * rw[i] * r; // includes the area Jacobian r
    for (int l = 0; l < n_ang; ++l) {
      const double th = 2.0 * kPi * double(l) / n_ang;
      const cplx z = std::polar(r, th);
      const double tz = tau_zz.eval_at(z).real();
      if (first || tz > s.tau_zz_max) s.tau_zz_max = tz;
      if (first || tz < s.tau_zz_min) s.tau_zz_min = tz;
      first = false;
      const double tau_val = chart.weight.eval_at(z).real();
      const double w =
          wr * (2.0 * kPi / n_ang) * std::exp(-chart.m * tau_val - std::norm(z)) * tz;
      pow[0] = cplx(1.0, 0.0);
      for (int p = 1; p < dim; ++p) pow[p] = pow[p - 1] * z;
      for (int j = 0; j < dim; ++j)
        for (int k = j; k < dim; ++k)
          s.gram[std::size_t(j) * dim + k] += w * pow[j] * std::conj(pow[k]);
    }
  }
  if (s.tau_zz_min <= 0.0)
    throw std::invalid_argument("chart weight is not strictly plurisubharmonic on the chart");

  // mirror to the exact Hermitian completion
  for (int j = 0; j < dim; ++j)
    for (int k = 0; k < j; ++k)
      s.gram[std::size_t(j) * dim + k] = std::conj(s.gram[std::size_t(k) * dim + j]);

  s.scale.resize(dim);
  for (int j = 0; j < dim; ++j) {
    double d = s.gram[std::size_t(j) * dim + j].real();
    if (!(d > 0.0) || !std::isfinite(d))
      throw ConditioningFailure("Gram diagonal not positive at degree " + std::to_string(j),
                                j);
    s.scale[j] = std::sqrt(d);
  }

  // Cholesky of the symmetrically scaled Gram matrix
  s.chol.assign(std::size_t(dim) * dim, cplx(0.0, 0.0));
  for (int k = 0; k < dim; ++k) {
    double diag = (s.gram[std::size_t(k) * dim + k].real()) / (s.scale[k] * s.scale[k]);
    double sum = 0.0;
    for (int j = 0; j < k; ++j) sum += std::norm(s.chol[std::size_t(k) * dim + j]);
    double d = diag - sum;
    if (!(d > 0.0))
      throw ConditioningFailure(
          "Gram matrix numerically singular at degree " + std::to_string(k), k);
    const double lkk = std::sqrt(d);
    s.chol[std::size_t(k) * dim + k] = lkk;
    for (int i = k + 1; i < dim; ++i) {
      cplx g = s.gram[std::size_t(i) * dim + k] / (s.scale[i] * s.scale[k]);
      cplx acc = g;
      for (int j = 0; j < k; ++j)
        acc -= s.chol[std::size_t(i) * dim + j] *
               std::conj(s.chol[std::size_t(k) * dim + j]);
      s.chol[std::size_t(i) * dim + k] = acc / lkk;
    }
  }
  return s;
}

double kernel_at(const GramSetup& s, cplx x) {
  const int dim = s.dim;
  // forward substitution L w = v with v_j = x^j / scale_j
  std::vector<cplx> w(dim);
  cplx xp(1.0, 0.0);
  for (int j = 0; j < dim; ++j) {
    cplx v = xp / s.scale[j];
    for (int k = 0; k < j; ++k) v -= s.chol[std::size_t(j) * dim + k] * w[k];
    w[j] = v / s.chol[std::size_t(j) * dim + j];
    xp *= x;
  }
  double kk = 0.0;
  for (int j = 0; j < dim; ++j) kk += std::norm(w[j]);
  return kk;
}

} // namespace

KernelDiagResult bergman_kernel_diag(const BergmanChart& chart,
                                     std::span<const cplx> points) {
  for (cplx x : points)
    if (std::abs(x) >= chart.radius)
      throw std::invalid_argument("evaluation point outside the chart");

  GramSetup s = assemble_and_factor(chart);

  KernelDiagResult res;
  if (chart.degree < 2.0 * chart.m * chart.radius * s.tau_zz_max) {
    std::ostringstream os;
    os << "degree " << chart.degree << " below the heuristic 2*m*R*scale = "
       << 2.0 * chart.m * chart.radius * s.tau_zz_max;
    res.warnings.push_back(os.str());
  }
  for (cplx x : points) {
    double kk = kernel_at(s, x);
    res.kernel.push_back(kk);
    res.values.push_back(std::log(kk) / double(chart.m));
  }
  return res;
}

ConvergenceStudy convergence_study(const BergmanChart& chart_template,
                                   std::span<const int> m_list,
                                   std::span<const cplx> points) {
  for (std::size_t i = 1; i < m_list.size(); ++i)
    if (m_list[i] < m_list[i - 1])
      throw std::invalid_argument("m-list must be non-decreasing");

  ConvergenceStudy study;
  for (int m : m_list) {
    BergmanChart chart = chart_template;
    chart.m = m;
    KernelDiagResult res = bergman_kernel_diag(chart, points);
    double sup = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      double tau_x = chart.weight.eval_at(points[i]).real();
      sup = std::max(sup, std::abs(res.values[i] - tau_x));
      if (m >= 2) {
        double overshoot = (res.values[i] - tau_x) * double(m) / std::log(double(m));
        study.fitted_overshoot = std::max(study.fitted_overshoot, overshoot);
      }
    }
    study.rows.push_back({m, sup});
  }
  return study;
}

} // namespace kaefam
