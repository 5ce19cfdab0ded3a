#include "kaefam/torus.hpp"

#include <algorithm>
#include <cmath>

namespace kaefam {

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

FieldTag join_tags(const Field& f, const Field& g) {
  return (f.is_real() && g.is_real()) ? FieldTag::Real : FieldTag::Complex;
}

void check_same_grid(const Field& f, const Field& g) {
  if (!(f.grid() == g.grid()))
    throw std::invalid_argument("field arithmetic: mismatched grids");
}

} // namespace

TorusGrid::TorusGrid(int resolution, cplx modulus) : n(resolution), tau(modulus) {
  if (n < 8 || !is_pow2(n))
    throw std::invalid_argument("grid resolution must be a power of two >= 8");
  if (!(tau.imag() > 0.0))
    throw std::invalid_argument("Im tau must be positive");
}

void Field::check_finite(const std::string& what) const {
  for (const auto& v : a_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw std::invalid_argument(what + ": non-finite samples");
}

Field operator+(const Field& f, const Field& g) {
  check_same_grid(f, g);
  Field out(f.grid(), join_tags(f, g));
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] + g[i];
  return out;
}

Field operator-(const Field& f, const Field& g) {
  check_same_grid(f, g);
  Field out(f.grid(), join_tags(f, g));
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] - g[i];
  return out;
}

Field operator*(const Field& f, const Field& g) {
  check_same_grid(f, g);
  Field out(f.grid(), join_tags(f, g));
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] * g[i];
  return out;
}

Field operator*(double s, const Field& f) {
  Field out(f.grid(), f.tag());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = s * f[i];
  return out;
}

Field operator*(cplx s, const Field& f) {
  Field out(f.grid(), s.imag() == 0.0 ? f.tag() : FieldTag::Complex);
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = s * f[i];
  return out;
}

Field operator+(const Field& f, double s) {
  Field out(f.grid(), f.tag());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] + s;
  return out;
}

Field operator-(const Field& f, double s) { return f + (-s); }

Field conj(const Field& f) {
  Field out(f.grid(), f.tag());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = std::conj(f[i]);
  return out;
}

Field real_part(const Field& f) {
  Field out(f.grid(), FieldTag::Real);
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i].real();
  return out;
}

Field imag_part(const Field& f) {
  Field out(f.grid(), FieldTag::Real);
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i].imag();
  return out;
}

Field abs2(const Field& f) {
  Field out(f.grid(), FieldTag::Real);
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = std::norm(f[i]);
  return out;
}

Field exp(const Field& f) {
  if (!f.is_real())
    throw std::invalid_argument("exp(Field): field must be real-tagged");
  Field out(f.grid(), FieldTag::Real);
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = std::exp(f[i].real());
  return out;
}

Field reciprocal(const Field& f) {
  Field out(f.grid(), f.tag());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = 1.0 / f[i];
  return out;
}

double sup_norm(const Field& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s = std::max(s, std::abs(f[i]));
  return s;
}

double sup_imag(const Field& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s = std::max(s, std::abs(f[i].imag()));
  return s;
}

cplx mean(const Field& f) {
  cplx s(0.0, 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i];
  return s / double(f.size());
}

double min_real(const Field& f, int& argj, int& argk) {
  double m = f(0, 0).real();
  argj = 0;
  argk = 0;
  const int n = f.n();
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) {
      double v = f(j, k).real();
      if (v < m) {
        m = v;
        argj = j;
        argk = k;
      }
    }
  return m;
}

double min_real(const Field& f) {
  int j, k;
  return min_real(f, j, k);
}

Field require_real(const Field& f, double tol) {
  double im = sup_imag(f);
  if (im > tol)
    throw std::runtime_error("require_real: imaginary part " + std::to_string(im) +
                             " exceeds tolerance");
  return real_part(f);
}

namespace detail {

Fft::Fft(int n) : n_(n) {
  if (!is_pow2(n)) throw std::invalid_argument("Fft: size must be a power of two");
  rev_.resize(n);
  int lg = 0;
  while ((1 << lg) < n) ++lg;
  for (int i = 0; i < n; ++i) {
    int r = 0;
    for (int b = 0; b < lg; ++b)
      if (i & (1 << b)) r |= 1 << (lg - 1 - b);
    rev_[i] = r;
  }
  w_.resize(n / 2);
  for (int k = 0; k < n / 2; ++k) {
    double ang = -2.0 * kPi * double(k) / double(n);
    w_[k] = cplx(std::cos(ang), std::sin(ang));
  }
}

void Fft::transform(std::span<cplx> a, bool inv) const {
  for (int i = 0; i < n_; ++i)
    if (i < rev_[i]) std::swap(a[i], a[rev_[i]]);
  for (int len = 2; len <= n_; len <<= 1) {
    int half = len >> 1;
    int step = n_ / len;
    for (int i = 0; i < n_; i += len) {
      for (int k = 0; k < half; ++k) {
        cplx w = w_[std::size_t(k) * step];
        if (inv) w = std::conj(w);
        cplx u = a[i + k];
        cplx v = a[i + k + half] * w;
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

void Fft::forward(std::span<cplx> a) const { transform(a, false); }
void Fft::inverse(std::span<cplx> a) const { transform(a, true); }

namespace {

void fft2(const TorusGrid& g, std::vector<cplx>& a, bool inv) {
  const int n = g.n;
  Fft fft(n);
  // rows (x-direction, contiguous)
  for (int k = 0; k < n; ++k) {
    std::span<cplx> row(a.data() + std::size_t(k) * n, std::size_t(n));
    inv ? fft.inverse(row) : fft.forward(row);
  }
  // columns
  std::vector<cplx> col(n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) col[k] = a[std::size_t(k) * n + j];
    inv ? fft.inverse(col) : fft.forward(col);
    for (int k = 0; k < n; ++k) a[std::size_t(k) * n + j] = col[k];
  }
}

} // namespace

void fft2_forward(const TorusGrid& g, std::vector<cplx>& a) {
  fft2(g, a, false);
  const double scale = 1.0 / double(g.size());
  for (auto& v : a) v *= scale;
}

void fft2_inverse(const TorusGrid& g, std::vector<cplx>& a) { fft2(g, a, true); }

} // namespace detail

Field spectral_derivative(const Field& f, Deriv which) {
  f.check_finite("spectral_derivative");
  const TorusGrid& g = f.grid();
  const int n = g.n;
  const cplx tau = g.tau;
  const cplx tb = std::conj(tau);
  const cplx denom = tb - tau; // = -2i Im tau
  const double imtau2 = tau.imag() * tau.imag();

  // every derivative annihilates the mean; removing it first keeps the
  // transform's rounding noise proportional to the varying part only
  const cplx bar = mean(f);
  std::vector<cplx> hat(f.samples().begin(), f.samples().end());
  for (auto& v : hat) v -= bar;
  detail::fft2_forward(g, hat);

  for (int b = 0; b < n; ++b) {
    const int nn = detail::mode_index(b, n);
    for (int a = 0; a < n; ++a) {
      const int m = detail::mode_index(a, n);
      cplx sym;
      switch (which) {
        case Deriv::Dz:
          sym = 2.0 * kPi * cplx(0.0, 1.0) * (double(m) * tb - double(nn)) / denom;
          break;
        case Deriv::Dzbar:
          sym = 2.0 * kPi * cplx(0.0, 1.0) * (double(nn) - double(m) * tau) / denom;
          break;
        case Deriv::DzDzbar: {
          const cplx q = double(nn) - double(m) * tau;
          sym = cplx(-kPi * kPi * std::norm(q) / imtau2, 0.0);
          break;
        }
      }
      hat[std::size_t(b) * n + a] *= sym;
    }
  }
  detail::fft2_inverse(g, hat);

  FieldTag tag =
      (which == Deriv::DzDzbar && f.is_real()) ? FieldTag::Real : FieldTag::Complex;
  Field out(g, tag);
  if (tag == FieldTag::Real) {
    // the DzDzbar symbol is real, so imaginary parts are pure rounding noise
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = hat[i].real();
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = hat[i];
  }
  return out;
}

cplx integrate(const Field& f) {
  f.check_finite("integrate");
  cplx s(0.0, 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i];
  return s * f.grid().cell_area();
}

Field dealias_two_thirds(const Field& f) {
  const TorusGrid& g = f.grid();
  const int n = g.n;
  std::vector<cplx> hat(f.samples().begin(), f.samples().end());
  detail::fft2_forward(g, hat);
  const int cut = n / 3;
  for (int b = 0; b < n; ++b) {
    const int nn = detail::mode_index(b, n);
    for (int a = 0; a < n; ++a) {
      const int m = detail::mode_index(a, n);
      if (std::abs(m) > cut || std::abs(nn) > cut) hat[std::size_t(b) * n + a] = 0.0;
    }
  }
  detail::fft2_inverse(g, hat);
  Field out(g, f.tag());
  if (f.is_real())
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = hat[i].real();
  else
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = hat[i];
  return out;
}

double hermitian2_eigmin(double a, cplx b, double d) {
  const double half_tr = 0.5 * (a + d);
  const double half_diff = 0.5 * (a - d);
  return half_tr - std::sqrt(half_diff * half_diff + std::norm(b));
}

double form_eigmin(const FormField& f, int& argj, int& argk) {
  const int n = f.tt.n();
  double m = hermitian2_eigmin(f.tt(0, 0).real(), f.tz(0, 0), f.zz(0, 0).real());
  argj = 0;
  argk = 0;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) {
      double v = hermitian2_eigmin(f.tt(j, k).real(), f.tz(j, k), f.zz(j, k).real());
      if (v < m) {
        m = v;
        argj = j;
        argk = k;
      }
    }
  return m;
}

double form_eigmin(const FormField& f) {
  int j, k;
  return form_eigmin(f, j, k);
}

} // namespace kaefam
