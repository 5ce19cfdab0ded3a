#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kaefam {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Periodic sample grid on the fundamental domain of the lattice Z + tau*Z.
/// Sample points are z_{jk} = x_j + tau*y_k with x_j = j/n, y_k = k/n.
struct TorusGrid {
  int n = 0;          // samples per lattice direction; power of two, >= 8
  cplx tau{0.0, 1.0}; // modulus, Im tau > 0

  TorusGrid() = default;
  TorusGrid(int resolution, cplx modulus);

  bool operator==(const TorusGrid&) const = default;

  std::size_t size() const { return std::size_t(n) * std::size_t(n); }
  double area() const { return tau.imag(); }
  double cell_area() const { return tau.imag() / double(size()); }
};

enum class FieldTag { Real, Complex };

/// Sampled function on a TorusGrid. Real-tagged fields keep complex storage
/// but their imaginary parts stay below 1e-12; require_real enforces this.
class Field {
public:
  Field() = default;
  Field(const TorusGrid& g, FieldTag tag)
      : grid_(g), tag_(tag), a_(g.size(), cplx(0.0, 0.0)) {}

  static Field constant(const TorusGrid& g, cplx v) {
    Field f(g, v.imag() == 0.0 ? FieldTag::Real : FieldTag::Complex);
    for (auto& s : f.a_) s = v;
    return f;
  }

  const TorusGrid& grid() const { return grid_; }
  FieldTag tag() const { return tag_; }
  bool is_real() const { return tag_ == FieldTag::Real; }
  void set_tag(FieldTag t) { tag_ = t; }
  int n() const { return grid_.n; }
  std::size_t size() const { return a_.size(); }

  // index (j,k): j along the x-direction (fast), k along the y-direction
  cplx operator()(int j, int k) const { return a_[std::size_t(k) * grid_.n + j]; }
  cplx& operator()(int j, int k) { return a_[std::size_t(k) * grid_.n + j]; }
  cplx operator[](std::size_t i) const { return a_[i]; }
  cplx& operator[](std::size_t i) { return a_[i]; }

  std::span<const cplx> samples() const { return a_; }
  std::span<cplx> samples() { return a_; }

  void check_finite(const std::string& what) const;

private:
  TorusGrid grid_;
  FieldTag tag_ = FieldTag::Real;
  std::vector<cplx> a_;
};

// pointwise arithmetic; results are real-tagged when the inputs justify it
Field operator+(const Field& f, const Field& g);
Field operator-(const Field& f, const Field& g);
Field operator*(const Field& f, const Field& g);
Field operator*(double s, const Field& f);
Field operator*(cplx s, const Field& f);
Field operator+(const Field& f, double s);
Field operator-(const Field& f, double s);

Field conj(const Field& f);
Field real_part(const Field& f);
Field imag_part(const Field& f);
Field abs2(const Field& f);     // |f|^2, real-tagged
Field exp(const Field& f);      // real fields only
Field reciprocal(const Field& f);

double sup_norm(const Field& f);
double sup_imag(const Field& f);
cplx mean(const Field& f);      // plain sample mean
double min_real(const Field& f);
double min_real(const Field& f, int& argj, int& argk);

/// Verifies the imaginary part is below tol and strips it.
Field require_real(const Field& f, double tol = 1e-12);

enum class Deriv { Dz, Dzbar, DzDzbar };

/// Spectrally exact derivative: exact on modes e^{2 pi i (m x + n y)} with
/// |m|, |n| < n/2. Dz/Dzbar outputs are complex-tagged; DzDzbar of a real
/// field is real-tagged.
Field spectral_derivative(const Field& f, Deriv which);

/// Trapezoidal rule on the periodic grid: (Im tau / n^2) * sum of samples.
cplx integrate(const Field& f);

/// Zeroes all modes with |m| > n/3 or |n| > n/3 (stress-test switch).
Field dealias_two_thirds(const Field& f);

namespace detail {

/// Radix-2 complex FFT for power-of-two sizes.
class Fft {
public:
  explicit Fft(int n);
  int size() const { return n_; }
  void forward(std::span<cplx> a) const;  // unnormalized
  void inverse(std::span<cplx> a) const;  // unnormalized

private:
  void transform(std::span<cplx> a, bool inv) const;
  int n_;
  std::vector<int> rev_;
  std::vector<cplx> w_; // w_[k] = exp(-2 pi i k / n), k < n/2
};

// forward: samples -> Fourier coefficients (normalized by 1/n^2)
// inverse: coefficients -> samples
void fft2_forward(const TorusGrid& g, std::vector<cplx>& a);
void fft2_inverse(const TorusGrid& g, std::vector<cplx>& a);

/// Signed mode index for FFT bucket a in [0, n): m in [-n/2, n/2).
inline int mode_index(int a, int n) { return a < n / 2 ? a : a - n; }

} // namespace detail

/// Smallest eigenvalue of the Hermitian matrix [[a, b], [conj(b), d]].
double hermitian2_eigmin(double a, cplx b, double d);

/// Coefficients of a Hermitian (1,1)-form over the grid: [[tt, tz], [conj(tz), zz]].
struct FormField {
  Field tt; // real
  Field tz; // complex
  Field zz; // real
};

/// min over the grid of the pointwise smaller eigenvalue
double form_eigmin(const FormField& f);
double form_eigmin(const FormField& f, int& argj, int& argk);

} // namespace kaefam
