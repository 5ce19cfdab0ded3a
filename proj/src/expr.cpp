#include "kaefam/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace kaefam {

using Kind = ExprNode::Kind;

bool ExprNode::depends_on_fiber() const {
  switch (kind) {
    case Kind::Cos:
    case Kind::Sin:
      return true;
    case Kind::Sum:
    case Kind::Prod:
      for (const auto& k : kids)
        if (k.depends_on_fiber()) return true;
      return false;
    default:
      return false;
  }
}

namespace {

bool is_real_valued(const ExprNode& e) {
  switch (e.kind) {
    case Kind::Const:
      return e.value.imag() == 0.0;
    case Kind::T:
    case Kind::ConjT:
      return false;
    case Kind::Sum:
    case Kind::Prod:
      for (const auto& k : e.kids)
        if (!is_real_valued(k)) return false;
      return true;
    default:
      return true;
  }
}

// --- light structural simplification (constant folding, zero pruning) ----

ExprNode make_sum(std::vector<ExprNode> kids) {
  std::vector<ExprNode> flat;
  cplx c(0.0, 0.0);
  for (auto& k : kids) {
    if (k.kind == Kind::Sum) {
      for (auto& kk : k.kids) {
        if (kk.kind == Kind::Const)
          c += kk.value;
        else
          flat.push_back(std::move(kk));
      }
    } else if (k.kind == Kind::Const) {
      c += k.value;
    } else if (!k.is_zero()) {
      flat.push_back(std::move(k));
    }
  }
  if (c != cplx(0.0, 0.0)) flat.push_back(ExprNode::constant(c));
  if (flat.empty()) return ExprNode::constant(0.0);
  if (flat.size() == 1) return flat[0];
  ExprNode s;
  s.kind = Kind::Sum;
  s.kids = std::move(flat);
  return s;
}

ExprNode make_prod(std::vector<ExprNode> kids) {
  std::vector<ExprNode> flat;
  cplx c(1.0, 0.0);
  for (auto& k : kids) {
    if (k.is_zero()) return ExprNode::constant(0.0);
    if (k.kind == Kind::Prod) {
      for (auto& kk : k.kids) {
        if (kk.kind == Kind::Const)
          c *= kk.value;
        else
          flat.push_back(std::move(kk));
      }
    } else if (k.kind == Kind::Const) {
      c *= k.value;
    } else {
      flat.push_back(std::move(k));
    }
  }
  if (flat.empty()) return ExprNode::constant(c);
  if (c == cplx(0.0, 0.0)) return ExprNode::constant(0.0);
  if (flat.size() == 1 && c == cplx(1.0, 0.0)) return flat[0];
  ExprNode p;
  p.kind = Kind::Prod;
  if (c != cplx(1.0, 0.0)) p.kids.push_back(ExprNode::constant(c));
  for (auto& f : flat) p.kids.push_back(std::move(f));
  return p;
}

// --- parser ---------------------------------------------------------------

class Parser {
public:
  explicit Parser(const std::string& text) : s_(text) {}

  ExprNode parse() {
    ExprNode e = parse_sum();
    skip_ws();
    if (pos_ != s_.size()) throw ParseError("unexpected trailing input", pos_);
    return e;
  }

private:
  ExprNode parse_sum() {
    ExprNode lhs = parse_term();
    for (;;) {
      skip_ws();
      if (peek() == '+') {
        ++pos_;
        std::vector<ExprNode> kids;
        kids.push_back(std::move(lhs));
        kids.push_back(parse_term());
        lhs = make_sum(std::move(kids));
      } else if (peek() == '-') {
        ++pos_;
        std::vector<ExprNode> kids;
        kids.push_back(std::move(lhs));
        std::vector<ExprNode> neg;
        neg.push_back(ExprNode::constant(-1.0));
        neg.push_back(parse_term());
        kids.push_back(make_prod(std::move(neg)));
        lhs = make_sum(std::move(kids));
      } else {
        return lhs;
      }
    }
  }

  ExprNode parse_term() {
    ExprNode lhs = parse_factor();
    for (;;) {
      skip_ws();
      if (peek() != '*') return lhs;
      std::size_t star = pos_;
      ++pos_;
      ExprNode rhs = parse_factor();
      if (lhs.depends_on_fiber() && rhs.depends_on_fiber())
        throw ParseError("product of two fiber-dependent factors", star);
      std::vector<ExprNode> kids;
      kids.push_back(std::move(lhs));
      kids.push_back(std::move(rhs));
      lhs = make_prod(std::move(kids));
    }
  }

  ExprNode parse_factor() {
    skip_ws();
    char c = peek();
    if (c == '(') {
      ++pos_;
      ExprNode e = parse_sum();
      expect(')');
      return e;
    }
    if (c == '-') {
      ++pos_;
      std::vector<ExprNode> kids;
      kids.push_back(ExprNode::constant(-1.0));
      kids.push_back(parse_factor());
      return make_prod(std::move(kids));
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_name();
    throw ParseError("expected a factor", pos_);
  }

  ExprNode parse_number() {
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) throw ParseError("malformed number", pos_);
    pos_ += std::size_t(end - begin);
    if (!std::isfinite(v)) throw ParseError("literal must be finite", pos_);
    return ExprNode::constant(v);
  }

  ExprNode parse_name() {
    std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    std::string name = s_.substr(start, pos_ - start);
    if (name == "x" || name == "y" || name == "z")
      throw ParseError("bare fiber variable '" + name + "'", start);
    if (name == "t")
      throw ParseError("bare variable 't'; use re(t), im(t) or abs2(t)", start);
    if (name == "re" || name == "im" || name == "abs2") {
      expect('(');
      skip_ws();
      std::size_t tpos = pos_;
      while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (s_.substr(tpos, pos_ - tpos) != "t")
        throw ParseError("expected 't'", tpos);
      expect(')');
      if (name == "re") return ExprNode::leaf(Kind::ReT);
      if (name == "im") return ExprNode::leaf(Kind::ImT);
      return ExprNode::leaf(Kind::Abs2T);
    }
    if (name == "cosm" || name == "sinm") {
      expect('(');
      int m = parse_int();
      expect(',');
      int n = parse_int();
      expect(')');
      return ExprNode::mode(name == "cosm" ? Kind::Cos : Kind::Sin, m, n);
    }
    throw ParseError("unknown name '" + name + "'", start);
  }

  int parse_int() {
    skip_ws();
    std::size_t start = pos_;
    bool neg = false;
    if (peek() == '-') {
      neg = true;
      ++pos_;
    }
    std::size_t digits = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (pos_ == digits) throw ParseError("expected an integer mode argument", start);
    if (pos_ < s_.size() && (s_[pos_] == '.' || s_[pos_] == 'e' || s_[pos_] == 'E'))
      throw ParseError("mode arguments must be integers", start);
    long v = std::strtol(s_.c_str() + digits, nullptr, 10);
    if (v > 1000000) throw ParseError("mode index out of range", start);
    return int(neg ? -v : v);
  }

  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  void expect(char c) {
    skip_ws();
    if (peek() != c)
      throw ParseError(std::string("expected '") + c + "'", pos_);
    ++pos_;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

// --- differentiation -------------------------------------------------------

struct FiberSymbols {
  cplx wz, wzb; // d/dz, d/dzbar of the phase 2 pi (m x + n y)
};

FiberSymbols fiber_symbols(cplx tau, int m, int n) {
  cplx tb = std::conj(tau);
  cplx denom = tb - tau;
  return {2.0 * kPi * (double(m) * tb - double(n)) / denom,
          2.0 * kPi * (double(n) - double(m) * tau) / denom};
}

ExprNode diff_node(const ExprNode& e, Wirtinger w, cplx tau) {
  switch (e.kind) {
    case Kind::Const:
      return ExprNode::constant(0.0);
    case Kind::ReT:
      if (w == Wirtinger::Dt || w == Wirtinger::Dtbar) return ExprNode::constant(0.5);
      return ExprNode::constant(0.0);
    case Kind::ImT:
      if (w == Wirtinger::Dt) return ExprNode::constant(cplx(0.0, -0.5));
      if (w == Wirtinger::Dtbar) return ExprNode::constant(cplx(0.0, 0.5));
      return ExprNode::constant(0.0);
    case Kind::Abs2T:
      if (w == Wirtinger::Dt) return ExprNode::leaf(Kind::ConjT);
      if (w == Wirtinger::Dtbar) return ExprNode::leaf(Kind::T);
      return ExprNode::constant(0.0);
    case Kind::T:
      return ExprNode::constant(w == Wirtinger::Dt ? 1.0 : 0.0);
    case Kind::ConjT:
      return ExprNode::constant(w == Wirtinger::Dtbar ? 1.0 : 0.0);
    case Kind::Cos:
    case Kind::Sin: {
      if (w == Wirtinger::Dt || w == Wirtinger::Dtbar) return ExprNode::constant(0.0);
      auto sym = fiber_symbols(tau, e.m, e.n);
      cplx s = (w == Wirtinger::Dz) ? sym.wz : sym.wzb;
      std::vector<ExprNode> kids;
      if (e.kind == Kind::Cos) {
        kids.push_back(ExprNode::constant(-s));
        kids.push_back(ExprNode::mode(Kind::Sin, e.m, e.n));
      } else {
        kids.push_back(ExprNode::constant(s));
        kids.push_back(ExprNode::mode(Kind::Cos, e.m, e.n));
      }
      return make_prod(std::move(kids));
    }
    case Kind::Sum: {
      std::vector<ExprNode> kids;
      for (const auto& k : e.kids) kids.push_back(diff_node(k, w, tau));
      return make_sum(std::move(kids));
    }
    case Kind::Prod: {
      std::vector<ExprNode> terms;
      for (std::size_t i = 0; i < e.kids.size(); ++i) {
        std::vector<ExprNode> factors;
        for (std::size_t j = 0; j < e.kids.size(); ++j)
          factors.push_back(j == i ? diff_node(e.kids[j], w, tau) : e.kids[j]);
        terms.push_back(make_prod(std::move(factors)));
      }
      return make_sum(std::move(terms));
    }
  }
  return ExprNode::constant(0.0);
}

cplx eval_node(const ExprNode& e, cplx t, double x, double y) {
  switch (e.kind) {
    case Kind::Const:
      return e.value;
    case Kind::ReT:
      return t.real();
    case Kind::ImT:
      return t.imag();
    case Kind::Abs2T:
      return std::norm(t);
    case Kind::T:
      return t;
    case Kind::ConjT:
      return std::conj(t);
    case Kind::Cos:
    case Kind::Sin: {
      // reduce into the fundamental cell first so integer lattice shifts are
      // bit-exact no-ops
      const double xr = x - std::floor(x);
      const double yr = y - std::floor(y);
      const double phase = 2.0 * kPi * (e.m * xr + e.n * yr);
      return e.kind == Kind::Cos ? std::cos(phase) : std::sin(phase);
    }
    case Kind::Sum: {
      cplx s(0.0, 0.0);
      for (const auto& k : e.kids) s += eval_node(k, t, x, y);
      return s;
    }
    case Kind::Prod: {
      cplx p(1.0, 0.0);
      for (const auto& k : e.kids) p *= eval_node(k, t, x, y);
      return p;
    }
  }
  return cplx(0.0, 0.0);
}

void print_node(const ExprNode& e, std::ostream& os) {
  switch (e.kind) {
    case Kind::Const:
      if (e.value.imag() == 0.0)
        os << e.value.real();
      else
        os << "(" << e.value.real() << (e.value.imag() < 0 ? "" : "+") << e.value.imag()
           << "i)";
      return;
    case Kind::ReT:
      os << "re(t)";
      return;
    case Kind::ImT:
      os << "im(t)";
      return;
    case Kind::Abs2T:
      os << "abs2(t)";
      return;
    case Kind::T:
      os << "t";
      return;
    case Kind::ConjT:
      os << "conj(t)";
      return;
    case Kind::Cos:
      os << "cosm(" << e.m << "," << e.n << ")";
      return;
    case Kind::Sin:
      os << "sinm(" << e.m << "," << e.n << ")";
      return;
    case Kind::Sum:
    case Kind::Prod: {
      os << "(";
      for (std::size_t i = 0; i < e.kids.size(); ++i) {
        if (i) os << (e.kind == Kind::Sum ? " + " : " * ");
        print_node(e.kids[i], os);
      }
      os << ")";
      return;
    }
  }
}

} // namespace

PotentialExpr parse_potential(const std::string& text) {
  Parser p(text);
  return PotentialExpr(p.parse());
}

cplx PotentialExpr::eval_at(cplx t, double x, double y) const {
  return eval_node(root_, t, x, y);
}

cplx PotentialExpr::eval_at(cplx t) const {
  if (depends_on_fiber())
    throw std::invalid_argument("eval_at(t): expression depends on fiber modes");
  return eval_node(root_, t, 0.0, 0.0);
}

Field PotentialExpr::sample(cplx t, const TorusGrid& grid) const {
  Field f(grid, is_real_valued(root_) ? FieldTag::Real : FieldTag::Complex);
  const int n = grid.n;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      f(j, k) = eval_node(root_, t, double(j) / n, double(k) / n);
  return f;
}

std::string PotentialExpr::to_string() const {
  std::ostringstream os;
  print_node(root_, os);
  return os.str();
}

PotentialExpr differentiate(const PotentialExpr& e, Wirtinger which, cplx tau) {
  if (!(tau.imag() > 0.0)) throw std::invalid_argument("Im tau must be positive");
  return PotentialExpr(diff_node(e.root(), which, tau));
}

void BackgroundForm::validate(double psd_tol) const {
  if (eigmin() < -psd_tol)
    throw std::invalid_argument("background form H is not positive semidefinite");
}

BetaFamily::BetaFamily(PotentialExpr phi, BackgroundForm h, cplx tau)
    : phi_(std::move(phi)), h_(h), tau_(tau) {
  if (!(tau_.imag() > 0.0)) throw std::invalid_argument("Im tau must be positive");
  h_.validate();
  PotentialExpr dt = differentiate(phi_, Wirtinger::Dt, tau_);
  d_tt_ = differentiate(dt, Wirtinger::Dtbar, tau_);
  d_tz_ = differentiate(dt, Wirtinger::Dzbar, tau_);
  PotentialExpr dz = differentiate(phi_, Wirtinger::Dz, tau_);
  d_zz_ = differentiate(dz, Wirtinger::Dzbar, tau_);
  dt_d_zz_ = differentiate(d_zz_, Wirtinger::Dt, tau_);
  dttbar_d_zz_ = differentiate(dt_d_zz_, Wirtinger::Dtbar, tau_);
}

BetaEval BetaFamily::at(cplx t, const TorusGrid& grid) const {
  if (!(grid.tau == tau_))
    throw std::invalid_argument("BetaFamily: grid modulus differs from family modulus");
  BetaEval b;
  b.t = t;
  b.beta_tt = require_real(d_tt_.sample(t, grid) + h_.h_tt);
  Field tz = d_tz_.sample(t, grid);
  tz.set_tag(FieldTag::Complex);
  for (std::size_t i = 0; i < tz.size(); ++i) tz[i] += h_.h_tz;
  b.beta_tz = tz;
  b.beta_zz = require_real(d_zz_.sample(t, grid) + h_.h_zz);
  Field dtzz = dt_d_zz_.sample(t, grid);
  dtzz.set_tag(FieldTag::Complex);
  b.dt_beta_zz = dtzz;
  b.dtdtbar_beta_zz = require_real(dttbar_d_zz_.sample(t, grid));
  return b;
}

BetaFamily BetaFamily::scaled(double eps) const {
  std::vector<ExprNode> kids;
  kids.push_back(ExprNode::constant(eps));
  kids.push_back(phi_.root());
  ExprNode scaled_root = [&] {
    ExprNode p;
    p.kind = Kind::Prod;
    p.kids = std::move(kids);
    return p;
  }();
  BackgroundForm h = h_;
  h.h_tt *= eps;
  h.h_zz *= eps;
  h.h_tz *= eps;
  return BetaFamily(PotentialExpr(scaled_root), h, tau_);
}

BetaEval eval_beta(const PotentialExpr& phi, const BackgroundForm& h, cplx t,
                   const TorusGrid& grid) {
  return BetaFamily(phi, h, grid.tau).at(t, grid);
}

SemiPositiveReport check_semipositive(const BetaFamily& family,
                                      std::span<const cplx> base_samples,
                                      const TorusGrid& grid, double psd_tol) {
  SemiPositiveReport rep;
  bool first = true;
  for (cplx t : base_samples) {
    BetaEval b = family.at(t, grid);
    for (int k = 0; k < grid.n; ++k)
      for (int j = 0; j < grid.n; ++j) {
        double e =
            hermitian2_eigmin(b.beta_tt(j, k).real(), b.beta_tz(j, k), b.beta_zz(j, k).real());
        if (first || e < rep.min_eig) {
          rep.min_eig = e;
          rep.argmin_t = t;
          rep.argmin_j = j;
          rep.argmin_k = k;
          first = false;
        }
      }
  }
  rep.violated = rep.min_eig < -psd_tol;
  return rep;
}

} // namespace kaefam
