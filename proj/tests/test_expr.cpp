#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "kaefam/expr.hpp"

#include <cmath>
#include <random>

using namespace kaefam;

namespace {

const cplx kTauI(0.0, 1.0);

// central finite differences of the scalar evaluation, step 1e-5
cplx fd_wirtinger(const PotentialExpr& e, Wirtinger w, cplx tau, cplx t, double x,
                  double y) {
  const double h = 1e-5;
  auto val = [&](cplx tt, double xx, double yy) { return e.eval_at(tt, xx, yy); };
  switch (w) {
    case Wirtinger::Dt: {
      cplx ds = (val(t + h, x, y) - val(t - h, x, y)) / (2.0 * h);
      cplx du = (val(t + cplx(0, h), x, y) - val(t - cplx(0, h), x, y)) / (2.0 * h);
      return 0.5 * (ds - cplx(0, 1) * du);
    }
    case Wirtinger::Dtbar: {
      cplx ds = (val(t + h, x, y) - val(t - h, x, y)) / (2.0 * h);
      cplx du = (val(t + cplx(0, h), x, y) - val(t - cplx(0, h), x, y)) / (2.0 * h);
      return 0.5 * (ds + cplx(0, 1) * du);
    }
    case Wirtinger::Dz:
    case Wirtinger::Dzbar: {
      cplx dx = (val(t, x + h, y) - val(t, x - h, y)) / (2.0 * h);
      cplx dy = (val(t, x, y + h) - val(t, x, y - h)) / (2.0 * h);
      cplx tb = std::conj(tau);
      if (w == Wirtinger::Dz) return dx * tb / (tb - tau) + dy / (tau - tb);
      return dx * (-tau) / (tb - tau) + dy * (-1.0) / (tau - tb);
    }
  }
  return {};
}

} // namespace

TEST_CASE("parser: literals and functions") {
  PotentialExpr one = parse_potential("1");
  CHECK(one.root().kind == ExprNode::Kind::Const);
  CHECK(one.root().value == cplx(1.0, 0.0));

  PotentialExpr a = parse_potential("abs2(t)");
  CHECK(a.eval_at(cplx(2.0, 1.0)) == cplx(5.0, 0.0));

  PotentialExpr p = parse_potential("0.1*re(t)*cosm(1,0)");
  REQUIRE(p.root().kind == ExprNode::Kind::Prod);
  REQUIRE(p.root().kids.size() == 3);
  CHECK(p.root().kids[0].kind == ExprNode::Kind::Const);
  CHECK(p.root().kids[0].value.real() == doctest::Approx(0.1));
  CHECK(p.root().kids[1].kind == ExprNode::Kind::ReT);
  CHECK(p.root().kids[2].kind == ExprNode::Kind::Cos);
  CHECK(p.root().kids[2].m == 1);
  CHECK(p.root().kids[2].n == 0);
}

TEST_CASE("parser: rejections") {
  CHECK_THROWS_AS(parse_potential("x + 1"), ParseError);
  CHECK_THROWS_AS(parse_potential("z"), ParseError);
  CHECK_THROWS_AS(parse_potential("t"), ParseError);
  CHECK_THROWS_AS(parse_potential("cosm(1.5, 0)"), ParseError);
  CHECK_THROWS_AS(parse_potential("cosm(1,0)*sinm(0,1)"), ParseError);
  CHECK_THROWS_AS(parse_potential("re(t) +"), ParseError);
  CHECK_THROWS_AS(parse_potential("foo(t)"), ParseError);
  // position is reported
  try {
    parse_potential("1 + x");
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(e.position == 4);
  }
  // products with a t-only factor on either side are fine
  CHECK_NOTHROW(parse_potential("re(t)*re(t)"));
  CHECK_NOTHROW(parse_potential("cosm(1,0)*re(t)"));
  CHECK_NOTHROW(parse_potential("(re(t)*cosm(1,0))*im(t)"));
}

TEST_CASE("differentiate: single-mode and t-only examples at tau = i") {
  TorusGrid grid(32, kTauI);

  // dz dzbar cosm(1,0) = -pi^2 cosm(1,0)
  PotentialExpr c = parse_potential("cosm(1,0)");
  PotentialExpr lap =
      differentiate(differentiate(c, Wirtinger::Dz, kTauI), Wirtinger::Dzbar, kTauI);
  Field lhs = lap.sample(cplx(0, 0), grid);
  Field rhs = (-kPi * kPi) * c.sample(cplx(0, 0), grid);
  CHECK(sup_norm(lhs - rhs) < 1e-13);

  // dt dtbar abs2(t) = 1
  PotentialExpr ab = parse_potential("abs2(t)");
  PotentialExpr mixed =
      differentiate(differentiate(ab, Wirtinger::Dt, kTauI), Wirtinger::Dtbar, kTauI);
  CHECK(mixed.root().kind == ExprNode::Kind::Const);
  CHECK(mixed.root().value == cplx(1.0, 0.0));

  // dz sinm(0,1) = -i pi cosm(0,1)
  PotentialExpr s = parse_potential("sinm(0,1)");
  PotentialExpr ds = differentiate(s, Wirtinger::Dz, kTauI);
  Field got = ds.sample(cplx(0, 0), grid);
  Field want = cplx(0.0, -kPi) * parse_potential("cosm(0,1)").sample(cplx(0, 0), grid);
  CHECK(sup_norm(got - want) < 1e-13);

  CHECK_THROWS(differentiate(c, Wirtinger::Dz, cplx(0.0, -1.0)));
}

TEST_CASE("symbolic derivatives match finite differences") {
  const std::vector<std::string> corpus = {
      "1",
      "abs2(t)",
      "0.1*re(t)*cosm(1,0)",
      "0.05*abs2(t)*cosm(1,1) + 0.04*im(t)*sinm(1,0) + 0.02*re(t)*cosm(0,1)",
      "re(t)*re(t) - im(t)*im(t)",
      "0.3*sinm(2,-1)*abs2(t) + re(t)",
  };
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (cplx tau : {kTauI, cplx(0.25, 0.8)}) {
    for (const auto& text : corpus) {
      PotentialExpr e = parse_potential(text);
      for (Wirtinger w :
           {Wirtinger::Dt, Wirtinger::Dtbar, Wirtinger::Dz, Wirtinger::Dzbar}) {
        PotentialExpr de = differentiate(e, w, tau);
        for (int trial = 0; trial < 100; ++trial) {
          cplx t(0.6 * unit(rng) - 0.3, 0.6 * unit(rng) - 0.3);
          double x = unit(rng), y = unit(rng);
          cplx sym = de.eval_at(t, x, y);
          cplx fd = fd_wirtinger(e, w, tau, t, x, y);
          double scale = std::max(1.0, std::abs(sym));
          CHECK(std::abs(sym - fd) / scale < 1e-8);
        }
      }
    }
  }
}

TEST_CASE("conjugation symmetry for real expressions") {
  PotentialExpr e =
      parse_potential("0.05*abs2(t)*cosm(1,1) + 0.04*im(t)*sinm(1,0) + re(t)");
  cplx tau(0.3, 1.2);
  PotentialExpr dz = differentiate(e, Wirtinger::Dz, tau);
  PotentialExpr dzb = differentiate(e, Wirtinger::Dzbar, tau);
  PotentialExpr dt = differentiate(e, Wirtinger::Dt, tau);
  PotentialExpr dtb = differentiate(e, Wirtinger::Dtbar, tau);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    cplx t(unit(rng) - 0.5, unit(rng) - 0.5);
    double x = unit(rng), y = unit(rng);
    CHECK(std::abs(dzb.eval_at(t, x, y) - std::conj(dz.eval_at(t, x, y))) < 1e-14);
    CHECK(std::abs(dtb.eval_at(t, x, y) - std::conj(dt.eval_at(t, x, y))) < 1e-14);
  }
}

TEST_CASE("periodicity is exact") {
  PotentialExpr e = parse_potential("0.3*sinm(2,-1)*abs2(t) + 0.5*cosm(3,2)");
  cplx t(0.2, -0.1);
  // dyadic points, so that x + 1.0 is itself exactly representable
  for (double x : {0.125, 0.8125})
    for (double y : {0.3125, 0.515625}) {
      cplx v = e.eval_at(t, x, y);
      CHECK(e.eval_at(t, x + 1.0, y) == v);
      CHECK(e.eval_at(t, x, y + 1.0) == v);
    }
}

TEST_CASE("eval_beta: constant families") {
  TorusGrid grid(16, kTauI);
  BackgroundForm diag11{1.0, 1.0, cplx(0, 0)};

  BetaEval b0 = eval_beta(parse_potential("0"), diag11, cplx(0.3, 0.1), grid);
  CHECK(sup_norm(b0.beta_tt - Field::constant(grid, 1.0)) < 1e-15);
  CHECK(sup_norm(b0.beta_tz) < 1e-15);
  CHECK(sup_norm(b0.beta_zz - Field::constant(grid, 1.0)) < 1e-15);
  CHECK(sup_norm(b0.dt_beta_zz) < 1e-15);

  BetaEval b1 = eval_beta(parse_potential("abs2(t)"), diag11, cplx(0.1, 0.2), grid);
  CHECK(sup_norm(b1.beta_tt - Field::constant(grid, 2.0)) < 1e-15);
  CHECK(sup_norm(b1.beta_zz - Field::constant(grid, 1.0)) < 1e-15);
}

TEST_CASE("eval_beta: twisted family at t = 0") {
  TorusGrid grid(64, kTauI);
  BackgroundForm diag11{1.0, 1.0, cplx(0, 0)};
  BetaEval b = eval_beta(parse_potential("0.1*re(t)*cosm(1,0)"), diag11, cplx(0, 0), grid);

  double err_zz = 0, err_tz = 0, err_dtzz = 0;
  for (int j = 0; j < grid.n; ++j) {
    double x = double(j) / grid.n;
    err_zz = std::max(err_zz, std::abs(b.beta_zz(j, 0) - 1.0));
    err_tz = std::max(
        err_tz, std::abs(b.beta_tz(j, 0) - cplx(-0.05 * kPi * std::sin(2 * kPi * x), 0)));
    err_dtzz = std::max(
        err_dtzz,
        std::abs(b.dt_beta_zz(j, 0) - cplx(-0.05 * kPi * kPi * std::cos(2 * kPi * x), 0)));
  }
  CHECK(err_zz < 1e-14);
  CHECK(err_tz < 1e-13);
  CHECK(err_dtzz < 1e-12);
  CHECK(sup_norm(b.dtdtbar_beta_zz) < 1e-14);
}

TEST_CASE("hermitian symmetry of the mixed derivatives") {
  cplx tau(0.2, 0.9);
  TorusGrid grid(32, tau);
  PotentialExpr phi = parse_potential(
      "0.05*abs2(t)*cosm(1,1) + 0.04*im(t)*sinm(1,0) + 0.02*re(t)*cosm(0,1)");
  // beta_zt = conj(beta_tz): dz dtbar Phi vs conj(dt dzbar Phi)
  PotentialExpr tz =
      differentiate(differentiate(phi, Wirtinger::Dt, tau), Wirtinger::Dzbar, tau);
  PotentialExpr zt =
      differentiate(differentiate(phi, Wirtinger::Dz, tau), Wirtinger::Dtbar, tau);
  cplx t(0.2, -0.3);
  Field a = tz.sample(t, grid);
  Field b = zt.sample(t, grid);
  CHECK(sup_norm(conj(a) - b) < 1e-13);
}

TEST_CASE("check_semipositive") {
  TorusGrid grid(64, kTauI);
  std::vector<cplx> origin{cplx(0, 0)};

  BetaFamily flat(parse_potential("0"), BackgroundForm{1, 1, cplx(0, 0)}, kTauI);
  SemiPositiveReport r1 = check_semipositive(flat, origin, grid);
  CHECK(r1.min_eig == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_FALSE(r1.violated);

  BetaFamily degen(parse_potential("0"), BackgroundForm{0, 1, cplx(0, 0)}, kTauI);
  SemiPositiveReport r2 = check_semipositive(degen, origin, grid);
  CHECK(r2.min_eig == doctest::Approx(0.0).epsilon(1e-14));
  CHECK_FALSE(r2.violated);

  // twist family scanned over 16 boundary points of |t| = 0.5:
  // independent oracle evaluates the closed-form coefficient matrix directly
  BetaFamily fam(parse_potential("0.1*re(t)*cosm(1,0)"), BackgroundForm{1, 1, cplx(0, 0)},
                 kTauI);
  std::vector<cplx> ring;
  for (int k = 0; k < 16; ++k) ring.push_back(std::polar(0.5, 2.0 * kPi * k / 16.0));
  SemiPositiveReport r3 = check_semipositive(fam, ring, grid);

  double oracle = 0.0;
  bool first = true;
  for (cplx t : ring)
    for (int j = 0; j < grid.n; ++j) {
      double x = double(j) / grid.n;
      double btt = 1.0;
      cplx btz(-0.05 * kPi * std::sin(2 * kPi * x), 0.0);
      double bzz = 1.0 - 0.1 * kPi * kPi * t.real() * std::cos(2 * kPi * x);
      double e = hermitian2_eigmin(btt, btz, bzz);
      if (first || e < oracle) oracle = e;
      first = false;
    }
  CHECK(r3.min_eig == doctest::Approx(oracle).epsilon(1e-13));
  // the sampled minimum is attained at t = 0.5, x = 0: value 1 - 0.05 pi^2
  CHECK(r3.min_eig == doctest::Approx(1.0 - 0.05 * kPi * kPi).epsilon(1e-12));
  CHECK_FALSE(r3.violated);

  // genuinely indefinite family is flagged
  BetaFamily bad(parse_potential("re(t)*cosm(1,0)"),
                 BackgroundForm{0.01, 0.01, cplx(0, 0)}, kTauI);
  SemiPositiveReport r4 = check_semipositive(bad, ring, grid);
  CHECK(r4.violated);
  CHECK(r4.min_eig < -1e-3);
}

TEST_CASE("background form validation") {
  CHECK_THROWS(BackgroundForm{1.0, 1.0, cplx(2.0, 0.0)}.validate());
  CHECK_NOTHROW(BackgroundForm{1.0, 1.0, cplx(0.5, 0.5)}.validate());
}

TEST_CASE("canonical printing round-trips through the parser") {
  const std::vector<std::string> corpus = {
      "1 + 2*re(t) - 0.5*cosm(1,0)",
      "0.05*abs2(t)*cosm(1,1) + 0.04*im(t)*sinm(1,0) + 0.02*re(t)*cosm(0,1)",
      "-0.3*sinm(2,-1)*abs2(t) + (re(t) - im(t))*0.25",
  };
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const auto& text : corpus) {
    PotentialExpr e = parse_potential(text);
    PotentialExpr e2 = parse_potential(e.to_string());
    CHECK(e2.to_string() == e.to_string());
    for (int trial = 0; trial < 20; ++trial) {
      cplx t(unit(rng) - 0.5, unit(rng) - 0.5);
      double x = unit(rng), y = unit(rng);
      CHECK(e.eval_at(t, x, y) == e2.eval_at(t, x, y));
    }
  }
}
