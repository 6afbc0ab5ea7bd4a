#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "msq/error.hpp"
#include "msq/weyl.hpp"

using namespace msq;

namespace {

CVec random_vec(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N;
  CVec v(n);
  for (auto& z : v) z = {N(rng), N(rng)};
  return v;
}

double vnorm(const CVec& v) {
  double s = 0;
  for (auto z : v) s += std::norm(z);
  return std::sqrt(s);
}

double vdiff(const CVec& a, const CVec& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
  return std::sqrt(s);
}

CVec packet(const Grid1D& g, double h, double x0, double xi0) {
  CVec v(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    double x = g.x(i);
    v[i] = std::polar(std::exp(-(x - x0) * (x - x0) / (2 * h)), xi0 * x / h);
  }
  return v;
}

SymbolJet jet_x() {
  SymbolJet j;
  j.value = [](double x, double) { return cplx(x, 0); };
  j.dx = [](double, double) { return cplx(1, 0); };
  j.dxi = [](double, double) { return cplx(0, 0); };
  j.split_x = [](double x) { return x; };
  j.split_xi = [](double) { return 0.0; };
  return j;
}

SymbolJet jet_xi() {
  SymbolJet j;
  j.value = [](double, double xi) { return cplx(xi, 0); };
  j.dx = [](double, double) { return cplx(0, 0); };
  j.dxi = [](double, double) { return cplx(1, 0); };
  j.split_x = [](double) { return 0.0; };
  j.split_xi = [](double xi) { return xi; };
  return j;
}

SymbolJet jet_const() {
  SymbolJet j;
  j.value = [](double, double) { return cplx(1, 0); };
  j.dx = j.dxi = [](double, double) { return cplx(0, 0); };
  return j;
}

}  // namespace

TEST_CASE("constant symbol quantizes to the identity") {
  Grid1D g{32, 3.0};
  auto op = build_weyl_1d([](double, double) { return cplx(1, 0); }, g, 0.1);
  double err = 0;
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = 0; j < g.n; ++j) err = std::max(err, std::abs(op(i, j) - cplx(i == j ? 1.0 : 0.0)));
  CHECK(err <= 1e-14);
  CHECK(norm_l2_l2(op) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(norm_l2_linf(op) == doctest::Approx(1.0 / std::sqrt(g.dx())).epsilon(1e-13));
  CHECK(op.alias_warning);  // the symbol does not vanish at the Nyquist mode
  CHECK_THROWS_AS(build_weyl_1d([](double, double) { return cplx(1, 0); }, Grid1D{7, 1.0}, 0.1), Error);
}

TEST_CASE("coordinate and momentum symbols") {
  Grid1D g{64, 4.0};
  const double h = 0.2;
  auto X = build_weyl_1d([](double x, double) { return cplx(x, 0); }, g, h);
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = 0; j < g.n; ++j) CHECK(std::abs(X(i, j) - cplx(i == j ? g.x(i) : 0.0)) <= 1e-13);

  auto P = build_weyl_1d([](double, double xi) { return cplx(xi, 0); }, g, h);
  CVec v(g.n);
  for (std::size_t i = 0; i < g.n; ++i) v[i] = std::polar(1.0, M_PI * 3 * g.x(i) / g.L) + 0.5 * std::cos(M_PI * 5 * g.x(i) / g.L);
  CHECK(vdiff(P.apply(v), semiclassical_derivative(v, g, h)) <= 1e-12 * vnorm(v));
  CHECK(g.eta(3, h) == doctest::Approx(h * M_PI * 3 / g.L));
  CHECK(g.eta(g.n - 1, h) == doctest::Approx(-h * M_PI / g.L));
}

TEST_CASE("real symbols give self-adjoint kernels; quantization is linear") {
  Grid1D g{48, 2.5};
  const double h = 0.05;
  Symbol a = [](double x, double xi) { return cplx(std::exp(-x * x) * std::cos(xi), 0); };
  Symbol b = [](double x, double xi) { return cplx(x * xi / (1 + xi * xi), std::sin(x)); };
  auto A = build_weyl_1d(a, g, h), B = build_weyl_1d(b, g, h);
  auto C = build_weyl_1d([&](double x, double xi) { return a(x, xi) + 2.0 * b(x, xi); }, g, h);
  double herm = 0, lin = 0;
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = 0; j < g.n; ++j) {
      herm = std::max(herm, std::abs(A(i, j) - std::conj(A(j, i))));
      lin = std::max(lin, std::abs(C(i, j) - A(i, j) - 2.0 * B(i, j)));
    }
  CHECK(herm <= 1e-14);
  CHECK(lin <= 1e-14);

  CVec v = random_vec(g.n, 1), w = random_vec(g.n, 2);
  cplx lhs = 0, rhs = 0;
  CVec Av = B.apply(v), Atw = B.apply_adjoint(w);
  for (std::size_t i = 0; i < g.n; ++i) {
    lhs += std::conj(w[i]) * Av[i];
    rhs += std::conj(Atw[i]) * v[i];
  }
  CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(lhs));
  CHECK_THROWS_AS(A.apply(CVec(3)), Error);
}

TEST_CASE("separable application is order independent") {
  auto g = Grid2D::make(32, 16, 3.0, 2.0);
  Symbol a = [](double x, double xi) { return cplx(std::exp(-x * x - xi * xi), 0.1 * x); };
  Symbol b = [](double x, double xi) { return cplx(1.0 / (1 + x * x + xi * xi), 0); };
  auto A = build_weyl_1d(a, Grid1D{g.n1, g.L1}, 0.1), B = build_weyl_1d(b, Grid1D{g.n2, g.L2}, 0.1);
  ComplexField f(g);
  f.data = random_vec(g.size(), 3);
  auto x = weyl_apply_separable(A, B, f), y = weyl_apply_separable_reversed(A, B, f);
  CHECK(vdiff(x.data, y.data) <= 1e-13 * vnorm(x.data));
  CHECK_THROWS_AS(weyl_apply_separable(B, A, f), Error);
}

TEST_CASE("cutoff profile") {
  CutoffProfile c{1.0, 2.0};
  CHECK(c(0.0) == 1.0);
  CHECK(c(-1.0) == 1.0);
  CHECK(c(2.0) == 0.0);
  CHECK(c(-7.0) == 0.0);
  CHECK(c(1.5) == doctest::Approx(0.5).epsilon(1e-15));
  double prev = 1.0;
  for (double s = 1.0; s <= 2.0; s += 0.01) {
    CHECK(c(s) <= prev);
    prev = c(s);
  }
}

TEST_CASE("projector keeps packets on the stationary set and removes the rest") {
  const double h = 0.01;
  Grid1D g{512, 2.0};
  auto f = quadratic_symbol();
  CutoffProfile c{6.0, 12.0};
  auto G = build_weyl_1d(projector_symbol(c, f, h), g, h);
  CHECK_FALSE(G.alias_warning);
  CVec on = packet(g, h, -1.0, 0.5);   // x + 2 xi = 0
  CVec off = packet(g, h, 1.0, 0.5);   // (x + 2 xi) / sqrt(h) = 20
  CHECK(vdiff(G.apply(on), on) <= 0.05 * vnorm(on));
  CHECK(vnorm(G.apply(off)) <= 0.05 * vnorm(off));
}

TEST_CASE("semiclassical frame splits v exactly") {
  auto g = Grid2D::make(64, 64, 32, 32);
  ComplexField u(g, 4.0);
  u.data = random_vec(g.size(), 4);
  auto fr = make_frame(u);
  CHECK(fr.h == 0.25);
  CHECK(fr.v.grid.L1 == 8.0);
  CHECK(fr.v.data[5] == 4.0 * u.data[5]);
  DispersionSymbol2D sym{quadrel_symbol(), quadrel_symbol()};
  project_lambda(fr, CutoffProfile{}, sym);
  CVec sum = fr.v_lambda.data;
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += fr.v_lambda_c.data[i];
  CHECK(vdiff(sum, fr.v.data) <= 1e-14 * vnorm(fr.v.data));
}

TEST_CASE("leading Moyal term") {
  const double h = 0.3;
  auto m = moyal_leading(jet_x(), jet_xi(), h);
  CHECK(std::abs(m(2.0, 3.0) - cplx(6.0, 0.15)) <= 1e-15);
  SymbolJet a, b;
  a.value = [](double x, double xi) { return cplx(std::sin(x) * xi, 0); };
  a.dx = [](double x, double xi) { return cplx(std::cos(x) * xi, 0); };
  a.dxi = [](double x, double) { return cplx(std::sin(x), 0); };
  b.value = [](double x, double xi) { return cplx(x * x + xi, 0); };
  b.dx = [](double x, double) { return cplx(2 * x, 0); };
  b.dxi = [](double, double) { return cplx(1, 0); };
  auto ab = moyal_leading(a, b, h), ba = moyal_leading(b, a, h);
  double x = 0.7, xi = -1.2;
  cplx pb = a.dx(x, xi) * b.dxi(x, xi) - a.dxi(x, xi) * b.dx(x, xi);
  CHECK(std::abs(ab(x, xi) - ba(x, xi) - cplx(0, h) * pb) <= 1e-14);
}

TEST_CASE("Moyal remainder: exact cases") {
  const double h = 0.1;
  auto g = moyal_grid(h);
  CHECK(g.n % 8 == 0);
  CHECK(g.L == 5.0);
  CHECK(moyal_remainder_norm(jet_x(), jet_xi(), h, g) <= 1e-10);
  auto fit = moyal_remainder_scaling(jet_const(), jet_const(), {0.1, 0.05}, [](double hh) { return moyal_grid(hh); });
  CHECK(fit.degenerate);
  CHECK(std::isnan(fit.slope));
}

TEST_CASE("dense and split quantizations of x + F'(xi) agree under the window") {
  auto f = quadrel_symbol();
  SymbolJet a;
  a.value = [](double x, double xi) { return cplx(std::exp(-x * x) * std::cos(xi), 0); };
  a.dx = [](double x, double xi) { return cplx(-2 * x * std::exp(-x * x) * std::cos(xi), 0); };
  a.dxi = [](double x, double xi) { return cplx(-std::exp(-x * x) * std::sin(xi), 0); };
  SymbolJet split;
  split.value = [f](double x, double xi) { return cplx(x + f.d1(xi), 0); };
  split.dx = [](double, double) { return cplx(1, 0); };
  split.dxi = [f](double, double xi) { return cplx(f.d2(xi), 0); };
  split.split_x = [](double x) { return x; };
  split.split_xi = f.d1;
  SymbolJet dense = split;
  dense.split_x = nullptr;
  dense.split_xi = nullptr;
  const double h = 0.1;
  auto g = moyal_grid(h);
  double rs = moyal_remainder_norm(a, split, h, g), rd = moyal_remainder_norm(a, dense, h, g);
  CHECK(rs > 0);
  CHECK(rd == doctest::Approx(rs).epsilon(1e-3));
}

TEST_CASE("operator norm scaling of a fixed symbol") {
  auto fam = [](double) -> Symbol { return [](double x, double xi) { return cplx(std::exp(-x * x - xi * xi), 0); }; };
  auto grid_for = [](double h) { return Grid1D{256, 20 * std::sqrt(h)}; };
  auto f = operator_norm_scaling_1d(fam, {0.1, 0.01}, grid_for, NormPair::L2L2);
  CHECK(f.norms.size() == 2u);
  // ||a(h)||_{L2 -> L2} tends to sup |a| = 1.
  CHECK(f.norms[1] <= 1.0 + 1e-6);
  CHECK(f.norms[1] >= 0.9);
  auto f2 = operator_norm_scaling(fam, fam, {0.1, 0.01}, grid_for, NormPair::L2L2);
  CHECK(f2.norms[1] == doctest::Approx(f.norms[1] * f.norms[1]).epsilon(1e-8));
}
