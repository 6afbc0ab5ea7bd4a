#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "msq/dispersion.hpp"
#include "msq/error.hpp"

using namespace msq;

namespace {

// High-precision oracles (tests/oracles/compute_oracles.py).
constexpr double kQuadrelRoot3 = -1.1261298267776315636;
constexpr double kQuadrelW33 = -1.2083542822181444449;

DispersionSymbol2D both(const DispersionSymbol1D& f) { return DispersionSymbol2D{f, f}; }

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an msq::Error");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("quadratic symbol validates with constant curvature") {
  auto r = validate_ellipticity(quadratic_symbol(), -10, 10, 101);
  CHECK(r.min_d2 == 2.0);
  CHECK(r.max_d2 == 2.0);
  CHECK(r.pass);
}

TEST_CASE("quadrel curvature lies in (2, 3]") {
  auto r = validate_ellipticity(quadrel_symbol(), -10, 10, 101);
  CHECK(r.min_d2 == doctest::Approx(2.0 + std::pow(101.0, -1.5)).epsilon(1e-12));
  CHECK(r.max_d2 == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(r.pass);
}

TEST_CASE("cubic symbol is rejected as non-elliptic") {
  DispersionSymbol1D cubic{[](double x) { return x * x * x; }, [](double x) { return 3 * x * x; },
                           [](double x) { return 6 * x; }, [](double) { return 6.0; }, 1.0, 1.0, "cubic"};
  CHECK(kind_of([&] { validate_ellipticity(cubic, -1, 1, 21); }) == ErrorKind::NonElliptic);
}

TEST_CASE("inconsistent analytic derivative is reported") {
  auto f = quadratic_symbol();
  f.d1 = [](double x) { return 2.1 * x; };
  CHECK(kind_of([&] { validate_ellipticity(f, -2, 2, 21); }) == ErrorKind::DerivativeMismatch);
}

TEST_CASE("corrupted curvature sign is non-elliptic") {
  auto f = make_symbol("quadratic", {{"a", -1.0}});
  CHECK(kind_of([&] { validate_ellipticity(f, -1, 1, 11); }) == ErrorKind::NonElliptic);
}

TEST_CASE("symbol factory") {
  CHECK(make_symbol("anisotropic", {{"a", 1.5}}).d2(0.3) == 3.0);
  CHECK(kind_of([] { make_symbol("anisotropic", {{"a", 3.0}}); }) == ErrorKind::Config);
  CHECK(kind_of([] { make_symbol("cubic"); }) == ErrorKind::Config);
  CHECK(make_symbol("quadrel").name == "quadrel");
}

TEST_CASE("stationary phase roots") {
  auto q = quadratic_symbol();
  CHECK(stationary_phase_root(q, 1.0) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(stationary_phase_root(q, 0.0) == 0.0);

  auto f = quadrel_symbol();
  double xi = stationary_phase_root(f, 3.0);
  CHECK(std::abs(xi - kQuadrelRoot3) <= 1e-12);
  CHECK(std::abs(3.0 + f.d1(xi)) <= 1e-12 * 4.0);

  CHECK(kind_of([&] { stationary_phase_root(f, 1e3, 10.0); }) == ErrorKind::BracketFailure);
}

TEST_CASE("phase table closed forms for |xi|^2") {
  auto sym = both(quadratic_symbol());
  auto table = PhaseTable::uniform(sym, 5.0);
  CHECK(table.dphi(0, 2.0) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(table.dphi(1, -2.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(table.w(2.0, -2.0) == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(table.w(0.0, 0.0) == 0.0);
  for (int k = 0; k < 2; ++k) {
    const auto& xs = table.samples(k);
    for (std::size_t i = 0; i < xs.size(); ++i)
      CHECK(std::abs(table.w_nodes(k)[i] + xs[i] * xs[i] / 4) <= 1e-14 * (1 + xs[i] * xs[i]));
  }
}

TEST_CASE("quadrel phase at (3, 3) matches the oracle") {
  auto table = PhaseTable::uniform(both(quadrel_symbol()), 5.0);
  CHECK(std::abs(table.w(3.0, 3.0) - kQuadrelW33) <= 1e-11);
}

TEST_CASE("phase table invariants at nodes") {
  for (auto f : {quadratic_symbol(), quadrel_symbol(), make_symbol("anisotropic", {{"a", 0.7}})}) {
    auto table = PhaseTable::uniform(both(f), 20.0, 0.05);
    const auto& xs = table.samples(0);
    const auto& dp = table.dphi_nodes(0);
    const auto& d2 = table.d2phi_nodes(0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      CHECK(std::abs(xs[i] + f.d1(dp[i])) <= 1e-10 * (1 + std::abs(xs[i])));
      CHECK(std::abs(d2[i] + 1.0 / f.d2(dp[i])) <= 1e-10 * std::abs(d2[i]));
      if (i > 0) CHECK(dp[i] < dp[i - 1]);
    }
  }
}

TEST_CASE("random points: root residual and table interpolation") {
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> U(-20, 20);
  for (auto f : {quadratic_symbol(), quadrel_symbol()}) {
    auto sym = both(f);
    auto table = PhaseTable::uniform(sym, 20.0, 0.05);
    double worst_res = 0, worst_w = 0;
    for (int i = 0; i < 1000; ++i) {
      double x1 = U(rng), x2 = U(rng);
      for (double x : {x1, x2}) {
        double xi = stationary_phase_root(f, x);
        worst_res = std::max(worst_res, std::abs(x + f.d1(xi)) / (1 + std::abs(x)));
      }
      double direct = legendre_phase(f, x1, stationary_phase_root(f, x1)) +
                      legendre_phase(f, x2, stationary_phase_root(f, x2));
      worst_w = std::max(worst_w, std::abs(table.w(x1, x2) - direct));
    }
    CHECK(worst_res <= 1e-10);
    CHECK(worst_w <= 1e-9);
  }
}

TEST_CASE("curvature accessor") {
  auto f = quadrel_symbol();
  auto table = PhaseTable::uniform(both(f), 5.0);
  double xi = stationary_phase_root(f, 1.3);
  CHECK(table.curvature(0, 1.3) == doctest::Approx(f.d2(xi)).epsilon(1e-10));
  // Outside the table the root is solved directly.
  xi = stationary_phase_root(f, 9.0);
  CHECK(table.dphi(1, 9.0) == doctest::Approx(xi).epsilon(1e-12));
}
