#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "msq/error.hpp"
#include "msq/grid.hpp"

using namespace msq;

namespace {

// High-precision oracle (tests/oracles/compute_oracles.py).
constexpr double kDatumNormGaussian = 22.970720377590776662;

const DispersionSymbol2D kQuad{quadratic_symbol(), quadratic_symbol()};

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an msq::Error");
  return ErrorKind::Io;
}

double max_diff(const ComplexField& a, const ComplexField& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

// e^{i t |D|^2} exp(-|x|^2 / s^2) in closed form.
cplx free_gaussian(double x1, double x2, double t, double s) {
  cplx d = cplx(s * s, -4.0 * t);
  return (s * s) / d * std::exp(-(x1 * x1 + x2 * x2) / d);
}

std::filesystem::path tmp_path(const char* name) {
  return std::filesystem::temp_directory_path() / (std::string("msq_test_grid_") + name);
}

}  // namespace

TEST_CASE("grid construction") {
  auto g = Grid2D::make(16, 32, 2.0, 4.0);
  CHECK(g.dx(0) == 0.25);
  CHECK(g.dx(1) == 0.25);
  CHECK(g.x(0, 0) == -2.0);
  CHECK(g.xi(0, 1) == doctest::Approx(M_PI / 2));
  CHECK(g.xi(0, 8) == doctest::Approx(-M_PI * 8 / 2));
  CHECK(kind_of([] { Grid2D::make(12, 16, 1, 1); }) == ErrorKind::Config);
  CHECK(kind_of([] { Grid2D::make(4, 4, 1, 1); }) == ErrorKind::Config);
  CHECK(kind_of([] { Grid2D::make(16, 16, 0, 1); }) == ErrorKind::Config);
}

TEST_CASE("multiplier on a plane wave") {
  auto g = Grid2D::make(32, 32, 4.0, 4.0);
  double k0 = M_PI * 3 / 4.0;
  ComplexField f(g);
  for (std::size_t i = 0; i < g.n1; ++i)
    for (std::size_t j = 0; j < g.n2; ++j) f.at(i, j) = std::polar(1.0, k0 * g.x(0, i));
  auto out = apply_multiplier(f, [](double a, double b) { return cplx(a * a + b, 0); });
  ComplexField want = f;
  for (auto& z : want.data) z *= k0 * k0;
  CHECK(max_diff(out, want) <= 1e-12);

  ComplexField h = f;
  apply_separable_inplace(h, axis_multiplier(g, 0, [](double x) { return cplx(x, 0); }),
                          axis_multiplier(g, 1, [](double) { return cplx(2, 0); }));
  for (auto& z : want.data) z *= 2.0 / k0;
  CHECK(max_diff(h, want) <= 1e-12);
  CHECK(kind_of([&] { apply_separable_inplace(h, CVec(3), CVec(32)); }) == ErrorKind::GridMismatch);
}

TEST_CASE("free propagation is an isometry and reversible") {
  auto g = Grid2D::make(64, 64, 16, 16);
  auto u = gaussian_datum(g, 2.0, {1, -1}, {0.5, 0.25});
  auto v = free_propagate(u, 3.0, kQuad);
  CHECK(v.t == 4.0);
  CHECK(l2_norm(v) == doctest::Approx(l2_norm(u)).epsilon(1e-13));
  auto w = free_propagate(v, -3.0, kQuad);
  CHECK(max_diff(u, w) <= 1e-13);
}

TEST_CASE("free Gaussian matches the closed form") {
  auto g = Grid2D::make(512, 512, 64, 64);
  auto u = gaussian_datum(g, 1.0);
  auto v = free_propagate(u, 2.0, kQuad);
  double err = 0;
  for (std::size_t i = 0; i < g.n1; ++i)
    for (std::size_t j = 0; j < g.n2; ++j)
      err = std::max(err, std::abs(v.at(i, j) - free_gaussian(g.x(0, i), g.x(1, j), 2.0, 1.0)));
  CHECK(err <= 1e-12);
}

TEST_CASE("vector fields") {
  auto g = Grid2D::make(512, 512, 64, 64);
  auto u0 = gaussian_datum(g, 1.0, {0.5, 0}, {1, 0});
  auto u1 = free_propagate(u0, 2.0, kQuad);
  for (int k = 0; k < 2; ++k) {
    auto once = vector_field_apply(vector_field_apply(u1, k, u1.t, 1, kQuad).field, k, u1.t, 1, kQuad);
    auto twice = vector_field_apply(u1, k, u1.t, 2, kQuad);
    CHECK(max_diff(once.field, twice.field) <= 1e-11);
    CHECK_FALSE(twice.boundary_contamination);
    // The vector field commutes with the flow: J(t) e^{i(t-1)F(D)} = e^{i(t-1)F(D)} J(1).
    double a = l2_norm(vector_field_apply(u0, k, 1.0, 2, kQuad).field);
    CHECK(l2_norm(twice.field) == doctest::Approx(a).epsilon(1e-11));
  }
  CHECK(kind_of([&] { vector_field_apply(u1, 0, 1.0, 3, kQuad); }) == ErrorKind::Config);
}

TEST_CASE("datum norm") {
  auto g = Grid2D::make(256, 256, 16, 16);
  auto u = gaussian_datum(g, 1.0);
  CHECK(std::abs(datum_norm(u, kQuad) - kDatumNormGaussian) <= 1e-9 * kDatumNormGaussian);
  ComplexField z(g);
  CHECK(datum_norm(z, kQuad) == 0.0);
  ComplexField u2 = u;
  for (auto& v : u2.data) v *= 2.5;
  CHECK(datum_norm(u2, kQuad) == doctest::Approx(2.5 * kDatumNormGaussian).epsilon(1e-12));
}

TEST_CASE("norms") {
  auto g = Grid2D::make(16, 32, 2.0, 3.0);
  ComplexField c(g);
  for (auto& v : c.data) v = 1.0;
  CHECK(l2_norm(c) == doctest::Approx(std::sqrt(4 * 2.0 * 3.0)).epsilon(1e-14));
  CHECK(linf_norm(c) == 1.0);
  CHECK(l3_norm(c) == doctest::Approx(std::cbrt(24.0)).epsilon(1e-14));
  CHECK(h2_norm(c) == doctest::Approx(l2_norm(c)).epsilon(1e-13));

  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> N;
  ComplexField r(g);
  for (auto& v : r.data) v = {N(rng), N(rng)};
  CHECK(l2_norm_fourier(r) == doctest::Approx(l2_norm(r)).epsilon(1e-13));
  auto nb = norms(r, kQuad, false);
  CHECK(nb.weighted[0] == 0.0);
  CHECK(nb.l2 == l2_norm(r));
}

TEST_CASE("boundary mass") {
  auto g = Grid2D::make(32, 32, 1, 1);
  ComplexField f(g);
  CHECK(boundary_mass(f) == 0.0);
  f.at(0, 16) = 1.0;
  CHECK(boundary_mass(f) == 1.0);
  f.at(0, 16) = 0.0;
  f.at(16, 16) = 1.0;
  CHECK(boundary_mass(f) == 0.0);
  f.at(16, 31) = 1.0;
  CHECK(boundary_mass(f) == doctest::Approx(0.5));
}

TEST_CASE("snapshot format") {
  auto g = Grid2D::make(8, 16, 1.5, 2.5);
  auto u = gaussian_datum(g, 0.7, {0.1, 0.2}, {3, -1});
  u.t = 7.25;
  auto p = tmp_path("snap.msq2");
  write_snapshot(p.string(), u);
  CHECK(std::filesystem::file_size(p) == 48 + 16 * g.size());
  std::ifstream is(p, std::ios::binary);
  char magic[4];
  std::uint32_t version;
  is.read(magic, 4);
  is.read(reinterpret_cast<char*>(&version), 4);
  CHECK(std::string(magic, 4) == "MSQ2");
  CHECK(version == 1u);
  is.close();

  auto r = read_snapshot(p.string());
  CHECK(r.grid == g);
  CHECK(r.t == 7.25);
  CHECK(max_diff(r, u) == 0.0);

  std::filesystem::resize_file(p, 100);
  CHECK(kind_of([&] { read_snapshot(p.string()); }) == ErrorKind::Io);
  std::filesystem::remove(p);
  CHECK(kind_of([&] { read_snapshot(p.string()); }) == ErrorKind::Io);
}

TEST_CASE("dealias mask keeps |m| <= n/3") {
  auto g = Grid2D::make(16, 8, 1, 1);
  auto m = dealias_mask(g, 0);
  double kept = 0;
  for (double v : m) kept += v;
  CHECK(kept == 11);
  CHECK(m[5] == 1.0);
  CHECK(m[6] == 0.0);
  CHECK(m[8] == 0.0);
  CHECK(m[11] == 1.0);

  ComplexField f(g);
  for (std::size_t i = 0; i < g.n1; ++i)
    for (std::size_t j = 0; j < g.n2; ++j) f.at(i, j) = std::polar(1.0, g.xi(0, 1) * g.x(0, i));
  ComplexField h = f;
  dealias_inplace(h);
  CHECK(max_diff(h, f) <= 1e-14);
  for (std::size_t i = 0; i < g.n1; ++i)
    for (std::size_t j = 0; j < g.n2; ++j) f.at(i, j) = std::polar(1.0, g.xi(0, 7) * g.x(0, i));
  dealias_inplace(f);
  CHECK(linf_norm(f) <= 1e-14);
}
