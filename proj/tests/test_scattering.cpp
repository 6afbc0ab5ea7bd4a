#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "msq/scattering.hpp"

using namespace msq;

namespace {

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

double diag_max(const CVec& z) {
  double m = 0;
  for (auto v : z) m = std::max(m, std::abs(v));
  return m;
}

ScatteringProfile gaussian_profile(const DiagnosticGrid& dg, cplx lambda, double width) {
  ScatteringProfile p;
  p.grid = dg;
  p.lambda = lambda;
  p.z_plus.resize(dg.size());
  for (std::size_t a = 0; a < dg.n; ++a)
    for (std::size_t b = 0; b < dg.n; ++b) {
      double y1 = dg.node(a), y2 = dg.node(b);
      p.z_plus[a * dg.n + b] = std::polar(std::exp(-(y1 * y1 + y2 * y2) / (width * width)), 0.3 * y1);
    }
  p.phi_plus.assign(dg.size(), 0.0);
  return p;
}

}  // namespace

TEST_CASE("diagnostic grid geometry") {
  DiagnosticGrid dg{5, 2.0};
  CHECK(dg.spacing() == 1.0);
  CHECK(dg.node(0) == -2.0);
  CHECK(dg.node(4) == 2.0);
  double w = 0;
  for (std::size_t j = 0; j < dg.n; ++j) w += dg.weight(j);
  CHECK(w == 4.0);
}

TEST_CASE("diagnostic box from the datum spectrum") {
  auto g = Grid2D::make(128, 128, 32, 32);
  auto u = gaussian_datum(g, 2.0);
  auto dg = diagnostic_grid_for(u, kQuad, 64, 1e-14);
  // |u^|^2 ~ exp(-2 xi^2): the 1e-14 tail sits near |xi| = 4, so Y ~ 8.
  CHECK(dg.n == 64u);
  CHECK(dg.Y > 6.5);
  CHECK(dg.Y < 9.0);
  CHECK(diagnostic_grid_for(ComplexField(g), kQuad, 64).Y == 1.0);
}

TEST_CASE("phase accumulator") {
  PhaseAccumulator acc;
  RVec c(4, 0.5);
  update_phase(acc, c, 1.0);
  CHECK(acc.phi == RVec(4, 0.0));
  update_phase(acc, c, std::exp(1.0));
  update_phase(acc, c, std::exp(3.0));
  for (double p : acc.phi) CHECK(p == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(kind_of([&] { update_phase(acc, c, 2.0); }) == ErrorKind::Config);

  // Coarser strides integrate the same linear-in-log data exactly.
  std::vector<double> T;
  std::vector<RVec> A;
  for (int i = 0; i <= 8; ++i) {
    T.push_back(std::exp(0.25 * i));
    A.push_back(RVec(2, 1.0 + 0.25 * i));
  }
  auto p1 = phase_from_series(T, A, 1), p3 = phase_from_series(T, A, 3);
  CHECK(p1[0] == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(p3[1] == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("band-limited interpolation is exact") {
  auto g = Grid2D::make(32, 64, 4.0, 5.0);
  double k1 = M_PI * 3 / 4.0, k2 = -M_PI * 5 / 5.0;
  ComplexField f(g);
  for (std::size_t i = 0; i < g.n1; ++i)
    for (std::size_t j = 0; j < g.n2; ++j) f.at(i, j) = std::polar(1.0, k1 * g.x(0, i) + k2 * g.x(1, j)) + 0.5;
  DiagnosticGrid dg{17, 3.3};
  CVec v = interpolate_to_diagnostic(f, dg);
  double err = 0;
  for (std::size_t a = 0; a < dg.n; ++a)
    for (std::size_t b = 0; b < dg.n; ++b)
      err = std::max(err, std::abs(v[a * dg.n + b] - (std::polar(1.0, k1 * dg.node(a) + k2 * dg.node(b)) + 0.5)));
  CHECK(err <= 1e-12);
  CHECK(kind_of([&] { interpolate_to_diagnostic(f, DiagnosticGrid{8, 4.5}); }) == ErrorKind::ExtrapolationError);
}

TEST_CASE("modulated profile") {
  DiagnosticGrid dg{9, 2.0};
  auto table = PhaseTable::uniform(kQuad, 3.0);
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> N;
  CVec v(dg.size());
  RVec phi(dg.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = {N(rng), N(rng)};
    phi[i] = std::abs(N(rng));
  }
  auto z = compute_z(v, 7.0, dg, table, phi, {1, 0});
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(std::abs(z[i]) == doctest::Approx(std::abs(v[i])).epsilon(1e-14));

  auto z1 = compute_z(v, 1.0, dg, table, {}, {1, 0});
  std::size_t a = 6, b = 2, i = a * dg.n + b;
  double w = -(dg.node(a) * dg.node(a) + dg.node(b) * dg.node(b)) / 4;
  CHECK(std::abs(z1[i] - v[i] * std::polar(1.0, -w)) <= 1e-14);

  auto zi = compute_z(v, 1.0, dg, table, phi, {0, 1});
  CHECK(std::abs(zi[i]) == doctest::Approx(std::abs(v[i]) * std::exp(phi[i])).epsilon(1e-14));
}

TEST_CASE("phase resolution check") {
  auto g = Grid2D::make(64, 64, 32, 32);  // resolved band 2 pi / 3 ~ 2.09
  ComplexField u(g);
  auto table = PhaseTable::uniform(kQuad, 10.0);
  CHECK_NOTHROW(check_phase_resolution(u, DiagnosticGrid{16, 4.0}, table));
  CHECK(kind_of([&] { check_phase_resolution(u, DiagnosticGrid{16, 4.5}, table); }) ==
        ErrorKind::PhaseUnderresolved);
}

TEST_CASE("asymptotic phase correction phi_plus") {
  std::vector<double> T = {1.0, std::exp(1.0), std::exp(2.0)};
  CVec zp(3, cplx(0.6, 0.8));
  std::vector<RVec> A(3, RVec(3, 1.0));
  auto r = compute_phi_plus(T, A, zp, {1, 0});
  for (double p : r.phi_plus) CHECK(std::abs(p) <= 1e-15);
  for (auto& a : A) a[1] = 3.0;
  r = compute_phi_plus(T, A, zp, {1, 0}, 2.0);
  CHECK(r.phi_plus[1] == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(r.tail_bound == doctest::Approx(4.0 / std::exp(1.0)).epsilon(1e-14));
  CHECK(kind_of([&] { compute_phi_plus(T, A, zp, {1, 1}); }) == ErrorKind::BranchMismatch);
}

TEST_CASE("dissipative correction psi_plus") {
  std::vector<double> T = {1.0, 2.0, 4.0};
  CVec zp(2, 0.5);
  std::vector<RVec> A(3, RVec(2, 0.5)), P(3, RVec(2, 0.0));
  auto r = compute_psi_plus_and_S(T, A, P, zp, {0, 1});
  CHECK(r.psi_plus == RVec(2, 0.0));
  CHECK(r.min_positivity == 1.0);
  CHECK(r.audit_err.back() == doctest::Approx(0.5 * std::log(4.0)).epsilon(1e-14));

  std::vector<RVec> Z(3, RVec(2, 0.0));
  std::vector<double> Te = {1.0, std::exp(1.0)};
  CVec one(2, 1.0);
  CHECK(kind_of([&] { compute_psi_plus_and_S(Te, Z, Z, one, {0, 1}); }) == ErrorKind::PositivityViolation);
  CHECK(kind_of([&] { compute_psi_plus_and_S(T, A, P, zp, {1, 0}); }) == ErrorKind::BranchMismatch);
  CHECK(kind_of([&] { compute_S(zp, RVec(2), {1, 0}, 2.0); }) == ErrorKind::BranchMismatch);

  RVec S = compute_S(zp, RVec(2, 0.1), {0, 2}, std::exp(1.0));
  CHECK(S[0] == doctest::Approx(std::log(2.1) / 2).epsilon(1e-14));
}

TEST_CASE("explicit dissipative factor identity") {
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> U(0, 1);
  CVec zp(50);
  RVec psi(50);
  for (std::size_t i = 0; i < zp.size(); ++i) {
    zp[i] = std::polar(U(rng), 6 * U(rng));
    psi[i] = 0.4 * U(rng) - 0.2;
  }
  for (cplx lam : {cplx(0, 1), cplx(1.5, 0.5), cplx(-2, 2)})
    for (double t : {1.0, 10.0, 1e4}) CHECK(t4d_identity_error(zp, psi, lam, t) <= 1e-13);
}

TEST_CASE("profile model reproduces a cubic profile exactly") {
  DiagnosticGrid dg{21, 2.0};
  auto table = PhaseTable::uniform(kQuad, 3.0);
  ScatteringProfile p;
  p.grid = dg;
  p.lambda = {0, 0};
  for (std::size_t a = 0; a < dg.n; ++a)
    for (std::size_t b = 0; b < dg.n; ++b) {
      double y1 = dg.node(a), y2 = dg.node(b);
      p.z_plus.push_back(cplx(y1 * y1 * y1 - y2, y1 * y2 * y2));
    }
  p.phi_plus.assign(dg.size(), 0.0);
  auto g = Grid2D::make(32, 32, 8, 8);
  const double t = 5.0;
  auto m = profile_model(g, t, p, table);
  double err = 0;
  for (std::size_t i = 0; i < g.n1; ++i)
    for (std::size_t j = 0; j < g.n2; ++j) {
      double y1 = g.x(0, i) / t, y2 = g.x(1, j) / t;
      cplx z(y1 * y1 * y1 - y2, y1 * y2 * y2);
      cplx want = (1.0 / t) * std::polar(1.0, -t * (y1 * y1 + y2 * y2) / 4) * z;
      err = std::max(err, std::abs(m.at(i, j) - want));
    }
  CHECK(err <= 1e-12);

  auto r = profile_residual(m, p, table);
  CHECK(r.linf == 0.0);
  ComplexField far(g, 1.0);
  far.at(0, 0) = 1.0;
  CHECK(kind_of([&] { profile_residual(far, p, table); }) == ErrorKind::ExtrapolationError);
}

TEST_CASE("scattering state: quadrature against the spectral route") {
  DiagnosticGrid dg{129, 3.0};
  auto table = PhaseTable::uniform(kQuad, 3.5);
  auto p = gaussian_profile(dg, {1, 0}, 0.6);
  auto g = Grid2D::make(128, 128, 32, 32);
  auto direct = compute_u_plus(p, table, g);
  auto spectral = u_plus_spectral(p, kQuad, g, 0.0);
  ComplexField d = direct;
  for (std::size_t i = 0; i < d.data.size(); ++i) d.data[i] -= spectral.data[i];
  CHECK(l2_norm(direct) > 0.1);
  CHECK(l2_norm(d) <= 1e-4 * l2_norm(direct));

  // Plancherel: ||u+||^2 = int |z|^2 dy, as the Jacobian cancels.
  double zz = 0;
  for (std::size_t a = 0; a < dg.n; ++a)
    for (std::size_t b = 0; b < dg.n; ++b) zz += dg.weight(a) * dg.weight(b) * std::norm(p.z_plus[a * dg.n + b]);
  CHECK(l2_norm(spectral) == doctest::Approx(std::sqrt(zz)).epsilon(1e-4));

  ScatteringProfile zero = p;
  std::fill(zero.z_plus.begin(), zero.z_plus.end(), cplx(0, 0));
  CHECK(linf_norm(compute_u_plus(zero, table, g)) == 0.0);
  CHECK(linf_norm(u_plus_spectral(zero, kQuad, g, 3.0)) == 0.0);
}

TEST_CASE("decay rate fit") {
  std::vector<double> t, m;
  for (int i = 0; i < 8; ++i) {
    t.push_back(std::pow(2.0, 0.5 * i));
    m.push_back(3.0 * std::pow(t.back(), -1.5));
  }
  auto f = fit_decay_rate(t, m);
  CHECK(f.slope == doctest::Approx(-1.5).epsilon(1e-13));
  CHECK(fit_decay_rate(t, m, 1.5, 8.0).n == 5u);
  CHECK(kind_of([&] { fit_decay_rate({1, 2, 3, 4}, {1, 1, 1, 1}); }) == ErrorKind::InsufficientData);
  CHECK(kind_of([&] { fit_decay_rate({1, 1.1, 1.2, 1.3, 1.4}, {1, 1, 1, 1, 1}); }) == ErrorKind::InsufficientData);
  m[3] = 0;
  CHECK(kind_of([&] { fit_decay_rate(t, m); }) == ErrorKind::NonPositiveData);
}

TEST_CASE("dissipative limit series") {
  std::vector<double> t = {1, 2, 4, 8, 16}, linf;
  for (double s : t) linf.push_back(1.0 / (s * std::log(s) + 1.0));
  auto d = dissipative_limit_series(t, linf, {0, 2});
  CHECK(d.target == 0.5);
  CHECK(d.t.front() == 4.0);
  CHECK(d.value.size() == 3u);
  CHECK(d.last == doctest::Approx(16 * std::log(16.0) / (16 * std::log(16.0) + 1)));
  CHECK(kind_of([&] { dissipative_limit_series(t, linf, {1, 0}); }) == ErrorKind::BranchMismatch);
}

TEST_CASE("zero data has a zero profile") {
  ScatteringSeries s;
  s.grid = DiagnosticGrid{8, 1.0};
  for (double t : {1.0, 2.0, 4.0}) {
    s.times.push_back(t);
    s.z.push_back(CVec(s.grid.size()));
  }
  auto r = extract_z_plus(s, 1.0);
  CHECK(diag_max(r.z_plus) == 0.0);
  CHECK(r.uncertainty == 0.0);
  CHECK(kind_of([] { extract_z_plus(ScatteringSeries{}, 1.0); }) == ErrorKind::InsufficientData);
}

TEST_CASE("linear flow: the modulated profile converges") {
  auto g = Grid2D::make(512, 512, 128, 128);
  auto u0 = prepare_datum(focused_gaussian_datum(g, kQuad, 4.0), kQuad, 0.1);
  u0.t = 1.0;
  auto dg = diagnostic_grid_for(u0, kQuad, 64, 1e-14);
  auto table = PhaseTable::uniform(kQuad, 1.05 * dg.Y);
  ScatteringTracker tracker(kQuad, table, CutoffProfile{}, dg, {0, 0});
  RunConfig rc;
  rc.lambda = {0, 0};
  rc.t_max = 30;
  rc.checkpoints = log_checkpoints(30, 20);
  rc.weighted_norms = false;
  auto traj = evolve(u0, rc, kQuad, {std::ref(tracker)});
  const auto& s = tracker.series();
  CHECK(s.times.size() == rc.checkpoints.size());
  CHECK(traj.payload.at("vlc_linf").size() == s.times.size());
  auto zr = extract_z_plus(s, 2.0);
  double zmax = diag_max(zr.z_plus);
  CHECK(zmax > 0);
  // Still pre-asymptotic at t = 30 for this width: require steady contraction only.
  CHECK(zr.uncertainty <= 0.2 * zmax);
  CHECK(zr.cauchy.fit_inf.slope < -0.2);
  const auto& d = zr.cauchy.d_inf;
  for (std::size_t i = d.size() / 2; i + 1 < d.size(); ++i) CHECK(d[i + 1] < d[i]);
}
