#include "msq/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "msq/error.hpp"

namespace msq {

DispersionSymbol1D quadratic_symbol(double a) {
  DispersionSymbol1D s;
  s.eval = [a](double x) { return a * x * x; };
  s.d1 = [a](double x) { return 2.0 * a * x; };
  s.d2 = [a](double) { return 2.0 * a; };
  s.d3 = [](double) { return 0.0; };
  s.c_low = 2.0 * a;
  s.d_high = 2.0 * a;
  s.name = a == 1.0 ? "quadratic" : "anisotropic";
  return s;
}

DispersionSymbol1D quadrel_symbol() {
  DispersionSymbol1D s;
  s.eval = [](double x) { return x * x + std::sqrt(1.0 + x * x); };
  s.d1 = [](double x) { return 2.0 * x + x / std::sqrt(1.0 + x * x); };
  s.d2 = [](double x) {
    double r = 1.0 + x * x;
    return 2.0 + 1.0 / (r * std::sqrt(r));
  };
  s.d3 = [](double x) {
    double r = 1.0 + x * x;
    return -3.0 * x / (r * r * std::sqrt(r));
  };
  s.c_low = 2.0;
  s.d_high = 3.0;
  s.name = "quadrel";
  return s;
}

DispersionSymbol1D make_symbol(const std::string& name, const std::map<std::string, double>& coeffs) {
  auto coeff = [&](const char* key, double dflt) {
    auto it = coeffs.find(key);
    return it == coeffs.end() ? dflt : it->second;
  };
  if (name == "quadratic") {
    // a may be set to anything here so corrupted symbols reach validation.
    auto s = quadratic_symbol(coeff("a", 1.0));
    s.name = "quadratic";
    return s;
  }
  if (name == "anisotropic") {
    double a = coeff("a", 1.0);
    if (!(a >= 0.5 && a <= 2.0)) throw Error(ErrorKind::Config, "anisotropic coefficient a must lie in [0.5, 2]");
    auto s = quadratic_symbol(a);
    s.name = "anisotropic";
    return s;
  }
  if (name == "quadrel") return quadrel_symbol();
  throw Error(ErrorKind::Config, "unknown dispersion symbol '" + name + "'");
}

EllipticityReport validate_ellipticity(const DispersionSymbol1D& sym, double lo, double hi, int n_samples) {
  if (!(hi >= lo) || n_samples < 2) throw Error(ErrorKind::Config, "validate_ellipticity: empty band or < 2 samples");
  constexpr double delta = 1e-5;
  constexpr double tol = 1e-6;
  EllipticityReport r;
  r.min_d2 = INFINITY;
  r.max_d2 = -INFINITY;
  for (int i = 0; i < n_samples; ++i) {
    double xi = lo + (hi - lo) * i / (n_samples - 1);
    double f2 = sym.d2(xi);
    r.min_d2 = std::min(r.min_d2, f2);
    r.max_d2 = std::max(r.max_d2, f2);
    if (!(f2 > 0.0)) {
      std::ostringstream os;
      os << sym.name << ": F''(" << xi << ") = " << f2 << " <= 0";
      throw Error(ErrorKind::NonElliptic, os.str());
    }
    double f1 = sym.d1(xi), f3 = sym.d3(xi);
    double e1 = std::abs((sym.eval(xi + delta) - sym.eval(xi - delta)) / (2 * delta) - f1) / (1 + std::abs(f1));
    double e2 = std::abs((sym.d1(xi + delta) - sym.d1(xi - delta)) / (2 * delta) - f2) / (1 + std::abs(f2));
    double e3 = std::abs((sym.d2(xi + delta) - sym.d2(xi - delta)) / (2 * delta) - f3) / (1 + std::abs(f3));
    r.fd_err_d1 = std::max(r.fd_err_d1, e1);
    r.fd_err_d2 = std::max(r.fd_err_d2, e2);
    r.fd_err_d3 = std::max(r.fd_err_d3, e3);
  }
  if (r.fd_err_d1 > tol || r.fd_err_d2 > 10 * tol || r.fd_err_d3 > 100 * tol) {
    std::ostringstream os;
    os << sym.name << ": analytic derivatives disagree with finite differences (d1 " << r.fd_err_d1 << ", d2 "
       << r.fd_err_d2 << ", d3 " << r.fd_err_d3 << ")";
    throw Error(ErrorKind::DerivativeMismatch, os.str());
  }
  r.within_bounds = r.min_d2 >= sym.c_low * (1 - 1e-14) && r.max_d2 <= sym.d_high * (1 + 1e-14);
  r.pass = r.within_bounds;
  return r;
}

double stationary_phase_root(const DispersionSymbol1D& sym, double x, double xi_max) {
  auto g = [&](double xi) { return x + sym.d1(xi); };
  double c = sym.c_low > 0 ? sym.c_low : 1.0;
  double x0 = -x / (2.0 * c);
  double g0 = g(x0);
  if (g0 == 0.0) return x0;

  // g is increasing: walk away from x0 in the sign-correcting direction.
  double lo, hi;
  double step = std::max(1.0, std::abs(x0));
  double dir = g0 < 0 ? 1.0 : -1.0;
  double prev = x0, cur = x0;
  for (;;) {
    cur = prev + dir * step;
    if (std::abs(cur) > xi_max) {
      std::ostringstream os;
      os << sym.name << ": no root of x + F'(xi) = 0 with |xi| <= " << xi_max << " for x = " << x;
      throw Error(ErrorKind::BracketFailure, os.str());
    }
    if ((g(cur) < 0) != (g0 < 0)) break;
    prev = cur;
    step *= 2;
  }
  lo = std::min(prev, cur);
  hi = std::max(prev, cur);

  double tol = 0.25e-12 * (1 + std::abs(x));
  double xi = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    double gv = g(xi);
    if (std::abs(gv) <= tol) return xi;
    if (gv < 0) lo = xi; else hi = xi;
    double nx = xi - gv / sym.d2(xi);
    if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
    if (nx == xi || hi - lo <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(xi))) return nx;
    xi = nx;
  }
  return xi;
}

PhaseTable::PhaseTable(const DispersionSymbol2D& sym, std::vector<double> axis1, std::vector<double> axis2)
    : sym_(sym) {
  x_[0] = std::move(axis1);
  x_[1] = std::move(axis2);
  for (int k = 0; k < 2; ++k) {
    const auto& f = sym_.axis(k);
    const auto& xs = x_[k];
    if (xs.size() < 2) throw Error(ErrorKind::Config, "phase table axis needs at least two nodes");
    for (std::size_t i = 1; i < xs.size(); ++i)
      if (!(xs[i] > xs[i - 1])) throw Error(ErrorKind::Config, "phase table axis must be strictly increasing");
    std::size_t n = xs.size();
    dphi_[k].resize(n);
    d2phi_[k].resize(n);
    d3phi_[k].resize(n);
    w_[k].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      double xi;
      try {
        xi = stationary_phase_root(f, xs[i]);
      } catch (const Error& e) {
        std::ostringstream os;
        os << "axis " << k + 1 << " node " << i << ": " << e.what();
        throw Error(ErrorKind::BracketFailure, os.str());
      }
      double f2 = f.d2(xi);
      dphi_[k][i] = xi;
      d2phi_[k][i] = -1.0 / f2;
      d3phi_[k][i] = -f.d3(xi) / (f2 * f2 * f2);
      w_[k][i] = legendre_phase(f, xs[i], xi);
    }
  }
}

PhaseTable PhaseTable::uniform(const DispersionSymbol2D& sym, double X, double spacing) {
  int m = static_cast<int>(std::ceil(X / spacing));
  std::vector<double> ax(2 * m + 1);
  for (int i = -m; i <= m; ++i) ax[i + m] = i * spacing;
  return PhaseTable(sym, ax, ax);
}

int PhaseTable::locate(int k, double x) const {
  const auto& xs = x_[k];
  if (x < xs.front() || x > xs.back()) return -1;
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  int i = static_cast<int>(it - xs.begin()) - 1;
  return std::min(i, static_cast<int>(xs.size()) - 2);
}

namespace {

double quintic_hermite(double x0, double x1, double f0, double f1, double d0, double d1, double s0, double s1,
                       double x) {
  double h = x1 - x0;
  double t = (x - x0) / h;
  double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  double h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
  double h1 = t - 6 * t3 + 8 * t4 - 3 * t5;
  double h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
  double h3 = 0.5 * t3 - t4 + 0.5 * t5;
  double h4 = -4 * t3 + 7 * t4 - 3 * t5;
  double h5 = 10 * t3 - 15 * t4 + 6 * t5;
  return f0 * h0 + h * d0 * h1 + h * h * s0 * h2 + h * h * s1 * h3 + h * d1 * h4 + f1 * h5;
}

}  // namespace

double PhaseTable::dphi(int k, double x) const {
  int i = locate(k, x);
  if (i < 0) return stationary_phase_root(sym_.axis(k), x);
  const auto& xs = x_[k];
  return quintic_hermite(xs[i], xs[i + 1], dphi_[k][i], dphi_[k][i + 1], d2phi_[k][i], d2phi_[k][i + 1],
                         d3phi_[k][i], d3phi_[k][i + 1], x);
}

double PhaseTable::d2phi(int k, double x) const { return -1.0 / sym_.axis(k).d2(dphi(k, x)); }

double PhaseTable::curvature(int k, double x) const { return sym_.axis(k).d2(dphi(k, x)); }

double PhaseTable::w_axis(int k, double x) const {
  int i = locate(k, x);
  if (i < 0) {
    const auto& f = sym_.axis(k);
    return legendre_phase(f, x, stationary_phase_root(f, x));
  }
  const auto& xs = x_[k];
  return quintic_hermite(xs[i], xs[i + 1], w_[k][i], w_[k][i + 1], dphi_[k][i], dphi_[k][i + 1], d2phi_[k][i],
                         d2phi_[k][i + 1], x);
}

}  // namespace msq
