#include "msq/scattering.hpp"

#include <cblas.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "msq/error.hpp"
#include "msq/fft.hpp"

namespace msq {

namespace {

constexpr double kPi = 3.14159265358979323846;

void gemm(const cplx* a, const cplx* b, cplx* c, std::size_t m, std::size_t k, std::size_t n, bool trans_b) {
  const cplx one(1.0, 0.0), zero(0.0, 0.0);
  cblas_zgemm(CblasRowMajor, CblasNoTrans, trans_b ? CblasTrans : CblasNoTrans, static_cast<int>(m),
              static_cast<int>(n), static_cast<int>(k), &one, a, static_cast<int>(k), b,
              static_cast<int>(trans_b ? k : n), &zero, c, static_cast<int>(n));
}

// Trigonometric interpolation weights from an n-point periodic axis
// [-L, L) to the targets: W[a][j] = (1/n) sum_m e^{i xi_m (y_a - x_j)}.
CVec trig_weights(std::size_t n, double L, const std::vector<double>& targets) {
  CVec W(targets.size() * n);
  CVec c(n);
  for (std::size_t a = 0; a < targets.size(); ++a) {
    for (std::size_t j = 0; j < n; ++j) {
      long m = static_cast<long>(j) < static_cast<long>(n) / 2 ? static_cast<long>(j)
                                                                : static_cast<long>(j) - static_cast<long>(n);
      c[j] = std::polar(1.0 / static_cast<double>(n), kPi * static_cast<double>(m) / L * (targets[a] + L));
    }
    fft::forward1d(c.data(), n);
    std::copy(c.begin(), c.end(), W.begin() + static_cast<long>(a * n));
  }
  return W;
}

// Cubic Lagrange stencil on the diagnostic axis: first index and weights.
struct Stencil {
  std::size_t i0 = 0;
  double w[4] = {0, 0, 0, 0};
  bool inside = false;
};

Stencil cubic_stencil(const DiagnosticGrid& dg, double y) {
  Stencil s;
  if (!(std::abs(y) <= dg.Y)) return s;
  s.inside = true;
  double u = (y + dg.Y) / dg.spacing();
  long i = static_cast<long>(std::floor(u)) - 1;
  i = std::clamp<long>(i, 0, static_cast<long>(dg.n) - 4);
  s.i0 = static_cast<std::size_t>(i);
  double r = u - static_cast<double>(i);  // position relative to node i0, in [0, 3]
  for (int a = 0; a < 4; ++a) {
    double p = 1.0;
    for (int b = 0; b < 4; ++b)
      if (b != a) p *= (r - b) / static_cast<double>(a - b);
    s.w[a] = p;
  }
  return s;
}

template <class T>
T interp2(const std::vector<T, AlignedAllocator<T>>& f, std::size_t n, const Stencil& s1, const Stencil& s2) {
  T acc{};
  for (int a = 0; a < 4; ++a) {
    T row{};
    const T* p = f.data() + (s1.i0 + a) * n + s2.i0;
    for (int b = 0; b < 4; ++b) row += s2.w[b] * p[b];
    acc += s1.w[a] * row;
  }
  return acc;
}

double diag_l2(const CVec& z, const DiagnosticGrid& dg) {
  double s = 0;
  for (std::size_t a = 0; a < dg.n; ++a)
    for (std::size_t b = 0; b < dg.n; ++b) s += std::norm(z[a * dg.n + b]) * dg.weight(a) * dg.weight(b);
  return std::sqrt(s);
}

double diag_linf(const CVec& z) {
  double m = 0;
  for (const auto& v : z) m = std::max(m, std::abs(v));
  return m;
}

std::size_t nearest_index(const std::vector<double>& t, double target) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < t.size(); ++i)
    if (std::abs(t[i] - target) < std::abs(t[best] - target)) best = i;
  return best;
}

}  // namespace

std::vector<double> DiagnosticGrid::nodes() const {
  std::vector<double> v(n);
  for (std::size_t j = 0; j < n; ++j) v[j] = node(j);
  return v;
}

DiagnosticGrid diagnostic_grid_for(const ComplexField& u0, const DispersionSymbol2D& sym, std::size_t n, double tail,
                                   double factor) {
  DiagnosticGrid dg;
  dg.n = n;
  const auto& g = u0.grid;
  CVec hat = u0.data;
  fft::forward2d(hat.data(), g.n1, g.n2);
  double Y = 0;
  for (int k = 0; k < 2; ++k) {
    std::size_t nk = g.n(k);
    std::vector<std::pair<double, double>> marg(nk);  // (xi, mass) in increasing xi
    for (std::size_t j = 0; j < nk; ++j) marg[j].first = g.xi(k, j);
    for (std::size_t i = 0; i < g.n1; ++i)
      for (std::size_t j = 0; j < g.n2; ++j) marg[k == 0 ? i : j].second += std::norm(hat[i * g.n2 + j]);
    std::sort(marg.begin(), marg.end());
    double total = 0;
    for (auto& m : marg) total += m.second;
    if (total == 0) continue;
    double cut = 0.5 * tail * total;
    std::size_t lo = 0, hi = nk - 1;
    for (double acc = 0; lo < nk; ++lo) {
      acc += marg[lo].second;
      if (acc > cut) break;
    }
    for (double acc = 0; hi > 0; --hi) {
      acc += marg[hi].second;
      if (acc > cut) break;
    }
    const auto& f = sym.axis(k);
    Y = std::max({Y, std::abs(f.d1(marg[lo].first)), std::abs(f.d1(marg[hi].first))});
  }
  dg.Y = Y > 0 ? factor * Y : 1.0;
  return dg;
}

void update_phase(PhaseAccumulator& acc, const RVec& abs_v, double s) {
  if (!acc.started) {
    acc.phi.assign(abs_v.size(), 0.0);
    acc.last_abs = abs_v;
    acc.last_t = s;
    acc.started = true;
    return;
  }
  if (!(s > acc.last_t)) throw Error(ErrorKind::Config, "update_phase: times must increase");
  double dl = std::log(s) - std::log(acc.last_t);
  for (std::size_t i = 0; i < abs_v.size(); ++i) acc.phi[i] += 0.5 * (acc.last_abs[i] + abs_v[i]) * dl;
  acc.last_abs = abs_v;
  acc.last_t = s;
}

CVec interpolate_to_diagnostic(const ComplexField& f, const DiagnosticGrid& dg) {
  const auto& g = f.grid;
  if (dg.Y > std::min(g.L1, g.L2)) {
    std::ostringstream os;
    os << "diagnostic box Y = " << dg.Y << " exceeds the scaled native box " << std::min(g.L1, g.L2);
    throw Error(ErrorKind::ExtrapolationError, os.str());
  }
  auto nodes = dg.nodes();
  CVec W1 = trig_weights(g.n1, g.L1, nodes), W2 = trig_weights(g.n2, g.L2, nodes);
  CVec tmp(dg.n * g.n2), out(dg.size());
  gemm(W1.data(), f.data.data(), tmp.data(), dg.n, g.n1, g.n2, false);
  gemm(tmp.data(), W2.data(), out.data(), dg.n, g.n2, dg.n, true);
  return out;
}

CVec compute_z(const CVec& vl, double t, const DiagnosticGrid& dg, const PhaseTable& table, const RVec& phi,
               cplx lambda) {
  std::vector<double> w1(dg.n), w2(dg.n);
  for (std::size_t a = 0; a < dg.n; ++a) {
    w1[a] = table.w_axis(0, dg.node(a));
    w2[a] = table.w_axis(1, dg.node(a));
  }
  CVec z(dg.size());
  for (std::size_t a = 0; a < dg.n; ++a)
    for (std::size_t b = 0; b < dg.n; ++b) {
      std::size_t i = a * dg.n + b;
      double P = phi.empty() ? 0.0 : phi[i];
      z[i] = vl[i] * std::polar(std::exp(lambda.imag() * P), -((w1[a] + w2[b]) * t + lambda.real() * P));
    }
  return z;
}

void check_phase_resolution(const ComplexField& u, const DiagnosticGrid& dg, const PhaseTable& table) {
  for (int k = 0; k < 2; ++k) {
    double band = (2.0 / 3.0) * kPi / u.grid.dx(k);
    double need = std::max(std::abs(table.dphi(k, dg.Y)), std::abs(table.dphi(k, -dg.Y)));
    if (need >= band) {
      std::ostringstream os;
      os << "axis " << k + 1 << ": |dphi(+-Y)| = " << need << " exceeds the resolved band " << band;
      throw Error(ErrorKind::PhaseUnderresolved, os.str());
    }
  }
}

ScatteringTracker::ScatteringTracker(const DispersionSymbol2D& sym, const PhaseTable& table,
                                     const CutoffProfile& cutoff, const DiagnosticGrid& dg, cplx lambda)
    : sym_(sym), table_(&table), cutoff_(cutoff) {
  series_.grid = dg;
  series_.lambda = lambda;
}

void ScatteringTracker::operator()(const ComplexField& u, Trajectory& traj) {
  const auto& dg = series_.grid;
  check_phase_resolution(u, dg, *table_);
  SemiclassicalFrame fr = make_frame(u);
  project_lambda(fr, cutoff_, sym_);
  series_.alias_warning = series_.alias_warning || fr.alias_warning;

  CVec vl = interpolate_to_diagnostic(fr.v_lambda, dg);
  RVec absv(vl.size());
  for (std::size_t i = 0; i < vl.size(); ++i) absv[i] = std::abs(vl[i]);
  update_phase(acc_, absv, u.t);
  CVec z = compute_z(vl, u.t, dg, *table_, acc_.phi, series_.lambda);

  series_.times.push_back(u.t);
  series_.abs_v.push_back(absv);
  series_.phi.push_back(acc_.phi);
  series_.vlc_linf.push_back(linf_norm(fr.v_lambda_c));
  series_.vlc_l2.push_back(l2_norm(fr.v_lambda_c));
  series_.vl_l2.push_back(diag_l2(vl, dg));
  series_.z_l2.push_back(diag_l2(z, dg));
  series_.z.push_back(std::move(z));

  double phi_max = 0;
  for (double p : acc_.phi) phi_max = std::max(phi_max, p);
  traj.payload["vlc_linf"].push_back(series_.vlc_linf.back());
  traj.payload["phi_max"].push_back(phi_max);
}

FitResult fit_decay_rate(const std::vector<double>& t, const std::vector<double>& m, double min_span_ratio) {
  if (t.size() != m.size()) throw Error(ErrorKind::InsufficientData, "fit_decay_rate: length mismatch");
  if (t.size() < 5) throw Error(ErrorKind::InsufficientData, "fit_decay_rate needs >= 5 points");
  for (double v : m)
    if (!(v > 0)) throw Error(ErrorKind::NonPositiveData, "fit_decay_rate: series has non-positive entries");
  double lo = *std::min_element(t.begin(), t.end()), hi = *std::max_element(t.begin(), t.end());
  if (!(hi >= lo * min_span_ratio * (1 - 1e-12)))
    throw Error(ErrorKind::InsufficientData, "fit_decay_rate: time range too short");
  return loglog_fit(t, m);
}

FitResult fit_decay_rate(const std::vector<double>& t, const std::vector<double>& m, double t_lo, double t_hi,
                         double min_span_ratio) {
  std::vector<double> tt, mm;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= t_lo * (1 - 1e-12) && t[i] <= t_hi * (1 + 1e-12)) {
      tt.push_back(t[i]);
      mm.push_back(m[i]);
    }
  return fit_decay_rate(tt, mm, min_span_ratio);
}

CauchyReport z_cauchy(const ScatteringSeries& s, double t_lo, double t_hi) {
  CauchyReport r;
  const auto& T = s.times;
  for (std::size_t i = 0; i < T.size(); ++i) {
    if (T[i] < t_lo * (1 - 1e-12) || T[i] > t_hi * (1 + 1e-12)) continue;
    for (std::size_t j = i + 1; j < T.size(); ++j) {
      if (std::abs(T[j] - 2 * T[i]) > 1e-9 * T[i]) continue;
      CVec d(s.z[i].size());
      for (std::size_t k = 0; k < d.size(); ++k) d[k] = s.z[j][k] - s.z[i][k];
      r.t.push_back(T[i]);
      r.d_inf.push_back(diag_linf(d));
      r.d_l2.push_back(diag_l2(d, s.grid));
      r.constant_inf = std::max(r.constant_inf, r.d_inf.back() * std::sqrt(T[i]));
    }
  }
  return r;
}

ZPlusReport extract_z_plus(const ScatteringSeries& s, double t_lo, double min_span_ratio) {
  if (s.times.empty()) throw Error(ErrorKind::InsufficientData, "no checkpoints recorded");
  ZPlusReport r;
  r.z_plus = s.z.back();
  const double t_max = s.times.back();
  if (diag_linf(r.z_plus) == 0.0) return r;  // zero data: nothing to converge
  r.cauchy = z_cauchy(s, t_lo, 0.5 * t_max);
  r.cauchy.fit_inf = fit_decay_rate(r.cauchy.t, r.cauchy.d_inf, min_span_ratio);
  r.cauchy.fit_l2 = fit_decay_rate(r.cauchy.t, r.cauchy.d_l2, min_span_ratio);
  std::size_t h = nearest_index(s.times, 0.5 * t_max);
  CVec d(r.z_plus.size());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = r.z_plus[k] - s.z[h][k];
  r.uncertainty = diag_linf(d);
  if (r.cauchy.fit_inf.slope > -0.2) {
    std::ostringstream os;
    os << "z Cauchy slope " << r.cauchy.fit_inf.slope << " > -0.2";
    throw Error(ErrorKind::NotConverged, os.str());
  }
  return r;
}

PhiPlus compute_phi_plus(const std::vector<double>& times, const std::vector<RVec>& abs_v, const CVec& z_plus,
                         cplx lambda, double cauchy_constant) {
  if (lambda.imag() > 0) throw Error(ErrorKind::BranchMismatch, "phi_plus is defined for Im lambda = 0");
  PhiPlus r;
  r.phi_plus.assign(z_plus.size(), 0.0);
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    double dl = std::log(times[i + 1] / times[i]);
    for (std::size_t k = 0; k < z_plus.size(); ++k) {
      double zp = std::abs(z_plus[k]);
      r.phi_plus[k] += 0.5 * ((abs_v[i][k] - zp) + (abs_v[i + 1][k] - zp)) * dl;
    }
  }
  if (!times.empty()) r.tail_bound = 2.0 * cauchy_constant / std::sqrt(times.back());
  return r;
}

RVec compute_S(const CVec& z_plus, const RVec& psi_plus, cplx lambda, double t) {
  if (!(lambda.imag() > 0)) throw Error(ErrorKind::BranchMismatch, "S is defined for Im lambda > 0");
  RVec S(z_plus.size());
  double li = lambda.imag(), lt = std::log(t);
  for (std::size_t k = 0; k < S.size(); ++k) S[k] = std::log(1.0 + li * std::abs(z_plus[k]) * lt + psi_plus[k]) / li;
  return S;
}

PsiPlusReport compute_psi_plus_and_S(const std::vector<double>& times, const std::vector<RVec>& abs_v,
                                     const std::vector<RVec>& phi, const CVec& z_plus, cplx lambda) {
  if (!(lambda.imag() > 0)) throw Error(ErrorKind::BranchMismatch, "psi_plus is defined for Im lambda > 0");
  const double li = lambda.imag();
  PsiPlusReport r;
  r.psi_plus.assign(z_plus.size(), 0.0);
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    double dl = std::log(times[i + 1] / times[i]);
    for (std::size_t k = 0; k < z_plus.size(); ++k) {
      double zp = std::abs(z_plus[k]);
      double a = abs_v[i][k] * std::exp(li * phi[i][k]) - zp;
      double b = abs_v[i + 1][k] * std::exp(li * phi[i + 1][k]) - zp;
      r.psi_plus[k] += li * 0.5 * (a + b) * dl;
    }
  }
  r.min_positivity = INFINITY;
  for (std::size_t i = 0; i < times.size(); ++i) {
    double lt = std::log(times[i]);
    double err = 0;
    for (std::size_t k = 0; k < z_plus.size(); ++k) {
      double base = 1.0 + li * std::abs(z_plus[k]) * lt;
      r.min_positivity = std::min(r.min_positivity, base + r.psi_plus[k]);
      err = std::max(err, std::abs(std::exp(li * phi[i][k]) - base - r.psi_plus[k]));
    }
    r.audit_t.push_back(times[i]);
    r.audit_err.push_back(err);
  }
  if (r.min_positivity < 0.5) {
    std::ostringstream os;
    os << "1 + Im(lambda)|z+| log t + psi+ reaches " << r.min_positivity << " < 1/2";
    throw Error(ErrorKind::PositivityViolation, os.str());
  }
  return r;
}

double t4d_identity_error(const CVec& z_plus, const RVec& psi_plus, cplx lambda, double t) {
  RVec S = compute_S(z_plus, psi_plus, lambda, t);
  const double lr = lambda.real(), li = lambda.imag(), lt = std::log(t);
  double err = 0;
  for (std::size_t k = 0; k < S.size(); ++k) {
    cplx direct = std::exp(cplx(0.0, 1.0) * lambda * S[k]);
    double q = 1.0 + li * std::abs(z_plus[k]) * lt + psi_plus[k];
    cplx explicit_factor = std::polar(1.0 / q, (lr / li) * std::log(q));
    err = std::max(err, std::abs(direct - explicit_factor));
  }
  return err;
}

RVec ScatteringProfile::theta(double t) const {
  if (lambda.imag() > 0) return compute_S(z_plus, psi_plus, lambda, t);
  RVec th(z_plus.size());
  double lt = std::log(t);
  for (std::size_t k = 0; k < th.size(); ++k) th[k] = (phi_plus.empty() ? 0.0 : phi_plus[k]) + std::abs(z_plus[k]) * lt;
  return th;
}

RVec ScatteringProfile::positivity(double t) const {
  RVec q(z_plus.size(), 1.0);
  double lt = std::log(t);
  for (std::size_t k = 0; k < q.size(); ++k)
    q[k] = 1.0 + lambda.imag() * std::abs(z_plus[k]) * lt + (psi_plus.empty() ? 0.0 : psi_plus[k]);
  return q;
}

ScatteringProfile build_profile(const ScatteringSeries& s, double t_lo, double min_span_ratio) {
  ScatteringProfile p;
  p.grid = s.grid;
  p.lambda = s.lambda;
  auto zr = extract_z_plus(s, t_lo, min_span_ratio);
  p.z_plus = zr.z_plus;
  p.uncertainty = zr.uncertainty;
  p.t_trunc = s.times.back();
  if (s.lambda.imag() > 0) {
    p.psi_plus = compute_psi_plus_and_S(s.times, s.abs_v, s.phi, p.z_plus, s.lambda).psi_plus;
    p.tail_bound = 2.0 * s.lambda.imag() * zr.cauchy.constant_inf / std::sqrt(p.t_trunc);
  } else {
    auto pp = compute_phi_plus(s.times, s.abs_v, p.z_plus, s.lambda, zr.cauchy.constant_inf);
    p.phi_plus = std::move(pp.phi_plus);
    p.tail_bound = pp.tail_bound;
  }
  return p;
}

ComplexField profile_model(const Grid2D& g, double t, const ScatteringProfile& p, const PhaseTable& table) {
  const auto& dg = p.grid;
  RVec th = p.theta(t);
  std::vector<Stencil> s1(g.n1), s2(g.n2);
  std::vector<double> w1(g.n1), w2(g.n2);
  for (std::size_t i = 0; i < g.n1; ++i) {
    double y = g.x(0, i) / t;
    s1[i] = cubic_stencil(dg, y);
    w1[i] = s1[i].inside ? table.w_axis(0, y) : 0.0;
  }
  for (std::size_t j = 0; j < g.n2; ++j) {
    double y = g.x(1, j) / t;
    s2[j] = cubic_stencil(dg, y);
    w2[j] = s2[j].inside ? table.w_axis(1, y) : 0.0;
  }
  ComplexField m(g, t);
  const cplx I(0.0, 1.0);
  for (std::size_t i = 0; i < g.n1; ++i) {
    if (!s1[i].inside) continue;
    for (std::size_t j = 0; j < g.n2; ++j) {
      if (!s2[j].inside) continue;
      cplx z = interp2(p.z_plus, dg.n, s1[i], s2[j]);
      double Th = interp2(th, dg.n, s1[i], s2[j]);
      m.at(i, j) = (1.0 / t) * std::polar(1.0, t * (w1[i] + w2[j])) * std::exp(I * p.lambda * Th) * z;
    }
  }
  return m;
}

Residual profile_residual(const ComplexField& u, const ScatteringProfile& p, const PhaseTable& table) {
  const auto& g = u.grid;
  const double t = u.t;
  // Mass of u outside the diagnostic box is invisible to the model.
  double out = 0, total = 0;
  for (std::size_t i = 0; i < g.n1; ++i) {
    bool in1 = std::abs(g.x(0, i) / t) <= p.grid.Y;
    for (std::size_t j = 0; j < g.n2; ++j) {
      double m = std::norm(u.at(i, j));
      total += m;
      if (!in1 || std::abs(g.x(1, j) / t) > p.grid.Y) out += m;
    }
  }
  if (total > 0 && out / total > 1e-10) {
    std::ostringstream os;
    os << "mass fraction " << out / total << " lies outside |x/t| <= " << p.grid.Y << " at t = " << t;
    throw Error(ErrorKind::ExtrapolationError, os.str());
  }
  ComplexField m = profile_model(g, t, p, table);
  for (std::size_t k = 0; k < m.data.size(); ++k) m.data[k] = u.data[k] - m.data[k];
  return Residual{linf_norm(m), l2_norm(m)};
}

CVec compute_u_plus(const ScatteringProfile& p, const PhaseTable& table, const std::vector<double>& x1,
                    const std::vector<double>& x2) {
  const auto& dg = p.grid;
  const std::size_t n = dg.n;
  auto axis_matrix = [&](int k, const std::vector<double>& xs) {
    CVec E(xs.size() * n);
    for (std::size_t b = 0; b < n; ++b) {
      double y = dg.node(b);
      double dphi = table.dphi(k, y);
      double amp = dg.weight(b) / std::sqrt(table.curvature(k, y));
      for (std::size_t i = 0; i < xs.size(); ++i) E[i * n + b] = std::polar(amp, xs[i] * dphi);
    }
    return E;
  };
  CVec E1 = axis_matrix(0, x1), E2 = axis_matrix(1, x2);
  CVec tmp(x1.size() * n), out(x1.size() * x2.size());
  gemm(E1.data(), p.z_plus.data(), tmp.data(), x1.size(), n, n, false);
  gemm(tmp.data(), E2.data(), out.data(), x1.size(), n, x2.size(), true);
  const cplx pref(0.0, -1.0 / (2.0 * kPi));
  for (auto& v : out) v *= pref;
  return out;
}

ComplexField compute_u_plus(const ScatteringProfile& p, const PhaseTable& table, const Grid2D& g) {
  ComplexField u(g, 0.0);
  u.data = compute_u_plus(p, table, g.coords(0), g.coords(1));
  return u;
}

ComplexField u_plus_spectral(const ScatteringProfile& p, const DispersionSymbol2D& sym, const Grid2D& g, double t) {
  const auto& dg = p.grid;
  std::vector<Stencil> s1(g.n1), s2(g.n2);
  CVec a(g.n1), b(g.n2);
  for (std::size_t i = 0; i < g.n1; ++i) {
    double xi = g.xi(0, i);
    s1[i] = cubic_stencil(dg, -sym.fx.d1(xi));
    a[i] = std::polar(std::sqrt(sym.fx.d2(xi)) * ((i % 2) ? -1.0 : 1.0), sym.fx.eval(xi) * t);
  }
  for (std::size_t j = 0; j < g.n2; ++j) {
    double xi = g.xi(1, j);
    s2[j] = cubic_stencil(dg, -sym.fy.d1(xi));
    b[j] = std::polar(std::sqrt(sym.fy.d2(xi)) * ((j % 2) ? -1.0 : 1.0), sym.fy.eval(xi) * t);
  }
  ComplexField u(g, t);
  const cplx pref = cplx(0.0, -1.0) * (kPi / g.L1) * (kPi / g.L2) / (2.0 * kPi);
  for (std::size_t i = 0; i < g.n1; ++i) {
    if (!s1[i].inside) continue;
    for (std::size_t j = 0; j < g.n2; ++j) {
      if (!s2[j].inside) continue;
      u.at(i, j) = pref * a[i] * b[j] * interp2(p.z_plus, dg.n, s1[i], s2[j]);
    }
  }
  fft::backward2d(u.data.data(), g.n1, g.n2);
  return u;
}

double scattering_residual(const ComplexField& u, const ScatteringProfile& p, const DispersionSymbol2D& sym) {
  const auto& g = u.grid;
  const double t = u.t;
  ComplexField U = u_plus_spectral(p, sym, g, t);
  RVec th = p.theta(t);
  std::vector<Stencil> s1(g.n1), s2(g.n2);
  for (std::size_t i = 0; i < g.n1; ++i) s1[i] = cubic_stencil(p.grid, g.x(0, i) / t);
  for (std::size_t j = 0; j < g.n2; ++j) s2[j] = cubic_stencil(p.grid, g.x(1, j) / t);
  const cplx I(0.0, 1.0);
  for (std::size_t i = 0; i < g.n1; ++i)
    for (std::size_t j = 0; j < g.n2; ++j) {
      cplx f(1.0, 0.0);
      if (s1[i].inside && s2[j].inside) f = std::exp(I * p.lambda * interp2(th, p.grid.n, s1[i], s2[j]));
      U.at(i, j) = u.at(i, j) - f * U.at(i, j);
    }
  return l2_norm(U);
}

DissipativeSeries dissipative_limit_series(const std::vector<double>& times, const std::vector<double>& linf,
                                           cplx lambda) {
  if (!(lambda.imag() > 0)) throw Error(ErrorKind::BranchMismatch, "dissipative limit needs Im lambda > 0");
  DissipativeSeries r;
  r.target = 1.0 / lambda.imag();
  std::vector<double> lt;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < std::exp(1.0)) continue;
    r.t.push_back(times[i]);
    r.value.push_back(times[i] * std::log(times[i]) * linf[i]);
    lt.push_back(std::log(times[i]));
  }
  if (!r.value.empty()) r.last = r.value.back();
  if (r.value.size() >= 2) r.trend_slope = linear_fit(lt, r.value).slope;
  return r;
}

RVec phase_from_series(const std::vector<double>& times, const std::vector<RVec>& abs_v, std::size_t stride) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < times.size(); i += stride) idx.push_back(i);
  if (idx.back() != times.size() - 1) idx.push_back(times.size() - 1);
  PhaseAccumulator acc;
  for (std::size_t i : idx) update_phase(acc, abs_v[i], times[i]);
  return acc.phi;
}

}  // namespace msq
