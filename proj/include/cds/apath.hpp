#pragma once

#include <cds/coupling.hpp>
#include <cds/yang_mills.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cds {

using Samples = std::vector<std::vector<double>>;

namespace detail {

// Grid segments are delimited by break indices (always containing 0 and N); interpolation and
// differences never reach across a break.
inline std::vector<int> normalized_breaks(std::vector<int> breaks, int N) {
  breaks.push_back(0);
  breaks.push_back(N);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  for (std::size_t k = 1; k < breaks.size(); ++k)
    if (breaks[k] - breaks[k - 1] < 6) throw std::invalid_argument("grid: segment shorter than 6 intervals");
  return breaks;
}

inline std::pair<int, int> segment_of(const std::vector<int>& breaks, double x) {
  for (std::size_t k = 1; k < breaks.size(); ++k)
    if (x <= breaks[k] || k + 1 == breaks.size()) return {breaks[k - 1], breaks[k]};
  return {breaks.front(), breaks.back()};
}

// 6-point Lagrange interpolation of uniform samples on [0, 1]; `br` already normalized.
inline void grid_interp_into(const Samples& v, double s, const std::vector<int>& br, double* out) {
  const int N = static_cast<int>(v.size()) - 1;
  const double x = std::min(std::max(s, 0.0), 1.0) * N;
  const auto [lo, hi] = segment_of(br, x);
  const int k = std::min(std::max(static_cast<int>(std::floor(x)) - 2, lo), hi - 5);
  const std::size_t dim = v[0].size();
  for (std::size_t c = 0; c < dim; ++c) out[c] = 0.0;
  for (int q = 0; q < 6; ++q) {
    double w = 1.0;
    for (int r = 0; r < 6; ++r)
      if (r != q) w *= (x - (k + r)) / static_cast<double>(q - r);
    for (std::size_t c = 0; c < dim; ++c) out[c] += w * v[k + q][c];
  }
}

inline std::vector<double> grid_interp(const Samples& v, double s, const std::vector<int>& breaks = {}) {
  std::vector<double> out(v[0].size());
  grid_interp_into(v, s, normalized_breaks(breaks, static_cast<int>(v.size()) - 1), out.data());
  return out;
}

// First-derivative weights at 0 for unit-spaced nodes at the given offsets.
inline std::vector<double> fd_weights(const std::vector<int>& offsets) {
  const int p = static_cast<int>(offsets.size());
  Mat V(p, p);
  Vec rhs = Vec::Zero(p);
  for (int r = 0; r < p; ++r)
    for (int c = 0; c < p; ++c) V(r, c) = std::pow(static_cast<double>(offsets[c]), r);
  rhs(1) = 1.0;
  Vec w = V.fullPivLu().solve(rhs);
  return std::vector<double>(w.data(), w.data() + p);
}

// Sixth-order 7-point differences on uniform samples over [0, 1], one-sided near segment ends.
inline Samples grid_derivative(const Samples& v, const std::vector<int>& breaks = {}) {
  const int N = static_cast<int>(v.size()) - 1;
  const auto br = normalized_breaks(breaks, N);
  const std::size_t dim = v[0].size();
  Samples out(N + 1, std::vector<double>(dim, 0.0));
  std::vector<std::vector<double>> weights(7);
  for (int start = 0; start < 7; ++start) {
    std::vector<int> off(7);
    for (int q = 0; q < 7; ++q) off[q] = q - start;
    weights[start] = fd_weights(off);
  }
  for (std::size_t sgi = 1; sgi < br.size(); ++sgi) {
    const int lo = br[sgi - 1], hi = br[sgi];
    for (int k = lo; k <= hi; ++k) {
      const int first = std::min(std::max(k - 3, lo), hi - 6);
      const auto& w = weights[k - first];
      std::vector<double> acc(dim, 0.0);
      for (int q = 0; q < 7; ++q)
        for (std::size_t c = 0; c < dim; ++c) acc[c] += w[q] * v[first + q][c];
      // at an interior break keep the average of both one-sided values
      for (std::size_t c = 0; c < dim; ++c) {
        const double val = acc[c] * N;
        if (k == lo && sgi > 1) out[k][c] = 0.5 * (out[k][c] + val);
        else out[k][c] = val;
      }
    }
  }
  return out;
}

// Smooth reparameterization with vanishing speed at both ends.
inline double tau(double s) { return s - std::sin(2 * std::acos(-1.0) * s) / (2 * std::acos(-1.0)); }
inline double tau_prime(double s) { return 1 - std::cos(2 * std::acos(-1.0) * s); }

// Time-dependent RK4 flow x' = F(s, x) through nodes; stage times stay inside each node interval.
template <class S, class F>
std::vector<std::vector<S>> td_flow(F&& rhs, std::vector<S> x, const std::vector<double>& nodes, double step) {
  const std::size_t d = x.size();
  std::vector<std::vector<S>> out{x};
  std::vector<S> k1(d), k2(d), k3(d), k4(d), y(d);
  for (std::size_t k = 1; k < nodes.size(); ++k) {
    const double span = nodes[k] - nodes[k - 1];
    if (span == 0.0) {
      out.push_back(x);
      continue;
    }
    const double lo = std::min(nodes[k - 1], nodes[k]), hi = std::max(nodes[k - 1], nodes[k]);
    const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(span) / step - 1e-9)));
    const double h = span / steps, pad = 1e-12 * (hi - lo);
    auto at = [&](double s) { return std::min(std::max(s, lo + pad), hi - pad); };
    for (int q = 0; q < steps; ++q) {
      const double s = nodes[k - 1] + q * h, s1 = q + 1 == steps ? nodes[k] : s + h;
      rhs(at(s), x, k1);
      for (std::size_t a = 0; a < d; ++a) y[a] = x[a] + (0.5 * h) * k1[a];
      rhs(at(s + 0.5 * h), y, k2);
      for (std::size_t a = 0; a < d; ++a) y[a] = x[a] + (0.5 * h) * k2[a];
      rhs(at(s + 0.5 * h), y, k3);
      for (std::size_t a = 0; a < d; ++a) y[a] = x[a] + h * k3[a];
      rhs(at(s1), y, k4);
      for (std::size_t a = 0; a < d; ++a) x[a] = x[a] + (h / 6.0) * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
      for (std::size_t a = 0; a < d; ++a)
        if (!std::isfinite(value(x[a]))) throw TransportError(s1);
    }
    out.push_back(x);
  }
  return out;
}

inline double sup_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double r = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) r = std::max(r, std::abs(a[i] - b[i]));
  return r;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// A-paths of the coupling algebroid: a = h*(u) + a_V with anchor h(u) + pi_V^# a_V.

struct AlgebroidPath {
  int n = 0, m = 0;
  Samples point;  // gamma(t_k) in E
  Samples u;      // base-velocity part
  Samples aV;     // vertical covector part
  std::vector<int> breaks;  // interior grid indices where derivatives may jump

  int intervals() const { return static_cast<int>(point.size()) - 1; }
  double time(int k) const { return static_cast<double>(k) / intervals(); }
};

// sharp a = (u, A u + pi^# a_V) at e.
inline std::vector<double> algebroid_anchor(const GeometricData& d, const std::vector<double>& e,
                                            const std::vector<double>& u, const std::vector<double>& aV) {
  const int n = d.n(), m = d.m();
  std::vector<double> A(n * m), p(d.pi_V.size), out(n + m, 0.0);
  d.gamma.A.eval(e.data(), A.data());
  d.pi_V.eval(e.data(), p.data());
  for (int i = 0; i < n; ++i) out[i] = u[i];
  for (int a = 0; a < m; ++a) {
    double v = 0.0;
    for (int i = 0; i < n; ++i) v += A[a * n + i] * u[i];
    for (int b = 0; b < m; ++b) v += skew2(p.data(), m, a, b) * aV[b];
    out[n + a] = v;
  }
  return out;
}

// max over grid points of |d gamma/dt - sharp a|, derivative by fourth-order differences.
inline double apath_residual(const GeometricData& d, const AlgebroidPath& a) {
  const auto D = detail::grid_derivative(a.point, a.breaks);
  double r = 0.0;
  for (int k = 0; k <= a.intervals(); ++k)
    r = std::max(r, detail::sup_distance(D[k], algebroid_anchor(d, a.point[k], a.u[k], a.aV[k])));
  return r;
}

// Integrates gamma' = sharp(u(t), a_V(t)) from e0 and samples N + 1 uniform points.
inline AlgebroidPath integrate_apath(const GeometricData& d, const std::vector<double>& e0,
                                     const std::function<std::vector<double>(double)>& u,
                                     const std::function<std::vector<double>(double)>& aV, int N = 200,
                                     double step = 1e-3) {
  if (static_cast<int>(e0.size()) != d.N()) throw std::invalid_argument("integrate_apath: start point has wrong dimension");
  AlgebroidPath a;
  a.n = d.n();
  a.m = d.m();
  std::vector<double> nodes(N + 1);
  for (int k = 0; k <= N; ++k) nodes[k] = static_cast<double>(k) / N;
  auto rhs = [&](double s, const std::vector<double>& e, std::vector<double>& de) {
    de = algebroid_anchor(d, e, u(s), aV(s));
  };
  a.point = detail::td_flow(rhs, e0, nodes, step);
  for (int k = 0; k <= N; ++k) {
    a.u.push_back(u(nodes[k]));
    a.aV.push_back(aV(nodes[k]));
  }
  return a;
}

// a^{-1}(t) = -a(1 - t): index reversal and sign.
inline AlgebroidPath inverse(const AlgebroidPath& a) {
  AlgebroidPath r = a;
  const int N = a.intervals();
  for (int k = 0; k <= N; ++k) {
    r.point[k] = a.point[N - k];
    for (int i = 0; i < a.n; ++i) r.u[k][i] = -a.u[N - k][i];
    for (int i = 0; i < a.m; ++i) r.aV[k][i] = -a.aV[N - k][i];
  }
  for (int& b : r.breaks) b = N - b;
  std::sort(r.breaks.begin(), r.breaks.end());
  return r;
}

class NotComposable : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

// Samples of the concatenation on 2N + 1 points: first then second, each run through tau.
inline void concat_samples(const Samples& p1, const std::vector<int>& b1, const Samples& p2, const std::vector<int>& b2,
                           int N, bool velocity, Samples& out) {
  out.assign(2 * N + 1, {});
  for (int k = 0; k <= 2 * N; ++k) {
    const double s = static_cast<double>(k) / (2 * N);
    const bool first = k < N || (k == N && velocity);
    const double local = first ? 2 * s : 2 * s - 1;
    auto v = grid_interp(first ? p1 : p2, tau(local), first ? b1 : b2);
    if (velocity)
      for (double& c : v) c *= 2 * tau_prime(local);
    out[k] = v;
  }
}

// Break indices of the concatenation: the junction plus the inherited breaks moved through tau^{-1}.
inline std::vector<int> concat_breaks(const std::vector<int>& b1, int N1, const std::vector<int>& b2, int N2, int N) {
  std::vector<int> out{N};
  auto move = [&](int b, int Nsrc, int offset) {
    const double target = static_cast<double>(b) / Nsrc;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (tau(mid) < target ? lo : hi) = mid;
    }
    const double idx = 0.5 * (lo + hi) * N;
    const long r = std::lround(idx);
    if (std::abs(idx - r) > 1e-6) throw std::invalid_argument("concat: inherited break does not fall on the new grid");
    out.push_back(offset + static_cast<int>(r));
  };
  for (int b : b1) move(b, N1, 0);
  for (int b : b2) move(b, N2, N);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

// a then b, smoothed at the junction (both halves reparameterized by tau).
inline AlgebroidPath concat(const AlgebroidPath& a, const AlgebroidPath& b, double tol = 1e-9) {
  if (a.n != b.n || a.m != b.m) throw NotComposable("concat: dimension mismatch");
  if (detail::sup_distance(a.point.back(), b.point.front()) > tol) throw NotComposable("concat: endpoint of the first path is not the start of the second");
  const int N = std::max(a.intervals(), b.intervals());
  AlgebroidPath r;
  r.n = a.n;
  r.m = a.m;
  detail::concat_samples(a.point, a.breaks, b.point, b.breaks, N, false, r.point);
  detail::concat_samples(a.u, a.breaks, b.u, b.breaks, N, true, r.u);
  detail::concat_samples(a.aV, a.breaks, b.aV, b.breaks, N, true, r.aV);
  r.breaks = detail::concat_breaks(a.breaks, a.intervals(), b.breaks, b.intervals(), N);
  return r;
}

// ---------------------------------------------------------------------------
// Splitting into (base velocity, Ver*-path over the initial fiber).

struct SplitPath {
  int n = 0, m = 0;
  Samples base;           // gamma_B(t)
  Samples base_velocity;  // d gamma_B / dt
  Samples fiber_point;    // phi^{gamma_B}_{0,t}(gamma_F(t)) in E_{gamma_B(0)}
  Samples covector;       // a~_t = a_V(t) o d phi^{gamma_B}_{t,0}
  std::vector<int> breaks;

  int intervals() const { return static_cast<int>(base.size()) - 1; }
};

inline BasePath interpolated_base_path(const Samples& base, const Samples& velocity, const std::vector<int>& breaks) {
  BasePath p;
  p.n = static_cast<int>(base[0].size());
  const auto br = detail::normalized_breaks(breaks, static_cast<int>(base.size()) - 1);
  p.at = [base, velocity, br](double s, double* b, double* bd) {
    detail::grid_interp_into(base, s, br, b);
    detail::grid_interp_into(velocity, s, br, bd);
  };
  return p;
}

namespace detail {

// x^T J for J[a * m + c] (covector pullback) and its inverse-transpose.
inline std::vector<double> pull_back(const std::vector<double>& J, const std::vector<double>& a, int m) {
  std::vector<double> out(m, 0.0);
  for (int c = 0; c < m; ++c)
    for (int b = 0; b < m; ++b) out[c] += a[b] * J[b * m + c];
  return out;
}

inline std::vector<double> push_forward_covector(const std::vector<double>& J, const std::vector<double>& a, int m) {
  Mat M(m, m);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) M(r, c) = J[r * m + c];
  Vec x = M.transpose().fullPivLu().solve(to_vec(a));
  return std::vector<double>(x.data(), x.data() + m);
}

inline std::vector<double> fiber_of(const std::vector<double>& e, int n) { return {e.begin() + n, e.end()}; }
inline std::vector<double> base_of(const std::vector<double>& e, int n) { return {e.begin(), e.begin() + n}; }

}  // namespace detail

inline SplitPath split_l_path(const GeometricData& d, const AlgebroidPath& a, double step = 1e-3) {
  const int n = d.n(), m = d.m(), N = a.intervals();
  SplitPath p;
  p.n = n;
  p.m = m;
  p.breaks = a.breaks;
  for (int k = 0; k <= N; ++k) {
    p.base.push_back(detail::base_of(a.point[k], n));
    p.base_velocity.push_back(a.u[k]);
  }
  const BasePath path = interpolated_base_path(p.base, p.base_velocity, p.breaks);
  p.fiber_point.resize(N + 1);
  p.covector.resize(N + 1);
  parallel_for(N + 1, [&](int k) {
    const double t = a.time(k);
    auto y = parallel_transport(d.gamma, path, detail::fiber_of(a.point[k], n), 0.0, t, step, &d.space.fiber);
    p.fiber_point[k] = y;
    p.covector[k] = detail::pull_back(transport_jacobian(d.gamma, path, y, t, 0.0, step), a.aV[k], m);
  });
  return p;
}

inline AlgebroidPath reassemble(const GeometricData& d, const SplitPath& p, double step = 1e-3) {
  const int n = d.n(), m = d.m(), N = p.intervals();
  const BasePath path = interpolated_base_path(p.base, p.base_velocity, p.breaks);
  AlgebroidPath a;
  a.n = n;
  a.m = m;
  a.point.resize(N + 1);
  a.aV.resize(N + 1);
  a.u = p.base_velocity;
  a.breaks = p.breaks;
  parallel_for(N + 1, [&](int k) {
    const double t = static_cast<double>(k) / N;
    auto x = parallel_transport(d.gamma, path, p.fiber_point[k], t, 0.0, step, &d.space.fiber);
    auto e = p.base[k];
    e.insert(e.end(), x.begin(), x.end());
    a.point[k] = e;
    a.aV[k] = detail::push_forward_covector(transport_jacobian(d.gamma, path, p.fiber_point[k], t, 0.0, step), p.covector[k], m);
  });
  return a;
}

// (delta, b~) . (gamma, a~) = (gamma then delta, a~ then Phi_gamma^{-1}(b~)); Phi_gamma^{-1} moves b~ to
// the fiber over gamma_B(0) by backward transport along gamma_B and pulls it back by d phi_{1,0}.
inline SplitPath concat_split(const GeometricData& d, const SplitPath& p1, const SplitPath& p2, double step = 1e-3,
                              double tol = 1e-8) {
  const int m = d.m();
  const BasePath g = interpolated_base_path(p1.base, p1.base_velocity, p1.breaks);
  if (detail::sup_distance(p1.base.back(), p2.base.front()) > tol) throw NotComposable("concat_split: base paths do not meet");
  auto end1 = parallel_transport(d.gamma, g, p1.fiber_point.back(), 1.0, 0.0, step);
  if (detail::sup_distance(end1, p2.fiber_point.front()) > tol) throw NotComposable("concat_split: fiber endpoints do not meet");
  SplitPath moved = p2;
  parallel_for(p2.intervals() + 1, [&](int k) {
    auto y = parallel_transport(d.gamma, g, p2.fiber_point[k], 0.0, 1.0, step);
    moved.fiber_point[k] = y;
    moved.covector[k] = detail::pull_back(transport_jacobian(d.gamma, g, y, 1.0, 0.0, step), p2.covector[k], m);
  });
  const int N = std::max(p1.intervals(), p2.intervals());
  SplitPath r;
  r.n = p1.n;
  r.m = p1.m;
  detail::concat_samples(p1.base, p1.breaks, p2.base, p2.breaks, N, false, r.base);
  detail::concat_samples(p1.base_velocity, p1.breaks, p2.base_velocity, p2.breaks, N, true, r.base_velocity);
  detail::concat_samples(p1.fiber_point, p1.breaks, moved.fiber_point, p2.breaks, N, false, r.fiber_point);
  detail::concat_samples(p1.covector, p1.breaks, moved.covector, p2.breaks, N, true, r.covector);
  r.breaks = detail::concat_breaks(p1.breaks, p1.intervals(), p2.breaks, p2.intervals(), N);
  return r;
}

inline SplitPath inverse(const GeometricData& d, const SplitPath& p, double step = 1e-3) {
  // split of the inverse L-path: start fiber is over gamma_B(1)
  const int m = d.m(), N = p.intervals();
  const BasePath g = interpolated_base_path(p.base, p.base_velocity, p.breaks);
  SplitPath r = p;
  for (int k = 0; k <= N; ++k) {
    r.base[k] = p.base[N - k];
    for (int i = 0; i < p.n; ++i) r.base_velocity[k][i] = -p.base_velocity[N - k][i];
  }
  for (int& b : r.breaks) b = N - b;
  std::sort(r.breaks.begin(), r.breaks.end());
  parallel_for(N + 1, [&](int k) {
    // y in E_{gamma(0)} -> phi_{1,0}(y) in E_{gamma(1)}, covector pulled back by d phi_{0,1}
    const auto& y = p.fiber_point[N - k];
    auto z = parallel_transport(d.gamma, g, y, 1.0, 0.0, step);
    r.fiber_point[k] = z;
    auto J = transport_jacobian(d.gamma, g, z, 0.0, 1.0, step);
    auto c = detail::pull_back(J, p.covector[N - k], m);
    for (double& v : c) v = -v;
    r.covector[k] = c;
  });
  return r;
}

// The Ver*-path of a split path is an A-path of the fiber algebroid over gamma_B(0) when transport
// preserves pi_V: d y/dt = pi_V(b0, y)^# a~.
inline double verstar_residual(const GeometricData& d, const SplitPath& p) {
  const int n = d.n(), m = d.m();
  const auto D = detail::grid_derivative(p.fiber_point, p.breaks);
  double r = 0.0;
  std::vector<double> pv(d.pi_V.size);
  for (int k = 0; k <= p.intervals(); ++k) {
    auto e = p.base[0];
    e.insert(e.end(), p.fiber_point[k].begin(), p.fiber_point[k].end());
    d.pi_V.eval(e.data(), pv.data());
    for (int a = 0; a < m; ++a) {
      double v = 0.0;
      for (int b = 0; b < m; ++b) v += skew2(pv.data(), m, a, b) * p.covector[k][b];
      r = std::max(r, std::abs(D[k][a] - v));
    }
  }
  (void)n;
  return r;
}

// ---------------------------------------------------------------------------
// Evolution equation d alpha/d eps - d beta/dt = [alpha, beta] on a finite-dimensional Lie algebra
// (structure constants c) or an abelian bundle (c empty).

struct SectionFamily {
  int dim = 0;
  std::vector<double> c;  // c[(k * dim + l) * dim + m] = c^k_{lm}; empty means abelian
  Field alpha;            // (t, eps) -> g

  static SectionFamily lie(const GroupModel& G, Field alpha) { return {G.dim, G.c, std::move(alpha)}; }
  static SectionFamily abelian(int dim, Field alpha) { return {dim, {}, std::move(alpha)}; }

  bool is_abelian() const { return c.empty(); }

  template <class S>
  std::vector<S> bracket(const std::vector<S>& x, const std::vector<S>& y) const {
    std::vector<S> out(dim, S(0.0));
    if (c.empty()) return out;
    for (int k = 0; k < dim; ++k)
      for (int l = 0; l < dim; ++l)
        for (int m = 0; m < dim; ++m) {
          const double s = c[(k * dim + l) * dim + m];
          if (s != 0.0) out[k] = out[k] + s * x[l] * y[m];
        }
    return out;
  }

  std::vector<double> value_at(double t, double e) const {
    const double x[2] = {t, e};
    std::vector<double> out(dim);
    alpha.eval(x, out.data());
    return out;
  }

  std::vector<double> eps_derivative(double t, double e) const {
    const D1 x[2] = {D1(t, 0.0), D1(e, 1.0)};
    std::vector<D1> out(dim);
    alpha.eval(x, out.data());
    std::vector<double> r(dim);
    for (int k = 0; k < dim; ++k) r[k] = out[k].d;
    return r;
  }
};

class UnsupportedFamily : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void validate(const SectionFamily& f) {
  if (f.alpha.dim != 2 || f.alpha.size != f.dim) throw UnsupportedFamily("evolution: alpha must map (t, eps) to the algebra");
  if (f.c.empty()) return;
  const int d = f.dim;
  if (static_cast<int>(f.c.size()) != d * d * d) throw UnsupportedFamily("evolution: structure constants have wrong size");
  double defect = 0.0;
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l)
      for (int m = 0; m < d; ++m) {
        defect = std::max(defect, std::abs(f.c[(k * d + l) * d + m] + f.c[(k * d + m) * d + l]));
        // Jacobi: sum over cyclic (l, m, q) of [[e_l, e_m], e_q]
        for (int q = 0; q < d; ++q) {
          double j = 0.0;
          for (int r = 0; r < d; ++r)
            j += f.c[(r * d + l) * d + m] * f.c[(k * d + r) * d + q] + f.c[(r * d + m) * d + q] * f.c[(k * d + r) * d + l] +
                 f.c[(r * d + q) * d + l] * f.c[(k * d + r) * d + m];
          defect = std::max(defect, std::abs(j));
        }
      }
  if (defect > 1e-12) throw UnsupportedFamily("evolution: structure constants do not define a Lie algebra");
}

// beta^t(eps) for t in the node list at fixed eps: d beta/dt = d alpha/d eps - [alpha, beta].
inline Samples evolve_beta(const SectionFamily& f, const std::vector<double>& beta0, double eps,
                           const std::vector<double>& t_nodes, double step) {
  std::vector<D1> a(f.dim);
  std::vector<double> av(f.dim);
  auto rhs = [&](double t, const std::vector<double>& b, std::vector<double>& db) {
    const D1 x[2] = {D1(t, 0.0), D1(eps, 1.0)};
    f.alpha.eval(x, a.data());
    for (int k = 0; k < f.dim; ++k) av[k] = a[k].v;
    auto br = f.bracket(av, b);
    for (int k = 0; k < f.dim; ++k) db[k] = a[k].d - br[k];
  };
  return detail::td_flow(rhs, beta0, t_nodes, step);
}

struct EvolutionSolution {
  int n_t = 0, n_eps = 0;
  std::vector<Samples> beta;  // beta[j][i]: eps_j, t_i
  double residual = 0.0;      // sup of the evolution-equation defect, d beta/dt by differences
  double boundary = 0.0;      // sup_eps |beta^1(eps)|
  bool homotopy = false;      // boundary < tolerance

  std::vector<double> at(int i, int j) const { return beta[j][i]; }
};

inline EvolutionSolution solve_evolution(const SectionFamily& f, const Field& beta0, int n_t = 200, int n_eps = 20,
                                         double step = 1e-3, double tol = 1e-6) {
  validate(f);
  if (beta0.dim != 1 || beta0.size != f.dim) throw UnsupportedFamily("evolution: beta0 must map eps to the algebra");
  EvolutionSolution s;
  s.n_t = n_t;
  s.n_eps = n_eps;
  s.beta.resize(n_eps + 1);
  std::vector<double> t_nodes(n_t + 1);
  for (int i = 0; i <= n_t; ++i) t_nodes[i] = static_cast<double>(i) / n_t;
  std::vector<double> res(n_eps + 1, 0.0), bnd(n_eps + 1, 0.0);
  parallel_for(n_eps + 1, [&](int j) {
    const double eps = static_cast<double>(j) / n_eps;
    auto b0 = beta0(std::vector<double>{eps});
    s.beta[j] = evolve_beta(f, b0, eps, t_nodes, step);
    const auto D = detail::grid_derivative(s.beta[j]);
    for (int i = 0; i <= n_t; ++i) {
      auto a = f.value_at(t_nodes[i], eps), da = f.eps_derivative(t_nodes[i], eps), br = f.bracket(a, s.beta[j][i]);
      for (int k = 0; k < f.dim; ++k) res[j] = std::max(res[j], std::abs(da[k] - D[i][k] - br[k]));
    }
    for (double v : s.beta[j][n_t]) bnd[j] = std::max(bnd[j], std::abs(v));
  });
  for (int j = 0; j <= n_eps; ++j) {
    s.residual = std::max(s.residual, res[j]);
    s.boundary = std::max(s.boundary, bnd[j]);
  }
  s.homotopy = s.boundary < tol;
  return s;
}

// Infinitesimal action of the algebra on a manifold: rho[k * M + i] is the i-th component of rho(e_k).
struct AlgebraAction {
  int manifold_dim = 0;
  Field rho;

  std::vector<double> field(const std::vector<double>& xi, const std::vector<double>& x) const {
    std::vector<double> r(rho.size), out(manifold_dim, 0.0);
    rho.eval(x.data(), r.data());
    for (std::size_t k = 0; k < xi.size(); ++k)
      for (int i = 0; i < manifold_dim; ++i) out[i] += xi[k] * r[k * manifold_dim + i];
    return out;
  }

  static AlgebraAction of(const HamiltonianFiber& H) { return {H.m(), H.rho}; }
};

// sup over the (t, eps) samples of |phi^{X^eps}_{t,0} phi^{Y^0}_{eps,0}(m0) - phi^{Y^t}_{eps,0} phi^{X^0}_{t,0}(m0)|
// with X = rho(alpha), Y = rho(beta); beta is re-solved at every flow stage with the same RK4 step.
inline double flow_commutation_residual(const SectionFamily& f, const Field& beta0, const AlgebraAction& act,
                                        const std::vector<double>& m0, const std::vector<double>& t_samples,
                                        const std::vector<double>& eps_samples, double step = 1e-3) {
  validate(f);
  auto sorted_nodes = [](std::vector<double> v) {
    v.push_back(0.0);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  const auto tn = sorted_nodes(t_samples), en = sorted_nodes(eps_samples);
  auto b0 = [&](double e) { return beta0(std::vector<double>{e}); };
  // left: Y^0 flow in eps, then X^eps flow in t
  std::vector<Samples> left(en.size());
  {
    auto rhs = [&](double e, const std::vector<double>& x, std::vector<double>& dx) { dx = act.field(b0(e), x); };
    auto y = detail::td_flow(rhs, m0, en, step);
    parallel_for(static_cast<int>(en.size()), [&](int j) {
      auto rx = [&](double t, const std::vector<double>& x, std::vector<double>& dx) {
        dx = act.field(f.value_at(t, en[j]), x);
      };
      left[j] = detail::td_flow(rx, y[j], tn, step);
    });
  }
  // right: X^0 flow in t, then Y^t flow in eps; the eps-flows for all t samples run together so each
  // beta solve serves every t sample
  std::vector<Samples> right(tn.size(), Samples(en.size()));
  {
    auto rx = [&](double t, const std::vector<double>& x, std::vector<double>& dx) { dx = act.field(f.value_at(t, 0.0), x); };
    auto z = detail::td_flow(rx, m0, tn, step);
    const int M = static_cast<int>(m0.size());
    std::vector<double> stacked;
    for (const auto& p : z) stacked.insert(stacked.end(), p.begin(), p.end());
    // RK4 stages revisit each eps value (k2/k3, and k4/next k1): keep the last two solves
    std::array<std::pair<double, Samples>, 2> cache{{{std::nan(""), {}}, {std::nan(""), {}}}};
    int oldest = 0;
    auto solved = [&](double e) -> const Samples& {
      for (const auto& c : cache)
        if (c.first == e) return c.second;
      auto& slot = cache[oldest];
      oldest = 1 - oldest;
      slot = {e, evolve_beta(f, b0(e), e, tn, step)};
      return slot.second;
    };
    auto ry = [&](double e, const std::vector<double>& x, std::vector<double>& dx) {
      const Samples& beta = solved(e);
      for (std::size_t i = 0; i < tn.size(); ++i) {
        auto v = act.field(beta[i], std::vector<double>(x.begin() + i * M, x.begin() + (i + 1) * M));
        std::copy(v.begin(), v.end(), dx.begin() + i * M);
      }
    };
    auto states = detail::td_flow(ry, stacked, en, step);
    for (std::size_t j = 0; j < en.size(); ++j)
      for (std::size_t i = 0; i < tn.size(); ++i)
        right[i][j] = std::vector<double>(states[j].begin() + i * M, states[j].begin() + (i + 1) * M);
  }
  double r = 0.0;
  for (std::size_t j = 0; j < en.size(); ++j)
    for (std::size_t i = 0; i < tn.size(); ++i) r = std::max(r, detail::sup_distance(left[j][i], right[i][j]));
  return r;
}

}  // namespace cds
