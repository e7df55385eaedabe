#pragma once

#include <cds/yang_mills.hpp>

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cds {

// A map gamma: [0,1]^2 -> B (t, eps) with exact partials. Slices t -> gamma(t, eps) are loops
// at the base point b; a full sphere also collapses the eps-edges to b. On a sphere base each
// point is reported in one chart of the stereographic atlas.
struct SphereFamily {
  std::string name;
  int n = 2;
  bool sphere_base = false;
  bool full_collapse = true;
  int base_chart = 0;
  std::vector<double> base_point;
  // chart, point, d/dt, d/deps
  std::function<int(double t, double e, double* b, double* bt, double* be)> at;

  // Point in R^3 for sphere bases, chart coordinates otherwise.
  std::vector<double> position(double t, double e) const {
    std::vector<double> b(n), bt(n), be(n);
    const int c = at(t, e, b.data(), bt.data(), be.data());
    if (!sphere_base) return b;
    auto x = sphere::to_embedding(c, b[0], b[1]);
    return {x[0], x[1], x[2]};
  }

  std::vector<double> base_position() const {
    if (!sphere_base) return base_point;
    auto x = sphere::to_embedding(base_chart, base_point[0], base_point[1]);
    return {x[0], x[1], x[2]};
  }

  // Largest distance from b of the collapsing edges.
  double collapse_defect(int samples = 64) const {
    const auto b = base_position();
    double r = 0.0;
    auto check = [&](double t, double e) {
      auto p = position(t, e);
      double d = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) d += (p[i] - b[i]) * (p[i] - b[i]);
      r = std::max(r, std::sqrt(d));
    };
    for (int k = 0; k <= samples; ++k) {
      const double s = static_cast<double>(k) / samples;
      check(0.0, s);
      check(1.0, s);
      check(s, 0.0);
      if (full_collapse) check(s, 1.0);
    }
    return r;
  }

  // This family on eps in [0, 1/2], then `next` on [1/2, 1]; needs matching base points.
  SphereFamily then(const SphereFamily& next) const {
    SphereFamily f = *this;
    const SphereFamily first = *this;
    f.name = name + "+" + next.name;
    f.full_collapse = next.full_collapse;
    f.at = [first, next](double t, double e, double* b, double* bt, double* be) {
      const int c = e <= 0.5 ? first.at(t, 2 * e, b, bt, be) : next.at(t, 2 * e - 1, b, bt, be);
      for (int i = 0; i < first.n; ++i) be[i] *= 2.0;
      return c;
    };
    return f;
  }
};

namespace detail {

// Wraps a generic map (S t, S e, int chart) -> std::array<S, 2> and a chart selector.
template <class Map, class Chart>
std::function<int(double, double, double*, double*, double*)> family_evaluator(Map map, Chart chart) {
  return [map, chart](double t, double e, double* b, double* bt, double* be) {
    const int c = chart(t, e);
    auto pt = map(D1(t, 1.0), D1(e, 0.0), c);
    auto pe = map(D1(t, 0.0), D1(e, 1.0), c);
    for (int i = 0; i < 2; ++i) {
      b[i] = pt[i].v;
      bt[i] = pt[i].d;
      be[i] = pe[i].d;
    }
    return c;
  };
}

}  // namespace detail

// Round sphere: u = z / g in chart 0 with z = (2t-1) + i (2 eps - 1), g = (1 - a^2)(1 - b^2)
// (w = g / z in chart 1); the whole boundary goes to the north pole. `warp` reshapes g near the
// boundary and `shift` moves the south-chart centre, giving other parameterizations of the same sphere.
inline SphereFamily round_sphere_family(double warp = 1.0, std::array<double, 2> shift = {0.0, 0.0}) {
  SphereFamily f;
  f.name = "round-sphere";
  f.sphere_base = true;
  f.base_chart = 1;
  f.base_point = {0.0, 0.0};
  auto g_of = [warp](const auto& a, const auto& b) {
    auto g = (1.0 - a * a) * (1.0 - b * b);
    return warp == 1.0 ? g : g * (1.0 + (warp - 1.0) * a * b * b);
  };
  auto map = [g_of, shift](const auto& t, const auto& e, int chart) {
    using S = std::decay_t<decltype(t)>;
    S a = 2.0 * t - 1.0, b = 2.0 * e - 1.0;
    S g = g_of(a, b);
    // u = z / g + shift; w = 1 / u
    S u0 = a / g + shift[0], u1 = b / g + shift[1];
    if (chart == 0) return std::array<S, 2>{u0, u1};
    // 1/u = g / (z + shift g)
    S p0 = a + shift[0] * g, p1 = b + shift[1] * g;
    S r2 = p0 * p0 + p1 * p1;
    return std::array<S, 2>{g * p0 / r2, -(g * p1 / r2)};
  };
  auto chart = [g_of, shift](double t, double e) {
    const double a = 2 * t - 1, b = 2 * e - 1, g = g_of(a, b);
    const double u0 = a + shift[0] * g, u1 = b + shift[1] * g;
    return (u0 * u0 + u1 * u1 <= g * g) ? 0 : 1;
  };
  f.at = detail::family_evaluator(map, chart);
  if (warp != 1.0 || shift[0] != 0.0 || shift[1] != 0.0) f.name = "round-sphere-reparameterized";
  return f;
}

// Spherical cap of polar radius theta0 about the north pole, swept by chords in chart 1:
// w = R (1 - eps) + R eps e^{-2 pi i t}, R = tan(theta0 / 2). Loops at b = (R, 0); area 2 pi (1 - cos theta0).
inline SphereFamily cap_family(double theta0) {
  if (!(theta0 > 0.0 && theta0 < std::acos(-1.0))) throw std::invalid_argument("cap: angle must lie in (0, pi)");
  SphereFamily f;
  f.name = "cap(" + std::to_string(theta0) + ")";
  f.sphere_base = true;
  f.full_collapse = false;
  f.base_chart = 1;
  const double R = std::tan(0.5 * theta0);
  f.base_point = {R, 0.0};
  const double tau = 2.0 * std::acos(-1.0);
  auto map = [R, tau](const auto& t, const auto& e, int) {
    using S = std::decay_t<decltype(t)>;
    return std::array<S, 2>{R * (1.0 - e) + R * e * cos(tau * t), -(R * e * sin(tau * t))};
  };
  f.at = detail::family_evaluator(map, [](double, double) { return 1; });
  return f;
}

// Planar disk of radius R about c swept by chords from c + (R, 0), positively oriented; single chart.
inline SphereFamily disk_family(std::array<double, 2> c, double R) {
  SphereFamily f;
  f.name = "disk";
  f.full_collapse = false;
  f.base_point = {c[0] + R, c[1]};
  const double tau = 2.0 * std::acos(-1.0);
  auto map = [c, R, tau](const auto& t, const auto& e, int) {
    using S = std::decay_t<decltype(t)>;
    return std::array<S, 2>{c[0] + R * (1.0 - e) + R * e * cos(tau * t), c[1] - R * e * sin(tau * t)};
  };
  f.at = detail::family_evaluator(map, [](double, double) { return 0; });
  return f;
}

// Image is a segment, so the pulled-back area vanishes: gamma = b + R eps sin(pi t) (1, 1/2).
inline SphereFamily degenerate_family(std::array<double, 2> b, double R) {
  SphereFamily f;
  f.name = "degenerate";
  f.full_collapse = false;
  f.base_point = {b[0], b[1]};
  const double pi = std::acos(-1.0);
  auto map = [b, R, pi](const auto& t, const auto& e, int) {
    using S = std::decay_t<decltype(t)>;
    S r = R * e * sin(pi * t);
    return std::array<S, 2>{b[0] + r, b[1] + 0.5 * r};
  };
  f.at = detail::family_evaluator(map, [](double, double) { return 0; });
  return f;
}

// Registry: "round-sphere", "round-sphere-reparameterized", "cap(theta)".
inline SphereFamily family_by_name(const std::string& name) {
  if (name == "round-sphere") return round_sphere_family();
  if (name == "round-sphere-reparameterized") return round_sphere_family(1.6, {0.3, -0.2});
  if (name.rfind("cap(", 0) == 0 && name.back() == ')') {
    const std::string arg = name.substr(4, name.size() - 5);
    std::size_t used = 0;
    double th = 0.0;
    try {
      th = std::stod(arg, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != arg.size() || arg.empty()) throw std::invalid_argument("cap: cannot parse angle '" + arg + "'");
    return cap_family(th);
  }
  throw std::invalid_argument("unknown sphere family '" + name + "'");
}

// ---------------------------------------------------------------------------
// Transgression.

struct VerStarPath {
  std::vector<double> eps;
  std::vector<std::vector<double>> covectors;    // c(eps) in fiber components
  std::vector<std::vector<double>> base_points;  // gamma~(eps) in fiber coordinates
  std::vector<double> endpoint;                  // Simpson integral over eps of c(eps)
};

struct TransgressOptions {
  int n_t = 128;
  int n_eps = 128;
  double step = 1e-3;
};

class CollapseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline void require_patches(const std::vector<GeometricData>& patches, const SphereFamily& fam) {
  if (patches.empty()) throw std::invalid_argument("transgress: no geometric data");
  for (const auto& d : patches)
    if (d.n() != fam.n || d.m() != patches.front().m()) throw std::invalid_argument("transgress: patch shape mismatch");
  const double defect = fam.collapse_defect();
  if (defect > 1e-10) throw CollapseError("family '" + fam.name + "' violates boundary collapse by " + std::to_string(defect));
}

// omega_H(h(d_t gamma), h(d_eps gamma)) at (chart point b, fiber point x).
template <class S>
S family_omega(const GeometricData& d, const double* b, const double* bt, const double* be, const std::vector<S>& x) {
  const int n = d.n(), m = d.m();
  std::vector<S> e(n + m), w(binomial(n, 2));
  for (int i = 0; i < n; ++i) e[i] = S(b[i]);
  for (int a = 0; a < m; ++a) e[n + a] = x[a];
  d.omega_H.eval(e.data(), w.data());
  S acc(0.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) acc = acc + (bt[i] * be[j] - bt[j] * be[i]) * w[pair_index(n, i, j)];
  return acc;
}

// dx/ds = A(gamma(s, eps), x) d_t gamma(s, eps).
template <class S>
void slice_rhs(const std::vector<GeometricData>& patches, const SphereFamily& fam, double s, double eps,
               const std::vector<S>& x, std::vector<S>& dx) {
  const int n = fam.n;
  std::vector<double> b(n), bt(n), be(n);
  const int c = fam.at(s, eps, b.data(), bt.data(), be.data());
  const auto& d = patches.at(c);
  const int m = d.m();
  std::vector<S> e(n + m), A(n * m);
  for (int i = 0; i < n; ++i) e[i] = S(b[i]);
  for (int a = 0; a < m; ++a) e[n + a] = x[a];
  d.gamma.A.eval(e.data(), A.data());
  for (int a = 0; a < m; ++a) {
    S acc(0.0);
    for (int i = 0; i < n; ++i) acc = acc + A[a * n + i] * bt[i];
    dx[a] = acc;
  }
}

// Transport along the eps-slice through the given s-nodes; stage times stay inside each node interval.
template <class S>
std::vector<std::vector<S>> slice_transport(const std::vector<GeometricData>& patches, const SphereFamily& fam,
                                            double eps, std::vector<S> x, const std::vector<double>& nodes,
                                            double step) {
  const int m = static_cast<int>(x.size());
  std::vector<std::vector<S>> out{x};
  std::vector<S> k1(m), k2(m), k3(m), k4(m), y(m);
  for (std::size_t k = 1; k < nodes.size(); ++k) {
    const double lo = std::min(nodes[k - 1], nodes[k]), hi = std::max(nodes[k - 1], nodes[k]);
    const double span = nodes[k] - nodes[k - 1];
    const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(span) / step - 1e-9)));
    const double h = span / steps, pad = 1e-12 * (hi - lo);
    auto at = [&](double s) { return std::min(std::max(s, lo + pad), hi - pad); };
    for (int q = 0; q < steps; ++q) {
      const double s = nodes[k - 1] + q * h;
      const double s1 = q + 1 == steps ? nodes[k] : s + h;
      slice_rhs(patches, fam, at(s), eps, x, k1);
      for (int a = 0; a < m; ++a) y[a] = x[a] + (0.5 * h) * k1[a];
      slice_rhs(patches, fam, at(s + 0.5 * h), eps, y, k2);
      for (int a = 0; a < m; ++a) y[a] = x[a] + (0.5 * h) * k2[a];
      slice_rhs(patches, fam, at(s + 0.5 * h), eps, y, k3);
      for (int a = 0; a < m; ++a) y[a] = x[a] + h * k3[a];
      slice_rhs(patches, fam, at(s1), eps, y, k4);
      for (int a = 0; a < m; ++a) x[a] = x[a] + (h / 6.0) * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
      for (int a = 0; a < m; ++a)
        if (!std::isfinite(value(x[a]))) throw TransportError(s1);
    }
    out.push_back(x);
  }
  return out;
}

}  // namespace detail

// eps -> d_V at gamma~(eps) of  y -> int_0^1 omega_H(gamma(s, eps), phi_{s,0}(y))(d_t, d_eps) ds,
// gamma~(eps) = phi^{eps}_{0,1}(x0) (every slice is a loop at b).
inline VerStarPath transgress(const std::vector<GeometricData>& patches, const SphereFamily& fam,
                              const std::vector<double>& x0, const TransgressOptions& opt = {}) {
  detail::require_patches(patches, fam);
  const int m = patches.front().m(), n = fam.n;
  if (static_cast<int>(x0.size()) != m) throw std::invalid_argument("transgress: fiber point has wrong dimension");
  const auto ws = simpson_weights(opt.n_t, 0.0, 1.0), we = simpson_weights(opt.n_eps, 0.0, 1.0);
  std::vector<double> s_nodes(opt.n_t + 1);
  for (int k = 0; k <= opt.n_t; ++k) s_nodes[k] = static_cast<double>(k) / opt.n_t;
  VerStarPath path;
  path.eps.resize(opt.n_eps + 1);
  path.covectors.assign(opt.n_eps + 1, std::vector<double>(m, 0.0));
  path.base_points.assign(opt.n_eps + 1, x0);
  parallel_for(opt.n_eps + 1, [&](int k) {
    const double eps = static_cast<double>(k) / opt.n_eps;
    path.eps[k] = eps;
    auto back = detail::slice_transport(patches, fam, eps, x0, {1.0, 0.0}, opt.step).back();
    path.base_points[k] = back;
    std::vector<double> b(n), bt(n), be(n);
    for (int a = 0; a < m; ++a) {
      std::vector<D1> y(m);
      for (int c = 0; c < m; ++c) y[c] = D1(back[c], c == a ? 1.0 : 0.0);
      auto states = detail::slice_transport(patches, fam, eps, y, s_nodes, opt.step);
      double acc = 0.0;
      for (int q = 0; q <= opt.n_t; ++q) {
        const int c = fam.at(s_nodes[q], eps, b.data(), bt.data(), be.data());
        acc += ws[q] * detail::family_omega(patches.at(c), b.data(), bt.data(), be.data(), states[q]).d;
      }
      path.covectors[k][a] = acc;
    }
  });
  path.endpoint.assign(m, 0.0);
  for (int k = 0; k <= opt.n_eps; ++k)
    for (int a = 0; a < m; ++a) path.endpoint[a] += we[k] * path.covectors[k][a];
  return path;
}

inline VerStarPath transgress(const GeometricData& d, const SphereFamily& fam, const std::vector<double>& x0,
                              const TransgressOptions& opt = {}) {
  return transgress(std::vector<GeometricData>{d}, fam, x0, opt);
}

// psi(b, x) = y trivializes Gamma (horizontal sections have constant y); chi is its inverse in x.
struct Trivialization {
  std::function<std::vector<D1>(const std::vector<double>& b, const std::vector<D1>& x)> to_triv;
  std::function<std::vector<D1>(const std::vector<double>& b, const std::vector<D1>& y)> from_triv;

  static Trivialization identity() {
    auto id = [](const std::vector<double>&, const std::vector<D1>& x) { return x; };
    return {id, id};
  }
};

class NonFlatInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// (d_V)_{x0} of the surface integral of omega_H over the family, computed by 2-D Simpson in the
// trivialized fiber coordinate and mapped back to x0.
inline std::vector<double> transgress_flat(const std::vector<GeometricData>& patches, const SphereFamily& fam,
                                           const std::vector<double>& x0,
                                           const Trivialization& triv = Trivialization::identity(),
                                           const TransgressOptions& opt = {}) {
  detail::require_patches(patches, fam);
  const int m = patches.front().m(), n = fam.n;
  if (static_cast<int>(x0.size()) != m) throw std::invalid_argument("transgress_flat: fiber point has wrong dimension");
  // flatness and trivialization checks along the family
  for (int q = 0; q <= 8; ++q)
    for (int p = 0; p <= 8; ++p) {
      std::vector<double> b(n), bt(n), be(n);
      const int c = fam.at(q / 8.0, p / 8.0, b.data(), bt.data(), be.data());
      const auto& d = patches.at(c);
      std::vector<double> e(b);
      e.insert(e.end(), x0.begin(), x0.end());
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          auto F = curvature(d.gamma, coordinate_vector(n, i), coordinate_vector(n, j))(e);
          for (double v : F)
            if (std::abs(v) > 1e-8) throw NonFlatInput("transgress_flat: connection is not flat on the family");
        }
    }
  const auto ws = simpson_weights(opt.n_t, 0.0, 1.0), we = simpson_weights(opt.n_eps, 0.0, 1.0);
  std::vector<double> bb(fam.base_point);
  std::vector<D1> x0d(m);
  for (int a = 0; a < m; ++a) x0d[a] = D1(x0[a], 0.0);
  std::vector<double> y0(m);
  {
    auto y = triv.to_triv(bb, x0d);
    for (int a = 0; a < m; ++a) y0[a] = y[a].v;
  }
  std::vector<double> dG(m, 0.0);
  std::vector<std::vector<double>> rows(opt.n_eps + 1, std::vector<double>(m, 0.0));
  parallel_for(opt.n_eps + 1, [&](int k) {
    const double eps = static_cast<double>(k) / opt.n_eps;
    std::vector<double> b(n), bt(n), be(n);
    for (int q = 0; q <= opt.n_t; ++q) {
      const int c = fam.at(static_cast<double>(q) / opt.n_t, eps, b.data(), bt.data(), be.data());
      for (int a = 0; a < m; ++a) {
        std::vector<D1> y(m);
        for (int i = 0; i < m; ++i) y[i] = D1(y0[i], i == a ? 1.0 : 0.0);
        auto x = triv.from_triv(b, y);
        rows[k][a] += ws[q] * detail::family_omega(patches.at(c), b.data(), bt.data(), be.data(), x).d;
      }
    }
  });
  for (int k = 0; k <= opt.n_eps; ++k)
    for (int a = 0; a < m; ++a) dG[a] += we[k] * rows[k][a];
  // d_x (G o psi) = dG . d psi / dx at (b, x0)
  std::vector<double> out(m, 0.0);
  for (int c = 0; c < m; ++c) {
    std::vector<D1> x(m);
    for (int a = 0; a < m; ++a) x[a] = D1(x0[a], a == c ? 1.0 : 0.0);
    auto y = triv.to_triv(bb, x);
    for (int a = 0; a < m; ++a) out[c] += dG[a] * y[a].d;
  }
  return out;
}

inline std::vector<double> transgress_flat(const GeometricData& d, const SphereFamily& fam,
                                           const std::vector<double>& x0,
                                           const Trivialization& triv = Trivialization::identity(),
                                           const TransgressOptions& opt = {}) {
  return transgress_flat(std::vector<GeometricData>{d}, fam, x0, triv, opt);
}

// ---------------------------------------------------------------------------
// Lattice and verdicts.

// Centre of the isotropy Lie algebra ker pi^#(x0), bracket [a, b]_k = d_k pi^{ij} a_i b_j;
// returns an orthonormal basis (columns).
inline Mat isotropy_center(const GeometricData& d, const std::vector<double>& e) {
  const int n = d.n(), m = d.m(), N = d.N();
  std::vector<double> pv(d.pi_V.size), jp(d.pi_V.size * N);
  jet(d.pi_V, e.data(), pv.data(), jp.data());
  Mat P(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) P(a, b) = skew2(pv.data(), m, a, b);
  Mat K = null_space(P, 1e-10);
  const int k = static_cast<int>(K.cols());
  if (k == 0) return K;
  auto dP = [&](int i, int j, int l) {
    if (i == j) return 0.0;
    return i < j ? jp[pair_index(m, i, j) * N + n + l] : -jp[pair_index(m, j, i) * N + n + l];
  };
  // rows: components of [K c, K_q] for each q
  Mat M = Mat::Zero(m * k, k);
  for (int c = 0; c < k; ++c)
    for (int q = 0; q < k; ++q)
      for (int l = 0; l < m; ++l) {
        double v = 0.0;
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j) v += dP(i, j, l) * K(i, c) * K(j, q);
        M(q * m + l, c) = v;
      }
  Mat Z = null_space(M, 1e-10);
  return K * Z;
}

struct LatticeReport {
  std::vector<double> radii;
  std::vector<std::vector<double>> generators;  // covectors at the sample points
  std::vector<double> dr_values;                 // generator . x^ (0 on the degenerate locus)
  std::vector<bool> degenerate;                  // sample lies where the isotropy centre is {0}
  double constancy_deviation = 0.0;              // relative spread of dr_values over non-degenerate samples
  double min_nonzero = 0.0;                      // smallest |generator| away from the degenerate locus
  std::string family;
};

// E = S^2 x so(3)*, flat trivial connection, omega_H = f(|x|) * area. Samples x0 = r * direction.
inline std::vector<GeometricData> so3_sphere_data(const RealFunction& f) {
  const HamiltonianFiber H = so3_coadjoint_fiber();
  std::vector<GeometricData> patches;
  for (int c = 0; c < 2; ++c) {
    GeometricData d;
    d.space = {CoordinateDomain::sphere(), H.fiber};
    d.name = "so3-sphere";
    const Field piF = H.pi_F;
    d.pi_V = Field::make(5, 3, Valence::bivector, 2, [piF](const auto* e, auto* out) { piF.eval(e + 2, out); });
    d.gamma = Connection::trivial(2, 3);
    d.omega_H = Field::make(5, 1, Valence::form, 2, [f](const auto* e, auto* out) {
      auto r = sqrt(e[2] * e[2] + e[3] * e[3] + e[4] * e[4]);
      out[0] = f(r) * sphere::area_density(e[0], e[1]);
    });
    patches.push_back(d);
  }
  return patches;
}

inline LatticeReport so3_lattice(const RealFunction& f, const std::vector<double>& radii,
                                 const std::vector<std::array<double, 3>>& directions = {{0.0, 0.0, 1.0}},
                                 const TransgressOptions& opt = {}) {
  const auto patches = so3_sphere_data(f);
  const auto fam = round_sphere_family();
  LatticeReport rep;
  rep.family = fam.name;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const auto& dir = directions[k % directions.size()];
    const double len = std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]);
    std::vector<double> x0{radii[k] * dir[0] / len, radii[k] * dir[1] / len, radii[k] * dir[2] / len};
    std::vector<double> e{fam.base_point[0], fam.base_point[1], x0[0], x0[1], x0[2]};
    Mat Z = isotropy_center(patches[fam.base_chart], e);
    rep.radii.push_back(radii[k]);
    if (Z.cols() == 0) {
      rep.generators.push_back({0.0, 0.0, 0.0});
      rep.dr_values.push_back(0.0);
      rep.degenerate.push_back(true);
      continue;
    }
    auto c = transgress(patches, fam, x0, opt).endpoint;
    Vec g = Z * (Z.transpose() * to_vec(c));
    rep.generators.push_back({g(0), g(1), g(2)});
    double dr = 0.0;
    for (int i = 0; i < 3; ++i) dr += g(i) * x0[i] / radii[k];
    rep.dr_values.push_back(dr);
    rep.degenerate.push_back(false);
  }
  double lo = 0.0, hi = 0.0, scale = 0.0;
  bool first = true;
  rep.min_nonzero = 0.0;
  for (std::size_t k = 0; k < rep.dr_values.size(); ++k) {
    if (rep.degenerate[k]) continue;
    const double v = rep.dr_values[k];
    if (first) {
      lo = hi = v;
      rep.min_nonzero = std::abs(v);
      first = false;
    }
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    scale = std::max(scale, std::abs(v));
    rep.min_nonzero = std::min(rep.min_nonzero, std::abs(v));
  }
  rep.constancy_deviation = scale > 0.0 ? (hi - lo) / scale : 0.0;
  return rep;
}

enum class Integrability { integrable_candidate, non_integrable, inconclusive };

inline std::string to_string(Integrability v) {
  switch (v) {
    case Integrability::integrable_candidate: return "INTEGRABLE-CANDIDATE";
    case Integrability::non_integrable: return "NON-INTEGRABLE";
    default: return "INCONCLUSIVE";
  }
}

struct Rational {
  long long p = 0;
  long long q = 1;

  double value() const { return static_cast<double>(p) / static_cast<double>(q); }

  // "p" or "p/q" with integers only.
  static Rational parse(const std::string& s) {
    auto parse_int = [&](const std::string& t) {
      std::size_t used = 0;
      long long v = 0;
      try {
        v = std::stoll(t, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (t.empty() || used != t.size()) throw std::invalid_argument("exact slope '" + s + "' is not a rational p/q");
      return v;
    };
    const auto slash = s.find('/');
    Rational r;
    r.p = parse_int(s.substr(0, slash));
    r.q = slash == std::string::npos ? 1 : parse_int(s.substr(slash + 1));
    if (r.q == 0) throw std::invalid_argument("exact slope has zero denominator");
    return r;
  }
};

struct VerdictResult {
  Integrability verdict = Integrability::inconclusive;
  std::string reason;
};

// Generators are 4 pi f'(r) dr; a constant lattice with an exact rational slope is a candidate.
inline VerdictResult integrability_verdict(const LatticeReport& rep, const std::optional<Rational>& exact_slope,
                                           double tolerance = 1e-4) {
  if (rep.dr_values.empty()) throw std::invalid_argument("integrability_verdict: empty lattice report");
  const double four_pi = 4.0 * std::acos(-1.0);
  if (rep.constancy_deviation > tolerance)
    return {Integrability::non_integrable,
            "generators vary along the fiber (relative deviation " + std::to_string(rep.constancy_deviation) + ")"};
  double slope = 0.0;
  int count = 0;
  for (std::size_t k = 0; k < rep.dr_values.size(); ++k)
    if (!rep.degenerate[k]) {
      slope += rep.dr_values[k] / four_pi;
      ++count;
    }
  if (count == 0) return {Integrability::inconclusive, "no sample off the degenerate locus"};
  slope /= count;
  if (!exact_slope) return {Integrability::inconclusive, "lattice constant; rationality of the slope is undecidable numerically"};
  const double s = exact_slope->value();
  if (std::abs(s - slope) > tolerance * std::max(1.0, std::abs(s)))
    return {Integrability::inconclusive,
            "supplied slope " + std::to_string(s) + " does not match the computed slope " + std::to_string(slope)};
  return {Integrability::integrable_candidate, "lattice constant with rational slope"};
}

}  // namespace cds
