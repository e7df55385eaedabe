#pragma once

#include <cds/calculus.hpp>
#include <cds/domain.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace cds {

// E = B x F on one trivializing patch; coordinates of E are (b^1..b^n, x^1..x^m).
struct FiberedSpace {
  CoordinateDomain base;
  CoordinateDomain fiber;

  int n() const { return base.dim; }
  int m() const { return fiber.dim; }
  int N() const { return base.dim + fiber.dim; }

  std::vector<double> point(const std::vector<double>& b, const std::vector<double>& x) const {
    std::vector<double> e(b);
    e.insert(e.end(), x.begin(), x.end());
    return e;
  }

  std::vector<double> project(const std::vector<double>& e) const { return {e.begin(), e.begin() + n()}; }

  std::vector<double> fiber_part(const std::vector<double>& e) const { return {e.begin() + n(), e.end()}; }

  std::vector<double> lower() const { return point(base.lower, fiber.lower); }
  std::vector<double> upper() const { return point(base.upper, fiber.upper); }
};

// Ehresmann connection through its lift coefficient: h(v) = (v, A(b,x) v).
// A is a field on E with A[a * n + i] = A^a_i.
struct Connection {
  int n = 0;
  int m = 0;
  Field A;

  static Connection trivial(int n, int m) { return {n, m, zero_field(n + m, n * m, Valence::map, 1)}; }
};

// h(v) for a base vector field v (a field on B).
inline Field horizontal_lift(const Connection& G, const Field& v) {
  if (v.dim != G.n || v.size != G.n) throw std::invalid_argument("horizontal_lift: v must be a vector field on the base");
  const int n = G.n, m = G.m, N = n + m;
  return Field::make(N, N, Valence::vector, 1, [G, v, n, m](const auto* e, auto* out) {
    using S = scalar_of<decltype(out)>;
    std::vector<S> A(n * m);
    v.eval(e, out);
    G.A.eval(e, A.data());
    for (int a = 0; a < m; ++a) {
      S acc(0.0);
      for (int i = 0; i < n; ++i) acc = acc + A[a * n + i] * out[i];
      out[n + a] = acc;
    }
  });
}

inline Field horizontal_lift(const Connection& G, int i) { return horizontal_lift(G, coordinate_vector(G.n, i)); }

// Base vector field v pulled back to E as (v, 0).
inline Field base_field_on_total(const Field& v, int N) {
  const int n = v.dim;
  return Field::make(N, N, Valence::vector, 1, [v, n, N](const auto* e, auto* out) {
    v.eval(e, out);
    for (int k = n; k < N; ++k) out[k] = 0.0 * e[0];
  });
}

// Smooth base path with an exact velocity evaluator.
struct BasePath {
  int n = 0;
  std::function<void(double s, double* b, double* bdot)> at;

  std::vector<double> point(double s) const {
    std::vector<double> b(n), v(n);
    at(s, b.data(), v.data());
    return b;
  }

  std::vector<double> velocity(double s) const {
    std::vector<double> b(n), v(n);
    at(s, b.data(), v.data());
    return v;
  }

  static BasePath line(std::vector<double> b0, std::vector<double> b1) {
    const int n = static_cast<int>(b0.size());
    return {n, [b0, b1, n](double s, double* b, double* v) {
              for (int i = 0; i < n; ++i) {
                b[i] = b0[i] + s * (b1[i] - b0[i]);
                v[i] = b1[i] - b0[i];
              }
            }};
  }

  // Closed circle through c + r e_i, in the (i, j) coordinate plane.
  static BasePath circle(std::vector<double> c, double r, int i, int j) {
    const int n = static_cast<int>(c.size());
    const double tau = 2.0 * std::acos(-1.0);
    return {n, [c, r, i, j, n, tau](double s, double* b, double* v) {
              for (int k = 0; k < n; ++k) {
                b[k] = c[k];
                v[k] = 0.0;
              }
              b[i] += r * std::cos(tau * s);
              b[j] += r * std::sin(tau * s);
              v[i] = -tau * r * std::sin(tau * s);
              v[j] = tau * r * std::cos(tau * s);
            }};
  }

  // This path followed by `next`, each at double speed.
  BasePath then(const BasePath& next) const {
    BasePath first = *this;
    return {n, [first, next](double s, double* b, double* v) {
              if (s <= 0.5) {
                first.at(2 * s, b, v);
              } else {
                next.at(2 * s - 1, b, v);
              }
              for (int k = 0; k < first.n; ++k) v[k] *= 2.0;
            }};
  }

  BasePath reversed() const {
    BasePath p = *this;
    return {n, [p](double s, double* b, double* v) {
              p.at(1.0 - s, b, v);
              for (int k = 0; k < p.n; ++k) v[k] = -v[k];
            }};
  }
};

// Largest gap between the velocity evaluator and central differences of the path.
inline double path_velocity_defect(const BasePath& p, int samples = 64, double h = 1e-5) {
  double worst = 0.0;
  for (int k = 1; k < samples; ++k) {
    const double s = static_cast<double>(k) / samples;
    auto v = p.velocity(s);
    auto bp = p.point(s + h), bm = p.point(s - h);
    for (int i = 0; i < p.n; ++i) worst = std::max(worst, std::abs((bp[i] - bm[i]) / (2 * h) - v[i]));
  }
  return worst;
}

class TransportError : public std::runtime_error {
 public:
  double time;
  explicit TransportError(double t)
      : std::runtime_error("incomplete transport: solution left the fiber domain at t = " + std::to_string(t)), time(t) {}
};

namespace detail {

template <class S>
void transport_rhs(const Connection& G, const BasePath& path, double s, const std::vector<S>& x, std::vector<S>& dx) {
  const int n = G.n, m = G.m;
  std::vector<double> b(n), bd(n);
  path.at(s, b.data(), bd.data());
  std::vector<S> e(n + m), A(n * m);
  for (int i = 0; i < n; ++i) e[i] = S(b[i]);
  for (int a = 0; a < m; ++a) e[n + a] = x[a];
  G.A.eval(e.data(), A.data());
  for (int a = 0; a < m; ++a) {
    S acc(0.0);
    for (int i = 0; i < n; ++i) acc = acc + A[a * n + i] * bd[i];
    dx[a] = acc;
  }
}

// Stage times are clamped strictly inside [lo, hi] so a kink at a node is sampled one-sided.
template <class S>
void rk4_step(const Connection& G, const BasePath& path, double s, double s_end, double lo, double hi,
              std::vector<S>& x) {
  const int m = G.m;
  const double h = s_end - s;
  const double eps = 1e-12 * (hi - lo);
  auto at = [&](double t) { return std::min(std::max(t, lo + eps), hi - eps); };
  std::vector<S> k1(m), k2(m), k3(m), k4(m), y(m);
  transport_rhs(G, path, at(s), x, k1);
  for (int a = 0; a < m; ++a) y[a] = x[a] + (0.5 * h) * k1[a];
  transport_rhs(G, path, at(s + 0.5 * h), y, k2);
  for (int a = 0; a < m; ++a) y[a] = x[a] + (0.5 * h) * k2[a];
  transport_rhs(G, path, at(s + 0.5 * h), y, k3);
  for (int a = 0; a < m; ++a) y[a] = x[a] + h * k3[a];
  transport_rhs(G, path, at(s_end), y, k4);
  for (int a = 0; a < m; ++a) x[a] = x[a] + (h / 6.0) * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
}

template <class S>
bool escaped(const std::vector<S>& x, const CoordinateDomain* fiber) {
  for (std::size_t a = 0; a < x.size(); ++a) {
    const double v = value(x[a]);
    if (!std::isfinite(v)) return true;
    if (fiber && !(v > fiber->lower[a] && v < fiber->upper[a])) return true;
  }
  return false;
}

}  // namespace detail

// Fiber transport along the base path between the given parameter nodes, by fixed-step RK4.
// Returns the state at every node; nodes may decrease (backward transport).
template <class S>
std::vector<std::vector<S>> transport_through(const Connection& G, const BasePath& path, std::vector<S> x0,
                                              const std::vector<double>& nodes, double step = 1e-3,
                                              const CoordinateDomain* fiber = nullptr) {
  std::vector<std::vector<S>> out;
  out.reserve(nodes.size());
  out.push_back(x0);
  for (std::size_t k = 1; k < nodes.size(); ++k) {
    const double span = nodes[k] - nodes[k - 1];
    if (span == 0.0) {
      out.push_back(x0);
      continue;
    }
    const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(span) / step - 1e-9)));
    const double h = span / steps;
    for (int q = 0; q < steps; ++q) {
      const double s = nodes[k - 1] + q * h;
      const double s_end = q + 1 == steps ? nodes[k] : s + h;
      detail::rk4_step(G, path, s, s_end, std::min(nodes[k - 1], nodes[k]), std::max(nodes[k - 1], nodes[k]), x0);
      if (detail::escaped(x0, fiber)) throw TransportError(s_end);
    }
    out.push_back(x0);
  }
  return out;
}

// phi_{t1,t0}(x0): transport from parameter t0 to t1.
template <class S>
std::vector<S> parallel_transport(const Connection& G, const BasePath& path, const std::vector<S>& x0, double t1,
                                  double t0 = 0.0, double step = 1e-3, const CoordinateDomain* fiber = nullptr) {
  return transport_through(G, path, x0, {t0, t1}, step, fiber).back();
}

// Jacobian J[a * m + c] = d phi^a / d x0^c of the transport, by dual seeding.
inline std::vector<double> transport_jacobian(const Connection& G, const BasePath& path, const std::vector<double>& x0,
                                              double t1, double t0 = 0.0, double step = 1e-3) {
  const int m = G.m;
  std::vector<double> J(m * m);
  for (int c = 0; c < m; ++c) {
    std::vector<D1> x(m);
    for (int a = 0; a < m; ++a) x[a] = D1(x0[a], a == c ? 1.0 : 0.0);
    auto y = parallel_transport(G, path, x, t1, t0, step);
    for (int a = 0; a < m; ++a) J[a * m + c] = y[a].d;
  }
  return J;
}

// Time-t flow of an autonomous vector field by fixed-step RK4 (t may be negative).
template <class S>
std::vector<S> flow_of(const Field& X, std::vector<S> x, double t, double step = 1e-3) {
  const int n = X.dim;
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(t) / step - 1e-9)));
  const double h = t / steps;
  std::vector<S> k1(n), k2(n), k3(n), k4(n), y(n);
  for (int q = 0; q < steps; ++q) {
    X.eval(x.data(), k1.data());
    for (int i = 0; i < n; ++i) y[i] = x[i] + (0.5 * h) * k1[i];
    X.eval(y.data(), k2.data());
    for (int i = 0; i < n; ++i) y[i] = x[i] + (0.5 * h) * k2[i];
    X.eval(y.data(), k3.data());
    for (int i = 0; i < n; ++i) y[i] = x[i] + h * k3[i];
    X.eval(y.data(), k4.data());
    for (int i = 0; i < n; ++i) x[i] = x[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return x;
}

// Curv(u,v) = [h(u), h(v)] - h([u,v]) as a vector field on E; its base block vanishes.
inline Field curvature(const Connection& G, const Field& u, const Field& v) {
  Field hu = horizontal_lift(G, u), hv = horizontal_lift(G, v);
  Field hb = horizontal_lift(G, lie_bracket(u, v));
  return add(lie_bracket(hu, hv), hb, -1.0);
}

// Exterior covariant differential of a base k-form with values in functions on E
// (a field on E whose components are indexed by base index subsets), in the coordinate frame.
inline Field covariant_differential(const Connection& G, const Field& w) {
  const int n = G.n, m = G.m, N = n + m;
  const int k = w.valence == Valence::scalar ? 0 : w.degree;
  if (k > 2) throw std::invalid_argument("covariant_differential: degree must be 0, 1 or 2");
  if (w.dim != N || w.size != binomial(n, k)) throw std::invalid_argument("covariant_differential: shape mismatch");
  if (k + 1 > n) return zero_field(N, 0, Valence::form, k + 1);
  const auto out_sets = subsets(n, k + 1);
  return Field::derived(N, static_cast<int>(out_sets.size()), Valence::form, k + 1,
                        [G, w, n, m, N, k, out_sets](const auto* e, auto* out) {
                          using S = scalar_of<decltype(out)>;
                          std::vector<S> jac(w.size * N), A(n * m);
                          jet(w, e, static_cast<S*>(nullptr), jac.data());
                          G.A.eval(e, A.data());
                          // h_i(f) = d_{b_i} f + A^a_i d_{x_a} f
                          auto hder = [&](int i, int comp) {
                            S acc = jac[comp * N + i];
                            for (int a = 0; a < m; ++a) acc = acc + A[a * n + i] * jac[comp * N + n + a];
                            return acc;
                          };
                          for (std::size_t c = 0; c < out_sets.size(); ++c) {
                            const auto& I = out_sets[c];
                            S acc(0.0);
                            for (int q = 0; q <= k; ++q) {
                              int rest[4];
                              for (int r = 0, t = 0; r <= k; ++r)
                                if (r != q) rest[t++] = I[r];
                              const int comp = k == 0 ? 0 : subset_index(n, rest, k);
                              S term = hder(I[q], comp);
                              acc = (q % 2 == 0) ? acc + term : acc - term;
                            }
                            out[c] = acc;
                          }
                        });
}

}  // namespace cds
