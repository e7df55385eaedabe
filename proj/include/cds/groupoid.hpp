#pragma once

#include <cds/calculus.hpp>
#include <cds/coupling.hpp>

#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace cds {

// Pair groupoid M x M; an arrow g = (y, x) goes from s(g) = x to t(g) = y.
struct PairGroupoid {
  int dim = 0;

  std::vector<double> source(const std::vector<double>& g) const { return {g.begin() + dim, g.end()}; }
  std::vector<double> target(const std::vector<double>& g) const { return {g.begin(), g.begin() + dim}; }

  std::vector<double> arrow(const std::vector<double>& y, const std::vector<double>& x) const {
    std::vector<double> g(y);
    g.insert(g.end(), x.begin(), x.end());
    return g;
  }

  std::vector<double> unit(const std::vector<double>& x) const { return arrow(x, x); }
  std::vector<double> inverse(const std::vector<double>& g) const { return arrow(source(g), target(g)); }

  // (z, y) . (y, x) = (z, x)
  std::vector<double> compose(const std::vector<double>& g2, const std::vector<double>& g1) const {
    if (source(g2) != target(g1)) throw std::invalid_argument("compose: arrows are not composable");
    return arrow(target(g2), source(g1));
  }
};

class NotClosed : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// max |d omega| over the sample points (0 when d omega would exceed the dimension).
inline double closedness_defect(const Field& omega, const std::vector<std::vector<double>>& points) {
  if (form_degree(omega) + 1 > omega.dim) return 0.0;
  const Field dw = exterior_derivative(omega);
  double r = 0.0;
  for (const auto& p : points)
    for (double v : dw(p)) r = std::max(r, std::abs(v));
  return r;
}

// Omega = t^* omega - s^* omega on M x M, arrow coordinates (y, x).
inline Field pair_form(const Field& omega, const CoordinateDomain& M, int samples = 64, double tol = 1e-10) {
  if (omega.valence != Valence::form || omega.degree != 2) throw std::invalid_argument("pair_form: expects a 2-form");
  const double defect = closedness_defect(omega, sample_grid(M, samples));
  if (defect > tol) throw NotClosed("pair_form: d omega = " + std::to_string(defect));
  const int n = omega.dim;
  return Field::make(2 * n, binomial(2 * n, 2), Valence::form, 2, [omega, n](const auto* g, auto* out) {
    using S = scalar_of<decltype(out)>;
    std::vector<S> wy(omega.size), wx(omega.size);
    omega.eval(g, wy.data());
    omega.eval(g + n, wx.data());
    const int P = binomial(2 * n, 2);
    for (int k = 0; k < P; ++k) out[k] = S(0.0);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        out[pair_index(2 * n, i, j)] = wy[pair_index(n, i, j)];
        out[pair_index(2 * n, n + i, n + j)] = -wx[pair_index(n, i, j)];
      }
  });
}

// Full skew matrix of a 2-form at a point.
inline Mat form_matrix(const Field& w, const std::vector<double>& x) {
  const int n = w.dim;
  auto c = w(x);
  Mat M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = skew2(c.data(), n, i, j);
  return M;
}

// max over sampled composable pairs ((z, y), (y, x)) and tangent pairs of |m^* Omega - pr1^* Omega - pr2^* Omega|.
inline double multiplicativity_residual(const Field& Omega, const CoordinateDomain& M, int samples = 32,
                                        unsigned seed = 7u) {
  const int n = M.dim;
  if (Omega.dim != 2 * n) throw std::invalid_argument("multiplicativity_residual: form is not on M x M");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const auto pts = sample_grid(M, 3 * samples, seed);
  double r = 0.0;
  for (int k = 0; k < samples; ++k) {
    const auto &z = pts[3 * k], &y = pts[3 * k + 1], &x = pts[3 * k + 2];
    const PairGroupoid G{n};
    const Mat Wm = form_matrix(Omega, G.arrow(z, x)), W1 = form_matrix(Omega, G.arrow(z, y)),
              W2 = form_matrix(Omega, G.arrow(y, x));
    for (int q = 0; q < 4; ++q) {
      Vec a(3 * n), b(3 * n);  // (dz, dy, dx)
      for (int i = 0; i < 3 * n; ++i) {
        a(i) = U(rng);
        b(i) = U(rng);
      }
      auto pick = [n](const Vec& v, int first, int second) {
        Vec o(2 * n);
        o << v.segment(first * n, n), v.segment(second * n, n);
        return o;
      };
      const double lhs = pick(a, 0, 2).dot(Wm * pick(b, 0, 2));
      const double rhs = pick(a, 0, 1).dot(W1 * pick(b, 0, 1)) + pick(a, 1, 2).dot(W2 * pick(b, 1, 2));
      r = std::max(r, std::abs(lhs - rhs));
    }
  }
  return r;
}

struct PresymplecticReport {
  bool presymplectic = true;         // ker Omega & ker ds & ker dt = 0 at every sampled unit
  int triple_kernel_dim = 0;         // worst case
  int source_fiber_kernel_dim = 0;   // dim of the kernel of Omega restricted to ker ds (worst case)
  int kernel_dim = 0;                // dim ker Omega at units (worst case)
};

inline PresymplecticReport presymplectic_nondegeneracy(const Field& Omega, const CoordinateDomain& M, int samples = 16) {
  const int n = M.dim;
  if (Omega.dim != 2 * n) throw std::invalid_argument("presymplectic_nondegeneracy: form is not on M x M");
  const PairGroupoid G{n};
  PresymplecticReport rep;
  // ker ds = (dy, 0), ker dt = (0, dx)
  Mat Ks = Mat::Zero(2 * n, n);
  Ks.topRows(n) = Mat::Identity(n, n);
  for (const auto& x : sample_grid(M, samples)) {
    const Mat W = form_matrix(Omega, G.unit(x));
    const Mat K = null_space(W, 1e-10);
    // v in all three kernels: v = K a with ds v = 0 and dt v = 0
    Mat cons(2 * n, K.cols());
    cons << K.bottomRows(n), K.topRows(n);
    const int triple = K.cols() == 0 ? 0 : static_cast<int>(null_space(cons, 1e-10).cols());
    const Mat Ws = Ks.transpose() * W * Ks;
    rep.triple_kernel_dim = std::max(rep.triple_kernel_dim, triple);
    rep.kernel_dim = std::max(rep.kernel_dim, static_cast<int>(K.cols()));
    rep.source_fiber_kernel_dim = std::max(rep.source_fiber_kernel_dim, n - numerical_rank(Ws, 1e-10));
  }
  rep.presymplectic = rep.triple_kernel_dim == 0;
  return rep;
}

// ---------------------------------------------------------------------------
// Coupling forms and the integrated geometric data on E x E.

// omega = omega_H + sigma(theta, theta), theta^a = dx^a - A^a_i db^i, sigma = -(pi_V)^{-1}.
inline Field coupling_form(const GeometricData& d) {
  const int n = d.n(), m = d.m(), N = d.N();
  const Field piV = d.pi_V, A = d.gamma.A, wH = d.omega_H;
  return Field::make(N, binomial(N, 2), Valence::form, 2, [piV, A, wH, n, m, N](const auto* e, auto* out) {
    using S = scalar_of<decltype(out)>;
    std::vector<S> p(piV.size), a(n * m), w(wH.size), sig(m * m);
    piV.eval(e, p.data());
    A.eval(e, a.data());
    wH.eval(e, w.data());
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) sig[r * m + c] = skew2(p.data(), m, r, c);
    if (!invert(sig, m)) throw std::invalid_argument("coupling_form: pi_V is not invertible");
    for (auto& s : sig) s = -s;
    // Theta (m x N) = [-A | I]
    auto theta = [&](int a_, int col) -> S {
      if (col < n) return -a[a_ * n + col];
      return S(col - n == a_ ? 1.0 : 0.0);
    };
    for (int i = 0; i < N; ++i)
      for (int j = i + 1; j < N; ++j) {
        S acc(0.0);
        for (int r = 0; r < m; ++r)
          for (int c = 0; c < m; ++c) acc = acc + theta(r, i) * sig[r * m + c] * theta(c, j);
        if (j < n) acc = acc + w[pair_index(n, i, j)];
        out[pair_index(N, i, j)] = acc;
      }
  });
}

struct IntegratedDataReport {
  NondegeneracyReport fiber;            // (a) Omega fiber non-degenerate for p x p
  double horizontal_form_residual = 0;  // (b) Omega(H, H) against omega_H o t - omega_H o s
  double projection_residual = 0;       // (c) d(p x p) H(v, w) = (v, w)
  double orthogonality_residual = 0;    // (c) Omega(H(v, w), Ver_G) = 0
  double lift_residual = 0;             // H(v, w) = (h_y v, h_x w)
  double hor_convention_residual = 0;   // left h*(v) - right h*(w) = H(-w, v)
  double source_target_residual = 0;    // Omega(left-invariant, right-invariant) = 0

  double worst() const {
    return std::max({horizontal_form_residual, projection_residual, orthogonality_residual, lift_residual,
                     hor_convention_residual, source_target_residual});
  }
};

// Arrow coordinates are (y, x) with y = (b', x'), x = (b, x0); `arrows` lists such points of E x E.
inline IntegratedDataReport integrated_data_check(const GeometricData& d,
                                                  const std::vector<std::vector<double>>& arrows) {
  const int n = d.n(), m = d.m(), N = d.N();
  const Field w = coupling_form(d);
  const Field Omega = pair_form(w, CoordinateDomain::box(d.space.lower(), d.space.upper()));
  // reorder (b', x', b, x0) -> (b', b, x', x0) so the fibration p x p has leading base coordinates
  std::vector<int> perm(2 * N);
  for (int i = 0; i < n; ++i) {
    perm[i] = i;
    perm[n + i] = N + i;
  }
  for (int a = 0; a < m; ++a) {
    perm[2 * n + a] = n + a;
    perm[2 * n + m + a] = N + n + a;
  }
  Mat Pm = Mat::Zero(2 * N, 2 * N);  // new = Pm * old
  for (int k = 0; k < 2 * N; ++k) Pm(k, perm[k]) = 1.0;
  FiberedSpace arrow_space{CoordinateDomain::cube(2 * n, -1.0, 1.0), CoordinateDomain::cube(2 * m, -1.0, 1.0)};
  std::vector<std::vector<double>> reordered;
  for (const auto& g : arrows) {
    std::vector<double> r(2 * N);
    for (int k = 0; k < 2 * N; ++k) r[k] = g[perm[k]];
    reordered.push_back(r);
  }
  IntegratedDataReport rep;
  rep.fiber = check_fiber_nondegenerate(
      [&](const std::vector<double>& rg) {
        std::vector<double> g(2 * N);
        for (int k = 0; k < 2 * N; ++k) g[perm[k]] = rg[k];
        return graph_of_form(Pm * form_matrix(Omega, g) * Pm.transpose());
      },
      arrow_space, reordered);

  for (const auto& g : arrows) {
    const Mat W = form_matrix(Omega, g);
    // Ver_G and base projection in (y, x) coordinates
    Mat V = Mat::Zero(2 * N, 2 * m), Proj = Mat::Zero(2 * n, 2 * N);
    for (int a = 0; a < m; ++a) {
      V(n + a, a) = 1.0;
      V(N + n + a, m + a) = 1.0;
    }
    for (int i = 0; i < n; ++i) {
      Proj(i, i) = 1.0;
      Proj(n + i, N + i) = 1.0;
    }
    const Mat K = null_space(V.transpose() * W.transpose(), 1e-10);  // Omega-orthogonal of Ver_G
    if (K.cols() != 2 * n) throw std::invalid_argument("integrated_data_check: Omega is degenerate on Ver_G");
    const Mat Hbasis = K * (Proj * K).inverse();  // columns: H(e_k) for the base coordinate vectors of B x B
    auto H = [&](const Vec& vw) -> Vec { return Hbasis * vw; };
    const std::vector<double> y(g.begin(), g.begin() + N), x(g.begin() + N, g.end());
    const auto py = point_data(d, y), px = point_data(d, x);
    // closed-form lift (h_y v, h_x w)
    auto lift = [&](const Vec& vw) {
      Vec o = Vec::Zero(2 * N);
      o.segment(0, n) = vw.head(n);
      o.segment(n, m) = py.A * vw.head(n);
      o.segment(N, n) = vw.tail(n);
      o.segment(N + n, m) = px.A * vw.tail(n);
      return o;
    };
    for (int k = 0; k < 2 * n; ++k) {
      Vec ek = Vec::Zero(2 * n);
      ek(k) = 1.0;
      const Vec hk = H(ek);
      rep.projection_residual = std::max(rep.projection_residual, (Proj * hk - ek).cwiseAbs().maxCoeff());
      rep.orthogonality_residual = std::max(rep.orthogonality_residual, (V.transpose() * W * hk).cwiseAbs().maxCoeff());
      rep.lift_residual = std::max(rep.lift_residual, (hk - lift(ek)).cwiseAbs().maxCoeff());
      for (int l = 0; l < 2 * n; ++l) {
        Vec el = Vec::Zero(2 * n);
        el(l) = 1.0;
        const double lhs = hk.dot(W * H(el));
        const double rhs = ek.head(n).dot(py.omega * el.head(n)) - ek.tail(n).dot(px.omega * el.tail(n));
        rep.horizontal_form_residual = std::max(rep.horizontal_form_residual, std::abs(lhs - rhs));
      }
    }
    // left-invariant (0, X(x)) and right-invariant (X(y), 0) lifts of h*(v), h*(w)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Vec v = Vec::Zero(n), ww = Vec::Zero(n);
        v(i) = 1.0;
        ww(j) = 1.0;
        Vec left = Vec::Zero(2 * N), right = Vec::Zero(2 * N);
        left.segment(N, n) = v;
        left.segment(N + n, m) = px.A * v;
        right.segment(0, n) = ww;
        right.segment(n, m) = py.A * ww;
        Vec arg(2 * n);
        arg << -ww, v;
        rep.hor_convention_residual = std::max(rep.hor_convention_residual, (left - right - H(arg)).cwiseAbs().maxCoeff());
      }
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        Vec left = Vec::Zero(2 * N), right = Vec::Zero(2 * N);
        left(N + i) = 1.0;
        right(j) = 1.0;
        rep.source_target_residual = std::max(rep.source_target_residual, std::abs(left.dot(W * right)));
      }
  }
  return rep;
}

}  // namespace cds
