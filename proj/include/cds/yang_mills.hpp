#pragma once

#include <cds/coupling.hpp>

#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace cds {

inline double max_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double r = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) r = std::max(r, std::abs(a[i] - b[i]));
  return r;
}

// Matrix helpers on row-major d x d arrays, generic over dual scalars.
namespace mat {

template <class S>
std::vector<S> mul(const std::vector<S>& a, const std::vector<S>& b, int d) {
  std::vector<S> c(d * d, S(0.0));
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k)
      for (int j = 0; j < d; ++j) c[i * d + j] = c[i * d + j] + a[i * d + k] * b[k * d + j];
  return c;
}

template <class S>
std::vector<S> identity(int d) {
  std::vector<S> c(d * d, S(0.0));
  for (int i = 0; i < d; ++i) c[i * d + i] = S(1.0);
  return c;
}

template <class S>
std::vector<S> transpose(const std::vector<S>& a, int d) {
  std::vector<S> c(d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) c[j * d + i] = a[i * d + j];
  return c;
}

// Scaling and squaring with a degree-18 Taylor core.
template <class S>
std::vector<S> exp(std::vector<S> X, int d) {
  double norm = 0.0;
  for (const auto& v : X) norm = std::max(norm, std::abs(value(v)));
  int sq = 0;
  while (norm * d > 0.25) {
    norm *= 0.5;
    ++sq;
  }
  const double scale = std::ldexp(1.0, -sq);
  for (auto& v : X) v = scale * v;
  std::vector<S> term = identity<S>(d), sum = identity<S>(d);
  for (int k = 1; k <= 18; ++k) {
    term = mul(term, X, d);
    for (auto& v : term) v = (1.0 / k) * v;
    for (int i = 0; i < d * d; ++i) sum[i] = sum[i] + term[i];
  }
  for (int q = 0; q < sq; ++q) sum = mul(sum, sum, d);
  return sum;
}

}  // namespace mat

// Matrix Lie group with an orthogonal (Frobenius) Lie algebra basis.
struct GroupModel {
  std::string kind;
  int dim = 0;         // Lie algebra dimension K
  int matrix_dim = 0;  // d
  std::vector<std::vector<double>> basis;  // K generators, d x d row-major
  std::vector<double> c;                   // c[k*K*K + l*K + m] = c^k_{lm}, [e_l, e_m] = c^k_{lm} e_k

  double structure(int k, int l, int m) const { return c[(k * dim + l) * dim + m]; }

  template <class S>
  std::vector<S> algebra_matrix(const S* xi) const {
    const int d = matrix_dim;
    std::vector<S> X(d * d, S(0.0));
    for (int k = 0; k < dim; ++k)
      for (int q = 0; q < d * d; ++q) X[q] = X[q] + xi[k] * basis[k][q];
    return X;
  }

  // Coordinates of an algebra matrix in the basis.
  template <class S>
  std::vector<S> coordinates(const std::vector<S>& X) const {
    std::vector<S> xi(dim);
    for (int k = 0; k < dim; ++k) {
      S num(0.0);
      double den = 0.0;
      for (std::size_t q = 0; q < X.size(); ++q) {
        num = num + X[q] * basis[k][q];
        den += basis[k][q] * basis[k][q];
      }
      xi[k] = (1.0 / den) * num;
    }
    return xi;
  }

  template <class S>
  std::vector<S> exp(const std::vector<S>& xi) const {
    return mat::exp(algebra_matrix(xi.data()), matrix_dim);
  }

  // Ad_g as a K x K matrix on algebra coordinates (g orthogonal).
  Mat Ad(const std::vector<double>& g) const {
    const int d = matrix_dim;
    Mat out(dim, dim);
    auto gt = mat::transpose(g, d);
    for (int l = 0; l < dim; ++l) {
      auto col = coordinates(mat::mul(mat::mul(g, basis[l], d), gt, d));
      for (int k = 0; k < dim; ++k) out(k, l) = col[k];
    }
    return out;
  }

  // Largest violation of antisymmetry, Jacobi, and agreement with the matrix commutator.
  double structure_defect() const {
    const int K = dim, d = matrix_dim;
    double r = 0.0;
    for (int k = 0; k < K; ++k)
      for (int l = 0; l < K; ++l)
        for (int m = 0; m < K; ++m) r = std::max(r, std::abs(structure(k, l, m) + structure(k, m, l)));
    for (int a = 0; a < K; ++a)
      for (int b = 0; b < K; ++b)
        for (int e = 0; e < K; ++e)
          for (int k = 0; k < K; ++k) {
            double j = 0.0;
            for (int q = 0; q < K; ++q)
              j += structure(q, b, e) * structure(k, a, q) + structure(q, e, a) * structure(k, b, q) +
                   structure(q, a, b) * structure(k, e, q);
            r = std::max(r, std::abs(j));
          }
    for (int l = 0; l < K; ++l)
      for (int m = 0; m < K; ++m) {
        auto lm = mat::mul(basis[l], basis[m], d), ml = mat::mul(basis[m], basis[l], d);
        for (int q = 0; q < d * d; ++q) {
          double expect = 0.0;
          for (int k = 0; k < K; ++k) expect += structure(k, l, m) * basis[k][q];
          r = std::max(r, std::abs(lm[q] - ml[q] - expect));
        }
      }
    return r;
  }

  static GroupModel u1() {
    return {"U(1)", 1, 2, {{0.0, -1.0, 1.0, 0.0}}, {0.0}};
  }

  // Generators (L_k)_{ij} = -eps_{kij}; [L_l, L_m] = eps_{lmk} L_k.
  static GroupModel so3() {
    GroupModel g{"SO(3)", 3, 3, {}, std::vector<double>(27, 0.0)};
    auto eps = [](int i, int j, int k) { return 0.5 * (i - j) * (j - k) * (k - i); };
    for (int k = 0; k < 3; ++k) {
      std::vector<double> L(9);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) L[i * 3 + j] = -eps(k, i, j);
      g.basis.push_back(L);
    }
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l)
        for (int m = 0; m < 3; ++m) g.c[(k * 3 + l) * 3 + m] = eps(l, m, k);
    return g;
  }
};

// Omega^k_{ij} = d_i A^k_j - d_j A^k_i + c^k_{lm} A^l_i A^m_j; storage [k * C(n,2) + pair].
inline Field principal_curvature(const GroupModel& G, const Field& A) {
  const int K = G.dim, n = A.dim, P = binomial(n, 2);
  if (A.size != K * n) throw std::invalid_argument("principal_curvature: connection form has wrong size");
  return Field::derived(n, K * P, Valence::form, 2, [G, A, K, n, P](const auto* b, auto* out) {
    using S = scalar_of<decltype(out)>;
    std::vector<S> a(K * n), ja(K * n * n);
    jet(A, b, a.data(), ja.data());
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          S v = ja[(k * n + j) * n + i] - ja[(k * n + i) * n + j];
          for (int l = 0; l < K; ++l)
            for (int m = 0; m < K; ++m) {
              const double c = G.structure(k, l, m);
              if (c != 0.0) v = v + c * a[l * n + i] * a[m * n + j];
            }
          out[k * P + pair_index(n, i, j)] = v;
        }
  });
}

// (d_A Omega)^k_{ijl}: cyclic sum of d_i Omega^k_{jl} + c^k_{pq} A^p_i Omega^q_{jl}.
inline Field bianchi_defect(const GroupModel& G, const Field& A, const Field& Omega) {
  const int K = G.dim, n = A.dim, P = binomial(n, 2), T = binomial(n, 3);
  return Field::derived(n, K * T, Valence::form, 3, [G, A, Omega, K, n, P, T](const auto* b, auto* out) {
    using S = scalar_of<decltype(out)>;
    std::vector<S> a(K * n), w(K * P), jw(K * P * n);
    A.eval(b, a.data());
    jet(Omega, b, w.data(), jw.data());
    auto W = [&](int k, int i, int j) -> S {
      if (i == j) return S(0.0);
      return i < j ? w[k * P + pair_index(n, i, j)] : -w[k * P + pair_index(n, j, i)];
    };
    auto dW = [&](int k, int i, int j, int l) -> S {
      if (i == j) return S(0.0);
      return i < j ? jw[(k * P + pair_index(n, i, j)) * n + l] : -jw[(k * P + pair_index(n, j, i)) * n + l];
    };
    const auto triples = subsets(n, 3);
    for (int k = 0; k < K; ++k)
      for (int t = 0; t < T; ++t) {
        const int I[3] = {triples[t][0], triples[t][1], triples[t][2]};
        S acc(0.0);
        for (int r = 0; r < 3; ++r) {
          const int i = I[r], j = I[(r + 1) % 3], l = I[(r + 2) % 3];
          acc = acc + dW(k, j, l, i);
          for (int p = 0; p < K; ++p)
            for (int q = 0; q < K; ++q) {
              const double c = G.structure(k, p, q);
              if (c != 0.0) acc = acc + c * a[p * n + i] * W(q, j, l);
            }
        }
        out[k * T + t] = acc;
      }
  });
}

// Local data of a principal G-bundle: one connection form per patch.
struct PrincipalData {
  CoordinateDomain base;
  GroupModel group;
  std::vector<Field> A;                  // A[k * n + i] = A^k_i, one per patch
  std::vector<Field> curvature_override;  // closed-form curvature where known (same storage as principal_curvature)
  std::string name;

  Field curvature(int patch = 0) const {
    if (patch < static_cast<int>(curvature_override.size()) && curvature_override[patch].valid())
      return curvature_override[patch];
    return principal_curvature(group, A.at(patch));
  }
};

// Gauge transform A' = g^-1 A g + g^-1 dg with g = exp(xi(b)); algebra coordinates.
inline Field gauge_transform(const GroupModel& G, const Field& A, const Field& xi) {
  const int K = G.dim, n = A.dim, d = G.matrix_dim;
  return Field::derived(n, K * n, Valence::map, 1, [G, A, xi, K, n, d](const auto* b, auto* out) {
    using S = scalar_of<decltype(out)>;
    using T = Dual<S>;
    std::vector<S> a(K * n);
    A.eval(b, a.data());
    std::vector<T> bs(n), x(K);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) bs[j] = T(b[j], S(i == j ? 1.0 : 0.0));
      xi.eval(bs.data(), x.data());
      auto g = G.exp(x);  // orthogonal, so g^-1 = g^T
      auto gi = mat::transpose(g, d);
      std::vector<S> gv(d * d), giv(d * d), dg(d * d);
      for (int q = 0; q < d * d; ++q) {
        gv[q] = g[q].v;
        giv[q] = gi[q].v;
        dg[q] = g[q].d;
      }
      std::vector<S> ai(K);
      for (int k = 0; k < K; ++k) ai[k] = a[k * n + i];
      auto M = mat::mul(mat::mul(giv, G.algebra_matrix(ai.data()), d), gv, d);
      auto R = mat::mul(giv, dg, d);
      for (int q = 0; q < d * d; ++q) M[q] = M[q] + R[q];
      auto c = G.coordinates(M);
      for (int k = 0; k < K; ++k) out[k * n + i] = c[k];
    }
  });
}

// (F, pi_F, rho, mu). rho[k * m + a] = rho(e_k)^a; mu[k] = <mu, e_k>.
// Conventions: rho is a Lie algebra homomorphism and rho(e_k) = pi_F^# d mu_k.
struct HamiltonianFiber {
  CoordinateDomain fiber;
  Field pi_F;
  Field rho;
  Field mu;
  // Integrated right action x -> x . g for a group element (d x d); optional.
  std::function<std::vector<double>(const std::vector<double>& g, const std::vector<double>& x)> action;
  std::string name;

  int m() const { return fiber.dim; }

  Field generator(int k) const {
    const int mm = m();
    const Field r = rho;
    return Field::make(mm, mm, Valence::vector, 1, [r, k, mm](const auto* x, auto* out) {
      using S = scalar_of<decltype(out)>;
      std::vector<S> v(r.size);
      r.eval(x, v.data());
      for (int a = 0; a < mm; ++a) out[a] = v[k * mm + a];
    });
  }

  Field moment(int k) const {
    const Field mu_ = mu;
    return Field::make(m(), 1, Valence::scalar, 0, [mu_, k](const auto* x, auto* out) {
      using S = scalar_of<decltype(out)>;
      std::vector<S> v(mu_.size);
      mu_.eval(x, v.data());
      out[0] = v[k];
    });
  }
};

// max |[rho_l, rho_m] - c^k_{lm} rho_k| over samples.
inline double homomorphism_defect(const HamiltonianFiber& H, const GroupModel& G,
                                  const std::vector<std::vector<double>>& samples) {
  const int K = G.dim, m = H.m();
  double r = 0.0;
  for (int l = 0; l < K; ++l)
    for (int q = l + 1; q < K; ++q) {
      Field br = lie_bracket(H.generator(l), H.generator(q));
      for (const auto& x : samples) {
        auto v = br(x);
        auto rv = H.rho(x);
        for (int a = 0; a < m; ++a) {
          double expect = 0.0;
          for (int k = 0; k < K; ++k) expect += G.structure(k, l, q) * rv[k * m + a];
          r = std::max(r, std::abs(v[a] - expect));
        }
      }
    }
  return r;
}

// max |rho_k - pi_F^# d mu_k| over samples.
inline double hamiltonian_defect(const HamiltonianFiber& H, const GroupModel& G,
                                 const std::vector<std::vector<double>>& samples) {
  const int K = G.dim;
  double r = 0.0;
  for (int k = 0; k < K; ++k) {
    Field X = sharp(H.pi_F, exterior_derivative(H.moment(k)));
    Field R = H.generator(k);
    for (const auto& x : samples) r = std::max(r, max_gap(X(x), R(x)));
  }
  return r;
}

// Largest of |mu(x . g) - mu(x) o Ad_g| and |x . exp(xi) - Fl_1^{rho(xi)}(x)| over samples.
inline double equivariance_defect(const HamiltonianFiber& H, const GroupModel& G,
                                  const std::vector<std::vector<double>>& samples,
                                  const std::vector<std::vector<double>>& algebra_samples) {
  if (!H.action) throw std::invalid_argument("equivariance_defect: fiber has no integrated action");
  const int K = G.dim, m = H.m();
  double r = 0.0;
  for (const auto& xi : algebra_samples) {
    auto g = G.exp(xi);
    Mat Ad = G.Ad(g);
    Field X = Field::make(m, m, Valence::vector, 1, [H, xi, K, m](const auto* x, auto* out) {
      using S = scalar_of<decltype(out)>;
      std::vector<S> v(K * m);
      H.rho.eval(x, v.data());
      for (int a = 0; a < m; ++a) {
        S acc(0.0);
        for (int k = 0; k < K; ++k) acc = acc + xi[k] * v[k * m + a];
        out[a] = acc;
      }
    });
    for (const auto& x : samples) {
      auto y = H.action(g, x);
      r = std::max(r, max_gap(y, flow_of(X, x, 1.0, 1e-3)));
      auto mu_y = H.mu(y), mu_x = H.mu(x);
      for (int l = 0; l < K; ++l) {
        double expect = 0.0;
        for (int k = 0; k < K; ++k) expect += mu_x[k] * Ad(k, l);
        r = std::max(r, std::abs(mu_y[l] - expect));
      }
    }
  }
  return r;
}

// The associated-bundle geometric data on patch `patch`: E = B x F.
inline GeometricData ymh_geometric_data(const PrincipalData& P, const HamiltonianFiber& H, int patch = 0) {
  const int n = P.base.dim, m = H.m(), N = n + m, K = P.group.dim;
  if (H.rho.size != K * m || H.mu.size != K) throw std::invalid_argument("ymh_geometric_data: group/fiber mismatch");
  const Field A = P.A.at(patch), Om = P.curvature(patch);
  const Field rho = H.rho, mu = H.mu, piF = H.pi_F;
  const int Pn = binomial(n, 2);
  GeometricData d;
  d.space = {P.base, H.fiber};
  d.name = P.name + "/" + H.name;
  d.pi_V = Field::make(N, binomial(m, 2), Valence::bivector, 2,
                       [piF, n](const auto* e, auto* out) { piF.eval(e + n, out); });
  d.gamma = {n, m, Field::make(N, n * m, Valence::map, 1, [A, rho, n, m, K](const auto* e, auto* out) {
               using S = scalar_of<decltype(out)>;
               std::vector<S> a(K * n), r(K * m);
               A.eval(e, a.data());
               rho.eval(e + n, r.data());
               for (int q = 0; q < m; ++q)
                 for (int i = 0; i < n; ++i) {
                   S acc(0.0);
                   for (int k = 0; k < K; ++k) acc = acc + a[k * n + i] * r[k * m + q];
                   out[q * n + i] = acc;
                 }
             })};
  d.omega_H = Field::make(N, Pn, Valence::form, 2, [Om, mu, n, K, Pn](const auto* e, auto* out) {
    using S = scalar_of<decltype(out)>;
    std::vector<S> w(K * Pn), u(K);
    Om.eval(e, w.data());
    mu.eval(e + n, u.data());
    for (int c = 0; c < Pn; ++c) {
      S acc(0.0);
      for (int k = 0; k < K; ++k) acc = acc + u[k] * w[k * Pn + c];
      out[c] = acc;
    }
  });
  return d;
}

// ---------------------------------------------------------------------------
// Built-in settings.

// A real function evaluable at every dual depth the toolkit uses.
struct RealFunction {
  Field f;  // dim 1, size 1

  template <class S>
  S operator()(const S& x) const {
    S out;
    f.eval(&x, &out);
    return out;
  }

  template <class F>
  static RealFunction make(F fn) {
    return {Field::make(1, 1, Valence::scalar, 0, [fn](const auto* x, auto* out) { out[0] = fn(x[0]); })};
  }
};

// Round-sphere U(1) connection in a stereographic chart: A = 2 (u dv - v du) / (1 + |u|^2),
// dA = 4 / (1 + |u|^2)^2 du ^ dv (same expression in both charts).
inline Field hopf_connection_form() {
  return Field::make(2, 2, Valence::map, 1, [](const auto* b, auto* out) {
    auto den = 1.0 + b[0] * b[0] + b[1] * b[1];
    out[0] = -2.0 * b[1] / den;
    out[1] = 2.0 * b[0] / den;
  });
}

inline Field sphere_area_form() {
  return Field::make(2, 1, Valence::form, 2, [](const auto* b, auto* out) { out[0] = sphere::area_density(b[0], b[1]); });
}

inline PrincipalData hopf_principal() {
  PrincipalData P;
  P.base = CoordinateDomain::sphere();
  P.group = GroupModel::u1();
  P.A = {hopf_connection_form(), hopf_connection_form()};
  P.curvature_override = {sphere_area_form(), sphere_area_form()};
  P.name = "hopf";
  return P;
}

// F = R with trivial U(1) action and moment map f.
inline HamiltonianFiber trivial_line_fiber(const RealFunction& f, double half_width = 2.0) {
  HamiltonianFiber H;
  H.fiber = CoordinateDomain::box({-half_width}, {half_width});
  H.pi_F = zero_field(1, 0, Valence::bivector, 2);
  H.rho = zero_field(1, 1, Valence::map, 1);
  H.mu = f.f;
  H.action = [](const std::vector<double>&, const std::vector<double>& x) { return x; };
  H.name = "line";
  return H;
}

struct YMHSetting {
  PrincipalData principal;
  HamiltonianFiber fiber;

  GeometricData data(int patch = 0) const { return ymh_geometric_data(principal, fiber, patch); }
};

inline YMHSetting hopf_example(const RealFunction& f) { return {hopf_principal(), trivial_line_fiber(f)}; }

// so(3)* with pi^{ab} = -eps^{abc} x_c, rho_k(x) = x o ad_{e_k}, mu = id; right action x o Ad_g.
inline HamiltonianFiber so3_coadjoint_fiber(double half_width = 1.5) {
  HamiltonianFiber H;
  H.fiber = CoordinateDomain::cube(3, -half_width, half_width);
  H.pi_F = Field::make(3, 3, Valence::bivector, 2, [](const auto* x, auto* out) {
    out[0] = -x[2];  // (1,2)
    out[1] = x[1];   // (1,3)
    out[2] = -x[0];  // (2,3)
  });
  const GroupModel G = GroupModel::so3();
  H.rho = Field::make(3, 9, Valence::map, 1, [G](const auto* x, auto* out) {
    using S = scalar_of<decltype(out)>;
    for (int l = 0; l < 3; ++l)
      for (int m = 0; m < 3; ++m) {
        S acc(0.0);
        for (int k = 0; k < 3; ++k)
          if (G.structure(k, l, m) != 0.0) acc = acc + G.structure(k, l, m) * x[k];
        out[l * 3 + m] = acc;
      }
  });
  H.mu = Field::make(3, 3, Valence::map, 1, [](const auto* x, auto* out) {
    for (int k = 0; k < 3; ++k) out[k] = x[k];
  });
  H.action = [G](const std::vector<double>& g, const std::vector<double>& x) {
    Mat Ad = G.Ad(g);
    std::vector<double> y(3, 0.0);
    for (int l = 0; l < 3; ++l)
      for (int k = 0; k < 3; ++k) y[l] += x[k] * Ad(k, l);
    return y;
  };
  H.name = "so3-coadjoint";
  return H;
}

// R^2 with pi^{12} = 1, rotation rho = (-y, x), mu = -(x^2 + y^2)/2.
inline HamiltonianFiber rotation_plane_fiber(double half_width = 1.5) {
  HamiltonianFiber H;
  H.fiber = CoordinateDomain::cube(2, -half_width, half_width);
  H.pi_F = constant_field(2, {1.0}, Valence::bivector, 2);
  H.rho = Field::make(2, 2, Valence::map, 1, [](const auto* x, auto* out) {
    out[0] = -x[1];
    out[1] = x[0];
  });
  H.mu = Field::make(2, 1, Valence::map, 1, [](const auto* x, auto* out) { out[0] = -0.5 * (x[0] * x[0] + x[1] * x[1]); });
  H.action = [](const std::vector<double>& g, const std::vector<double>& x) {
    // g = [[c, -s], [s, c]] rotates by the angle of exp(theta J)
    return std::vector<double>{g[0] * x[0] + g[1] * x[1], g[2] * x[0] + g[3] * x[1]};
  };
  H.name = "rotation-plane";
  return H;
}

// SO(3) connection form on R^n with polynomial coefficients (generic, curved).
inline PrincipalData so3_polynomial_principal(int n) {
  PrincipalData P;
  P.base = CoordinateDomain::cube(n, -1.0, 1.0);
  P.group = GroupModel::so3();
  P.A = {Field::make(n, 3 * n, Valence::map, 1, [n](const auto* b, auto* out) {
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < n; ++i) {
        const auto& u = b[(i + k) % n];
        const auto& v = b[(i + 2 * k + 1) % n];
        out[k * n + i] = 0.3 * (k + 1) * u * v + 0.2 * (i - k) * u + 0.1;
      }
  })};
  P.name = "so3-poly-R" + std::to_string(n);
  return P;
}

// Flat trivial U(1) bundle over the torus chart [0, 2 pi]^2.
inline PrincipalData trivial_torus_principal() {
  PrincipalData P;
  const double tau = 2.0 * std::acos(-1.0);
  P.base = CoordinateDomain::box({0.0, 0.0}, {tau, tau});
  P.group = GroupModel::u1();
  P.A = {zero_field(2, 2, Valence::map, 1)};
  P.name = "trivial-torus";
  return P;
}

// Registry used by the CLI. "hopf" takes the moment map f; the others ignore it.
inline std::vector<std::string> builtin_settings() { return {"hopf", "so3-coadjoint", "trivial-torus"}; }

inline YMHSetting builtin_setting(const std::string& name, const RealFunction& f) {
  if (name == "hopf") return hopf_example(f);
  if (name == "so3-coadjoint") return {so3_polynomial_principal(2), so3_coadjoint_fiber()};
  if (name == "trivial-torus") return {trivial_torus_principal(), rotation_plane_fiber()};
  throw std::invalid_argument("unknown built-in setting '" + name + "'");
}

// ---------------------------------------------------------------------------
// Pre-hamiltonian condition: d/dt|0 Fl_t^* beta (flow of rho(xi)) against [d mu_xi, beta]
// with the vertical bracket of pi_F. Both equal L_{rho(xi)} beta.
inline double prehamiltonian_residual(const HamiltonianFiber& H, const GroupModel& G,
                                      const std::vector<std::vector<double>>& samples,
                                      const std::vector<Field>& test_forms, double dt = 1e-4) {
  const int K = G.dim, m = H.m();
  // Embed F as the fiber over a zero-dimensional base so the vertical bracket applies verbatim.
  GeometricData d;
  d.space = {CoordinateDomain::box({0.0}, {1.0}), H.fiber};
  const Field piF = H.pi_F;
  d.pi_V = Field::make(m + 1, binomial(m, 2), Valence::bivector, 2,
                       [piF](const auto* e, auto* out) { piF.eval(e + 1, out); });
  d.gamma = Connection::trivial(1, m);
  d.omega_H = zero_field(m + 1, 0, Valence::form, 2);
  auto lift = [m](const Field& f) {
    return Field::make(m + 1, f.size, f.valence, f.degree, [f](const auto* e, auto* out) { f.eval(e + 1, out); });
  };
  double r = 0.0;
  for (int k = 0; k < K; ++k) {
    const Field X = H.generator(k);
    const Field dmu = lift(exterior_derivative(H.moment(k)));
    for (const auto& beta : test_forms) {
      Field rhs = vertical_bracket(d, dmu, lift(beta));
      for (const auto& x : samples) {
        auto pulled = [&](double t) {
          std::vector<D1> xs(m);
          std::vector<double> out(m);
          for (int a = 0; a < m; ++a) {
            for (int c = 0; c < m; ++c) xs[c] = D1(x[c], c == a ? 1.0 : 0.0);
            auto y = flow_of(X, xs, t, 1e-3);
            std::vector<double> yv(m);
            for (int c = 0; c < m; ++c) yv[c] = y[c].v;
            auto b = beta(yv);
            double acc = 0.0;
            for (int c = 0; c < m; ++c) acc += b[c] * y[c].d;
            out[a] = acc;
          }
          return out;
        };
        auto p = pulled(dt), q = pulled(-dt);
        std::vector<double> e(m + 1, 0.0);
        for (int a = 0; a < m; ++a) e[a + 1] = x[a];
        auto v = rhs(e);
        for (int a = 0; a < m; ++a) r = std::max(r, std::abs((p[a] - q[a]) / (2 * dt) - v[a]));
      }
    }
  }
  return r;
}

}  // namespace cds
