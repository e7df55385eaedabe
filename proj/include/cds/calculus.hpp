#pragma once

#include <cds/field.hpp>

#include <stdexcept>
#include <vector>

namespace cds {

template <class P>
using scalar_of = std::remove_cv_t<std::remove_pointer_t<P>>;

// Section (X, alpha) of TM + T*M.
struct SectionPair {
  Field X;
  Field alpha;
};

inline void require_same_domain(const Field& a, const Field& b, const char* op) {
  if (a.dim != b.dim) throw std::invalid_argument(std::string(op) + ": domain mismatch");
}

inline void require_valence(const Field& f, Valence v, const char* op) {
  if (f.valence != v) throw std::invalid_argument(std::string(op) + ": wrong valence");
}

// [X,Y]^i = X^j d_j Y^i - Y^j d_j X^i.
inline Field lie_bracket(const Field& X, const Field& Y) {
  require_same_domain(X, Y, "lie_bracket");
  require_valence(X, Valence::vector, "lie_bracket");
  require_valence(Y, Valence::vector, "lie_bracket");
  const int n = X.dim;
  return Field::derived(n, n, Valence::vector, 1, [X, Y, n](const auto* x, auto* out) {
    using S = scalar_of<decltype(out)>;
    std::vector<S> xv(n), yv(n), jx(n * n), jy(n * n);
    jet(X, x, xv.data(), jx.data());
    jet(Y, x, yv.data(), jy.data());
    for (int i = 0; i < n; ++i) {
      S acc(0.0);
      for (int j = 0; j < n; ++j) acc = acc + xv[j] * jy[i * n + j] - yv[j] * jx[i * n + j];
      out[i] = acc;
    }
  });
}

// Scalar fields count as 0-forms, covectors as 1-forms.
inline int form_degree(const Field& w) {
  switch (w.valence) {
    case Valence::scalar: return 0;
    case Valence::covector: return 1;
    case Valence::form: return w.degree;
    default: throw std::invalid_argument("not a differential form");
  }
}

inline Valence form_valence(int k) {
  return k == 0 ? Valence::scalar : (k == 1 ? Valence::covector : Valence::form);
}

// (dw)_{i0..ik} = sum_m (-1)^m d_{i_m} w_{i0..^i_m..ik}.
inline Field exterior_derivative(const Field& w) {
  const int k = form_degree(w);
  const int n = w.dim;
  if (k >= n) throw std::invalid_argument("exterior_derivative: degree must be below the dimension");
  const auto out_sets = subsets(n, k + 1);
  return Field::derived(n, static_cast<int>(out_sets.size()), form_valence(k + 1), k + 1,
                        [w, n, k, out_sets](const auto* x, auto* out) {
                          using S = scalar_of<decltype(out)>;
                          std::vector<S> jac(w.size * n);
                          jet(w, x, static_cast<S*>(nullptr), jac.data());
                          for (std::size_t c = 0; c < out_sets.size(); ++c) {
                            const auto& I = out_sets[c];
                            S acc(0.0);
                            for (int m = 0; m <= k; ++m) {
                              int rest[8];
                              for (int q = 0, r = 0; q <= k; ++q)
                                if (q != m) rest[r++] = I[q];
                              const int comp = k == 0 ? 0 : subset_index(n, rest, k);
                              S term = jac[comp * n + I[m]];
                              acc = (m % 2 == 0) ? acc + term : acc - term;
                            }
                            out[c] = acc;
                          }
                        });
}

// (i_X w)_{i1..i(k-1)} = X^j w_{j i1..i(k-1)}.
inline Field interior(const Field& X, const Field& w) {
  require_same_domain(X, w, "interior");
  const int k = form_degree(w);
  if (k == 0) throw std::invalid_argument("interior: cannot contract a function");
  const int n = w.dim;
  const auto out_sets = subsets(n, k - 1);
  return Field::make(n, static_cast<int>(out_sets.size()), form_valence(k - 1), k - 1,
                     [X, w, n, k, out_sets](const auto* x, auto* out) {
                       using S = scalar_of<decltype(out)>;
                       std::vector<S> xv(n), wv(w.size);
                       X.eval(x, xv.data());
                       w.eval(x, wv.data());
                       for (std::size_t c = 0; c < out_sets.size(); ++c) {
                         S acc(0.0);
                         int idx[8];
                         for (int q = 0; q < k - 1; ++q) idx[q + 1] = out_sets[c][q];
                         for (int j = 0; j < n; ++j) {
                           idx[0] = j;
                           acc = acc + xv[j] * skewk(wv.data(), n, idx, k);
                         }
                         out[c] = acc;
                       }
                     });
}

// Cartan: L_X w = i_X dw + d i_X w.
inline Field lie_derivative_form(const Field& X, const Field& w) {
  const int k = form_degree(w);
  if (k == 0) {
    const int n = w.dim;
    return Field::derived(n, 1, Valence::scalar, 0, [X, w, n](const auto* x, auto* out) {
      using S = scalar_of<decltype(out)>;
      std::vector<S> xv(n), jac(n);
      X.eval(x, xv.data());
      jet(w, x, static_cast<S*>(nullptr), jac.data());
      S acc(0.0);
      for (int j = 0; j < n; ++j) acc = acc + xv[j] * jac[j];
      out[0] = acc;
    });
  }
  Field a = interior(X, exterior_derivative(w));
  Field b = exterior_derivative(interior(X, w));
  return add(a, b);
}

// Lie derivative of a bivector: X^C d_C P^{AB} - P^{CB} d_C X^A - P^{AC} d_C X^B.
inline Field lie_derivative_bivector(const Field& X, const Field& P) {
  require_same_domain(X, P, "lie_derivative_bivector");
  require_valence(P, Valence::bivector, "lie_derivative_bivector");
  const int n = P.dim;
  return Field::derived(n, P.size, Valence::bivector, 2, [X, P, n](const auto* x, auto* out) {
    using S = scalar_of<decltype(out)>;
    std::vector<S> xv(n), jx(n * n), pv(P.size), jp(P.size * n);
    jet(X, x, xv.data(), jx.data());
    jet(P, x, pv.data(), jp.data());
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        const int c = pair_index(n, a, b);
        S acc(0.0);
        for (int q = 0; q < n; ++q) {
          acc = acc + xv[q] * jp[c * n + q];
          acc = acc - skew2(pv.data(), n, q, b) * jx[a * n + q];
          acc = acc - skew2(pv.data(), n, a, q) * jx[b * n + q];
        }
        out[c] = acc;
      }
  });
}

// [P,P]^{ijk} = 2 (P^{il} d_l P^{jk} + P^{jl} d_l P^{ki} + P^{kl} d_l P^{ij}).
inline Field schouten_square(const Field& P) {
  require_valence(P, Valence::bivector, "schouten_square");
  const int n = P.dim;
  const auto triples = subsets(n, 3);
  return Field::derived(n, static_cast<int>(triples.size()), Valence::trivector, 3,
                        [P, n, triples](const auto* x, auto* out) {
                          using S = scalar_of<decltype(out)>;
                          std::vector<S> pv(P.size), jp(P.size * n);
                          jet(P, x, pv.data(), jp.data());
                          auto dP = [&](int i, int j, int l) -> S {
                            if (i == j) return S(0.0);
                            if (i < j) return jp[pair_index(n, i, j) * n + l];
                            return -jp[pair_index(n, j, i) * n + l];
                          };
                          for (std::size_t c = 0; c < triples.size(); ++c) {
                            const int i = triples[c][0], j = triples[c][1], k = triples[c][2];
                            S acc(0.0);
                            for (int l = 0; l < n; ++l) {
                              acc = acc + skew2(pv.data(), n, i, l) * dP(j, k, l);
                              acc = acc + skew2(pv.data(), n, j, l) * dP(k, i, l);
                              acc = acc + skew2(pv.data(), n, k, l) * dP(i, j, l);
                            }
                            out[c] = 2.0 * acc;
                          }
                        });
}

// P^#(a) = P(., a), i.e. (P^# a)^i = P^{ij} a_j.
inline Field sharp(const Field& P, const Field& a) {
  require_same_domain(P, a, "sharp");
  const int n = P.dim;
  return Field::make(n, n, Valence::vector, 1, [P, a, n](const auto* x, auto* out) {
    using S = scalar_of<decltype(out)>;
    std::vector<S> pv(P.size), av(n);
    P.eval(x, pv.data());
    a.eval(x, av.data());
    for (int i = 0; i < n; ++i) {
      S acc(0.0);
      for (int j = 0; j < n; ++j) acc = acc + skew2(pv.data(), n, i, j) * av[j];
      out[i] = acc;
    }
  });
}

// alpha(X) as a scalar field.
inline Field contract(const Field& alpha, const Field& X) {
  require_same_domain(alpha, X, "contract");
  const int n = X.dim;
  return Field::make(n, 1, Valence::scalar, 0, [alpha, X, n](const auto* x, auto* out) {
    using S = scalar_of<decltype(out)>;
    std::vector<S> av(n), xv(n);
    alpha.eval(x, av.data());
    X.eval(x, xv.data());
    S acc(0.0);
    for (int i = 0; i < n; ++i) acc = acc + av[i] * xv[i];
    out[0] = acc;
  });
}

// <(X,a),(Y,b)>_{+/-} = 1/2 (a(Y) +/- b(X)).
inline Field pairing(const SectionPair& s1, const SectionPair& s2, int sign) {
  require_same_domain(s1.X, s2.X, "pairing");
  const int n = s1.X.dim;
  const double sg = sign >= 0 ? 1.0 : -1.0;
  return Field::make(n, 1, Valence::scalar, 0, [s1, s2, n, sg](const auto* x, auto* out) {
    using S = scalar_of<decltype(out)>;
    std::vector<S> X(n), a(n), Y(n), b(n);
    s1.X.eval(x, X.data());
    s1.alpha.eval(x, a.data());
    s2.X.eval(x, Y.data());
    s2.alpha.eval(x, b.data());
    S aY(0.0), bX(0.0);
    for (int i = 0; i < n; ++i) {
      aY = aY + a[i] * Y[i];
      bX = bX + b[i] * X[i];
    }
    out[0] = 0.5 * (aY + sg * bX);
  });
}

// [[(X,a),(Y,b)]] = ([X,Y], L_X b - L_Y a + d<s1,s2>_-).
inline SectionPair courant_bracket(const SectionPair& s1, const SectionPair& s2) {
  require_same_domain(s1.X, s2.X, "courant_bracket");
  Field v = lie_bracket(s1.X, s2.X);
  Field f = add(lie_derivative_form(s1.X, s2.alpha), lie_derivative_form(s2.X, s1.alpha), -1.0);
  f = add(f, exterior_derivative(pairing(s1, s2, -1)));
  return {v, f};
}

// Concatenated (X, alpha) components of a section at a point.
inline std::vector<double> section_at(const SectionPair& s, const std::vector<double>& x) {
  std::vector<double> out = s.X(x);
  std::vector<double> a = s.alpha(x);
  out.insert(out.end(), a.begin(), a.end());
  return out;
}

}  // namespace cds
