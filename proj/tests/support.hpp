#pragma once

// Test-only oracles: random polynomial fields and central finite differences that
// never touch the dual-number machinery.

#include <cds/field.hpp>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace cds_test {

using cds::Field;
using cds::Valence;

struct Monomial {
  double coef;
  std::vector<int> powers;
};

// Each component is a sum of a few monomials of total degree <= deg.
struct Poly {
  int dim;
  std::vector<std::vector<Monomial>> comps;

  template <class S>
  void eval(const S* x, S* out) const {
    for (std::size_t c = 0; c < comps.size(); ++c) {
      S acc(0.0);
      for (const auto& m : comps[c]) {
        S t(m.coef);
        for (int i = 0; i < dim; ++i)
          for (int p = 0; p < m.powers[i]; ++p) t = t * x[i];
        acc = acc + t;
      }
      out[c] = acc;
    }
  }
};

inline Poly random_poly(int dim, int size, int deg, std::mt19937_64& rng, int terms = 4) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::uniform_int_distribution<int> var(0, dim - 1);
  std::uniform_int_distribution<int> dg(0, deg);
  Poly p{dim, {}};
  for (int c = 0; c < size; ++c) {
    std::vector<Monomial> ms;
    for (int t = 0; t < terms; ++t) {
      Monomial m{U(rng), std::vector<int>(dim, 0)};
      int d = dg(rng);
      for (int k = 0; k < d; ++k) ++m.powers[var(rng)];
      ms.push_back(m);
    }
    p.comps.push_back(ms);
  }
  return p;
}

inline Field poly_field(const Poly& p, Valence v, int degree) {
  return Field::make(p.dim, static_cast<int>(p.comps.size()), v, degree,
                     [p](const auto* x, auto* out) { p.eval(x, out); });
}

using Fn = std::function<std::vector<double>(const std::vector<double>&)>;

inline Fn as_fn(const Field& f) {
  return [f](const std::vector<double>& x) { return f(x); };
}

// Central difference d_j F at x.
inline std::vector<double> fd_partial(const Fn& F, std::vector<double> x, int j, double h = 1e-5) {
  x[j] += h;
  auto fp = F(x);
  x[j] -= 2 * h;
  auto fm = F(x);
  for (std::size_t c = 0; c < fp.size(); ++c) fp[c] = (fp[c] - fm[c]) / (2 * h);
  return fp;
}

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline std::vector<double> random_point(int dim, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> U(lo, hi);
  std::vector<double> x(dim);
  for (auto& v : x) v = U(rng);
  return x;
}

}  // namespace cds_test
