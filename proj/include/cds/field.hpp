#pragma once

#include <cds/dual.hpp>

#include <array>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace cds {

enum class Valence { scalar, vector, covector, bivector, form, trivector, map };

// Ordered index subsets {i0 < i1 < ...} of {0..n-1}; storage order of forms and multivectors.
inline std::vector<std::vector<int>> subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  if (k < 0 || k > n) return out;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    out.push_back(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

inline int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return static_cast<int>(r);
}

// Position of a strictly increasing index tuple in subsets(n, k).
inline int subset_index(int n, const int* idx, int k) {
  int pos = 0;
  int prev = -1;
  for (int m = 0; m < k; ++m) {
    for (int j = prev + 1; j < idx[m]; ++j) pos += binomial(n - j - 1, k - m - 1);
    prev = idx[m];
  }
  return pos;
}

inline int pair_index(int n, int i, int j) {
  int idx[2] = {i, j};
  return subset_index(n, idx, 2);
}

// Sorts an index tuple in place; returns the permutation sign, or 0 on a repeated index.
inline int sort_sign(int* idx, int k) {
  int sign = 1;
  for (int a = 0; a < k; ++a)
    for (int b = 0; b + 1 < k - a; ++b)
      if (idx[b] > idx[b + 1]) {
        std::swap(idx[b], idx[b + 1]);
        sign = -sign;
      }
  for (int a = 0; a + 1 < k; ++a)
    if (idx[a] == idx[a + 1]) return 0;
  return sign;
}

// Full antisymmetric component T_{i j} from independent storage.
template <class S>
S skew2(const S* c, int n, int i, int j) {
  if (i == j) return S(0.0);
  if (i < j) return c[pair_index(n, i, j)];
  return -c[pair_index(n, j, i)];
}

template <class S>
S skewk(const S* c, int n, const int* idx, int k) {
  std::array<int, 8> tmp{};
  for (int m = 0; m < k; ++m) tmp[m] = idx[m];
  int s = sort_sign(tmp.data(), k);
  if (s == 0) return S(0.0);
  S v = c[subset_index(n, tmp.data(), k)];
  return s > 0 ? v : -v;
}

class DepthExhausted : public std::logic_error {
 public:
  DepthExhausted() : std::logic_error("differentiation depth exhausted: field nests too many derivatives") {}
};

// A smooth map R^dim -> R^size, evaluable at every supported nesting of dual numbers.
class Field {
 public:
  template <class S>
  using Eval = std::function<void(const S*, S*)>;

  int dim = 0;
  int size = 0;
  Valence valence = Valence::scalar;
  int degree = 0;

  Field() = default;

  template <class S>
  void eval(const S* x, S* out) const {
    std::get<Eval<S>>(*ev_)(x, out);
  }

  template <class S>
  std::vector<S> operator()(const std::vector<S>& x) const {
    if (static_cast<int>(x.size()) != dim) throw std::invalid_argument("field evaluated at a point of wrong dimension");
    std::vector<S> out(size);
    eval(x.data(), out.data());
    return out;
  }

  bool valid() const { return static_cast<bool>(ev_); }

  // `f` is a generic callable (const S* x, S* out) valid for S in {double, D1, D2, D3}.
  template <class F>
  static Field make(int dim, int size, Valence valence, int degree, F f) {
    Field r(dim, size, valence, degree);
    r.ev_ = std::make_shared<Table>(Eval<double>(f), Eval<D1>(f), Eval<D2>(f), Eval<D3>(f));
    return r;
  }

  // Like make(), for fields that differentiate their inputs: the deepest level is unavailable.
  template <class F>
  static Field derived(int dim, int size, Valence valence, int degree, F f) {
    Field r(dim, size, valence, degree);
    r.ev_ = std::make_shared<Table>(Eval<double>(f), Eval<D1>(f), Eval<D2>(f),
                                    Eval<D3>([](const D3*, D3*) { throw DepthExhausted(); }));
    return r;
  }

 private:
  using Table = std::tuple<Eval<double>, Eval<D1>, Eval<D2>, Eval<D3>>;
  Field(int d, int s, Valence v, int k) : dim(d), size(s), valence(v), degree(k) {}
  std::shared_ptr<const Table> ev_;
};

template <class S>
constexpr bool liftable = dual_depth<S>::value < 3;

// Values and Jacobian jac[c * dim + j] = d_j F_c at x.
template <class S>
void jet(const Field& f, const S* x, S* val, S* jac) {
  if constexpr (!liftable<S>) {
    throw DepthExhausted();
  } else {
    const int n = f.dim;
    std::vector<Dual<S>> xs(n), out(f.size);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) xs[i] = Dual<S>(x[i], S(i == j ? 1.0 : 0.0));
      f.eval(xs.data(), out.data());
      for (int c = 0; c < f.size; ++c) {
        if (j == 0 && val) val[c] = out[c].v;
        jac[c * n + j] = out[c].d;
      }
    }
    if (n == 0 && val) {
      std::vector<S> tmp(f.size);
      f.eval(x, tmp.data());
      for (int c = 0; c < f.size; ++c) val[c] = tmp[c];
    }
  }
}

inline Field constant_field(int dim, std::vector<double> values, Valence valence = Valence::scalar, int degree = 0) {
  const int size = static_cast<int>(values.size());
  return Field::make(dim, size, valence, degree, [values](const auto*, auto* out) {
    for (std::size_t c = 0; c < values.size(); ++c) out[c] = values[c];
  });
}

inline Field zero_field(int dim, int size, Valence valence = Valence::scalar, int degree = 0) {
  return constant_field(dim, std::vector<double>(size, 0.0), valence, degree);
}

// Coordinate function x_i.
inline Field coordinate(int dim, int i) {
  return Field::make(dim, 1, Valence::scalar, 0, [i](const auto* x, auto* out) { out[0] = x[i]; });
}

inline Field coordinate_vector(int dim, int i) {
  std::vector<double> v(dim, 0.0);
  v[i] = 1.0;
  return constant_field(dim, v, Valence::vector, 1);
}

inline Field add(const Field& a, const Field& b, double sb = 1.0) {
  if (a.dim != b.dim || a.size != b.size) throw std::invalid_argument("field sum: shape mismatch");
  return Field::make(a.dim, a.size, a.valence, a.degree, [a, b, sb](const auto* x, auto* out) {
    using S = std::remove_cv_t<std::remove_pointer_t<decltype(out)>>;
    std::vector<S> tb(b.size);
    a.eval(x, out);
    b.eval(x, tb.data());
    for (int c = 0; c < a.size; ++c) out[c] = out[c] + sb * tb[c];
  });
}

inline Field scale(const Field& a, double s) {
  return Field::make(a.dim, a.size, a.valence, a.degree, [a, s](const auto* x, auto* out) {
    a.eval(x, out);
    for (int c = 0; c < a.size; ++c) out[c] = s * out[c];
  });
}

// Multiplies every component by the scalar field g.
inline Field multiply(const Field& g, const Field& a) {
  if (g.size != 1 || g.dim != a.dim) throw std::invalid_argument("field product: shape mismatch");
  return Field::make(a.dim, a.size, a.valence, a.degree, [g, a](const auto* x, auto* out) {
    using S = std::remove_cv_t<std::remove_pointer_t<decltype(out)>>;
    S gv;
    g.eval(x, &gv);
    a.eval(x, out);
    for (int c = 0; c < a.size; ++c) out[c] = gv * out[c];
  });
}

// f(x_{idx[0]}, x_{idx[1]}, ...) as a field on R^dim.
inline Field restrict_to(const Field& f, int dim, std::vector<int> idx) {
  if (static_cast<int>(idx.size()) != f.dim) throw std::invalid_argument("restrict_to: index count mismatch");
  return Field::make(dim, f.size, f.valence, f.degree, [f, idx](const auto* x, auto* out) {
    using S = std::remove_cv_t<std::remove_pointer_t<decltype(out)>>;
    std::vector<S> y(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) y[k] = x[idx[k]];
    f.eval(y.data(), out);
  });
}

// Pulls a function of the leading `dim_b` coordinates back along the projection R^dim -> R^dim_b.
inline Field pull_leading(const Field& f, int dim) {
  std::vector<int> idx(f.dim);
  for (int i = 0; i < f.dim; ++i) idx[i] = i;
  return restrict_to(f, dim, idx);
}

inline Field pull_trailing(const Field& f, int dim) {
  std::vector<int> idx(f.dim);
  for (int i = 0; i < f.dim; ++i) idx[i] = dim - f.dim + i;
  return restrict_to(f, dim, idx);
}

inline std::vector<double> eval_at(const Field& f, const std::vector<double>& x) { return f(x); }

}  // namespace cds
