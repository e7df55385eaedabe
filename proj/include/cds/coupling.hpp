#pragma once

#include <cds/calculus.hpp>
#include <cds/fibration.hpp>
#include <cds/linalg.hpp>
#include <cds/parallel.hpp>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cds {

// (pi_V, Gamma, omega_H) on one patch E = B x F.
// pi_V: field on E, fiber-indexed bivector components (size C(m,2)).
// omega_H: field on E, base-indexed 2-form components (size C(n,2)).
struct GeometricData {
  FiberedSpace space;
  Field pi_V;
  Connection gamma;
  Field omega_H;
  std::string name;

  int n() const { return space.n(); }
  int m() const { return space.m(); }
  int N() const { return space.N(); }
};

// Rows are (X, alpha) in T_eE + T*_eE, one per basis element of L_e.
struct DiracPointFrame {
  std::vector<double> e;
  Mat rows;

  Mat span() const { return rows.transpose(); }
};

using FrameSupplier = std::function<Mat(const std::vector<double>& e)>;

// Matrices of the data at one point: A is m x n, omega is n x n, pi is m x m (both skew).
struct PointData {
  std::vector<double> e;
  Mat A;
  Mat omega;
  Mat pi;
};

inline PointData point_data(const GeometricData& d, const std::vector<double>& e) {
  const int n = d.n(), m = d.m();
  PointData p{e, Mat(m, n), Mat::Zero(n, n), Mat::Zero(m, m)};
  auto A = d.gamma.A(e);
  for (int a = 0; a < m; ++a)
    for (int i = 0; i < n; ++i) p.A(a, i) = A[a * n + i];
  auto w = d.omega_H(e);
  auto pv = d.pi_V(e);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p.omega(i, j) = skew2(w.data(), n, i, j);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) p.pi(a, b) = skew2(pv.data(), m, a, b);
  return p;
}

// Frame rows: h(d_i) with i_{h(d_i)} omega_H, then pi^#(theta^a) with theta^a = dx^a - A^a_i db^i.
inline Mat frame_from_point_data(const PointData& p) {
  const int n = static_cast<int>(p.omega.rows()), m = static_cast<int>(p.pi.rows()), N = n + m;
  Mat R = Mat::Zero(N, 2 * N);
  for (int i = 0; i < n; ++i) {
    R(i, i) = 1.0;
    for (int a = 0; a < m; ++a) R(i, n + a) = p.A(a, i);
    for (int j = 0; j < n; ++j) R(i, N + j) = p.omega(i, j);
  }
  for (int a = 0; a < m; ++a) {
    const int r = n + a;
    for (int b = 0; b < m; ++b) R(r, n + b) = p.pi(b, a);
    for (int i = 0; i < n; ++i) R(r, N + i) = -p.A(a, i);
    R(r, N + n + a) = 1.0;
  }
  return R;
}

inline DiracPointFrame assemble_dirac(const GeometricData& d, const std::vector<double>& e) {
  return {e, frame_from_point_data(point_data(d, e))};
}

inline FrameSupplier frame_supplier(const GeometricData& d) {
  return [d](const std::vector<double>& e) { return assemble_dirac(d, e).rows; };
}

// Gram matrix of the symmetric pairing <(X,a),(Y,b)>_+ = (a(Y) + b(X)) / 2 on the rows.
inline Mat plus_gram(const Mat& rows) {
  const int N = static_cast<int>(rows.cols()) / 2;
  Mat X = rows.leftCols(N), a = rows.rightCols(N);
  Mat g = a * X.transpose();
  return 0.5 * (g + g.transpose());
}

// Graph of a 2-form given as a full skew N x N matrix: rows (e_k, w(e_k, .)).
inline Mat graph_of_form(const Mat& w) {
  const int N = static_cast<int>(w.rows());
  Mat R(N, 2 * N);
  R.leftCols(N) = Mat::Identity(N, N);
  R.rightCols(N) = w;
  return R;
}

// Graph of a bivector given as a full skew N x N matrix: rows (P(., e^k), e^k).
inline Mat graph_of_bivector(const Mat& P) {
  const int N = static_cast<int>(P.rows());
  Mat R(N, 2 * N);
  R.leftCols(N) = P.transpose();
  R.rightCols(N) = Mat::Identity(N, N);
  return R;
}

// Vert + Vert^0 at a point of E, as rows.
inline Mat vertical_plus_annihilator(int n, int m) {
  const int N = n + m;
  Mat R = Mat::Zero(N, 2 * N);
  for (int a = 0; a < m; ++a) R(a, n + a) = 1.0;
  for (int i = 0; i < n; ++i) R(m + i, N + i) = 1.0;
  return R;
}

struct NondegeneracyReport {
  bool nondegenerate = true;
  double min_sine = 1.0;          // smallest principal-angle sine against Vert + Vert^0
  int max_intersection_dim = 0;
  int worst_point = -1;
};

inline void require_full_rank(const Mat& rows, const std::vector<double>& e) {
  const int N = static_cast<int>(rows.cols()) / 2;
  if (rows.rows() != N || numerical_rank(rows.transpose(), 1e-10) != N) {
    std::string where;
    for (double v : e) where += (where.empty() ? "" : ", ") + std::to_string(v);
    throw std::invalid_argument("rank-deficient Dirac frame at (" + where + ")");
  }
}

inline NondegeneracyReport check_fiber_nondegenerate(const FrameSupplier& L, const FiberedSpace& space,
                                                     const std::vector<std::vector<double>>& points) {
  const int n = space.n(), m = space.m();
  const Mat W = vertical_plus_annihilator(n, m).transpose();
  const int P = static_cast<int>(points.size());
  std::vector<double> sines(P);
  std::vector<int> dims(P);
  parallel_for(P, [&](int k) {
    Mat R = L(points[k]);
    require_full_rank(R, points[k]);
    auto s = principal_sines(R.transpose(), W);
    sines[k] = s.empty() ? 1.0 : s.front();
    dims[k] = intersection_dim(R.transpose(), W);
  });
  NondegeneracyReport r;
  for (int k = 0; k < P; ++k) {
    if (sines[k] < r.min_sine || r.worst_point < 0) {
      r.min_sine = sines[k];
      r.worst_point = k;
    }
    r.max_intersection_dim = std::max(r.max_intersection_dim, dims[k]);
  }
  r.nondegenerate = r.max_intersection_dim == 0;
  return r;
}

class DegenerateFrame : public std::runtime_error {
 public:
  std::vector<double> point;
  DegenerateFrame(const std::vector<double>& e, const std::string& what) : std::runtime_error(what), point(e) {}
};

// Reads (A, omega_H, pi_V) off a fiber non-degenerate frame at one point.
inline PointData extract_point_data(const Mat& R, const std::vector<double>& e, int n, int m) {
  const int N = n + m;
  require_full_rank(R, e);
  auto fail = [&](const char* what) {
    std::string where;
    for (double v : e) where += (where.empty() ? "" : ", ") + std::to_string(v);
    return DegenerateFrame(e, std::string("extraction: ") + what + " at (" + where + ")");
  };
  PointData p{e, Mat(m, n), Mat(n, n), Mat(m, m)};
  // Hor: combinations whose covector annihilates Vert.
  Mat C = null_space(R.block(0, N + n, N, m).transpose(), 1e-10).transpose();
  if (C.rows() != n) throw fail("horizontal part has wrong dimension");
  Mat H = C * R;
  Mat Xb = H.leftCols(n);
  if (numerical_rank(Xb, 1e-8) != n) throw fail("frame is fiber degenerate (Hor meets Vert)");
  H = Xb.inverse() * H;  // now X_base = identity
  p.A = H.block(0, n, n, m).transpose();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p.omega(i, j) = H.row(i).segment(N, N).dot(H.row(j).head(N));
  // graph(pi_V): combinations with no base component in X.
  Mat K = null_space(R.leftCols(n).transpose(), 1e-10).transpose();
  if (K.rows() != m) throw fail("vertical part has wrong dimension");
  Mat V = K * R;
  Mat aF = V.block(0, N + n, m, m);
  if (numerical_rank(aF, 1e-8) != m) throw fail("frame is fiber degenerate (vertical covectors)");
  V = aF.inverse() * V;  // now alpha_fiber = identity
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) p.pi(a, b) = V(b, n + a);
  return p;
}

inline std::vector<PointData> extract_geometric_data(const FrameSupplier& L, const FiberedSpace& space,
                                                     const std::vector<std::vector<double>>& points) {
  std::vector<PointData> out(points.size());
  for (std::size_t k = 0; k < points.size(); ++k)
    out[k] = extract_point_data(L(points[k]), points[k], space.n(), space.m());
  return out;
}

// Largest entry gap between two PointData samples.
inline double point_data_distance(const PointData& p, const PointData& q) {
  double r = (p.A - q.A).cwiseAbs().maxCoeff();
  if (p.omega.size()) r = std::max(r, (p.omega - q.omega).cwiseAbs().maxCoeff());
  if (p.pi.size()) r = std::max(r, (p.pi - q.pi).cwiseAbs().maxCoeff());
  return r;
}

// ---------------------------------------------------------------------------
// Sections of L as fields on E.

// pi_V as a bivector on E (fiber block only).
inline Field pi_on_total(const GeometricData& d) {
  const int n = d.n(), m = d.m(), N = d.N();
  const Field pv = d.pi_V;
  return Field::make(N, binomial(N, 2), Valence::bivector, 2, [pv, n, m, N](const auto* e, auto* out) {
    using S = scalar_of<decltype(out)>;
    std::vector<S> p(pv.size);
    pv.eval(e, p.data());
    for (int c = 0; c < binomial(N, 2); ++c) out[c] = 0.0 * e[0];
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b) out[pair_index(N, n + a, n + b)] = p[pair_index(m, a, b)];
  });
}

// omega_H as a 2-form on E (base block only; it vanishes on Vert).
inline Field omega_on_total(const GeometricData& d) {
  const int n = d.n(), N = d.N();
  const Field w = d.omega_H;
  return Field::make(N, binomial(N, 2), Valence::form, 2, [w, n, N](const auto* e, auto* out) {
    using S = scalar_of<decltype(out)>;
    std::vector<S> p(w.size);
    w.eval(e, p.data());
    for (int c = 0; c < binomial(N, 2); ++c) out[c] = 0.0 * e[0];
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) out[pair_index(N, i, j)] = p[pair_index(n, i, j)];
  });
}

// Vertical covector (fiber components) as the covector alpha_a theta^a on E; it annihilates Hor.
inline Field embed_vertical_covector(const GeometricData& d, const Field& alpha) {
  if (alpha.dim != d.N() || alpha.size != d.m()) throw std::invalid_argument("vertical covector: shape mismatch");
  const int n = d.n(), m = d.m(), N = d.N();
  const Field A = d.gamma.A;
  return Field::make(N, N, Valence::covector, 1, [alpha, A, n, m](const auto* e, auto* out) {
    using S = scalar_of<decltype(out)>;
    std::vector<S> a(m), Av(n * m);
    alpha.eval(e, a.data());
    A.eval(e, Av.data());
    for (int i = 0; i < n; ++i) {
      S acc(0.0);
      for (int b = 0; b < m; ++b) acc = acc - a[b] * Av[b * n + i];
      out[i] = acc;
    }
    for (int b = 0; b < m; ++b) out[n + b] = a[b];
  });
}

// Restriction of a covector on E to Vert (its fiber components).
inline Field vertical_part(const Field& beta, int n) {
  const int N = beta.dim, m = N - n;
  return Field::make(N, m, Valence::covector, 1, [beta, n, m, N](const auto* e, auto* out) {
    using S = scalar_of<decltype(out)>;
    std::vector<S> b(N);
    beta.eval(e, b.data());
    for (int a = 0; a < m; ++a) out[a] = b[n + a];
  });
}

// d_V f: fiber partials of a function on E.
inline Field vertical_differential(const Field& f, int n) {
  const int N = f.dim, m = N - n;
  return Field::derived(N, m, Valence::covector, 1, [f, n, m, N](const auto* e, auto* out) {
    using S = scalar_of<decltype(out)>;
    std::vector<S> jac(N);
    jet(f, e, static_cast<S*>(nullptr), jac.data());
    for (int a = 0; a < m; ++a) out[a] = jac[n + a];
  });
}

// pi_V^#(alpha) in fiber components: (pi^# a)^b = pi^{bc} a_c.
inline Field vertical_sharp(const GeometricData& d, const Field& alpha) {
  const int m = d.m(), N = d.N();
  const Field pv = d.pi_V;
  return Field::make(N, m, Valence::vector, 1, [pv, alpha, m](const auto* e, auto* out) {
    using S = scalar_of<decltype(out)>;
    std::vector<S> p(pv.size), a(m);
    pv.eval(e, p.data());
    alpha.eval(e, a.data());
    for (int b = 0; b < m; ++b) {
      S acc(0.0);
      for (int c = 0; c < m; ++c) acc = acc + skew2(p.data(), m, b, c) * a[c];
      out[b] = acc;
    }
  });
}

// [a, b]_V = L_{pi^# a} b - L_{pi^# b} a + d_V pi_V(a, b), with fiber-only derivatives.
inline Field vertical_bracket(const GeometricData& d, const Field& alpha, const Field& beta) {
  const int n = d.n(), m = d.m(), N = d.N();
  const Field Xa = vertical_sharp(d, alpha), Xb = vertical_sharp(d, beta);
  return Field::derived(N, m, Valence::covector, 1, [=](const auto* e, auto* out) {
    using S = scalar_of<decltype(out)>;
    std::vector<S> xa(m), xb(m), a(m), b(m), jxa(m * N), jxb(m * N), ja(m * N), jb(m * N);
    jet(Xa, e, xa.data(), jxa.data());
    jet(Xb, e, xb.data(), jxb.data());
    jet(alpha, e, a.data(), ja.data());
    jet(beta, e, b.data(), jb.data());
    for (int q = 0; q < m; ++q) {
      S acc(0.0);
      for (int c = 0; c < m; ++c) {
        // L_X b: X^c d_c b_q + b_c d_q X^c
        acc = acc + xa[c] * jb[q * N + n + c] + b[c] * jxa[c * N + n + q];
        acc = acc - xb[c] * ja[q * N + n + c] - a[c] * jxb[c * N + n + q];
        // d_q (a_c X_b^c)
        acc = acc + ja[c * N + n + q] * xb[c] + a[c] * jxb[c * N + n + q];
      }
      out[q] = acc;
    }
  });
}

// h*(v) = (h(v), i_{h(v)} omega_H).
inline SectionPair cohorizontal_lift(const GeometricData& d, const Field& v) {
  Field hv = horizontal_lift(d.gamma, v);
  return {hv, interior(hv, omega_on_total(d))};
}

// Vertical covector alpha seen as the section (pi_V^# alpha, alpha) of L.
inline SectionPair vertical_section(const GeometricData& d, const Field& alpha) {
  Field aE = embed_vertical_covector(d, alpha);
  return {sharp(pi_on_total(d), aE), aE};
}

inline Field vertical_coordinate_covector(const GeometricData& d, int a) {
  std::vector<double> c(d.m(), 0.0);
  c[a] = 1.0;
  return constant_field(d.N(), c, Valence::covector, 1);
}

// Generators h*(d_i) and theta^a; they span L pointwise.
inline std::vector<SectionPair> dirac_generators(const GeometricData& d) {
  std::vector<SectionPair> g;
  for (int i = 0; i < d.n(); ++i) g.push_back(cohorizontal_lift(d, coordinate_vector(d.n(), i)));
  for (int a = 0; a < d.m(); ++a) g.push_back(vertical_section(d, vertical_coordinate_covector(d, a)));
  return g;
}

// ---------------------------------------------------------------------------
// The four conditions.

struct CouplingReport {
  double poisson = 0.0;     // [pi_V, pi_V]
  double invariance = 0.0;  // L_{h(v)} pi_V
  double closed = 0.0;      // d_Gamma omega_H
  double curvature = 0.0;   // Curv(u,v) - pi_V^# d_V omega_H(h(u), h(v))
  double tolerance = 1e-8;

  double worst() const { return std::max(std::max(poisson, invariance), std::max(closed, curvature)); }
  bool coupling() const { return worst() < tolerance; }
};

// pi_V^# d_V (omega_H)_{ij}, fiber components.
inline Field hamiltonian_of_omega(const GeometricData& d, int i, int j) {
  const int n = d.n(), m = d.m(), N = d.N();
  const Field w = d.omega_H, pv = d.pi_V;
  const int c = pair_index(n, i, j);
  return Field::derived(N, m, Valence::vector, 1, [w, pv, n, m, N, c](const auto* e, auto* out) {
    using S = scalar_of<decltype(out)>;
    std::vector<S> jw(w.size * N), p(pv.size);
    jet(w, e, static_cast<S*>(nullptr), jw.data());
    pv.eval(e, p.data());
    for (int b = 0; b < m; ++b) {
      S acc(0.0);
      for (int q = 0; q < m; ++q) acc = acc + skew2(p.data(), m, b, q) * jw[c * N + n + q];
      out[b] = acc;
    }
  });
}

inline CouplingReport check_coupling_conditions(const GeometricData& d, const std::vector<std::vector<double>>& points,
                                                double tolerance = 1e-8) {
  const int n = d.n(), m = d.m(), N = d.N();
  const Field P = pi_on_total(d);
  std::vector<Field> poisson{schouten_square(P)};
  std::vector<Field> invariance;
  for (int i = 0; i < n; ++i) invariance.push_back(lie_derivative_bivector(horizontal_lift(d.gamma, i), P));
  std::vector<Field> closed;
  if (n >= 3) closed.push_back(covariant_differential(d.gamma, d.omega_H));
  std::vector<std::pair<Field, Field>> curv;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      curv.emplace_back(curvature(d.gamma, coordinate_vector(n, i), coordinate_vector(n, j)),
                        hamiltonian_of_omega(d, i, j));

  auto worst_of = [&](const std::vector<Field>& fs) {
    return parallel_max(static_cast<int>(points.size()), [&](int k) {
      double r = 0.0;
      for (const auto& f : fs) {
        if (f.size == 0) continue;
        for (double v : f(points[k])) r = std::max(r, std::isnan(v) ? v : std::abs(v));
      }
      return r;
    });
  };
  CouplingReport rep;
  rep.tolerance = tolerance;
  rep.poisson = m >= 3 ? worst_of(poisson) : 0.0;
  rep.invariance = m >= 2 ? worst_of(invariance) : 0.0;
  rep.closed = closed.empty() ? 0.0 : worst_of(closed);
  rep.curvature = parallel_max(static_cast<int>(points.size()), [&](int k) {
    double r = 0.0;
    for (const auto& [F, H] : curv) {
      auto lhs = F(points[k]);
      auto rhs = H(points[k]);
      for (int i = 0; i < n; ++i) r = std::max(r, std::abs(lhs[i]));
      for (int b = 0; b < m; ++b) r = std::max(r, std::abs(lhs[n + b] - rhs[b]));
      (void)N;
    }
    return r;
  });
  return rep;
}

// Component of [[s_i, s_j]] transverse to span{s_k(e)}, maximized over pairs and points.
inline double dirac_closure_residual(const std::vector<SectionPair>& gens,
                                     const std::vector<std::vector<double>>& points) {
  if (gens.empty()) throw std::invalid_argument("dirac_closure_residual: no generators");
  const int N = gens.front().X.dim;
  std::vector<std::pair<int, int>> pairs;
  std::vector<SectionPair> brackets;
  for (std::size_t i = 0; i < gens.size(); ++i)
    for (std::size_t j = i + 1; j < gens.size(); ++j) {
      pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
      brackets.push_back(courant_bracket(gens[i], gens[j]));
    }
  return parallel_max(static_cast<int>(points.size()), [&](int k) {
    const auto& e = points[k];
    Mat G(2 * N, static_cast<long>(gens.size()));
    for (std::size_t g = 0; g < gens.size(); ++g) G.col(static_cast<long>(g)) = to_vec(section_at(gens[g], e));
    if (numerical_rank(G, 1e-10) != N) throw std::invalid_argument("dirac_closure_residual: generators do not span L");
    Mat Q = orthonormal_basis(G, 1e-10);
    double r = 0.0;
    for (const auto& b : brackets) {
      Vec c = to_vec(section_at(b, e));
      r = std::max(r, (c - Q * (Q.transpose() * c)).norm());
    }
    return r;
  });
}

inline double dirac_closure_residual(const GeometricData& d, const std::vector<std::vector<double>>& points) {
  return dirac_closure_residual(dirac_generators(d), points);
}

// ---------------------------------------------------------------------------
// Splitting brackets.

struct SplittingReport {
  double vertical = 0.0;    // [[a, b]] against [a, b]_V
  double mixed = 0.0;       // [[h*v, a]] against the vertical part of L_{h(v)} a
  double horizontal = 0.0;  // [[h*v, h*w]] against h*[v,w] + d_V omega_H(h(v), h(w))
  double anchor = 0.0;      // anchor of h*v + a against h(v) + pi^# a

  double worst() const { return std::max(std::max(vertical, mixed), std::max(horizontal, anchor)); }
};

inline double section_gap(const SectionPair& s, const SectionPair& t, const std::vector<std::vector<double>>& points) {
  return parallel_max(static_cast<int>(points.size()), [&](int k) {
    auto a = section_at(s, points[k]);
    auto b = section_at(t, points[k]);
    double r = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) r = std::max(r, std::abs(a[c] - b[c]));
    return r;
  });
}

inline SectionPair add_sections(const SectionPair& s, const SectionPair& t) {
  return {add(s.X, t.X), add(s.alpha, t.alpha)};
}

inline SplittingReport splitting_bracket_residual(const GeometricData& d, const Field& v, const Field& w,
                                                  const Field& alpha, const Field& beta,
                                                  const std::vector<std::vector<double>>& points) {
  const int n = d.n();
  SplittingReport r;
  SectionPair sa = vertical_section(d, alpha), sb = vertical_section(d, beta);
  SectionPair hv = cohorizontal_lift(d, v), hw = cohorizontal_lift(d, w);
  r.vertical = section_gap(courant_bracket(sa, sb), vertical_section(d, vertical_bracket(d, alpha, beta)), points);
  Field Lhva = vertical_part(lie_derivative_form(hv.X, embed_vertical_covector(d, alpha)), n);
  r.mixed = section_gap(courant_bracket(hv, sa), vertical_section(d, Lhva), points);
  Field whvhw = contract(interior(hv.X, omega_on_total(d)), hw.X);
  SectionPair expected = add_sections(cohorizontal_lift(d, lie_bracket(v, w)),
                                      vertical_section(d, vertical_differential(whvhw, n)));
  r.horizontal = section_gap(courant_bracket(hv, hw), expected, points);
  SectionPair sum = add_sections(hv, sa);
  Field expected_anchor = add(hv.X, sharp(pi_on_total(d), embed_vertical_covector(d, alpha)));
  r.anchor = section_gap({sum.X, sum.alpha}, {expected_anchor, sum.alpha}, points);
  return r;
}

// ---------------------------------------------------------------------------
// Leaf 2-form.

struct LeafFormValue {
  double value = 0.0;
  double choice_gap = 0.0;  // spread over different preimages of X
};

// omega(X, Y) = alpha(Y) for any (X, alpha) in L_e.
inline LeafFormValue leaf_two_form(const Mat& rows, const Vec& X, const Vec& Y, double tol = 1e-8) {
  const int N = static_cast<int>(rows.cols()) / 2;
  Mat anchors = rows.leftCols(N).transpose();  // N x r
  auto solve = [&](const Vec& Z) {
    Vec c = anchors.completeOrthogonalDecomposition().solve(Z);
    if ((anchors * c - Z).norm() > tol * std::max(1.0, Z.norm()))
      throw std::invalid_argument("leaf_two_form: vector outside the image of the anchor");
    return c;
  };
  Vec cx = solve(X);
  solve(Y);
  Vec alpha = rows.rightCols(N).transpose() * cx;
  LeafFormValue out{alpha.dot(Y), 0.0};
  Mat K = null_space(anchors, 1e-10);
  for (int k = 0; k < K.cols(); ++k) {
    Vec alt = rows.rightCols(N).transpose() * (cx + K.col(k));
    out.choice_gap = std::max(out.choice_gap, std::abs(alt.dot(Y) - out.value));
  }
  return out;
}

}  // namespace cds
