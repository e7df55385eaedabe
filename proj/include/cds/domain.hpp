#pragma once

#include <cds/dual.hpp>

#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace cds {

enum class DomainKind { box, sphere_stereo };

// A coordinate box, or the two-chart stereographic atlas of the unit sphere.
// Sphere charts: chart 0 projects from the north pole, u = (x - i y) / (1 - z);
// chart 1 from the south pole, w = (x + i y) / (1 + z). On the overlap w = 1/u, and both
// charts carry the outward orientation.
struct CoordinateDomain {
  int dim = 1;
  std::vector<double> lower;
  std::vector<double> upper;
  DomainKind kind = DomainKind::box;

  static CoordinateDomain box(std::vector<double> lo, std::vector<double> hi) {
    if (lo.size() != hi.size() || lo.empty()) throw std::invalid_argument("box: bounds of unequal or zero length");
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (!(lo[i] < hi[i])) throw std::invalid_argument("box: empty interval in coordinate " + std::to_string(i));
    CoordinateDomain d;
    d.dim = static_cast<int>(lo.size());
    d.lower = std::move(lo);
    d.upper = std::move(hi);
    return d;
  }

  static CoordinateDomain cube(int n, double lo, double hi) {
    return box(std::vector<double>(n, lo), std::vector<double>(n, hi));
  }

  // Chart coordinates are sampled in [-R, R]^2 in either chart.
  static CoordinateDomain sphere(double R = 1.5) {
    CoordinateDomain d = box({-R, -R}, {R, R});
    d.kind = DomainKind::sphere_stereo;
    return d;
  }

  bool contains(const double* x) const {
    for (int i = 0; i < dim; ++i)
      if (!(x[i] > lower[i] && x[i] < upper[i])) return false;
    return true;
  }
};

namespace sphere {

// Embedding of chart coordinates into R^3.
template <class S>
std::array<S, 3> to_embedding(int chart, const S& a, const S& b) {
  S r2 = a * a + b * b;
  S den = 1.0 + r2;
  if (chart == 0) return {2.0 * a / den, -(2.0 * b / den), (r2 - 1.0) / den};
  return {2.0 * a / den, 2.0 * b / den, (1.0 - r2) / den};
}

template <class S>
std::array<S, 2> from_embedding(int chart, const S& x, const S& y, const S& z) {
  if (chart == 0) return {x / (1.0 - z), -(y / (1.0 - z))};
  return {x / (1.0 + z), y / (1.0 + z)};
}

// Chart 0 to chart 1 on the overlap (complex inversion, orientation preserving).
template <class S>
std::array<S, 2> transition(const S& a, const S& b) {
  S r2 = a * a + b * b;
  return {a / r2, -(b / r2)};
}

// Chart whose projection pole is farthest from the point.
inline int chart_for(double z) { return z <= 0.0 ? 0 : 1; }

// Round area form 4 / (1 + |u|^2)^2 du^dv, identical expression in both charts.
template <class S>
S area_density(const S& a, const S& b) {
  S den = 1.0 + a * a + b * b;
  return 4.0 / (den * den);
}

}  // namespace sphere

// Halton low-discrepancy points with fixed-seed jitter, scaled into [lo, hi].
inline std::vector<std::vector<double>> sample_grid(const std::vector<double>& lo, const std::vector<double>& hi,
                                                    int count = 256, unsigned seed = 20240611u,
                                                    double jitter = 0.25) {
  static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  const int n = static_cast<int>(lo.size());
  if (n > 16) throw std::invalid_argument("sample_grid: dimension above 16");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  const double cell = std::pow(static_cast<double>(count), -1.0 / std::max(n, 1));
  std::vector<std::vector<double>> pts;
  pts.reserve(count);
  for (int k = 1; k <= count; ++k) {
    std::vector<double> p(n);
    for (int d = 0; d < n; ++d) {
      double f = 1.0, r = 0.0;
      int i = k;
      while (i > 0) {
        f /= primes[d];
        r += f * (i % primes[d]);
        i /= primes[d];
      }
      r += jitter * cell * U(rng);
      r = std::min(std::max(r, 0.02), 0.98);
      p[d] = lo[d] + r * (hi[d] - lo[d]);
    }
    pts.push_back(std::move(p));
  }
  return pts;
}

inline std::vector<std::vector<double>> sample_grid(const CoordinateDomain& d, int count = 256,
                                                    unsigned seed = 20240611u) {
  return sample_grid(d.lower, d.upper, count, seed);
}

// Composite Simpson weights on n+1 equally spaced nodes over [a, b]; n must be even.
inline std::vector<double> simpson_weights(int n, double a, double b) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("simpson_weights: node interval count must be even and >= 2");
  const double h = (b - a) / n;
  std::vector<double> w(n + 1);
  for (int i = 0; i <= n; ++i) w[i] = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
  for (double& x : w) x *= h / 3.0;
  return w;
}

// Integral of the round area form over S^2 in spherical angles, each point evaluated in a chart.
inline double sphere_area(int n_theta = 128, int n_phi = 128) {
  const double pi = std::acos(-1.0);
  auto wt = simpson_weights(n_theta, 0.0, pi);
  auto wp = simpson_weights(n_phi, 0.0, 2.0 * pi);
  double total = 0.0;
  for (int i = 0; i <= n_theta; ++i) {
    const double th = pi * i / n_theta;
    if (i == 0 || i == n_theta) continue;  // poles carry zero measure
    for (int j = 0; j <= n_phi; ++j) {
      const double ph = 2.0 * pi * j / n_phi;
      const int chart = sphere::chart_for(std::cos(th));
      // push the angle directions into the chart with duals
      D1 t(th, 1.0), p(ph, 0.0);
      auto emb_t = std::array<D1, 3>{sin(t) * cos(p), sin(t) * sin(p), cos(t)};
      auto ut = sphere::from_embedding(chart, emb_t[0], emb_t[1], emb_t[2]);
      D1 t2(th, 0.0), p2(ph, 1.0);
      auto emb_p = std::array<D1, 3>{sin(t2) * cos(p2), sin(t2) * sin(p2), cos(t2)};
      auto up = sphere::from_embedding(chart, emb_p[0], emb_p[1], emb_p[2]);
      const double det = ut[0].d * up[1].d - ut[1].d * up[0].d;
      const double dens = sphere::area_density(ut[0].v, ut[1].v);
      total += wt[i] * wp[j] * dens * det;
    }
  }
  return total;
}

}  // namespace cds
