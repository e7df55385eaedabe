#include <cds/apath.hpp>
#include <cds/monodromy.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace cds;

namespace {

const double kPi = std::acos(-1.0);

// B = F = R with linear transport dx/ds = k x b': phi_{t,0}(x) = x exp(k (b(t) - b(0))).
GeometricData linear_transport(double k) {
  GeometricData d;
  d.space = {CoordinateDomain::cube(1, -10.0, 10.0), CoordinateDomain::cube(1, -50.0, 50.0)};
  d.name = "linear-transport";
  d.pi_V = zero_field(2, 0, Valence::bivector, 2);
  d.gamma = {1, 1, Field::make(2, 1, Valence::map, 1, [k](const auto* e, auto* A) { A[0] = k * e[1]; })};
  d.omega_H = zero_field(2, 0, Valence::form, 2);
  return d;
}

GeometricData so3_curved() { return builtin_setting("so3-coadjoint", RealFunction::make([](const auto& x) { return x; })).data(0); }

AlgebroidPath so3_path(const GeometricData& d, int N = 100) {
  return integrate_apath(
      d, {0.1, -0.2, 0.4, 0.3, -0.5},
      [](double t) { return std::vector<double>{0.6 * std::cos(kPi * t), 0.4 + 0.3 * t * t}; },
      [](double t) { return std::vector<double>{std::sin(2 * t), 0.5 - t, 0.3 * t * t}; }, N);
}

double max_sample_gap(const Samples& a, const Samples& b) {
  double r = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) r = std::max(r, detail::sup_distance(a[k], b[k]));
  return r;
}

}  // namespace

TEST(GridTools, InterpolationAndDerivativeOrders) {
  double prev_d = 0.0, prev_i = 0.0;
  for (int N : {20, 40}) {
    Samples v(N + 1);
    for (int k = 0; k <= N; ++k) v[k] = {std::sin(3.0 * k / N)};
    auto D = detail::grid_derivative(v);
    double err = 0.0, ierr = 0.0;
    for (int k = 0; k <= N; ++k) err = std::max(err, std::abs(D[k][0] - 3 * std::cos(3.0 * k / N)));
    for (double s : {0.013, 0.5, 0.731, 0.999}) ierr = std::max(ierr, std::abs(detail::grid_interp(v, s)[0] - std::sin(3 * s)));
    if (N == 40) {
      EXPECT_GT(prev_d / err, 40.0);  // sixth order
      EXPECT_GT(prev_i / ierr, 40.0);
    }
    prev_d = err;
    prev_i = ierr;
  }
}

TEST(GridTools, BreaksSeparateSegments) {
  const int N = 40;
  Samples v(N + 1);
  for (int k = 0; k <= N; ++k) v[k] = {std::abs(k - 20) / 40.0};
  auto D = detail::grid_derivative(v, {20});
  EXPECT_NEAR(D[5][0], -1.0, 1e-12);
  EXPECT_NEAR(D[35][0], 1.0, 1e-12);
  EXPECT_NEAR(detail::grid_interp(v, 0.49, {20})[0], 0.01, 1e-12);
  EXPECT_THROW(detail::grid_derivative(v, {3}), std::invalid_argument);
}

TEST(APath, IntegratedPathSatisfiesAnchor) {
  const auto d = so3_curved();
  EXPECT_LT(apath_residual(d, so3_path(d)), 1e-6);
  auto bad = so3_path(d);
  bad.aV[50][0] += 1.0;
  EXPECT_GT(apath_residual(d, bad), 0.1);
}

TEST(APath, InverseIsAnInvolution) {
  const auto d = so3_curved();
  const auto a = so3_path(d);
  const auto ii = inverse(inverse(a));
  EXPECT_EQ(ii.point, a.point);
  EXPECT_EQ(ii.u, a.u);
  EXPECT_EQ(ii.aV, a.aV);
  EXPECT_LT(apath_residual(d, inverse(a)), 1e-6);
}

TEST(APath, ConcatenationIsAnAPath) {
  const auto d = so3_curved();
  const auto a = so3_path(d, 200);
  const auto aa = concat(a, inverse(a));
  EXPECT_LT(apath_residual(d, aa), 1e-6);
  EXPECT_LT(detail::sup_distance(aa.point.front(), aa.point.back()), 1e-12);
  auto b = integrate_apath(d, a.point.back(), [](double t) { return std::vector<double>{-0.2, std::cos(t)}; },
                           [](double t) { return std::vector<double>{t, 0.1, -0.4}; });
  auto c = integrate_apath(d, b.point.back(), [](double) { return std::vector<double>{0.3, 0.0}; },
                           [](double t) { return std::vector<double>{0.0, t * t, 0.2}; });
  const auto left = concat(concat(a, b), c), right = concat(a, concat(b, c));
  EXPECT_LT(apath_residual(d, left), 1e-6);
  EXPECT_LT(apath_residual(d, right), 1e-6);
  EXPECT_LT(detail::sup_distance(left.point.back(), right.point.back()), 1e-12);
  EXPECT_THROW(concat(a, a), NotComposable);
}

TEST(Split, FlatTrivialConnectionLeavesCovectorsAlone) {
  auto d = so3_sphere_data(RealFunction::make([](const auto& r) { return r; }))[0];
  auto a = integrate_apath(d, {0.1, 0.2, 0.3, 0.1, 0.5}, [](double t) { return std::vector<double>{t, -0.3}; },
                           [](double t) { return std::vector<double>{0.2, t, -t}; });
  auto p = split_l_path(d, a);
  EXPECT_LT(max_sample_gap(p.covector, a.aV), 1e-12);
  Samples fibers;
  for (const auto& e : a.point) fibers.push_back(std::vector<double>(e.begin() + 2, e.end()));
  EXPECT_LT(max_sample_gap(p.fiber_point, fibers), 1e-12);
}

TEST(Split, HorizontalPathHasZeroVerStarPart) {
  const auto d = so3_curved();
  auto a = integrate_apath(d, {0.1, -0.2, 0.4, 0.3, -0.5}, [](double t) { return std::vector<double>{std::cos(t), 0.5}; },
                           [](double) { return std::vector<double>{0.0, 0.0, 0.0}; });
  auto p = split_l_path(d, a);
  for (std::size_t k = 0; k < p.covector.size(); ++k) {
    for (double v : p.covector[k]) EXPECT_EQ(v, 0.0);
    // horizontal transport back lands on the start point
    EXPECT_LT(detail::sup_distance(p.fiber_point[k], {0.4, 0.3, -0.5}), 1e-9);
    EXPECT_EQ(p.base_velocity[k], a.u[k]);
  }
}

TEST(Split, LinearTransportMatchesClosedForm) {
  const double k = 0.7;
  const auto d = linear_transport(k);
  auto a = integrate_apath(d, {0.2, 1.5}, [](double t) { return std::vector<double>{std::cos(3 * t)}; },
                           [](double t) { return std::vector<double>{1.0 + t}; });
  auto p = split_l_path(d, a);
  for (int q = 0; q <= a.intervals(); ++q) {
    const double db = a.point[q][0] - 0.2;
    EXPECT_NEAR(p.fiber_point[q][0], a.point[q][1] * std::exp(-k * db), 1e-9);
    EXPECT_NEAR(p.covector[q][0], a.aV[q][0] * std::exp(k * db), 1e-9);
  }
}

TEST(Split, RoundTripAndVerStarPath) {
  const auto d = so3_curved();
  const auto a = so3_path(d);
  auto p = split_l_path(d, a);
  auto r = reassemble(d, p);
  EXPECT_LT(apath_residual(d, r), 1e-6);
  EXPECT_LT(max_sample_gap(r.point, a.point), 1e-6);
  EXPECT_LT(max_sample_gap(r.aV, a.aV), 1e-6);
  // transport is Poisson for coupling data, so a~ is an A-path of the initial fiber
  EXPECT_LT(verstar_residual(d, p), 1e-6);
}

TEST(Split, ConcatenationMatchesSplitOfConcatenation) {
  const auto d = so3_curved();
  const auto a = so3_path(d);
  auto b = integrate_apath(d, a.point.back(), [](double t) { return std::vector<double>{-0.2, std::cos(t)}; },
                           [](double t) { return std::vector<double>{t, 0.1, -0.4}; }, 100);
  auto joined = concat_split(d, split_l_path(d, a), split_l_path(d, b));
  auto direct = split_l_path(d, concat(a, b));
  EXPECT_LT(max_sample_gap(joined.fiber_point, direct.fiber_point), 1e-6);
  EXPECT_LT(max_sample_gap(joined.covector, direct.covector), 1e-6);
  EXPECT_LT(max_sample_gap(joined.base, direct.base), 1e-12);
  EXPECT_THROW(concat_split(d, split_l_path(d, a), split_l_path(d, a)), NotComposable);
}

TEST(Split, LinearHolonomyCorrection) {
  const double k = -0.4;
  const auto d = linear_transport(k);
  auto a = integrate_apath(d, {0.0, 1.0}, [](double) { return std::vector<double>{1.0}; },
                           [](double) { return std::vector<double>{0.0}; });
  auto b = integrate_apath(d, a.point.back(), [](double t) { return std::vector<double>{t}; },
                           [](double t) { return std::vector<double>{2.0 - t}; });
  auto pb = split_l_path(d, b);
  auto j = concat_split(d, split_l_path(d, a), pb);
  // second half: b~ pulled back by phi_{1,0} = exp(k * 1)
  const int N = a.intervals();
  for (int q = N + 1; q <= 2 * N; ++q) {
    const double local = 2.0 * q / (2 * N) - 1;
    const double expect = detail::grid_interp(pb.covector, detail::tau(local))[0] * 2 * detail::tau_prime(local) * std::exp(k);
    EXPECT_NEAR(j.covector[q][0], expect, 1e-9);
  }
}

TEST(Split, PathTimesInverseReassemblesToLoop) {
  const auto d = so3_curved();
  const auto a = so3_path(d);
  auto p = split_l_path(d, a);
  auto loop = concat_split(d, p, inverse(d, p));
  auto r = reassemble(d, loop);
  EXPECT_LT(apath_residual(d, r), 1e-6);
  EXPECT_LT(detail::sup_distance(r.point.front(), r.point.back()), 1e-6);
  // inverse of the split path is the split of the inverse path
  EXPECT_LT(max_sample_gap(inverse(d, p).covector, split_l_path(d, inverse(a)).covector), 1e-6);
}

// ---------------------------------------------------------------------------

TEST(Evolution, AbelianEpsIndependentAlphaGivesZero) {
  auto f = SectionFamily::abelian(2, Field::make(2, 2, Valence::vector, 0, [](const auto* x, auto* o) {
    o[0] = sin(x[0]);
    o[1] = x[0] * x[0];
  }));
  auto s = solve_evolution(f, zero_field(1, 2));
  for (const auto& row : s.beta)
    for (const auto& b : row) EXPECT_EQ(detail::sup_distance(b, {0.0, 0.0}), 0.0);
  EXPECT_TRUE(s.homotopy);
}

TEST(Evolution, AbelianLinearInEpsIntegrates) {
  auto f = SectionFamily::abelian(2, Field::make(2, 2, Valence::vector, 0, [](const auto* x, auto* o) {
    o[0] = x[1] * cos(x[0]);
    o[1] = x[1] * x[0] * x[0];
  }));
  auto s = solve_evolution(f, zero_field(1, 2), 100, 4);
  for (int i = 0; i <= 100; ++i) {
    const double t = i / 100.0;
    for (int j = 0; j <= 4; ++j) {
      EXPECT_NEAR(s.at(i, j)[0], std::sin(t), 1e-12);
      EXPECT_NEAR(s.at(i, j)[1], t * t * t / 3, 1e-12);
    }
  }
  EXPECT_LT(s.residual, 1e-6);
  EXPECT_FALSE(s.homotopy);
}

TEST(Evolution, HomotopyConditionDetected) {
  auto f = SectionFamily::abelian(1, Field::make(2, 1, Valence::vector, 0, [](const auto* x, auto* o) {
    o[0] = x[1] * sin(2 * kPi * x[0]);
  }));
  EXPECT_TRUE(solve_evolution(f, zero_field(1, 1)).homotopy);
}

TEST(Evolution, SO3ConstantInTimeMatchesExponential) {
  const auto G = GroupModel::so3();
  auto alpha = Field::make(2, 3, Valence::vector, 0, [](const auto* x, auto* o) {
    o[0] = 2.0 * x[1];
    o[1] = 1.0 + x[1] * x[1];
    o[2] = -1.5 + 0.0 * x[0];
  });
  auto beta0 = Field::make(1, 3, Valence::vector, 0, [](const auto* x, auto* o) {
    o[0] = sin(x[0]);
    o[1] = 0.0 * x[0];
    o[2] = x[0];
  });
  auto f = SectionFamily::lie(G, alpha);
  auto s = solve_evolution(f, beta0, 200, 5);
  EXPECT_LT(s.residual, 1e-6);
  for (int j = 0; j <= 5; ++j) {
    const double e = j / 5.0;
    const double a[3] = {2 * e, 1 + e * e, -1.5}, da[3] = {2.0, 2 * e, 0.0}, b0[3] = {std::sin(e), 0.0, e};
    // d/dt (beta, 1) = [[-ad_a, da], [0, 0]] (beta, 1)
    for (double t : {0.3, 1.0}) {
      std::vector<double> M(16, 0.0);
      for (int k = 0; k < 3; ++k) {
        for (int mm = 0; mm < 3; ++mm) {
          double ad = 0.0;
          for (int l = 0; l < 3; ++l) ad += G.structure(k, l, mm) * a[l];
          M[k * 4 + mm] = -t * ad;
        }
        M[k * 4 + 3] = t * da[k];
      }
      auto E = mat::exp(M, 4);
      const int i = static_cast<int>(std::lround(t * 200));
      for (int k = 0; k < 3; ++k) {
        const double expect = E[k * 4 + 0] * b0[0] + E[k * 4 + 1] * b0[1] + E[k * 4 + 2] * b0[2] + E[k * 4 + 3];
        EXPECT_NEAR(s.at(i, j)[k], expect, 1e-6);
      }
    }
  }
}

TEST(Evolution, ResidualDropsUnderRefinement) {
  const auto G = GroupModel::so3();
  auto alpha = Field::make(2, 3, Valence::vector, 0, [](const auto* x, auto* o) {
    o[0] = 3.0 * sin(2 * x[0]) * x[1];
    o[1] = cos(x[0] + x[1]);
    o[2] = x[0] * x[1] * x[1];
  });
  auto f = SectionFamily::lie(G, alpha);
  auto coarse = solve_evolution(f, zero_field(1, 3), 50, 4, 1.0 / 50);
  auto fine = solve_evolution(f, zero_field(1, 3), 100, 4, 1.0 / 100);
  EXPECT_LT(fine.residual, 1e-6);
  EXPECT_GE(coarse.residual / fine.residual, 4.0);
}

TEST(Evolution, RejectsUnsupportedInput) {
  auto alpha = Field::make(2, 2, Valence::vector, 0, [](const auto* x, auto* o) { o[0] = o[1] = x[0]; });
  SectionFamily f{2, std::vector<double>(8, 0.0), alpha};
  f.c[(0 * 2 + 0) * 2 + 1] = 1.0;  // [e0, e1] = e0 but [e1, e0] = 0
  EXPECT_THROW(solve_evolution(f, zero_field(1, 2)), UnsupportedFamily);
  EXPECT_THROW(solve_evolution(SectionFamily::abelian(2, alpha), zero_field(1, 3)), UnsupportedFamily);
}

// ---------------------------------------------------------------------------

TEST(FlowCommutation, CommutingTranslations) {
  auto f = SectionFamily::abelian(2, Field::make(2, 2, Valence::vector, 0, [](const auto* x, auto* o) {
    o[0] = 1.0 + 0.0 * x[0];
    o[1] = 0.5 + 0.0 * x[1];
  }));
  auto beta0 = Field::make(1, 2, Valence::vector, 0, [](const auto* x, auto* o) {
    o[0] = -0.3 + 0.0 * x[0];
    o[1] = 2.0 + 0.0 * x[0];
  });
  AlgebraAction act{2, Field::make(2, 4, Valence::vector, 0, [](const auto* x, auto* o) {
                      o[0] = 1.0 + 0.0 * x[0];
                      o[1] = o[2] = 0.0 * x[0];
                      o[3] = 1.0 + 0.0 * x[0];
                    })};
  EXPECT_LT(flow_commutation_residual(f, beta0, act, {0.2, 0.1}, {0.5, 1.0}, {0.5, 1.0}), 1e-10);
}

TEST(FlowCommutation, SO3OnCoadjointSphere) {
  const auto G = GroupModel::so3();
  auto alpha = Field::make(2, 3, Valence::vector, 0, [](const auto* x, auto* o) {
    o[0] = 6.0 * cos(3 * x[0]) + 4.0 * x[1];
    o[1] = 5.0 * sin(2 * x[0] * x[1]) - 3.0;
    o[2] = 4.0 * x[0] * x[1] + 2.0 * cos(x[1]);
  });
  auto f = SectionFamily::lie(G, alpha);
  const auto act = AlgebraAction::of(so3_coadjoint_fiber());
  const std::vector<double> m0{0.6, 0.0, 0.8};
  const double r1 = flow_commutation_residual(f, zero_field(1, 3), act, m0, {0.5, 1.0}, {0.5, 1.0}, 1e-3);
  const double r2 = flow_commutation_residual(f, zero_field(1, 3), act, m0, {0.5, 1.0}, {0.5, 1.0}, 5e-4);
  EXPECT_LT(r1, 1e-6);
  EXPECT_GE(r1 / r2, 8.0) << r1 << " " << r2;
  // a wrong beta (sign of the bracket flipped) is detected
  auto flipped = f;
  for (double& c : flipped.c) c = -c;
  EXPECT_GT(flow_commutation_residual(flipped, zero_field(1, 3), act, m0, {1.0}, {1.0}, 1e-2), 1e-3);
}
