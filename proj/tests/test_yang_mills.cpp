#include <cds/yang_mills.hpp>

#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace cds;
using namespace cds_test;

namespace {

std::vector<std::vector<double>> pts(const CoordinateDomain& d, int count = 24) { return sample_grid(d, count); }

std::vector<std::vector<double>> total_points(const GeometricData& d, int count = 24) {
  return sample_grid(d.space.lower(), d.space.upper(), count);
}

std::vector<Field> fiber_test_forms(int m) {
  std::vector<Field> out;
  out.push_back(Field::make(m, m, Valence::covector, 1, [m](const auto* x, auto* o) {
    for (int a = 0; a < m; ++a) o[a] = x[a] * x[(a + 1) % m] + 0.5;
  }));
  out.push_back(Field::make(m, m, Valence::covector, 1, [m](const auto* x, auto* o) {
    for (int a = 0; a < m; ++a) o[a] = sin(x[(a + m - 1) % m]) + x[a] * x[a] * x[a];
  }));
  return out;
}

}  // namespace

TEST(Group, StructureConstantsMatchCommutators) {
  EXPECT_LT(GroupModel::u1().structure_defect(), 1e-12);
  EXPECT_LT(GroupModel::so3().structure_defect(), 1e-12);
}

TEST(Group, ExponentialIsOrthogonalAndMatchesRodrigues) {
  auto G = GroupModel::so3();
  auto I = G.exp(std::vector<double>{0.0, 0.0, 0.0});
  EXPECT_LT(max_diff(I, mat::identity<double>(3)), 1e-15);
  std::vector<double> xi{0.3, -1.2, 2.0};
  auto g = G.exp(xi);
  EXPECT_LT(max_diff(mat::mul(g, mat::transpose(g, 3), 3), mat::identity<double>(3)), 1e-13);
  // Rodrigues oracle: exp(K) = I + sin(t) K/t + (1 - cos t) K^2/t^2.
  const double t = std::sqrt(0.09 + 1.44 + 4.0);
  auto K = G.algebra_matrix(xi.data());
  auto K2 = mat::mul(K, K, 3);
  std::vector<double> R(9);
  for (int q = 0; q < 9; ++q) R[q] = (q % 4 == 0 ? 1.0 : 0.0) + std::sin(t) / t * K[q] + (1 - std::cos(t)) / (t * t) * K2[q];
  EXPECT_LT(max_diff(g, R), 1e-12);
  auto u = GroupModel::u1().exp(std::vector<double>{0.7});
  EXPECT_NEAR(u[0], std::cos(0.7), 1e-15);
  EXPECT_NEAR(u[2], std::sin(0.7), 1e-15);
}

TEST(Principal, CurvatureMatchesDifferences) {
  auto P = so3_polynomial_principal(3);
  auto Om = P.curvature();
  auto A = as_fn(P.A[0]);
  for (auto& b : pts(P.base, 16)) {
    auto a = A(b);
    std::vector<std::vector<double>> dA(3);
    for (int j = 0; j < 3; ++j) dA[j] = fd_partial(A, b, j);
    auto w = Om(b);
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
          double o = dA[i][k * 3 + j] - dA[j][k * 3 + i];
          for (int l = 0; l < 3; ++l)
            for (int m = 0; m < 3; ++m) o += P.group.structure(k, l, m) * a[l * 3 + i] * a[m * 3 + j];
          EXPECT_NEAR(w[k * 3 + pair_index(3, i, j)], o, 1e-8);
        }
  }
}

TEST(Principal, BianchiIdentity) {
  auto P = so3_polynomial_principal(3);
  auto B = bianchi_defect(P.group, P.A[0], P.curvature());
  for (auto& b : pts(P.base, 32)) EXPECT_LT(max_abs(B(b)), 1e-12);
  // a non-curvature 2-form fails it
  auto fake = Field::make(3, 9, Valence::form, 2, [](const auto* b, auto* out) {
    for (int c = 0; c < 9; ++c) out[c] = b[c % 3] * b[(c + 1) % 3];
  });
  double worst = 0.0;
  for (auto& b : pts(P.base, 8)) worst = std::max(worst, max_abs(bianchi_defect(P.group, P.A[0], fake)(b)));
  EXPECT_GT(worst, 1e-2);
}

TEST(Principal, GaugeTransformConjugatesCurvature) {
  auto P = so3_polynomial_principal(2);
  auto xi = Field::make(2, 3, Valence::map, 1, [](const auto* b, auto* out) {
    out[0] = 0.4 * b[0] * b[1];
    out[1] = sin(b[0]) - 0.2;
    out[2] = 0.7 * b[1];
  });
  auto A2 = gauge_transform(P.group, P.A[0], xi);
  auto Om1 = P.curvature(), Om2 = principal_curvature(P.group, A2);
  for (auto& b : pts(P.base, 16)) {
    auto g = P.group.exp(xi(b));
    Mat Ad_inv = P.group.Ad(mat::transpose(g, 3));
    auto w1 = Om1(b), w2 = Om2(b);
    for (int k = 0; k < 3; ++k) {
      double expect = 0.0;
      for (int l = 0; l < 3; ++l) expect += Ad_inv(k, l) * w1[l];
      EXPECT_NEAR(w2[k], expect, 1e-8);
    }
  }
}

TEST(Principal, HopfTwoChartData) {
  auto P = hopf_principal();
  // curvature from the connection form matches the round area density
  auto Om = principal_curvature(P.group, P.A[0]);
  for (auto& b : pts(P.base, 24)) EXPECT_NEAR(Om(b)[0], sphere::area_density(b[0], b[1]), 1e-12);
  // on the overlap, A_1 pulled back by the transition differs from A_0 by a closed form,
  // and the curvature pulls back to itself (Ad is trivial for U(1))
  auto A1 = P.A[1];
  auto pulled = Field::make(2, 2, Valence::map, 1, [A1](const auto* b, auto* out) {
    using S = scalar_of<decltype(out)>;
    std::vector<Dual<S>> bb(2);
    std::vector<S> J(4), w(2);
    for (int j = 0; j < 2; ++j) {
      bb[0] = Dual<S>(b[0], S(j == 0 ? 1.0 : 0.0));
      bb[1] = Dual<S>(b[1], S(j == 1 ? 1.0 : 0.0));
      auto t = sphere::transition(bb[0], bb[1]);
      J[0 * 2 + j] = t[0].d;
      J[1 * 2 + j] = t[1].d;
      if (j == 0) {
        S tv[2] = {t[0].v, t[1].v};
        A1.eval(tv, w.data());
      }
    }
    for (int i = 0; i < 2; ++i) out[i] = w[0] * J[0 * 2 + i] + w[1] * J[1 * 2 + i];
  });
  auto diff = add(pulled, P.A[0], -1.0);
  diff.valence = Valence::covector;
  diff.degree = 1;
  auto ddiff = exterior_derivative(diff);
  for (auto& b : sample_grid({0.4, 0.4}, {1.4, 1.4}, 16)) {
    EXPECT_LT(std::abs(ddiff(b)[0]), 1e-10);
    auto t = sphere::transition(b[0], b[1]);
    const double jac = [&] {
      auto fa = [&](const std::vector<double>& x) {
        auto r = sphere::transition(x[0], x[1]);
        return std::vector<double>{r[0], r[1]};
      };
      auto c0 = fd_partial(fa, b, 0), c1 = fd_partial(fa, b, 1);
      return c0[0] * c1[1] - c0[1] * c1[0];
    }();
    EXPECT_GT(jac, 0.0);
    EXPECT_NEAR(sphere::area_density(t[0], t[1]) * jac, sphere::area_density(b[0], b[1]), 1e-8);
  }
}

TEST(Fiber, CoadjointConventionsHold) {
  auto G = GroupModel::so3();
  auto H = so3_coadjoint_fiber();
  auto s = pts(H.fiber, 16);
  EXPECT_LT(homomorphism_defect(H, G, s), 1e-12);
  EXPECT_LT(hamiltonian_defect(H, G, s), 1e-12);
  EXPECT_LT(equivariance_defect(H, G, s, {{0.3, -0.4, 0.5}, {1.0, 0.2, -0.7}}), 1e-8);
}

TEST(Fiber, RotationPlaneConventionsHold) {
  auto G = GroupModel::u1();
  auto H = rotation_plane_fiber();
  auto s = pts(H.fiber, 16);
  EXPECT_LT(homomorphism_defect(H, G, s), 1e-12);
  EXPECT_LT(hamiltonian_defect(H, G, s), 1e-12);
  EXPECT_LT(equivariance_defect(H, G, s, {{0.8}, {-2.0}}), 1e-8);
}

TEST(Fiber, WrongSignMomentMapIsDetected) {
  auto G = GroupModel::so3();
  auto H = so3_coadjoint_fiber();
  H.mu = scale(H.mu, -1.0);
  EXPECT_GT(hamiltonian_defect(H, G, pts(H.fiber, 8)), 1e-2);
}

TEST(YMH, HopfDataIsCouplingForPolynomialMomentMaps) {
  for (auto f : {RealFunction::make([](const auto& x) { return x; }),
                 RealFunction::make([](const auto& x) { return x * x * x - x + 0.5; })}) {
    auto d = hopf_example(f).data();
    auto r = check_coupling_conditions(d, total_points(d));
    EXPECT_TRUE(r.coupling()) << r.worst();
    EXPECT_LT(dirac_closure_residual(d, total_points(d, 12)), 1e-8);
  }
}

TEST(YMH, HopfLeafFormIsMomentTimesArea) {
  auto f = RealFunction::make([](const auto& x) { return x * x - 2.0 * x; });
  auto d = hopf_example(f).data();
  for (auto& e : total_points(d, 16)) {
    auto fr = assemble_dirac(d, e);
    Vec X = Vec::Zero(3), Y = Vec::Zero(3);
    X(0) = 1.0;
    Y(1) = 1.0;
    auto v = leaf_two_form(fr.rows, X, Y);
    EXPECT_NEAR(v.value, f(e[2]) * sphere::area_density(e[0], e[1]), 1e-8);
    EXPECT_LT(v.choice_gap, 1e-12);
    // the fiber direction is not tangent to the leaf
    Vec Z = Vec::Zero(3);
    Z(2) = 1.0;
    EXPECT_THROW(leaf_two_form(fr.rows, Z, Y), std::invalid_argument);
  }
}

TEST(YMH, ConstantMomentMapHasNoVerticalDifferential) {
  auto d = hopf_example(RealFunction::make([](const auto& x) { return 0.0 * x + 1.5; })).data();
  auto dv = vertical_differential(d.omega_H, 2);
  for (auto& e : total_points(d, 8)) EXPECT_EQ(dv(e)[0], 0.0);
}

TEST(YMH, ZeroMomentMapGivesZeroForm) {
  auto S = hopf_example(RealFunction::make([](const auto& x) { return 0.0 * x; }));
  auto d = S.data();
  for (auto& e : total_points(d, 8)) EXPECT_EQ(d.omega_H(e)[0], 0.0);
}

TEST(YMH, So3CoadjointDataIsCoupling) {
  for (int n : {2, 3}) {
    YMHSetting S{so3_polynomial_principal(n), so3_coadjoint_fiber()};
    auto d = S.data();
    auto r = check_coupling_conditions(d, total_points(d, 16));
    EXPECT_LT(r.worst(), 1e-8) << "n = " << n << ": " << r.poisson << " " << r.invariance << " " << r.closed << " "
                               << r.curvature;
  }
}

TEST(YMH, RotationPlaneOverHopfIsCouplingForm) {
  YMHSetting S{hopf_principal(), rotation_plane_fiber()};
  auto d = S.data();
  auto p = total_points(d, 16);
  EXPECT_TRUE(check_coupling_conditions(d, p).coupling());
  EXPECT_LT(dirac_closure_residual(d, p), 1e-8);
  // curvature of Gamma is non-zero: this is not the flat case
  auto F = curvature(d.gamma, coordinate_vector(2, 0), coordinate_vector(2, 1));
  EXPECT_GT(max_abs(F(p[3])), 1e-2);
}

TEST(YMH, RegistryNames) {
  auto f = RealFunction::make([](const auto& x) { return x; });
  for (auto& name : builtin_settings()) {
    auto d = builtin_setting(name, f).data();
    EXPECT_TRUE(check_coupling_conditions(d, total_points(d, 8)).coupling()) << name;
  }
  EXPECT_THROW(builtin_setting("nope", f), std::invalid_argument);
}

TEST(Prehamiltonian, TrivialActionsVanish) {
  auto H = trivial_line_fiber(RealFunction::make([](const auto& x) { return x * x; }));
  EXPECT_LT(prehamiltonian_residual(H, GroupModel::u1(), pts(H.fiber, 8), fiber_test_forms(1)), 1e-12);
}

TEST(Prehamiltonian, CoadjointAndRotationFibers) {
  auto H = so3_coadjoint_fiber();
  EXPECT_LT(prehamiltonian_residual(H, GroupModel::so3(), pts(H.fiber, 8), fiber_test_forms(3)), 1e-6);
  auto R = rotation_plane_fiber();
  EXPECT_LT(prehamiltonian_residual(R, GroupModel::u1(), pts(R.fiber, 8), fiber_test_forms(2)), 1e-6);
}

TEST(Prehamiltonian, NonHamiltonianMomentMapFails) {
  auto H = so3_coadjoint_fiber();
  H.mu = Field::make(3, 3, Valence::map, 1, [](const auto* x, auto* out) {
    out[0] = x[0] * x[1];
    out[1] = x[1];
    out[2] = x[2];
  });
  EXPECT_GT(prehamiltonian_residual(H, GroupModel::so3(), pts(H.fiber, 8), fiber_test_forms(3)), 1e-3);
}
