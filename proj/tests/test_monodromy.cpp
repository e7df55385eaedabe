#include <cds/monodromy.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace cds;

namespace {

const double kPi = std::acos(-1.0);

std::vector<GeometricData> hopf_patches(const RealFunction& f) {
  auto s = hopf_example(f);
  return {s.data(0), s.data(1)};
}

RealFunction wavy() {
  return RealFunction::make([](const auto& x) { return sin(x) + x * x * x; });
}

double wavy_prime(double x) { return std::cos(x) + 3 * x * x; }

// R^2 x R with A_i = d_i c(b), c = sin(b0) b1: flat, trivialized by y = x - c(b).
struct Gauged {
  GeometricData d;
  Trivialization triv;
};

Gauged gauged_plane() {
  Gauged g;
  g.d.space = {CoordinateDomain::cube(2, -3.0, 3.0), CoordinateDomain::cube(1, -5.0, 5.0)};
  g.d.name = "gauged-plane";
  g.d.pi_V = zero_field(3, 0, Valence::bivector, 2);
  g.d.gamma = {2, 1, Field::make(3, 2, Valence::map, 1, [](const auto* e, auto* A) {
                 A[0] = cos(e[0]) * e[1];
                 A[1] = sin(e[0]);
               })};
  g.d.omega_H = Field::make(3, 1, Valence::form, 2, [](const auto* e, auto* w) {
    auto y = e[2] - sin(e[0]) * e[1];
    w[0] = exp(y) * (1.0 + e[0] * e[0]);
  });
  g.triv.to_triv = [](const std::vector<double>& b, const std::vector<D1>& x) {
    return std::vector<D1>{x[0] - std::sin(b[0]) * b[1]};
  };
  g.triv.from_triv = [](const std::vector<double>& b, const std::vector<D1>& y) {
    return std::vector<D1>{y[0] + std::sin(b[0]) * b[1]};
  };
  return g;
}

TransgressOptions grid(int n) {
  TransgressOptions o;
  o.n_t = n;
  o.n_eps = n;
  return o;
}

}  // namespace

TEST(Families, BoundaryCollapse) {
  for (const auto& f : {round_sphere_family(), family_by_name("round-sphere-reparameterized"), cap_family(1.0),
                        disk_family({0.2, -0.1}, 0.7), round_sphere_family().then(round_sphere_family())})
    EXPECT_LT(f.collapse_defect(), 1e-12) << f.name;
}

TEST(Families, PartialsMatchDifferences) {
  for (const auto& f : {round_sphere_family(), family_by_name("round-sphere-reparameterized"), cap_family(2.0)}) {
    for (double t : {0.13, 0.5, 0.81})
      for (double e : {0.07, 0.44, 0.93}) {
        double b[2], bt[2], be[2], p[2], q[2], dummy[4];
        const int c = f.at(t, e, b, bt, be);
        const double h = 1e-6;
        // stay in one chart for the difference
        ASSERT_EQ(f.at(t + h, e, p, dummy, dummy + 2), c);
        ASSERT_EQ(f.at(t - h, e, q, dummy, dummy + 2), c);
        for (int i = 0; i < 2; ++i) EXPECT_NEAR(bt[i], (p[i] - q[i]) / (2 * h), 1e-5 * (1 + std::abs(bt[i])));
        f.at(t, e + h, p, dummy, dummy + 2);
        f.at(t, e - h, q, dummy, dummy + 2);
        for (int i = 0; i < 2; ++i) EXPECT_NEAR(be[i], (p[i] - q[i]) / (2 * h), 1e-5 * (1 + std::abs(be[i])));
      }
  }
}

TEST(Families, RegistryErrors) {
  EXPECT_THROW(family_by_name("torus"), std::invalid_argument);
  EXPECT_THROW(family_by_name("cap(abc)"), std::invalid_argument);
  EXPECT_THROW(family_by_name("cap(4)"), std::invalid_argument);
  EXPECT_NO_THROW(family_by_name("cap(0.5)"));
}

TEST(Transgress, HopfFullSphereIsFourPiFPrime) {
  const double x0 = 0.4;
  auto v = transgress(hopf_patches(wavy()), round_sphere_family(), {x0});
  EXPECT_NEAR(v.endpoint[0], 4 * kPi * wavy_prime(x0), 1e-6);
  // slices at eps = 0, 1 are constant loops
  EXPECT_NEAR(v.covectors.front()[0], 0.0, 1e-12);
  EXPECT_NEAR(v.covectors.back()[0], 0.0, 1e-12);
}

TEST(Transgress, HopfCapsScaleWithArea) {
  const double x0 = -0.3;
  for (double th : {kPi / 3, kPi / 2, 2 * kPi / 3}) {
    auto v = transgress(hopf_patches(wavy()), cap_family(th), {x0});
    EXPECT_NEAR(v.endpoint[0], 2 * kPi * (1 - std::cos(th)) * wavy_prime(x0), 1e-6) << th;
  }
}

TEST(Transgress, AgreesWithFlatOracleOnFamilies) {
  const auto patches = hopf_patches(wavy());
  std::vector<SphereFamily> fams{round_sphere_family(), family_by_name("round-sphere-reparameterized"),
                                 round_sphere_family(1.0, {-0.5, 0.25}), cap_family(kPi / 3), cap_family(kPi / 2),
                                 cap_family(2.5)};
  for (const auto& f : fams) {
    auto a = transgress(patches, f, {0.7}).endpoint;
    auto b = transgress_flat(patches, f, {0.7});
    EXPECT_NEAR(a[0], b[0], 1e-6) << f.name;
  }
  const auto so3 = so3_sphere_data(RealFunction::make([](const auto& r) { return exp(0.5 * r); }));
  for (const auto& f : fams) {
    std::vector<double> x0{0.3, -0.2, 0.5};
    auto a = transgress(so3, f, x0).endpoint;
    auto b = transgress_flat(so3, f, x0);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(a[i], b[i], 1e-6) << f.name;
  }
}

TEST(Transgress, GaugedFlatConnectionMatchesTrivializedOracle) {
  auto g = gauged_plane();
  const auto fam = disk_family({0.1, 0.3}, 0.8);
  const double x0 = 0.25;
  auto v = transgress(g.d, fam, {x0});
  auto o = transgress_flat(g.d, fam, {x0}, g.triv);
  EXPECT_NEAR(v.endpoint[0], o[0], 1e-6);
  // closed form: exp(y0) * int_disk (1 + b0^2), y0 = x0 - c(b*)
  const double y0 = x0 - std::sin(0.9) * 0.3;
  const double R = 0.8, c0 = 0.1;
  const double integral = kPi * R * R * (1 + c0 * c0) + kPi * R * R * R * R / 4;
  EXPECT_NEAR(v.endpoint[0], std::exp(y0) * integral, 1e-6);
  // the loops are not horizontal-trivial, yet gamma~ returns to x0 since the connection is flat
  for (const auto& p : v.base_points) EXPECT_NEAR(p[0], x0, 1e-9);
}

TEST(Transgress, HomotopyInvariance) {
  const auto patches = hopf_patches(wavy());
  auto a = transgress(patches, round_sphere_family(), {1.1}).endpoint[0];
  auto b = transgress(patches, family_by_name("round-sphere-reparameterized"), {1.1}).endpoint[0];
  EXPECT_NEAR(a, b, 1e-6);
}

TEST(Transgress, AdditiveUnderConcatenation) {
  const auto patches = hopf_patches(wavy());
  const auto f1 = round_sphere_family(), f2 = family_by_name("round-sphere-reparameterized");
  auto a = transgress(patches, f1, {0.2}).endpoint[0];
  auto b = transgress(patches, f2, {0.2}).endpoint[0];
  auto ab = transgress(patches, f1.then(f2), {0.2}, grid(256)).endpoint[0];
  EXPECT_NEAR(ab, a + b, 1e-6);
}

TEST(Transgress, DegenerateFamilyGivesZero) {
  auto g = gauged_plane();
  auto v = transgress(g.d, degenerate_family({0.0, 0.0}, 0.5), {0.1}, grid(32));
  for (const auto& c : v.covectors) EXPECT_NEAR(c[0], 0.0, 1e-12);
}

TEST(Transgress, SimpsonConvergence) {
  const auto patches = hopf_patches(RealFunction::make([](const auto& x) { return exp(x) * cos(2.0 * x); }));
  const auto fam = cap_family(2.0);
  double prev = 0.0, prev_change = 0.0;
  int checked = 0;
  for (int n : {8, 16, 32, 64}) {
    const double v = transgress(patches, fam, {0.3}, grid(n)).endpoint[0];
    if (n > 8) {
      const double change = std::abs(v - prev);
      if (n > 16) {
        EXPECT_LT(change, prev_change / 8) << n;
        ++checked;
      }
      prev_change = change;
    }
    prev = v;
  }
  EXPECT_EQ(checked, 2);
}

TEST(Transgress, CurvedConnectionBasePointsFollowHolonomy) {
  // over Hopf with the rotation-plane fiber the slices carry nontrivial holonomy
  YMHSetting s{hopf_principal(), rotation_plane_fiber()};
  std::vector<GeometricData> patches{s.data(0), s.data(1)};
  auto v = transgress(patches, cap_family(1.0), {0.6, 0.0}, grid(16));
  // gamma~(eps) has the radius of x0 (rotation holonomy) and turns through the enclosed curvature
  double moved = 0.0;
  for (const auto& p : v.base_points) {
    EXPECT_NEAR(std::hypot(p[0], p[1]), 0.6, 1e-9);
    moved = std::max(moved, std::hypot(p[0] - 0.6, p[1]));
  }
  EXPECT_GT(moved, 0.1);
  EXPECT_THROW(transgress_flat(patches, cap_family(1.0), {0.6, 0.0}), NonFlatInput);
}

TEST(Transgress, InputErrors) {
  auto g = gauged_plane();
  SphereFamily broken = disk_family({0.0, 0.0}, 0.5);
  broken.base_point = {0.0, 0.0};
  EXPECT_THROW(transgress(g.d, broken, {0.0}), CollapseError);
  EXPECT_THROW(transgress(g.d, disk_family({0.0, 0.0}, 0.5), {0.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(transgress(g.d, disk_family({0.0, 0.0}, 0.5), {0.0}, grid(7)), std::invalid_argument);
}

TEST(Lattice, IsotropyCenter) {
  const auto d = so3_sphere_data(RealFunction::make([](const auto& r) { return r; }))[1];
  EXPECT_EQ(isotropy_center(d, {0, 0, 0.3, 0.4, 0.0}).cols(), 1);
  EXPECT_EQ(isotropy_center(d, {0, 0, 0, 0, 0}).cols(), 0);
  Mat Z = isotropy_center(d, {0, 0, 0.3, 0.4, 0.0});
  EXPECT_NEAR(std::abs(Z(0, 0) * 0.6 + Z(1, 0) * 0.8), 1.0, 1e-10);
}

TEST(Lattice, LinearProfileGivesConstantGenerator) {
  const double alpha = 2.0, beta = 0.7;
  auto f = RealFunction::make([=](const auto& r) { return alpha * r + beta; });
  auto rep = so3_lattice(f, {0.0, 0.3, 0.6, 1.0}, {{0, 0, 1}, {1, 1, 0}, {0.2, -1, 0.5}});
  EXPECT_TRUE(rep.degenerate[0]);
  EXPECT_EQ(rep.dr_values[0], 0.0);
  for (std::size_t k = 1; k < rep.dr_values.size(); ++k) EXPECT_NEAR(rep.dr_values[k], 8 * kPi, 1e-6);
  EXPECT_LT(rep.constancy_deviation, 1e-6);
  EXPECT_EQ(integrability_verdict(rep, Rational::parse("2")).verdict, Integrability::integrable_candidate);
  EXPECT_EQ(integrability_verdict(rep, Rational::parse("3/2")).verdict, Integrability::inconclusive);
  EXPECT_EQ(integrability_verdict(rep, std::nullopt).verdict, Integrability::inconclusive);
}

TEST(Lattice, GeneratorMatchesDualDerivative) {
  auto f = RealFunction::make([](const auto& r) { return r * r * r - sin(r); });
  auto rep = so3_lattice(f, {0.2, 0.5, 0.9}, {{0, 1, 0}});
  for (std::size_t k = 0; k < rep.radii.size(); ++k) {
    const double fp = f(D1(rep.radii[k], 1.0)).d;
    EXPECT_NEAR(rep.dr_values[k], 4 * kPi * fp, 1e-6);
    // the generator is radial
    EXPECT_NEAR(rep.generators[k][0], 0.0, 1e-9);
    EXPECT_NEAR(rep.generators[k][2], 0.0, 1e-9);
  }
  EXPECT_EQ(integrability_verdict(rep, Rational::parse("1")).verdict, Integrability::non_integrable);
}

TEST(Lattice, VerdictErrors) {
  EXPECT_THROW(integrability_verdict(LatticeReport{}, std::nullopt), std::invalid_argument);
  EXPECT_THROW(Rational::parse("1/0"), std::invalid_argument);
  EXPECT_THROW(Rational::parse("0.5"), std::invalid_argument);
  EXPECT_EQ(Rational::parse("-3/4").value(), -0.75);
}
