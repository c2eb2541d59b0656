#include <doctest.h>

#include <cmath>

#include "moire/error.hpp"
#include "moire/gsfe.hpp"
#include "oracles.hpp"

using namespace moire;
using oracle::pi;

TEST_CASE("phi reference values") {
  const GsfeModel m;
  CHECK(phi(0, 0, m) == doctest::Approx(17.861).epsilon(1e-12));
  CHECK(phi(2 * pi / 3, 2 * pi / 3, m) == doctest::Approx(0.0005).epsilon(1e-9));
  CHECK(phi(4 * pi / 3, 4 * pi / 3, m) == doctest::Approx(0.0005).epsilon(1e-9));
  CHECK(phi(2 * pi / 3, 2 * pi / 3, m) < 1e-3);
  // Saddle between AB and BA.
  CHECK(phi(pi, pi, m) == doctest::Approx(oracle::phi_terms(pi, pi, m)).epsilon(1e-13));
}

TEST_CASE("phi agrees with a term-by-term evaluation and has the lattice symmetries") {
  const GsfeModel m;
  auto gen = oracle::rng(3);
  std::uniform_real_distribution<double> d(-10.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    const double v = d(gen), w = d(gen);
    const double p = phi(v, w, m);
    CHECK(p == doctest::Approx(oracle::phi_terms(v, w, m)).epsilon(1e-12));
    CHECK(phi(v + 2 * pi, w, m) == doctest::Approx(p).epsilon(1e-12));
    CHECK(phi(v, w - 2 * pi, m) == doctest::Approx(p).epsilon(1e-12));
    CHECK(phi(w, v, m) == doctest::Approx(p).epsilon(1e-12));
    CHECK(phi(-v, -w, m) == doctest::Approx(p).epsilon(1e-12));
    // Hexagonal cycle (v, w) -> (w, -v - w).
    CHECK(phi(w, -v - w, m) == doctest::Approx(p).epsilon(1e-12));
  }
}

TEST_CASE("phi gradient against central differences") {
  const GsfeModel m;
  auto gen = oracle::rng(4);
  std::uniform_real_distribution<double> d(-4.0, 4.0);
  const double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const double v = d(gen), w = d(gen);
    const PhiSample s = phi_with_gradient(v, w, m);
    CHECK(s.value == doctest::Approx(phi(v, w, m)).epsilon(1e-14));
    CHECK(s.dv == doctest::Approx((phi(v + h, w, m) - phi(v - h, w, m)) / (2 * h)).epsilon(1e-7).scale(1));
    CHECK(s.dw == doctest::Approx((phi(v, w + h, m) - phi(v, w - h, m)) / (2 * h)).epsilon(1e-7).scale(1));
    const double dv = 1e-9 * d(gen), dw = 1e-9 * d(gen);
    const double exact = oracle::phi_terms(v + dv, w + dw, m) - oracle::phi_terms(v, w, m);
    CHECK(phi_difference(v, w, dv, dw, m) == doctest::Approx(exact).epsilon(1e-5).scale(1e-12));
  }
  // Near the well the difference keeps relative precision.
  const double a = 2 * pi / 3;
  const moire::Mat2 hess = oracle::phi_hessian(a, a, m);
  const double t = 1e-7;
  CHECK(phi_difference(a, a, t, 0, m) == doctest::Approx(0.5 * hess(0, 0) * t * t).epsilon(1e-5));
}

TEST_CASE("layer GSFE") {
  const GsfeModel m;
  const LayerPair pair = layer_pair({Family::Twist, oracle::deg(1.0)}, Basis2::graphene());
  for (int layer : {1, 2}) {
    CHECK(gsfe_layer(Vec2::Zero(), layer, pair, m) == doctest::Approx(17.861));
    const Vec2 g(0.3, -0.7);
    const double h = 1e-6;
    const Vec2 grad = grad_gsfe_layer(g, layer, pair, m);
    for (int k = 0; k < 2; ++k) {
      Vec2 e = Vec2::Zero();
      e[k] = h;
      const double fd = (gsfe_layer(g + e, layer, pair, m) - gsfe_layer(g - e, layer, pair, m)) / (2 * h);
      CHECK(grad[k] == doctest::Approx(fd).epsilon(1e-6));
    }
    // Periodic under the other layer's lattice.
    const Mat2 other = (layer == 1 ? pair.layer2 : pair.layer1).matrix();
    CHECK(gsfe_layer(g + other * Vec2(2, -3), layer, pair, m) ==
          doctest::Approx(gsfe_layer(g, layer, pair, m)).epsilon(1e-10));
  }
  CHECK_THROWS_AS(gsfe_layer(Vec2::Zero(), 3, pair, m), InvalidArgument);
}

TEST_CASE("wall potential is a normalized even double well") {
  const GsfeModel m;
  const Basis2 a = Basis2::graphene();
  for (int i = 1; i <= 3; ++i) {
    const WallPotential u = wall_potential(a, i, 0.0, m);
    CHECK(u(1.0) == doctest::Approx(0.0).scale(1e-14));
    CHECK(u(-1.0) == doctest::Approx(0.0).scale(1e-14));
    for (double s : {0.0, 0.2, 0.5, 0.9, 1.1}) {
      CHECK(u(s) == doctest::Approx(u(-s)).epsilon(1e-9));
      CHECK(u.derivative(s) == doctest::Approx(-u.derivative(-s)).epsilon(1e-8).scale(1e-12));
    }
    CHECK(u(0.0) > u(0.5));
    // Second derivative at the wells is one.
    const double h = 1e-3;
    CHECK((u(1 + h) - 2 * u(1.0) + u(1 - h)) / (h * h) == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(u.half_width() > 1.0);

    // k_min from the analytic Hessian of phi at the AB well.
    const BurgersTriplet bt = burgers_triplet(i, a.lattice_constant());
    const Vec2 step = 2 * pi * a.inverse() * bt.half_burgers;
    const Vec2 well = 2 * pi * a.inverse() * (bt.saddle + bt.half_burgers);
    const double k = step.dot(oracle::phi_hessian(well[0], well[1], m) * step);
    CHECK(u.k_min() == doctest::Approx(k).epsilon(1e-6));
    CHECK(u.path_energy(0.0) == doctest::Approx(phi(pi, pi, m)).epsilon(1e-9));
  }
}

TEST_CASE("wall potential does not depend on the rotation of the bilayer") {
  const GsfeModel m;
  const Basis2 a = Basis2::graphene();
  const WallPotential u0 = wall_potential(a, 1, 0.0, m);
  for (double rot : {oracle::deg(10.0), oracle::deg(33.0), -1.0}) {
    const WallPotential ur = wall_potential(a, 1, rot, m);
    CHECK(ur.k_min() == doctest::Approx(u0.k_min()).epsilon(1e-9));
    for (double s : {0.0, 0.3, 0.8, 1.0})
      CHECK(ur(s) == doctest::Approx(u0(s)).epsilon(1e-9).scale(1e-12));
  }
}

TEST_CASE("wall potential rejects a single-well model") {
  GsfeModel flat;
  flat.c1 = -4.0;  // AA becomes the minimum.
  CHECK_THROWS_AS(wall_potential(Basis2::graphene(), 1, 0.0, flat), ModelInconsistency);
}

TEST_CASE("moduli validation") {
  CHECK_NOTHROW(ElasticModuli::graphene().validate());
  CHECK_THROWS_AS((ElasticModuli{1.0, 0.0}).validate(), InvalidArgument);
  CHECK_THROWS_AS((ElasticModuli{-3.0, 1.0}).validate(), InvalidArgument);
}
