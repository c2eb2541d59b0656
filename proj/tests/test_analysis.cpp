#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "moire/analysis.hpp"
#include "moire/error.hpp"
#include "oracles.hpp"

using namespace moire;

namespace {

const Basis2 kRef = Basis2::graphene();
const GsfeModel kModel;
const ElasticModuli kModuli;

struct Relaxed {
  LayerPair pair;
  MoireCell cell;
  DisplacementField field;
};

const Relaxed& relaxed_twist() {
  static const Relaxed r = [] {
    const LayerPair pair = layer_pair({Family::Twist, oracle::deg(0.3)}, kRef);
    RelaxOptions opt;
    opt.grid_n = 256;
    const RelaxResult res = relax(pair, kModel, kModuli, opt);
    REQUIRE(res.converged());
    return Relaxed{pair, moire_cell(pair, 256), res.field};
  }();
  return r;
}

OrderParameterProfile profile(const Relaxed& r, int triplet, Projection proj = Projection::Burgers) {
  const LineCut cut = wall_normal_cut(r.cell, kRef, triplet);
  const WallSpec spec = make_wall_spec(kRef, triplet, 0.0, kModuli, kModel, cut_angle(cut));
  return order_parameter(r.field, r.pair, kRef, spec, cut, proj);
}

}  // namespace

TEST_CASE("FWHM of a tanh profile") {
  const double l = 3.7;
  std::vector<double> y, u;
  for (int i = -40; i <= 40; ++i) {
    y.push_back(0.5 * i);
    u.push_back(std::tanh(0.5 * i / (2 * l)));
  }
  const FwhmResult r = fwhm(y, u);
  CHECK(r.interpolation_order == 3);
  CHECK(r.width == doctest::Approx(2 * std::log(3.0) * l).epsilon(1e-4));
  CHECK(r.y_plus == doctest::Approx(std::log(3.0) * l).epsilon(1e-4));
  CHECK(r.y_minus == doctest::Approx(-std::log(3.0) * l).epsilon(1e-4));

  // A profile that never reaches +1/2.
  std::vector<double> low(u);
  for (double& x : low) x = std::min(x, 0.4);
  CHECK_THROWS_AS(fwhm(y, low), UnresolvedWall);
}

TEST_CASE("wall labels and triplet selection") {
  CHECK(wall_type(oracle::pi / 2) == "shear");
  CHECK(wall_type(-oracle::pi / 2) == "shear");
  CHECK(wall_type(0.0) == "tensile");
  CHECK(wall_type(oracle::pi) == "tensile");
  CHECK(wall_type(oracle::pi / 3) == "mixed");
  CHECK(table2_triplets(Family::Twist) == std::vector<int>{1});
  CHECK(table2_triplets(Family::PureShear) == std::vector<int>{1, 2});
}

TEST_CASE("spectral interpolation reproduces nodal values") {
  const LayerPair pair = layer_pair({Family::Twist, oracle::deg(2.0)}, kRef);
  const MoireCell cell = moire_cell(pair, 16);
  RelaxOptions opt;
  opt.grid_n = 16;
  const RelaxResult r = relax(pair, kModel, kModuli, opt);
  const SpectralInterpolator interp(r.field);
  for (int j = 0; j < r.field.nodes(); j += 7) {
    const Vec2 v = r.field.at(1, j) - r.field.at(2, j);
    CHECK((interp(r.field.position(j)) - v).norm() < 1e-12);
    // Periodic under moire translations.
    CHECK((interp(r.field.position(j) + cell.basis() * Vec2(1, -2)) - v).norm() < 1e-11);
  }
}

TEST_CASE("rigid GSFE map") {
  const LayerPair pair = layer_pair({Family::Twist, oracle::deg(1.0)}, kRef);
  const MoireCell cell = moire_cell(pair, 32);
  const DisplacementField zero = DisplacementField::zero(cell);
  for (MapCentering c : {MapCentering::Origin, MapCentering::AA}) {
    const GsfeMap map = gsfe_map(zero, pair, kModel, 40, c);
    CHECK(map.width == 40);
    CHECK(map.height == 40);
    double lo = 1e9, hi = -1e9;
    for (int r = 0; r < 40; ++r)
      for (int col = 0; col < 40; ++col) {
        const double shift = c == MapCentering::AA ? 0.5 : 0.0;
        const Vec2 eta(double(col) / 40 + shift, double(39 - r) / 40 + shift);
        const Vec2 xi = cell.difference() * cell.grid_basis() * eta;
        const Vec2 a = 2 * oracle::pi * xi;  // v = 0
        const double expect = oracle::phi_terms(a.x(), a.y(), kModel);
        const double got = map.values[r * 40 + col];
        CHECK(got == doctest::Approx(expect).epsilon(1e-10));
        lo = std::min(lo, got), hi = std::max(hi, got);
      }
    CHECK(map.min == lo);
    CHECK(map.max == hi);
  }
  CHECK_THROWS_AS(gsfe_map(zero, pair, kModel, 41, MapCentering::AA), InvalidArgument);
}

TEST_CASE("GSFE map files") {
  const LayerPair pair = layer_pair({Family::Twist, oracle::deg(1.0)}, kRef);
  const DisplacementField zero = DisplacementField::zero(moire_cell(pair, 16));
  const GsfeMap map = gsfe_map(zero, pair, kModel, 8);
  const auto dir = std::filesystem::temp_directory_path() / "moire_map_test";
  std::filesystem::create_directories(dir);
  write_gsfe_map(dir / "map", map, 2.0);
  std::ifstream ppm(dir / "map.ppm", std::ios::binary);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  ppm >> magic >> w >> h >> maxval;
  CHECK(magic == "P6");
  CHECK(w == 8);
  CHECK(h == 8);
  CHECK(maxval == 255);
  CHECK(std::filesystem::file_size(dir / "map.ppm") >= 8u * 8u * 3u);
  CHECK(std::filesystem::exists(dir / "map.txt"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("unrelaxed order parameter is affine along the cut") {
  const LayerPair pair = layer_pair({Family::Twist, oracle::deg(1.0)}, kRef);
  const MoireCell cell = moire_cell(pair, 32);
  const DisplacementField zero = DisplacementField::zero(cell);
  for (int triplet = 1; triplet <= 3; ++triplet) {
    const LineCut cut = wall_normal_cut(cell, kRef, triplet, 0.2, 241);
    const WallSpec spec = make_wall_spec(kRef, triplet, 0.0, kModuli, kModel, cut_angle(cut));
    const OrderParameterProfile p = order_parameter(zero, pair, kRef, spec, cut);
    REQUIRE(p.u.size() == 241u);
    CHECK(p.u.front() == doctest::Approx(-1.2).epsilon(1e-9));
    CHECK(p.u.back() == doctest::Approx(1.2).epsilon(1e-9));
    CHECK(p.u[120] == doctest::Approx(0.0).scale(1e-9));
    CHECK(p.y[120] == doctest::Approx(0.0).scale(1e-6));
    for (std::size_t j = 1; j + 1 < p.u.size(); ++j) CHECK(std::abs(p.u[j + 1] - 2 * p.u[j] + p.u[j - 1]) < 1e-10);
    // Pure shear of the stacking: translation perpendicular to the cut.
    CHECK(std::abs(std::cos(p.translation_angle)) < 1e-9);
  }
}

TEST_CASE("a non-monotone profile is ambiguous") {
  const LayerPair pair = layer_pair({Family::Twist, oracle::deg(1.0)}, kRef);
  const MoireCell cell = moire_cell(pair, 64);
  const BurgersTriplet bt = burgers_triplet(1, kRef.lattice_constant());
  // v oscillates along the cut faster than the rigid stacking advances.
  DisplacementField f = DisplacementField::zero(cell);
  for (int j = 0; j < f.nodes(); ++j) {
    const double e1 = double(j / 64) / 64, e2 = double(j % 64) / 64;
    const Vec2 v = 2.0 * bt.half_burgers * std::sin(2 * oracle::pi * 5 * (e1 + e2));
    f.component(1, 0)[j] = v.x();
    f.component(1, 1)[j] = v.y();
  }
  const LineCut cut = wall_normal_cut(cell, kRef, 1);
  const WallSpec spec = make_wall_spec(kRef, 1, 0.0, kModuli, kModel, cut_angle(cut));
  CHECK_THROWS_AS(order_parameter(f, pair, kRef, spec, cut), AmbiguousCut);

  // A cut along the wall never changes sign.
  LineCut along = cut;
  const Vec2 mid = 0.5 * (cut.p0 + cut.p1);
  const Vec2 t = Vec2(-(cut.p1 - cut.p0).y(), (cut.p1 - cut.p0).x());
  along.p0 = mid + 0.3 * (cut.p1 - cut.p0);
  along.p1 = along.p0 + 0.2 * t;
  CHECK_THROWS_AS(order_parameter(DisplacementField::zero(cell), pair, kRef, spec, along), UnresolvedWall);
}

TEST_CASE("relaxed twist walls") {
  const Relaxed& r = relaxed_twist();
  const WallSpec spec = make_wall_spec(kRef, 1, 0.0, kModuli, kModel, oracle::pi / 2);
  const KinkSolution kink = solve_kink(spec, 14.0, 4801);
  const double l = characteristic_width(spec).l_perp;

  double widths[3];
  for (int t = 1; t <= 3; ++t) {
    const OrderParameterProfile p = profile(r, t);
    widths[t - 1] = fwhm(p).width;
    // Domain centres sit at the Bernal stackings.
    CHECK(p.u.back() == doctest::Approx(1.0).epsilon(2e-2));
    CHECK(p.u.front() == doctest::Approx(-1.0).epsilon(2e-2));
    if (t == 1) {
      // Collapse onto the kink: u(y) against psi(y / l), linear interpolation of the kink grid.
      double worst = 0.0;
      for (std::size_t j = 0; j < p.y.size(); ++j) {
        const double s = p.y[j] / l;
        if (std::abs(s) > 10.0) continue;
        const double pos = (s - kink.t.front()) / kink.step();
        const std::size_t i = std::min<std::size_t>(std::size_t(pos), kink.size() - 2);
        const double f = pos - double(i);
        const double psi = (1 - f) * kink.psi[i] + f * kink.psi[i + 1];
        worst = std::max(worst, std::abs(p.u[j] - psi));
      }
      CHECK(worst < 0.03);
    }
  }
  CHECK(widths[1] == doctest::Approx(widths[0]).epsilon(1e-2));
  CHECK(widths[2] == doctest::Approx(widths[0]).epsilon(1e-2));
  // The fitted direction agrees with the Burgers direction for a twist.
  CHECK(fwhm(profile(r, 1, Projection::Fitted)).width == doctest::Approx(widths[0]).epsilon(1e-2));
}

TEST_CASE("relaxed map has one AA region per cell") {
  const Relaxed& r = relaxed_twist();
  const GsfeMap map = gsfe_map(r.field, r.pair, kModel, 128);
  const int n = map.width;
  const double level = 0.5 * (map.min + map.max);
  // Connected components above the midpoint level on the periodic raster.
  std::vector<int> label(map.values.size(), -1);
  int regions = 0;
  for (int start = 0; start < n * n; ++start) {
    if (map.values[start] <= level || label[start] >= 0) continue;
    std::vector<int> stack{start};
    label[start] = regions;
    while (!stack.empty()) {
      const int k = stack.back();
      stack.pop_back();
      const int row = k / n, col = k % n;
      const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
      for (const auto& d : nb) {
        const int q = ((row + d[0] + n) % n) * n + (col + d[1] + n) % n;
        if (map.values[q] > level && label[q] < 0) {
          label[q] = regions;
          stack.push_back(q);
        }
      }
    }
    ++regions;
  }
  CHECK(regions == 1);
  CHECK(map.max == doctest::Approx(17.861).epsilon(1e-3));
  CHECK(map.min < 1e-2);
}

TEST_CASE("Table 2 rows and ratios") {
  const Relaxed& r = relaxed_twist();
  std::vector<Table2Point> points{{{Family::Twist, oracle::deg(0.3)}, r.field}};
  auto rows = table2_pipeline(points, kRef, kModuli, kModel);
  REQUIRE(rows.size() == 1u);
  CHECK(rows[0].wall == "shear");
  CHECK(rows[0].ratio == doctest::Approx(1.0));
  CHECK(rows[0].theory_ratio == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rows[0].translation_angle == doctest::Approx(oracle::pi / 2).epsilon(1e-9));
  assign_ratios(rows, 2 * rows[0].fwhm);
  CHECK(rows[0].ratio == doctest::Approx(0.5));

  std::ostringstream os;
  write_table2_csv(os, rows);
  std::istringstream is(os.str());
  std::string header, line;
  std::getline(is, header);
  std::getline(is, line);
  CHECK(header == "family,parameter,wall,theta0_plus_phi_rad,fwhm_angstrom,ratio,theory_ratio");
  CHECK(line.rfind("twist,0.3,shear,", 0) == 0);
}
