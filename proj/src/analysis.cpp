#include "moire/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>

#include "moire/error.hpp"
#include "moire/io.hpp"

namespace moire {

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

double misfit_density(const Vec2& xi, const Vec2& v, const Mat2& inv1, const Mat2& inv2,
                      const GsfeModel& model) {
  const Vec2 a = kTau * (xi + inv2 * v);
  const Vec2 b = kTau * (xi + inv1 * v);
  return 0.5 * (phi(a.x(), a.y(), model) + phi(b.x(), b.y(), model));
}

// Cubic through (x[i], y[i]), i = lo..lo+3, evaluated at t.
double lagrange(const std::vector<double>& x, const std::vector<double>& y, int lo, int order, double t) {
  double s = 0.0;
  for (int i = lo; i <= lo + order; ++i) {
    double w = 1.0;
    for (int k = lo; k <= lo + order; ++k)
      if (k != i) w *= (t - x[k]) / (x[i] - x[k]);
    s += w * y[i];
  }
  return s;
}

// Position where the interpolant through the samples around [j, j+1] hits `level`.
// Returns the polynomial order used.
double cross(const std::vector<double>& x, const std::vector<double>& y, int j, double level, int& order) {
  const int n = static_cast<int>(x.size());
  order = std::min(3, n - 1);
  const int lo = std::clamp(j - 1, 0, n - 1 - order);
  double a = x[j], b = x[j + 1];
  double fa = lagrange(x, y, lo, order, a) - level;
  for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, std::abs(a)); ++it) {
    const double m = 0.5 * (a + b);
    const double fm = lagrange(x, y, lo, order, m) - level;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

// Indices j with y[j] < level <= y[j+1] or y[j] >= level > y[j+1].
std::vector<int> crossings(const std::vector<double>& y, double level) {
  std::vector<int> out;
  for (std::size_t j = 0; j + 1 < y.size(); ++j)
    if ((y[j] < level) != (y[j + 1] < level)) out.push_back(static_cast<int>(j));
  return out;
}

Vec2 fractional_saddle(const Basis2& reference, const Vec2& saddle) {
  Vec2 f = reference.inverse() * saddle;
  for (int i = 0; i < 2; ++i) f[i] -= std::floor(f[i] + 1e-9);
  return f;
}

}  // namespace

SpectralInterpolator::SpectralInterpolator(const DisplacementField& field)
    : shape_(field.shape), to_grid_(field.grid_basis.inverse()) {
  DisplacementField v = field;
  for (int axis = 0; axis < 2; ++axis) {
    auto a = v.component(1, axis);
    auto b = field.component(2, axis);
    for (std::size_t j = 0; j < a.size(); ++j) a[j] -= b[j];
  }
  vx_ = v.coefficients(1, 0);
  vy_ = v.coefficients(1, 1);
}

Vec2 SpectralInterpolator::operator()(const Vec2& x) const {
  const Vec2 eta = to_grid_ * x;
  const int n1 = shape_.n1, n2 = shape_.n2, h2 = shape_.half2();
  std::vector<cplx> e2(h2);
  std::vector<double> c2(h2);
  for (int k = 0; k < h2; ++k) {
    const bool nyq = n2 % 2 == 0 && k == n2 / 2;
    e2[k] = nyq ? cplx(std::cos(std::numbers::pi * n2 * eta.y()), 0.0) : std::polar(1.0, kTau * k * eta.y());
    c2[k] = (k == 0 || nyq) ? 1.0 : 2.0;
  }
  cplx sx = 0.0, sy = 0.0;
  for (int k1 = 0; k1 < n1; ++k1) {
    const bool nyq = n1 % 2 == 0 && k1 == n1 / 2;
    const int s1 = k1 <= n1 / 2 ? k1 : k1 - n1;
    const cplx e1 = nyq ? cplx(std::cos(std::numbers::pi * n1 * eta.x()), 0.0) : std::polar(1.0, kTau * s1 * eta.x());
    cplx rx = 0.0, ry = 0.0;
    for (int k2 = 0; k2 < h2; ++k2) {
      const cplx w = c2[k2] * e2[k2];
      rx += vx_[k1 * h2 + k2] * w;
      ry += vy_[k1 * h2 + k2] * w;
    }
    sx += e1 * rx;
    sy += e1 * ry;
  }
  return {sx.real(), sy.real()};
}

GsfeMap gsfe_map(const DisplacementField& field, const LayerPair& pair, const GsfeModel& model,
                 int resolution, MapCentering centering) {
  if (resolution < 2) throw InvalidArgument("map resolution must be at least 2");
  if (centering == MapCentering::AA && resolution % 2) throw InvalidArgument("AA-centred maps need an even resolution");
  const bool stripes = field.shape.n2 == 1;
  const GridShape fine{resolution, stripes ? 1 : resolution};
  const DisplacementField up = resample(field, fine);
  const Mat2 inv1 = pair.layer1.inverse(), inv2 = pair.layer2.inverse();
  const Mat2 stacking = (inv1 - inv2) * field.grid_basis;
  const int shift = centering == MapCentering::AA ? resolution / 2 : 0;

  GsfeMap map;
  map.width = map.height = resolution;
  map.grid_basis = field.grid_basis;
  map.centering = centering;
  map.values.resize(static_cast<std::size_t>(resolution) * resolution);
  for (int r = 0; r < resolution; ++r) {
    const int i2 = (resolution - 1 - r + shift) % resolution;
    for (int c = 0; c < resolution; ++c) {
      const int i1 = (c + shift) % resolution;
      const int node = stripes ? i1 : i1 * resolution + i2;
      const Vec2 eta(double(i1) / resolution, double(i2) / resolution);
      const Vec2 v = up.at(1, node) - up.at(2, node);
      map.values[r * resolution + c] = misfit_density(stacking * eta, v, inv1, inv2, model);
    }
  }
  const auto [lo, hi] = std::minmax_element(map.values.begin(), map.values.end());
  map.min = *lo;
  map.max = *hi;
  return map;
}

void write_gsfe_map(const std::filesystem::path& stem, const GsfeMap& map, double amplify) {
  if (!(amplify > 0.0)) throw InvalidArgument("map amplification must be positive");
  std::vector<unsigned char> rgb(3 * map.values.size());
  const double span = map.max > map.min ? map.max - map.min : 1.0;
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    const double t = std::pow(std::clamp((map.values[i] - map.min) / span, 0.0, 1.0), 1.0 / amplify);
    double r, g, b;
    if (t < 0.5) {
      r = g = 2.0 * t;
      b = 1.0;
    } else {
      r = 1.0;
      g = b = 2.0 * (1.0 - t);
    }
    rgb[3 * i] = static_cast<unsigned char>(std::lround(255.0 * r));
    rgb[3 * i + 1] = static_cast<unsigned char>(std::lround(255.0 * g));
    rgb[3 * i + 2] = static_cast<unsigned char>(std::lround(255.0 * b));
  }
  auto ppm = stem;
  ppm += ".ppm";
  write_ppm(ppm, map.width, map.height, rgb);

  auto txt = stem;
  txt += ".txt";
  std::ofstream out(txt);
  if (!out) throw Error("cannot open " + txt.string() + " for writing");
  const Mat2& g = map.grid_basis;
  out << "quantity misfit_density\n"
      << "units meV_per_unit_cell_area\n"
      << "width " << map.width << "\nheight " << map.height << '\n'
      << "extent_basis " << format_double(g(0, 0)) << ' ' << format_double(g(0, 1)) << ' '
      << format_double(g(1, 0)) << ' ' << format_double(g(1, 1)) << '\n'
      << "extent_units angstrom\n"
      << "centering " << (map.centering == MapCentering::AA ? "aa" : "origin") << '\n'
      << "color_scale blue-white-red\n"
      << "color_min " << format_double(map.min) << "\ncolor_max " << format_double(map.max) << '\n'
      << "amplify " << format_double(amplify) << '\n';
}

LineCut wall_normal_cut(const MoireCell& cell, const Basis2& reference, int triplet, double overshoot,
                        int n_samples) {
  if (n_samples < 8) throw InvalidArgument("a line cut needs at least 8 samples");
  const BurgersTriplet bt = burgers_triplet(triplet, reference.lattice_constant());
  const Vec2 f_sp = fractional_saddle(reference, bt.saddle);
  const Vec2 df = reference.inverse() * bt.half_burgers;
  const double reach = 1.0 + overshoot;
  return {cell.basis() * (f_sp - reach * df), cell.basis() * (f_sp + reach * df), n_samples};
}

double cut_angle(const LineCut& cut) {
  const Vec2 d = cut.p1 - cut.p0;
  return std::atan2(d.y(), d.x());
}

OrderParameterProfile order_parameter(const DisplacementField& field, const LayerPair& pair,
                                      const Basis2& reference, const WallSpec& wall, const LineCut& cut,
                                      Projection projection) {
  const Vec2 span = cut.p1 - cut.p0;
  if (span.norm() == 0.0) throw InvalidArgument("line cut endpoints coincide");
  const int n = cut.n_samples;
  const Mat2 a = reference.matrix();
  const Mat2 ainv = reference.inverse();
  const Mat2 d = pair.layer1.inverse() - pair.layer2.inverse();
  const Mat2 inv2 = pair.layer2.inverse();
  const Mat2 rot = rotation(wall.rotation);
  const Vec2 df = ainv * rot * wall.half_burgers;

  // Saddle representative nearest the cut centre.
  Vec2 f_sp = ainv * rot * wall.saddle;
  const Vec2 centre = d * (0.5 * (cut.p0 + cut.p1));
  f_sp += (centre - f_sp).array().round().matrix();

  const SpectralInterpolator interp(field);
  std::vector<Vec2> w(n);
  for (int j = 0; j < n; ++j) {
    const Vec2 x = cut.p0 + span * (double(j) / (n - 1));
    const Vec2 f = d * x + inv2 * interp(x);
    w[j] = a * (f - f_sp);
  }

  const Vec2 burgers = a * df;
  Vec2 dir = burgers;
  if (projection == Projection::Fitted) {
    Vec2 mean = Vec2::Zero();
    for (const auto& p : w) mean += p;
    mean /= n;
    Mat2 cov = Mat2::Zero();
    for (const auto& p : w) cov += (p - mean) * (p - mean).transpose();
    Eigen::SelfAdjointEigenSolver<Mat2> es(cov);
    dir = es.eigenvectors().col(1);
    if (dir.dot(burgers) < 0.0) dir = -dir;
  }
  const double norm = burgers.dot(dir);

  OrderParameterProfile prof;
  prof.triplet = wall.triplet;
  prof.translation_angle = wall.theta0 + wall.rotation - cut_angle(cut);
  prof.u.resize(n);
  prof.y.resize(n);
  for (int j = 0; j < n; ++j) {
    prof.u[j] = w[j].dot(dir) / norm;
    prof.y[j] = span.norm() * double(j) / (n - 1);
  }

  const auto zero = crossings(prof.u, 0.0);
  if (zero.empty()) throw UnresolvedWall("order parameter does not change sign along the cut");
  if (zero.size() > 1) throw AmbiguousCut("order parameter crosses zero " + std::to_string(zero.size()) + " times");
  int order = 0;
  const double y0 = cross(prof.y, prof.u, zero.front(), 0.0, order);
  for (double& y : prof.y) y -= y0;
  return prof;
}

FwhmResult fwhm(const std::vector<double>& y, const std::vector<double>& u_in) {
  if (y.size() != u_in.size() || y.size() < 4) throw InvalidArgument("profile needs at least four samples");
  std::vector<double> u = u_in;
  if (u.front() > u.back())
    for (double& v : u) v = -v;
  auto nearest = [&](double level) {
    const auto idx = crossings(u, level);
    if (idx.empty()) throw UnresolvedWall("order parameter never reaches " + format_double(level));
    int best = idx.front();
    for (int j : idx)
      if (std::abs(y[j]) < std::abs(y[best])) best = j;
    return best;
  };
  FwhmResult r{};
  r.y_plus = cross(y, u, nearest(0.5), 0.5, r.interpolation_order);
  r.y_minus = cross(y, u, nearest(-0.5), -0.5, r.interpolation_order);
  r.width = std::abs(r.y_plus - r.y_minus);
  return r;
}

FwhmResult fwhm(const OrderParameterProfile& profile) { return fwhm(profile.y, profile.u); }

std::string wall_type(double translation_angle) {
  const double c = std::abs(std::cos(translation_angle));
  if (c < 1e-6) return "shear";
  if (c > 1.0 - 1e-6) return "tensile";
  return "mixed";
}

std::vector<int> table2_triplets(Family family) {
  if (family == Family::PureShear) return {1, 2};
  return {1};
}

std::vector<Table2Row> table2_pipeline(const std::vector<Table2Point>& points, const Basis2& reference,
                                       const ElasticModuli& moduli, const GsfeModel& model,
                                       double reference_fwhm, Projection projection) {
  std::vector<Table2Row> rows;
  for (const auto& p : points) {
    const LayerPair pair = layer_pair(p.family, reference);
    const MoireCell cell = moire_cell(pair, p.field.shape.n1);
    for (int triplet : table2_triplets(p.family.family)) {
      const LineCut cut = wall_normal_cut(cell, reference, triplet);
      const WallSpec spec = make_wall_spec(reference, triplet, 0.0, moduli, model, cut_angle(cut));
      const OrderParameterProfile prof = order_parameter(p.field, pair, reference, spec, cut, projection);
      const WallWidths widths = characteristic_width(spec);
      Table2Row row;
      row.family = p.family.family;
      row.parameter = p.family.parameter;
      row.triplet = triplet;
      row.translation_angle = std::acos(std::min(1.0, std::abs(std::cos(spec.translation_angle()))));
      row.wall = wall_type(spec.translation_angle());
      row.fwhm = fwhm(prof).width;
      row.theory_ratio = widths.l_phi / widths.l_perp;
      row.ratio = std::numeric_limits<double>::quiet_NaN();
      row.profile = prof;
      rows.push_back(row);
    }
  }
  assign_ratios(rows, reference_fwhm);
  return rows;
}

void assign_ratios(std::vector<Table2Row>& rows, double reference_fwhm) {
  if (!(reference_fwhm > 0.0)) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : rows) {
      if (r.family == Family::Twist && r.wall == "shear" && std::abs(r.parameter) < best) {
        best = std::abs(r.parameter);
        reference_fwhm = r.fwhm;
      }
    }
  }
  for (auto& r : rows)
    r.ratio = reference_fwhm > 0.0 ? r.fwhm / reference_fwhm : std::numeric_limits<double>::quiet_NaN();
}

void write_table2_csv(std::ostream& out, const std::vector<Table2Row>& rows) {
  CsvWriter csv(out);
  csv.header({"family", "parameter", "wall", "theta0_plus_phi_rad", "fwhm_angstrom", "ratio", "theory_ratio"});
  for (const auto& r : rows) {
    const double param = r.family == Family::Twist ? r.parameter * 180.0 / std::numbers::pi : r.parameter;
    csv.row(std::vector<std::string>{std::string(to_string(r.family)), format_double(param), r.wall,
                                     format_double(r.translation_angle), format_double(r.fwhm),
                                     format_double(r.ratio), format_double(r.theory_ratio)});
  }
}

}  // namespace moire
