#include "moire/lattice.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "moire/error.hpp"

namespace moire {

namespace {

constexpr double kRankThreshold = 1e-10;
constexpr double kSingularThreshold = 1e-12;

bool all_finite(const Mat2& m) { return m.allFinite(); }

// Smallest k >= 1 such that k * f is integral.
int integral_multiple(const Vec2& f) {
  for (int k = 1; k <= 64; ++k) {
    const Vec2 g = k * f;
    if (std::abs(g[0] - std::round(g[0])) < 1e-8 && std::abs(g[1] - std::round(g[1])) < 1e-8) {
      return k;
    }
  }
  throw InvalidArgument("one-dimensional moire has no commensurate period (checked up to 64 moire vectors)");
}

}  // namespace

Mat2 rotation(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat2 r;
  r << c, -s, s, c;
  return r;
}

Mat2 quarter_turn() {
  Mat2 j;
  j << 0.0, 1.0, -1.0, 0.0;
  return j;
}

Basis2::Basis2() : cols_(Mat2::Identity()) {}

Basis2::Basis2(const Mat2& columns) : cols_(columns) {
  if (!all_finite(columns)) throw InvalidArgument("basis has non-finite entries");
}

Basis2 Basis2::graphene(double bond_length) {
  const double a = std::sqrt(3.0) * bond_length;
  const double h = std::sqrt(3.0) / 2.0;
  Mat2 m;
  m << h, h, -0.5, 0.5;
  return Basis2(a * m);
}

Basis2 Basis2::triangular_primitive(double lattice_constant) {
  const double h = std::sqrt(3.0) / 2.0;
  Mat2 m;
  m << h, 0.0, -0.5, 1.0;
  return Basis2(lattice_constant * m);
}

bool Basis2::invertible() const {
  return std::abs(det()) > kSingularThreshold * cols_.squaredNorm();
}

Mat2 Basis2::inverse() const {
  if (!invertible()) throw InvalidArgument("singular lattice basis");
  return cols_.inverse();
}

std::string_view to_string(Family f) {
  switch (f) {
    case Family::Twist: return "twist";
    case Family::Dilation: return "dilation";
    case Family::PureShear: return "pure-shear";
    case Family::SimpleShear: return "simple-shear";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  std::string s(name);
  for (char& c : s) {
    if (c == '_') c = '-';
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (s == "twist") return Family::Twist;
  if (s == "dilation" || s == "isotropic") return Family::Dilation;
  if (s == "pure-shear") return Family::PureShear;
  if (s == "simple-shear") return Family::SimpleShear;
  throw InvalidArgument("unknown strain family '" + std::string(name) + "'");
}

LayerPair layer_pair(const StrainFamily& family, const Basis2& reference) {
  const double p = family.parameter;
  if (!std::isfinite(p)) throw InvalidArgument("non-finite deformation parameter");
  const Mat2& a = reference.matrix();

  if (family.family == Family::Twist) {
    const double turns = p / std::numbers::pi;
    if (std::abs(turns - std::round(turns)) < 1e-12) {
      throw DegenerateConfiguration("twist angle is a multiple of pi: no moire pattern");
    }
    return {Basis2(rotation(-p / 2) * a), Basis2(rotation(p / 2) * a)};
  }

  if (p == 0.0) throw DegenerateConfiguration("zero strain: no moire pattern");
  if (std::abs(p) >= 2.0) throw InvalidArgument("strain magnitude must be below 2");
  const double lo = 1.0 - p / 2;
  const double hi = 1.0 + p / 2;
  Mat2 s1, s2;
  switch (family.family) {
    case Family::Dilation:
      return {Basis2(lo * a), Basis2(hi * a)};
    case Family::PureShear:
      s1 << lo, 0.0, 0.0, hi;
      s2 << hi, 0.0, 0.0, lo;
      break;
    case Family::SimpleShear:
      s1 << 1.0, -p / 2, 0.0, 1.0;
      s2 << 1.0, p / 2, 0.0, 1.0;
      break;
    case Family::Twist: break;
  }
  return {Basis2(s1 * a), Basis2(s2 * a)};
}

Mat2 MoireCell::canonical() const {
  if (rank_ == 2) return basis_;
  Mat2 c = Mat2::Zero();
  c.col(0) = moire_vector_;
  return c;
}

std::array<int, 2> MoireCell::grid_shape() const {
  return rank_ == 2 ? std::array<int, 2>{grid_n_, grid_n_} : std::array<int, 2>{grid_n_, 1};
}

MoireCell moire_cell(const LayerPair& pair, int grid_n) {
  if (grid_n < 1) throw InvalidArgument("grid size must be positive");
  const Mat2 d = pair.layer1.inverse() - pair.layer2.inverse();
  const double scale = pair.layer1.inverse().norm();
  if (d.norm() <= 1e-14 * scale) throw NoMoire("identical layers: A1^-1 - A2^-1 vanishes");

  MoireCell cell;
  cell.difference_ = d;
  cell.grid_n_ = grid_n;

  Eigen::JacobiSVD<Mat2> svd(d, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec2 sv = svd.singularValues();
  if (sv[1] / sv[0] >= kRankThreshold) {
    cell.rank_ = 2;
    cell.basis_ = d.inverse();
    cell.grid_basis_ = cell.basis_;
    return cell;
  }

  // Moore-Penrose pseudo-inverse keeps only the leading singular triple.
  cell.rank_ = 1;
  const Vec2 u0 = svd.matrixU().col(0);
  const Vec2 v0 = svd.matrixV().col(0);
  cell.basis_ = v0 * u0.transpose() / sv[0];

  // Both columns are multiples of v0; reduce them by Euclid to a single generator.
  double alpha = cell.basis_.col(0).dot(v0);
  double beta = cell.basis_.col(1).dot(v0);
  const double tol = 1e-9 * std::max(std::abs(alpha), std::abs(beta));
  if (std::abs(alpha) < std::abs(beta)) std::swap(alpha, beta);
  while (std::abs(beta) > tol) {
    const double r = alpha - std::round(alpha / beta) * beta;
    alpha = beta;
    beta = r;
  }
  Vec2 m = alpha * v0;
  if (m[1] < 0 || (m[1] == 0 && m[0] < 0)) m = -m;
  cell.moire_vector_ = m;

  const Vec2 period = integral_multiple(d * m) * m;
  const Vec2 kernel = svd.matrixV().col(1);
  Mat2 g;
  g.col(0) = period;
  g.col(1) = kernel * period.norm();
  if (g.determinant() < 0) g.col(1) = -g.col(1);
  cell.grid_basis_ = g;
  return cell;
}

Vec2 reduce_mod(const Vec2& x, const Mat2& basis) {
  Vec2 f = basis.inverse() * x;
  f[0] -= std::floor(f[0]);
  f[1] -= std::floor(f[1]);
  // floor can leave exactly 1.0 after rounding of tiny negatives
  if (f[0] >= 1.0) f[0] = 0.0;
  if (f[1] >= 1.0) f[1] = 0.0;
  return basis * f;
}

Mat2 disregistry_12_map(const LayerPair& pair) {
  return Mat2::Identity() - pair.layer2.matrix() * pair.layer1.inverse();
}

Mat2 disregistry_21_map(const LayerPair& pair) {
  return Mat2::Identity() - pair.layer1.matrix() * pair.layer2.inverse();
}

Vec2 disregistry_12_linear(const Vec2& x, const LayerPair& pair) { return disregistry_12_map(pair) * x; }

Vec2 disregistry_21_linear(const Vec2& x, const LayerPair& pair) { return disregistry_21_map(pair) * x; }

Vec2 disregistry_12(const Vec2& x, const LayerPair& pair) {
  return reduce_mod(disregistry_12_linear(x, pair), pair.layer2.matrix());
}

Vec2 disregistry_21(const Vec2& x, const LayerPair& pair) {
  return reduce_mod(disregistry_21_linear(x, pair), pair.layer1.matrix());
}

BurgersTriplet burgers_triplet(int i, double a) {
  const double h = std::sqrt(3.0) / 2.0;
  const double db = std::sqrt(3.0) / 6.0 * a;
  switch (i) {
    case 1: return {Vec2(0.0, 0.5 * a), Vec2(db, 0.0), 0.0};
    case 2: return {0.5 * a * Vec2(h, 0.5), db * Vec2(-0.5, h), 2.0 * std::numbers::pi / 3.0};
    case 3: return {0.5 * a * Vec2(h, -0.5), db * Vec2(-0.5, -h), 4.0 * std::numbers::pi / 3.0};
    default: throw InvalidArgument("Burgers triplet index must be 1, 2 or 3 (got " + std::to_string(i) + ")");
  }
}

}  // namespace moire
