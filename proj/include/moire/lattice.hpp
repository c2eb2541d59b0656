#pragma once

#include <Eigen/Dense>
#include <array>
#include <string_view>

namespace moire {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Counter-clockwise rotation by `angle` radians.
Mat2 rotation(double angle);

/// J = R_{-pi/2}.
Mat2 quarter_turn();

/**
 * Fundamental matrix of a 2D Bravais lattice. Columns are the generating
 * lattice vectors in Angstrom.
 */
class Basis2 {
 public:
  Basis2();
  explicit Basis2(const Mat2& columns);

  /// Graphene with the 60-degree basis sqrt(3) a0 [sqrt3/2 sqrt3/2; -1/2 1/2],
  /// a0 the carbon-carbon bond length. This is the basis the GSFE harmonics assume.
  static Basis2 graphene(double bond_length = 1.42);

  /// Triangular lattice with the 120-degree basis a [sqrt3/2 0; -1/2 1].
  static Basis2 triangular_primitive(double lattice_constant);

  const Mat2& matrix() const { return cols_; }
  Vec2 column(int j) const { return cols_.col(j); }
  double det() const { return cols_.determinant(); }
  double cell_area() const { return std::abs(det()); }
  double lattice_constant() const { return cols_.col(0).norm(); }

  /// |det A| > 1e-12 ||A||^2.
  bool invertible() const;
  /// Throws InvalidArgument when singular.
  Mat2 inverse() const;

 private:
  Mat2 cols_;
};

enum class Family { Twist, Dilation, PureShear, SimpleShear };

std::string_view to_string(Family f);
/// Accepts "twist", "dilation", "pure-shear", "simple-shear" (underscores allowed).
Family parse_family(std::string_view name);

/// One of the four uniform deformations. `parameter` is the twist angle in
/// radians for Twist and the dimensionless strain for the others.
struct StrainFamily {
  Family family = Family::Twist;
  double parameter = 0.0;
};

struct LayerPair {
  Basis2 layer1;
  Basis2 layer2;
};

/// Splits the deformation symmetrically between the two layers.
/// Throws DegenerateConfiguration for theta = 0 (mod pi) or eps = 0, and
/// InvalidArgument for |eps| >= 2.
LayerPair layer_pair(const StrainFamily& family, const Basis2& reference);

/**
 * Moire superlattice of a bilayer. For full rank, `basis` is
 * (A1^-1 - A2^-1)^-1; for rank one it is the Moore-Penrose pseudo-inverse.
 *
 * The discretization works on `grid_basis()`, which is always invertible:
 * it equals `basis` in the rank-2 case, and in the rank-1 case its first
 * column is the true period of the disregistry along the moire direction
 * while its second spans the kernel of A1^-1 - A2^-1 (fields are constant
 * along it).
 */
class MoireCell {
 public:
  const Mat2& basis() const { return basis_; }
  int rank() const { return rank_; }
  int grid_n() const { return grid_n_; }
  /// D = A1^-1 - A2^-1; maps positions to fractional stacking.
  const Mat2& difference() const { return difference_; }
  /// Rank 1: nonzero column after unimodular reduction of the columns.
  Vec2 moire_vector() const { return moire_vector_; }
  /// `basis` with the unimodular change of columns applied ([m, 0] in rank 1).
  Mat2 canonical() const;
  const Mat2& grid_basis() const { return grid_basis_; }
  std::array<int, 2> grid_shape() const;
  double grid_area() const { return std::abs(grid_basis_.determinant()); }

 private:
  friend MoireCell moire_cell(const LayerPair&, int);
  Mat2 basis_ = Mat2::Zero();
  Mat2 difference_ = Mat2::Zero();
  Mat2 grid_basis_ = Mat2::Identity();
  Vec2 moire_vector_ = Vec2::Zero();
  int rank_ = 2;
  int grid_n_ = 1;
};

/// Rank decided by sigma2/sigma1 < 1e-10. Throws NoMoire when A1 == A2.
MoireCell moire_cell(const LayerPair& pair, int grid_n);

/// Reduce x into the cell A[0,1)^2.
Vec2 reduce_mod(const Vec2& x, const Mat2& basis);

/// Linear maps I - A2 A1^-1 and I - A1 A2^-1 (no modular reduction).
Mat2 disregistry_12_map(const LayerPair& pair);
Mat2 disregistry_21_map(const LayerPair& pair);

/// b_{1->2}(x) reduced modulo Gamma_2.
Vec2 disregistry_12(const Vec2& x, const LayerPair& pair);
/// b_{2->1}(x) reduced modulo Gamma_1.
Vec2 disregistry_21(const Vec2& x, const LayerPair& pair);

Vec2 disregistry_12_linear(const Vec2& x, const LayerPair& pair);
Vec2 disregistry_21_linear(const Vec2& x, const LayerPair& pair);

/// Saddle point, half Burgers vector and wall-normal reference angle of the
/// i-th AB/BA wall (i = 1, 2, 3): AB = saddle + half_burgers, BA = saddle - half_burgers.
struct BurgersTriplet {
  Vec2 saddle;
  Vec2 half_burgers;
  double theta0 = 0.0;
};

BurgersTriplet burgers_triplet(int i, double lattice_constant);

}  // namespace moire
