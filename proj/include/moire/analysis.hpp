#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "moire/domainwall.hpp"
#include "moire/relax.hpp"

namespace moire {

/// Evaluates v = u1 - u2 anywhere on the torus by summing its Fourier series.
class SpectralInterpolator {
 public:
  explicit SpectralInterpolator(const DisplacementField& field);
  /// v at position x (Angstrom).
  Vec2 operator()(const Vec2& x) const;

 private:
  GridShape shape_;
  Mat2 to_grid_;
  std::vector<cplx> vx_, vy_;
};

enum class MapCentering { Origin, AA };

/// Misfit density (1/2)[phi(2 pi (xi + A2^-1 v)) + phi(2 pi (xi + A1^-1 v))] on a raster
/// of grid nodes, meV per unit-cell area. Row r holds eta2 = (height - 1 - r) / height
/// (top row first), column c holds eta1 = c / width; AA centering shifts both by 1/2.
struct GsfeMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;
  Mat2 grid_basis = Mat2::Identity();
  MapCentering centering = MapCentering::Origin;
  double min = 0.0;
  double max = 0.0;
};

GsfeMap gsfe_map(const DisplacementField& field, const LayerPair& pair, const GsfeModel& model,
                 int resolution, MapCentering centering = MapCentering::Origin);

/// Writes `stem`.ppm (blue-white-red colour scale, optional contrast gain) and `stem`.txt.
void write_gsfe_map(const std::filesystem::path& stem, const GsfeMap& map, double amplify = 1.0);

/// Straight segment through the moire cell, sampled uniformly.
struct LineCut {
  Vec2 p0;
  Vec2 p1;
  int n_samples = 1201;
};

/// Cut through the saddle point of the given triplet, from the BA centroid to
/// the AB centroid and `overshoot` beyond each (in units of the half period).
/// It runs along A_M A^-1 db, which is the wall normal of the unrelaxed pattern.
LineCut wall_normal_cut(const MoireCell& cell, const Basis2& reference, int triplet,
                        double overshoot = 0.2, int n_samples = 1201);

/// Direction of the wall normal (radians, lab frame) for a cut.
double cut_angle(const LineCut& cut);

enum class Projection { Burgers, Fitted };

struct OrderParameterProfile {
  std::vector<double> y;  // Angstrom, 0 at the u = 0 crossing
  std::vector<double> u;
  int triplet = 1;
  double translation_angle = 0.0;  // theta0 + phi relative to the wall normal
};

/**
 * u(y) = <A (f - f_SP), d> / <A df, d> with f = D x + A2^-1 v(x) the unwrapped
 * fractional stacking, so the BA and AB stackings of the triplet map to -1
 * and +1. d is the Burgers direction A df, or with Projection::Fitted the
 * principal direction of A f along the cut.
 * Throws AmbiguousCut when u crosses 0 more than once.
 */
OrderParameterProfile order_parameter(const DisplacementField& field, const LayerPair& pair,
                                      const Basis2& reference, const WallSpec& wall, const LineCut& cut,
                                      Projection projection = Projection::Burgers);

struct FwhmResult {
  double width;
  double y_plus;
  double y_minus;
  int interpolation_order;
};

/// Locates u = +-1/2 by cubic interpolation through the four samples around each
/// crossing. Throws UnresolvedWall if u does not reach both levels.
FwhmResult fwhm(const OrderParameterProfile& profile);
FwhmResult fwhm(const std::vector<double>& y, const std::vector<double>& u);

/// Wall-type label from the translation angle: "shear", "tensile" or "mixed".
std::string wall_type(double translation_angle);

/// Walls measured for each deformation family: twist and simple shear give the
/// shear wall of triplet 1, pure shear the tensile wall (triplet 1) and the
/// oblique wall (triplet 2).
std::vector<int> table2_triplets(Family family);

struct Table2Row {
  Family family;
  double parameter;
  std::string wall;
  int triplet;
  double translation_angle;
  double fwhm;
  double ratio;         // fwhm / reference shear FWHM
  double theory_ratio;  // l_phi / l_perp
  OrderParameterProfile profile;
};

struct Table2Point {
  StrainFamily family;
  DisplacementField field;
};

/**
 * One row per (point, wall). `reference_fwhm` is the shear-wall FWHM used for
 * the ratio column; if non-positive, the shear wall of the smallest-parameter
 * twist point in `points` is used.
 */
std::vector<Table2Row> table2_pipeline(const std::vector<Table2Point>& points, const Basis2& reference,
                                       const ElasticModuli& moduli, const GsfeModel& model,
                                       double reference_fwhm = 0.0,
                                       Projection projection = Projection::Burgers);

/// Sets the ratio column. A non-positive `reference_fwhm` selects the shear wall
/// of the smallest-angle twist row; without one the ratios are NaN.
void assign_ratios(std::vector<Table2Row>& rows, double reference_fwhm);

void write_table2_csv(std::ostream& out, const std::vector<Table2Row>& rows);

}  // namespace moire
