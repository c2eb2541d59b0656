#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "moire/gsfe.hpp"
#include "moire/lattice.hpp"
#include "moire/lbfgs.hpp"
#include "moire/spectral.hpp"

namespace moire {

/**
 * Nodal displacements of both layers (Angstrom) on the grid of a moire cell.
 * `data` stores u1x, u1y, u2x, u2y, each a full grid in row-major order.
 */
struct DisplacementField {
  GridShape shape;
  Mat2 grid_basis = Mat2::Identity();
  Mat2 moire_basis = Mat2::Identity();
  int rank = 2;
  std::vector<double> data;

  static DisplacementField zero(const MoireCell& cell);

  int nodes() const { return shape.nodes(); }
  /// layer 1 or 2, axis 0 (x) or 1 (y).
  std::span<double> component(int layer, int axis);
  std::span<const double> component(int layer, int axis) const;
  Vec2 at(int layer, int node) const;
  /// Position of a node in Angstrom.
  Vec2 position(int node) const;
  /// Normalized half-spectrum coefficients u_k = DFT(u) / nodes.
  std::vector<cplx> coefficients(int layer, int axis) const;
};

/// Energies in meV per moire cell (the grid cell in the rank-1 case).
struct EnergyBreakdown {
  double intra1 = 0.0;
  double intra2 = 0.0;
  double inter = 0.0;
  double total = 0.0;
  double cell_area = 1.0;  // Angstrom^2

  double per_area(double e) const { return e / cell_area; }
};

enum class Backend { Serial, Parallel };

/**
 * Discrete energy of a bilayer on the moire torus. Elastic terms are exact
 * sums over Fourier modes; the misfit term is the uniform nodal quadrature
 *   (1/2N^2) sum_xi [phi(2 pi (xi + A2^-1 v)) + phi(2 pi (xi + A1^-1 v))],  v = u1 - u2.
 * Densities are in meV per unit-cell area, so cell totals carry the factor
 * |det A_M| / A_uc.
 */
class BilayerEnergy {
 public:
  BilayerEnergy(const LayerPair& pair, const MoireCell& cell, const ElasticModuli& layer1,
                const ElasticModuli& layer2, const GsfeModel& model, Backend backend = Backend::Parallel);

  const GridShape& shape() const { return shape_; }
  std::size_t size() const { return 4 * static_cast<std::size_t>(shape_.nodes()); }
  /// |det A_M| / A_uc.
  double scale() const { return scale_; }
  /// Isotropic curvature of the misfit density at the Bernal minimum, meV / A_uc / Angstrom^2.
  double misfit_curvature() const { return alpha_; }

  /// Energy and, if `grad` is non-empty, its gradient in the packed nodal
  /// variables with the mean of each component removed.
  EnergyBreakdown evaluate(std::span<const double> x, std::span<double> grad = {}) const;
  EnergyBreakdown evaluate(const DisplacementField& field) const;

  /// Elastic energy of one layer; `grad` (2 * nodes, x then y) is optional.
  double intra_energy(const DisplacementField& field, int layer, std::span<double> grad = {}) const;
  /// Misfit energy; `grad` (2 * nodes) is the gradient in v = u1 - u2.
  double inter_energy(const DisplacementField& field, std::span<double> grad = {}) const;

  /// Inverse of the per-mode Hessian model (s/N^2)(2 M_k + alpha I), layer by layer.
  void apply_inverse_metric(std::span<const double> in, std::span<double> out) const;

  DisplacementField zero_field() const;

 private:
  double intra(std::span<const double> ux, std::span<const double> uy, int layer, double* gx,
               double* gy) const;
  double inter(std::span<const double> vx, std::span<const double> vy, double* gx, double* gy) const;

  GridShape shape_;
  Mat2 grid_basis_;
  Mat2 moire_basis_;
  int rank_;
  ElasticModuli moduli_[2];
  GsfeModel model_;
  Backend backend_;
  ModeTable modes_;
  std::unique_ptr<RealFft> fft_;
  double scale_;
  double cell_area_;
  double alpha_;
  Mat2 stacking_;
  Mat2 inv1_, inv2_;
};

struct RelaxOptions {
  int grid_n = 128;
  double grad_tol = 1e-6;  // meV / Angstrom
  int max_iter = 5000;
  int memory = 10;
  bool precondition = true;
  Backend backend = Backend::Parallel;
  /// Start point; resampled spectrally when its grid differs from the target.
  std::optional<DisplacementField> initial;
};

struct IterationRecord {
  int iteration;
  double energy;
  double grad_inf;
};

struct RelaxResult {
  DisplacementField field;
  EnergyBreakdown energy;
  EnergyBreakdown initial_energy;
  std::vector<IterationRecord> trace;
  LbfgsStatus status = LbfgsStatus::MaxIterations;
  int iterations = 0;
  double grad_inf = 0.0;

  bool converged() const { return status == LbfgsStatus::Converged; }
};

/// Minimizes the total energy. Non-convergence is reported through `status`.
RelaxResult relax(const LayerPair& pair, const GsfeModel& model, const ElasticModuli& layer1,
                  const ElasticModuli& layer2, const RelaxOptions& options);
RelaxResult relax(const LayerPair& pair, const GsfeModel& model, const ElasticModuli& moduli,
                  const RelaxOptions& options);

/// Fourier interpolation of `field` onto the grid of `cell` (truncating or zero-padding modes).
DisplacementField resample(const DisplacementField& field, const MoireCell& cell);
/// Same, onto an arbitrary grid shape over the same cell.
DisplacementField resample(const DisplacementField& field, const GridShape& shape);

/**
 * ||u||_{1,2} for u = (u1 - u2) / 2 on the reference cell obtained by shrinking
 * the moire cell to area `reference_area` (x_hat = rho x, rho^2 = reference_area / |det A_M|):
 *   ||u||^2 = rho^2 int_{Gamma_M} |u|^2 dx + int_{Gamma_M} |grad u|^2 dx.
 * For a twist, rho = 2 sin(theta / 2). Computed from the spectrum.
 */
double sobolev_norm(const DisplacementField& field, double reference_area);

struct ScalingRow {
  double theta;  // radians
  double norm;
  double scaled;  // 2 sin(theta / 2) * norm, Angstrom
};

/// 2 sin(theta / 2) ||u*||_{1,2} per twist angle, norms on the rescaled cell of area `reference_area`.
std::vector<ScalingRow> scaling_diagnostic(const std::vector<double>& thetas,
                                           const std::vector<DisplacementField>& fields, double reference_area);

}  // namespace moire
