#pragma once

#include <functional>

#include "moire/lattice.hpp"

namespace moire {

/// Trigonometric stacking-fault energy on the unit torus, meV per unit-cell area.
struct GsfeModel {
  double c0 = 7.076;
  double c1 = 4.064;
  double c2 = -0.374;
  double c3 = -0.095;

  static GsfeModel graphene() { return {}; }
};

/// Lame parameters, meV per unit-cell area.
struct ElasticModuli {
  double lambda = 37950.0;
  double mu = 47352.0;

  static ElasticModuli graphene() { return {}; }
  /// Throws InvalidArgument unless mu > 0 and lambda + mu > 0.
  void validate() const;
};

/// Value and gradient of phi at one point.
struct PhiSample {
  double value;
  double dv;
  double dw;
};

/// phi(v, w) with the three harmonic shells; 2*pi periodic in both arguments.
double phi(double v, double w, const GsfeModel& model);
PhiSample phi_with_gradient(double v, double w, const GsfeModel& model);

/// Phi_1(gamma) = phi(2 pi A2^-1 gamma) (layer 1 sees layer 2), and
/// Phi_2(gamma) = phi(2 pi A1^-1 gamma).
double gsfe_layer(const Vec2& gamma, int layer, const LayerPair& pair, const GsfeModel& model);
Vec2 grad_gsfe_layer(const Vec2& gamma, int layer, const LayerPair& pair, const GsfeModel& model);

/**
 * Normalized one-dimensional wall potential U(psi) = (Phi[psi] - Phi_min) / k_min,
 * with U(+-1) = 0 and U''(+-1) = 1.
 *
 * The potential is built from the excess energy Phi[u] - Phi_min rather than
 * from Phi itself so that U keeps full relative precision next to the wells,
 * where the kink tail is resolved.
 */
class WallPotential {
 public:
  using Fn = std::function<double(double)>;

  /// `excess(u)` = Phi[u] - Phi_min and `slope(u)` = Phi'[u], meV per unit-cell area.
  WallPotential(Fn excess, Fn slope, double phi_min, int samples = 2001);

  /// A potential that is already normalized (U(+-1) = 0, U''(+-1) = 1).
  static WallPotential normalized(Fn u, Fn du, int samples = 2001);

  double operator()(double psi) const { return excess_(psi) / k_min_; }
  double derivative(double psi) const { return slope_(psi) / k_min_; }
  /// Unnormalized path energy Phi[u].
  double path_energy(double u) const { return excess_(u) + phi_min_; }

  double k_min() const { return k_min_; }
  double phi_min() const { return phi_min_; }
  /// First psi > 1 where U stops increasing: end of the double-well segment.
  double half_width() const { return half_width_; }

 private:
  struct Prenormalized {};
  WallPotential(Prenormalized, Fn u, Fn du, int samples);
  void check_double_well(int samples);

  Fn excess_;
  Fn slope_;
  double k_min_ = 1.0;
  double phi_min_ = 0.0;
  double half_width_ = 0.0;
};

/// phi(v + dv, w + dw) - phi(v, w), accurate for small (dv, dw).
double phi_difference(double v, double w, double dv, double dw, const GsfeModel& model);

/// Potential along the wall path R_phi (b_SP + u db) of the i-th Burgers triplet.
/// Throws ModelInconsistency if the sampled profile is not a double well.
WallPotential wall_potential(const Basis2& reference, int triplet, double rotation_angle,
                             const GsfeModel& model, int samples = 2001);

}  // namespace moire
