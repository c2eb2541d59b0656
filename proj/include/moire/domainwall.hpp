#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include "moire/gsfe.hpp"
#include "moire/lattice.hpp"

namespace moire {

/**
 * A straight AB/BA domain wall. The wall normal points along `normal_angle`
 * (lab frame); the angle entering the width formula is
 * theta0 + rotation - normal_angle, i.e. the angle between the interlayer
 * translation R_phi db and the wall normal.
 */
struct WallSpec {
  int triplet = 1;
  double rotation = 0.0;
  double theta0 = 0.0;
  double normal_angle = 0.0;
  Vec2 half_burgers = Vec2::Zero();
  Vec2 saddle = Vec2::Zero();
  ElasticModuli moduli;
  /// Unit-cell area in Angstrom^2; converts meV per unit-cell area to meV/A^2.
  double cell_area = 1.0;
  std::shared_ptr<const WallPotential> potential;

  /// theta0 + phi measured from the wall normal.
  double translation_angle() const { return theta0 + rotation - normal_angle; }
};

WallSpec make_wall_spec(const Basis2& reference, int triplet, double rotation,
                        const ElasticModuli& moduli, const GsfeModel& model,
                        double normal_angle = 0.0);

struct WallWidths {
  double l_phi;       // at the spec's angle
  double l_perp;      // shear wall, cos = 0
  double l_parallel;  // tensile wall, cos = 1
};

/// l_phi = sqrt(((lambda + mu) cos^2(theta0 + phi) + mu) / (2 k_min)) ||db||, Angstrom.
WallWidths characteristic_width(const WallSpec& spec);

/// Monotone kink psi(t) on the uniform grid t in [-T, T].
struct KinkSolution {
  std::vector<double> t;
  std::vector<double> psi;
  /// 1 - |psi(t)|, kept separately so the exponential tails stay accurate.
  std::vector<double> tail;
  /// Max |psi'' - U'(psi)| over interior nodes (fourth-order differences).
  double residual = 0.0;
  double kappa = 0.0;
  /// Characteristic width in Angstrom when solved for a WallSpec, 0 otherwise.
  double width = 0.0;

  double half_length() const { return t.empty() ? 0.0 : t.back(); }
  double step() const { return t.size() > 1 ? t[1] - t[0] : 0.0; }
  std::size_t size() const { return t.size(); }
};

/**
 * Solves psi'' = U'(psi), psi(+-inf) = +-1, psi(0) = 0 through the first
 * integral t(psi) = int_0^psi ds / sqrt(2 U(s)). The substitution
 * psi = +-(1 - e^{-r}) turns the logarithmic endpoint behaviour into a smooth
 * integrand; the uniform t grid is reached by Newton steps on t(r).
 * `n` must be odd so that t = 0 is a node.
 */
KinkSolution solve_kink(const WallPotential& potential, double half_length = 12.0, int n = 4801);
KinkSolution solve_kink(const WallSpec& spec, double half_length = 12.0, int n = 4801);

struct AsymptoticFit {
  double kappa;
  double max_defect;
  double window_begin;
  double window_end;
};

/// Fits (1 - psi) e^t = kappa + beta e^{-t} on [T/2, window_end] (default T - 1)
/// and reports max |psi - 1 + kappa e^{-t}| e^{2t} over the window.
AsymptoticFit asymptotic_check(const KinkSolution& sol, double window_end = -1.0);

struct WallEnergy {
  double gradient;   // meV/A
  double potential;  // meV/A
  double total() const { return gradient + potential; }
};

/// 1D wall energy per unit length with u(y) = psi(y / l_phi), Phi_min subtracted.
WallEnergy wall_energy_per_length(const WallSpec& spec, const KinkSolution& sol);

/// Two-column CSV "t,psi".
void write_kink_csv(std::ostream& out, const KinkSolution& sol);

}  // namespace moire
