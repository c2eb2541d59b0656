#include "moire/domainwall.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <ostream>

#include "moire/error.hpp"
#include "moire/io.hpp"

namespace moire {

WallSpec make_wall_spec(const Basis2& reference, int triplet, double rotation_angle,
                        const ElasticModuli& moduli, const GsfeModel& model, double normal_angle) {
  moduli.validate();
  const BurgersTriplet bt = burgers_triplet(triplet, reference.lattice_constant());
  WallSpec spec;
  spec.triplet = triplet;
  spec.rotation = rotation_angle;
  spec.theta0 = bt.theta0;
  spec.normal_angle = normal_angle;
  spec.half_burgers = bt.half_burgers;
  spec.saddle = bt.saddle;
  spec.moduli = moduli;
  spec.cell_area = reference.cell_area();
  spec.potential = std::make_shared<const WallPotential>(
      wall_potential(reference, triplet, rotation_angle, model));
  return spec;
}

WallWidths characteristic_width(const WallSpec& spec) {
  if (!spec.potential) throw InvalidArgument("wall spec has no potential");
  const double k = spec.potential->k_min();
  const double lam = spec.moduli.lambda;
  const double mu = spec.moduli.mu;
  const double db = spec.half_burgers.norm();
  const double c = std::cos(spec.translation_angle());
  auto width = [&](double cos2) { return std::sqrt(((lam + mu) * cos2 + mu) / (2.0 * k)) * db; };
  return {width(c * c), width(0.0), width(1.0)};
}

namespace {

using boost::math::quadrature::gauss_kronrod;

// Walks one half of the kink: psi = side * (1 - e^{-r}), t(r) = int_0^r g.
void solve_half(const WallPotential& u, int side, double h, int m, std::vector<double>& r_out) {
  auto g = [&](double rho) {
    const double psi = side * -std::expm1(-rho);
    const double two_u = 2.0 * u(psi);
    if (!(two_u > 0.0)) {
      throw ModelInconsistency("U(psi) <= 0 inside the wells while integrating the kink");
    }
    return std::exp(-rho) / std::sqrt(two_u);
  };
  auto integral = [&](double a, double b) {
    double err = 0.0;
    const double v = gauss_kronrod<double, 15>::integrate(g, a, b, 4, 1e-13, &err);
    if (!std::isfinite(v)) throw NumericalFailure("kink quadrature produced a non-finite value");
    return v;
  };

  r_out.assign(m + 1, 0.0);
  double r_prev = 0.0;
  for (int j = 1; j <= m; ++j) {
    double r = r_prev + h / g(r_prev);
    bool converged = false;
    for (int it = 0; it < 60; ++it) {
      const double f = integral(r_prev, r) - h;
      if (std::abs(f) <= 1e-14 * h) {
        converged = true;
        break;
      }
      double next = r - f / g(r);
      if (next <= r_prev) next = 0.5 * (r_prev + r);
      // Step below the resolution of r.
      if (std::abs(next - r) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, r)) {
        converged = true;
        break;
      }
      r = next;
    }
    if (!converged) throw NumericalFailure("kink inversion did not converge at t = " + std::to_string(j * h));
    r_out[j] = r;
    r_prev = r;
  }
}

}  // namespace

KinkSolution solve_kink(const WallPotential& potential, double half_length, int n) {
  if (n < 5 || n % 2 == 0) throw InvalidArgument("kink grid size must be odd and at least 5");
  if (!(half_length > 0.0)) throw InvalidArgument("kink half length must be positive");
  const int m = (n - 1) / 2;
  const double h = half_length / m;

  std::vector<double> r_pos, r_neg;
  solve_half(potential, +1, h, m, r_pos);
  solve_half(potential, -1, h, m, r_neg);

  KinkSolution sol;
  sol.t.resize(n);
  sol.psi.resize(n);
  sol.tail.resize(n);
  for (int j = 0; j <= m; ++j) {
    sol.t[m + j] = j * h;
    sol.t[m - j] = -j * h;
    sol.psi[m + j] = -std::expm1(-r_pos[j]);
    sol.psi[m - j] = std::expm1(-r_neg[j]);
    sol.tail[m + j] = std::exp(-r_pos[j]);
    sol.tail[m - j] = std::exp(-r_neg[j]);
  }

  double residual = 0.0;
  for (int j = 2; j < n - 2; ++j) {
    const double d2 = (-sol.psi[j + 2] + 16.0 * sol.psi[j + 1] - 30.0 * sol.psi[j] +
                       16.0 * sol.psi[j - 1] - sol.psi[j - 2]) /
                      (12.0 * h * h);
    residual = std::max(residual, std::abs(d2 - potential.derivative(sol.psi[j])));
  }
  sol.residual = residual;
  if (half_length >= 4.0) sol.kappa = asymptotic_check(sol).kappa;
  return sol;
}

KinkSolution solve_kink(const WallSpec& spec, double half_length, int n) {
  if (!spec.potential) throw InvalidArgument("wall spec has no potential");
  KinkSolution sol = solve_kink(*spec.potential, half_length, n);
  sol.width = characteristic_width(spec).l_phi;
  return sol;
}

AsymptoticFit asymptotic_check(const KinkSolution& sol, double window_end) {
  const double T = sol.half_length();
  double end = window_end < 0.0 ? T - 1.0 : window_end;
  const double begin = T / 2.0;
  if (end > T) throw InvalidArgument("asymptotic window extends past the solved domain");
  if (end <= begin) throw InvalidArgument("asymptotic window is empty");

  // Shrink the window if the tail underflowed.
  for (std::size_t j = 0; j < sol.size(); ++j) {
    if (sol.t[j] >= begin && sol.t[j] <= end && !(sol.tail[j] > 0.0)) {
      end = sol.t[j - 1];
      break;
    }
  }

  // Least squares for y = kappa + beta x with x = e^{-t}, y = tail e^{t}.
  double s0 = 0, sx = 0, sxx = 0, sy = 0, sxy = 0;
  for (std::size_t j = 0; j < sol.size(); ++j) {
    const double t = sol.t[j];
    if (t < begin - 1e-12 || t > end + 1e-12) continue;
    const double x = std::exp(-t);
    const double y = sol.tail[j] * std::exp(t);
    s0 += 1;
    sx += x;
    sxx += x * x;
    sy += y;
    sxy += x * y;
  }
  if (s0 < 2) throw InvalidArgument("asymptotic window holds fewer than two samples");
  const double det = s0 * sxx - sx * sx;
  const double kappa = (sy * sxx - sx * sxy) / det;

  double defect = 0.0;
  for (std::size_t j = 0; j < sol.size(); ++j) {
    const double t = sol.t[j];
    if (t < begin - 1e-12 || t > end + 1e-12) continue;
    defect = std::max(defect, std::abs(sol.tail[j] - kappa * std::exp(-t)) * std::exp(2.0 * t));
  }
  return {kappa, defect, begin, end};
}

WallEnergy wall_energy_per_length(const WallSpec& spec, const KinkSolution& sol) {
  if (!spec.potential) throw InvalidArgument("wall spec has no potential");
  const std::size_t n = sol.size();
  if (n < 5) throw InvalidArgument("kink solution too short");
  const double l = characteristic_width(spec).l_phi;
  const double c = std::cos(spec.translation_angle());
  const double db2 = spec.half_burgers.squaredNorm();
  const double stiffness = 0.5 * ((spec.moduli.lambda + spec.moduli.mu) * c * c + spec.moduli.mu) * db2;
  const double k = spec.potential->k_min();
  const double h = sol.step();

  auto dpsi = [&](std::size_t j) {
    const auto& p = sol.psi;
    if (j >= 2 && j + 2 < n) return (p[j - 2] - 8.0 * p[j - 1] + 8.0 * p[j + 1] - p[j + 2]) / (12.0 * h);
    if (j == 0) return (p[1] - p[0]) / h;
    if (j == n - 1) return (p[n - 1] - p[n - 2]) / h;
    return (p[j + 1] - p[j - 1]) / (2.0 * h);
  };

  double grad = 0.0, pot = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double w = (j == 0 || j == n - 1) ? 0.5 : 1.0;
    const double uy = dpsi(j) / l;
    grad += w * 0.5 * stiffness * uy * uy;
    pot += w * k * (*spec.potential)(sol.psi[j]);
  }
  // dy = l dt; divide by the unit-cell area to get meV per Angstrom.
  const double scale = l * h / spec.cell_area;
  return {grad * scale, pot * scale};
}

void write_kink_csv(std::ostream& out, const KinkSolution& sol) {
  CsvWriter csv(out);
  csv.header({"t", "psi"});
  for (std::size_t j = 0; j < sol.size(); ++j) csv.row(std::vector<double>{sol.t[j], sol.psi[j]});
}

}  // namespace moire
