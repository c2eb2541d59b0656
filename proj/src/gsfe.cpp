#include "moire/gsfe.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "moire/error.hpp"

namespace moire {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double second_difference(const WallPotential::Fn& f, double x, double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

// Two levels of Richardson extrapolation on the central second difference.
double curvature(const WallPotential::Fn& f, double x) {
  const double h = 2e-2;
  const double d1 = second_difference(f, x, h);
  const double d2 = second_difference(f, x, h / 2);
  const double d3 = second_difference(f, x, h / 4);
  const double r1 = (4.0 * d2 - d1) / 3.0;
  const double r2 = (4.0 * d3 - d2) / 3.0;
  return (16.0 * r2 - r1) / 15.0;
}

}  // namespace

void ElasticModuli::validate() const {
  if (!(mu > 0.0)) throw InvalidArgument("shear modulus mu must be positive");
  if (!(lambda + mu > 0.0)) throw InvalidArgument("lambda + mu must be positive");
}

double phi(double v, double w, const GsfeModel& m) {
  return m.c0 + m.c1 * (std::cos(v) + std::cos(w) + std::cos(v + w)) +
         m.c2 * (std::cos(v + 2 * w) + std::cos(v - w) + std::cos(2 * v + w)) +
         m.c3 * (std::cos(2 * v) + std::cos(2 * w) + std::cos(2 * v + 2 * w));
}

PhiSample phi_with_gradient(double v, double w, const GsfeModel& m) {
  const double s1 = std::sin(v), s2 = std::sin(w), s12 = std::sin(v + w);
  const double a = std::sin(v + 2 * w), b = std::sin(v - w), c = std::sin(2 * v + w);
  const double d = std::sin(2 * v), e = std::sin(2 * w), f = std::sin(2 * v + 2 * w);
  return {phi(v, w, m),
          -m.c1 * (s1 + s12) - m.c2 * (a + b + 2 * c) - m.c3 * (2 * d + 2 * f),
          -m.c1 * (s2 + s12) - m.c2 * (2 * a - b + c) - m.c3 * (2 * e + 2 * f)};
}

double gsfe_layer(const Vec2& gamma, int layer, const LayerPair& pair, const GsfeModel& model) {
  if (layer != 1 && layer != 2) throw InvalidArgument("layer must be 1 or 2");
  const Mat2 inv = (layer == 1 ? pair.layer2 : pair.layer1).inverse();
  const Vec2 f = kTwoPi * inv * gamma;
  return phi(f[0], f[1], model);
}

Vec2 grad_gsfe_layer(const Vec2& gamma, int layer, const LayerPair& pair, const GsfeModel& model) {
  if (layer != 1 && layer != 2) throw InvalidArgument("layer must be 1 or 2");
  const Mat2 inv = (layer == 1 ? pair.layer2 : pair.layer1).inverse();
  const Vec2 f = kTwoPi * inv * gamma;
  const PhiSample s = phi_with_gradient(f[0], f[1], model);
  return kTwoPi * inv.transpose() * Vec2(s.dv, s.dw);
}

double phi_difference(double v, double w, double dv, double dw, const GsfeModel& m) {
  // cos(a + d) - cos(a) = -2 sin(a + d/2) sin(d/2)
  auto term = [&](int p, int q) {
    const double a = p * v + q * w;
    const double d = p * dv + q * dw;
    return -2.0 * std::sin(a + 0.5 * d) * std::sin(0.5 * d);
  };
  return m.c1 * (term(1, 0) + term(0, 1) + term(1, 1)) +
         m.c2 * (term(1, 2) + term(1, -1) + term(2, 1)) +
         m.c3 * (term(2, 0) + term(0, 2) + term(2, 2));
}

WallPotential::WallPotential(Fn excess, Fn slope, double phi_min, int samples)
    : excess_(std::move(excess)), slope_(std::move(slope)), phi_min_(phi_min) {
  if (samples < 3) throw InvalidArgument("wall potential needs at least 3 samples");
  k_min_ = curvature(excess_, 1.0);
  if (!(k_min_ > 0.0) || !std::isfinite(k_min_)) {
    throw ModelInconsistency("wall potential has non-positive curvature at the wells (k_min = " +
                             std::to_string(k_min_) + ")");
  }
  check_double_well(samples);
}

WallPotential::WallPotential(Prenormalized, Fn u, Fn du, int samples)
    : excess_(std::move(u)), slope_(std::move(du)) {
  if (samples < 3) throw InvalidArgument("wall potential needs at least 3 samples");
  check_double_well(samples);
}

void WallPotential::check_double_well(int samples) {
  double peak = 0.0;
  for (int j = 1; j < samples - 1; ++j) {
    const double psi = -1.0 + 2.0 * j / (samples - 1);
    const double u = (*this)(psi);
    if (!(u > 0.0)) {
      throw ModelInconsistency("wall potential is not a double well: U(" + std::to_string(psi) +
                               ") <= 0");
    }
    peak = std::max(peak, u);
  }
  for (int j = 0; j < samples; ++j) {
    const double psi = static_cast<double>(j) / (samples - 1);
    if (std::abs((*this)(psi) - (*this)(-psi)) > 1e-10 * peak) {
      throw ModelInconsistency("wall potential is not even in psi");
    }
  }
  half_width_ = std::numeric_limits<double>::infinity();
  for (double psi = 1.0 + 1e-3; psi < 10.0; psi += 1e-3) {
    if (derivative(psi) <= 0.0) {
      half_width_ = psi;
      break;
    }
  }
}

WallPotential WallPotential::normalized(Fn u, Fn du, int samples) {
  return WallPotential(Prenormalized{}, std::move(u), std::move(du), samples);
}

WallPotential wall_potential(const Basis2& reference, int triplet, double rotation_angle,
                             const GsfeModel& model, int samples) {
  const BurgersTriplet bt = burgers_triplet(triplet, reference.lattice_constant());
  const Mat2 r = rotation(rotation_angle);
  // Both layers carry the same rotated lattice R A.
  const Mat2 inv = (r * reference.matrix()).inverse();
  const Vec2 saddle = r * bt.saddle;
  const Vec2 step = r * bt.half_burgers;
  const Vec2 well_hi = kTwoPi * inv * (saddle + step);
  const Vec2 well_lo = kTwoPi * inv * (saddle - step);
  const Vec2 dstep = kTwoPi * inv * step;

  // Measured from the nearer well; the two wells are symmetric images.
  auto excess = [=](double u) {
    const Vec2& base = u >= 0.0 ? well_hi : well_lo;
    const double du = u >= 0.0 ? u - 1.0 : u + 1.0;
    return phi_difference(base[0], base[1], du * dstep[0], du * dstep[1], model);
  };
  auto slope = [=](double u) {
    const Vec2 f = kTwoPi * inv * (saddle + u * step);
    const PhiSample s = phi_with_gradient(f[0], f[1], model);
    return s.dv * dstep[0] + s.dw * dstep[1];
  };
  return WallPotential(excess, slope, phi(well_hi[0], well_hi[1], model), samples);
}

}  // namespace moire
