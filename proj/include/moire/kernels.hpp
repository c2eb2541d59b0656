#pragma once

#include <cmath>

#include "moire/gsfe.hpp"
#include "moire/spectral.hpp"

namespace moire::kernels {

/// Geometry of the misfit quadrature. Node j sits at grid coordinate
/// eta = (j1/n1, j2/n2); `stacking` maps eta to the fractional stacking xi.
struct MisfitGeometry {
  GridShape shape;
  Mat2 stacking = Mat2::Identity();
  Mat2 inv_layer1 = Mat2::Identity();  // A1^-1
  Mat2 inv_layer2 = Mat2::Identity();  // A2^-1
};

/// phi and its gradient using two sincos evaluations and angle addition.
inline PhiSample phi_fast(double v, double w, const GsfeModel& m) {
  const double sv = std::sin(v), cv = std::cos(v);
  const double sw = std::sin(w), cw = std::cos(w);
  const double c11 = cv * cw - sv * sw, s11 = sv * cw + cv * sw;
  const double c1m = cv * cw + sv * sw, s1m = sv * cw - cv * sw;
  const double c20 = cv * cv - sv * sv, s20 = 2.0 * sv * cv;
  const double c02 = cw * cw - sw * sw, s02 = 2.0 * sw * cw;
  const double c22 = c11 * c11 - s11 * s11, s22 = 2.0 * s11 * c11;
  const double c12 = cv * c02 - sv * s02, s12 = sv * c02 + cv * s02;
  const double c21 = c20 * cw - s20 * sw, s21 = s20 * cw + c20 * sw;
  PhiSample out;
  out.value = m.c0 + m.c1 * (cv + cw + c11) + m.c2 * (c12 + c1m + c21) + m.c3 * (c20 + c02 + c22);
  out.dv = -m.c1 * (sv + s11) - m.c2 * (s12 + s1m + 2.0 * s21) - 2.0 * m.c3 * (s20 + s22);
  out.dw = -m.c1 * (sw + s11) - m.c2 * (2.0 * s12 - s1m + s21) - 2.0 * m.c3 * (s02 + s22);
  return out;
}

// Reference loops.
namespace serial {
/// Returns sum_j (phi(a_j) + phi(b_j)) / 2 with a = 2 pi (xi + A2^-1 v) and
/// b = 2 pi (xi + A1^-1 v). Writes the gradient in v when gx, gy are non-null.
double misfit(const MisfitGeometry& geo, const GsfeModel& model, const double* vx,
              const double* vy, double* gx, double* gy);
/// Returns sum_k w_k [(lambda+mu)/2 |q.u|^2 + mu/2 |q|^2 |u|^2] and writes M_k u_k
/// (the matrix of that quadratic form) when mx, my are non-null.
double elastic(const ModeTable& modes, double lambda, double mu, const cplx* ux,
               const cplx* uy, cplx* mx, cplx* my);
/// o_k = (2 M_k + alpha I)^-1 g_k, zero at k = 0.
void precondition(const ModeTable& modes, double lambda, double mu, double alpha,
                  const cplx* gx, const cplx* gy, cplx* ox, cplx* oy);
}  // namespace serial

// OpenMP versions. Reductions use fixed blocks of 4096 entries summed in order,
// so results do not depend on the thread count.
namespace parallel {
double misfit(const MisfitGeometry& geo, const GsfeModel& model, const double* vx,
              const double* vy, double* gx, double* gy);
double elastic(const ModeTable& modes, double lambda, double mu, const cplx* ux,
               const cplx* uy, cplx* mx, cplx* my);
void precondition(const ModeTable& modes, double lambda, double mu, double alpha,
                  const cplx* gx, const cplx* gy, cplx* ox, cplx* oy);
}  // namespace parallel

}  // namespace moire::kernels
