#pragma once

#include <cmath>
#include <numbers>

#include "moire/kernels.hpp"

// Per-entry bodies shared by the serial and OpenMP kernels.
namespace moire::kernels::detail {

inline constexpr int kBlock = 4096;

struct NodeFrame {
  double a11, a12, a21, a22;  // 2 pi A2^-1
  double b11, b12, b21, b22;  // 2 pi A1^-1
  double s11, s12, s21, s22;  // stacking / (n1, n2)
  int n2;
};

inline NodeFrame node_frame(const MisfitGeometry& g) {
  constexpr double tau = 2.0 * std::numbers::pi;
  NodeFrame f;
  f.a11 = tau * g.inv_layer2(0, 0), f.a12 = tau * g.inv_layer2(0, 1);
  f.a21 = tau * g.inv_layer2(1, 0), f.a22 = tau * g.inv_layer2(1, 1);
  f.b11 = tau * g.inv_layer1(0, 0), f.b12 = tau * g.inv_layer1(0, 1);
  f.b21 = tau * g.inv_layer1(1, 0), f.b22 = tau * g.inv_layer1(1, 1);
  f.s11 = g.stacking(0, 0) / g.shape.n1, f.s12 = g.stacking(0, 1) / g.shape.n2;
  f.s21 = g.stacking(1, 0) / g.shape.n1, f.s22 = g.stacking(1, 1) / g.shape.n2;
  f.n2 = g.shape.n2;
  return f;
}

inline double misfit_node(const NodeFrame& f, const GsfeModel& m, int j, double vx, double vy,
                          double* gx, double* gy) {
  constexpr double tau = 2.0 * std::numbers::pi;
  const int j1 = j / f.n2, j2 = j % f.n2;
  double x1 = f.s11 * j1 + f.s12 * j2;
  double x2 = f.s21 * j1 + f.s22 * j2;
  x1 = tau * (x1 - std::floor(x1));
  x2 = tau * (x2 - std::floor(x2));
  const PhiSample pa = phi_fast(x1 + f.a11 * vx + f.a12 * vy, x2 + f.a21 * vx + f.a22 * vy, m);
  const PhiSample pb = phi_fast(x1 + f.b11 * vx + f.b12 * vy, x2 + f.b21 * vx + f.b22 * vy, m);
  if (gx) {
    gx[j] = 0.5 * (f.a11 * pa.dv + f.a21 * pa.dw + f.b11 * pb.dv + f.b21 * pb.dw);
    gy[j] = 0.5 * (f.a12 * pa.dv + f.a22 * pa.dw + f.b12 * pb.dv + f.b22 * pb.dw);
  }
  return 0.5 * (pa.value + pb.value);
}

inline double elastic_mode(const ModeTable& t, double lpm, double mu, int k, const cplx* ux,
                           const cplx* uy, cplx* mx, cplx* my) {
  const double qx = t.q[k].x(), qy = t.q[k].y();
  const double q2 = qx * qx + qy * qy;
  const cplx qu = qx * ux[k] + qy * uy[k];
  if (mx) {
    mx[k] = 0.5 * (lpm * qx * qu + mu * q2 * ux[k]);
    my[k] = 0.5 * (lpm * qy * qu + mu * q2 * uy[k]);
  }
  return t.weight[k] * 0.5 * (lpm * std::norm(qu) + mu * q2 * (std::norm(ux[k]) + std::norm(uy[k])));
}

inline void precondition_mode(const ModeTable& t, double lpm, double mu, double alpha, int k,
                              const cplx* gx, const cplx* gy, cplx* ox, cplx* oy) {
  if (k == 0) {
    ox[0] = oy[0] = 0.0;
    return;
  }
  const double qx = t.q[k].x(), qy = t.q[k].y();
  const double q2 = qx * qx + qy * qy;
  const double c = mu * q2 + alpha;
  const cplx qg = qx * gx[k] + qy * gy[k];
  const double r = lpm / (c + lpm * q2);
  ox[k] = (gx[k] - r * qx * qg) / c;
  oy[k] = (gy[k] - r * qy * qg) / c;
}

}  // namespace moire::kernels::detail
