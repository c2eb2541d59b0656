#include "kernel_ops.hpp"

namespace moire::kernels::serial {

double misfit(const MisfitGeometry& geo, const GsfeModel& model, const double* vx,
              const double* vy, double* gx, double* gy) {
  const auto frame = detail::node_frame(geo);
  const int n = geo.shape.nodes();
  double sum = 0.0;
  for (int j = 0; j < n; ++j) sum += detail::misfit_node(frame, model, j, vx[j], vy[j], gx, gy);
  return sum;
}

double elastic(const ModeTable& modes, double lambda, double mu, const cplx* ux,
               const cplx* uy, cplx* mx, cplx* my) {
  const int n = modes.shape.modes();
  double sum = 0.0;
  for (int k = 0; k < n; ++k) sum += detail::elastic_mode(modes, lambda + mu, mu, k, ux, uy, mx, my);
  return sum;
}

void precondition(const ModeTable& modes, double lambda, double mu, double alpha,
                  const cplx* gx, const cplx* gy, cplx* ox, cplx* oy) {
  const int n = modes.shape.modes();
  for (int k = 0; k < n; ++k)
    detail::precondition_mode(modes, lambda + mu, mu, alpha, k, gx, gy, ox, oy);
}

}  // namespace moire::kernels::serial
