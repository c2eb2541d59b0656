#include <algorithm>
#include <vector>

#include "kernel_ops.hpp"

namespace moire::kernels::parallel {

namespace {

// Sum of body(i) over [0, n) with a fixed blocking independent of the thread count.
template <class Body>
double blocked_sum(int n, Body body) {
  const int blocks = (n + detail::kBlock - 1) / detail::kBlock;
  std::vector<double> partial(blocks, 0.0);
#pragma omp parallel for schedule(static)
  for (int b = 0; b < blocks; ++b) {
    const int end = std::min(n, (b + 1) * detail::kBlock);
    double s = 0.0;
    for (int i = b * detail::kBlock; i < end; ++i) s += body(i);
    partial[b] = s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace

double misfit(const MisfitGeometry& geo, const GsfeModel& model, const double* vx,
              const double* vy, double* gx, double* gy) {
  const auto frame = detail::node_frame(geo);
  return blocked_sum(geo.shape.nodes(), [&](int j) {
    return detail::misfit_node(frame, model, j, vx[j], vy[j], gx, gy);
  });
}

double elastic(const ModeTable& modes, double lambda, double mu, const cplx* ux,
               const cplx* uy, cplx* mx, cplx* my) {
  return blocked_sum(modes.shape.modes(), [&](int k) {
    return detail::elastic_mode(modes, lambda + mu, mu, k, ux, uy, mx, my);
  });
}

void precondition(const ModeTable& modes, double lambda, double mu, double alpha,
                  const cplx* gx, const cplx* gy, cplx* ox, cplx* oy) {
  const int n = modes.shape.modes();
#pragma omp parallel for schedule(static)
  for (int k = 0; k < n; ++k)
    detail::precondition_mode(modes, lambda + mu, mu, alpha, k, gx, gy, ox, oy);
}

}  // namespace moire::kernels::parallel
