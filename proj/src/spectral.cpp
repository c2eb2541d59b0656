#include "moire/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "moire/error.hpp"

namespace moire {

namespace {

// The FFTW planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

double derivative_index(int k, int n) {
  if (n % 2 == 0 && k == n / 2) return 0.0;
  return k <= n / 2 ? k : k - n;
}

}  // namespace

ModeTable make_modes(const GridShape& shape, const Mat2& grid_basis) {
  ModeTable t;
  t.shape = shape;
  t.q.resize(shape.modes());
  t.weight.resize(shape.modes());
  const Mat2 dual = 2.0 * std::numbers::pi * grid_basis.inverse().transpose();
  const int h2 = shape.half2();
  for (int k1 = 0; k1 < shape.n1; ++k1) {
    for (int k2 = 0; k2 < h2; ++k2) {
      const int idx = k1 * h2 + k2;
      t.q[idx] = dual * Vec2(derivative_index(k1, shape.n1), derivative_index(k2, shape.n2));
      const bool self = k2 == 0 || (shape.n2 % 2 == 0 && k2 == shape.n2 / 2);
      t.weight[idx] = self ? 1.0 : 2.0;
    }
  }
  return t;
}

struct RealFft::Impl {
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
  mutable std::mutex run;
};

RealFft::RealFft(const GridShape& shape) : shape_(shape), impl_(std::make_unique<Impl>()) {
  if (shape.n1 < 1 || shape.n2 < 1) throw InvalidArgument("grid dimensions must be positive");
  std::lock_guard lock(planner_mutex());
  impl_->real = fftw_alloc_real(shape.nodes());
  impl_->spec = fftw_alloc_complex(shape.modes());
  impl_->fwd = fftw_plan_dft_r2c_2d(shape.n1, shape.n2, impl_->real, impl_->spec, FFTW_ESTIMATE);
  impl_->inv = fftw_plan_dft_c2r_2d(shape.n1, shape.n2, impl_->spec, impl_->real, FFTW_ESTIMATE);
  if (!impl_->fwd || !impl_->inv) throw NumericalFailure("FFTW could not create a plan");
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(impl_->fwd);
  fftw_destroy_plan(impl_->inv);
  fftw_free(impl_->real);
  fftw_free(impl_->spec);
}

void RealFft::forward(const double* in, cplx* out) const {
  std::lock_guard lock(impl_->run);
  std::copy(in, in + shape_.nodes(), impl_->real);
  fftw_execute(impl_->fwd);
  const auto* s = reinterpret_cast<const cplx*>(impl_->spec);
  std::copy(s, s + shape_.modes(), out);
}

void RealFft::inverse(const cplx* in, double* out) const {
  std::lock_guard lock(impl_->run);
  std::copy(in, in + shape_.modes(), reinterpret_cast<cplx*>(impl_->spec));
  fftw_execute(impl_->inv);
  std::copy(impl_->real, impl_->real + shape_.nodes(), out);
}

}  // namespace moire
