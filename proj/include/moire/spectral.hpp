#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "moire/lattice.hpp"

namespace moire {

using cplx = std::complex<double>;

/// Nodes sit at grid_basis * (j1 / n1, j2 / n2); storage is row-major with j2 fastest.
struct GridShape {
  int n1 = 1;
  int n2 = 1;

  int nodes() const { return n1 * n2; }
  int half2() const { return n2 / 2 + 1; }
  /// Number of stored modes in the real-to-complex half spectrum.
  int modes() const { return n1 * half2(); }
  bool operator==(const GridShape&) const = default;
};

/**
 * Wavevectors of the half spectrum. Indices are mapped to the signed range
 * (-n/2, n/2]; the derivative component of an even-n Nyquist index is zero.
 * `weight` is 2 for modes whose conjugate partner is not stored, 1 otherwise.
 */
struct ModeTable {
  GridShape shape;
  std::vector<Vec2> q;
  std::vector<double> weight;
};

ModeTable make_modes(const GridShape& shape, const Mat2& grid_basis);

/// Unnormalized 2D real FFT pair (FFTW, estimate planning so results are reproducible).
class RealFft {
 public:
  explicit RealFft(const GridShape& shape);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  const GridShape& shape() const { return shape_; }
  /// out[k] = sum_j in[j] e^{-2 pi i k.xi_j}; `out` holds shape.modes() entries.
  void forward(const double* in, cplx* out) const;
  /// out[j] = sum_k X_k e^{+2 pi i k.xi_j} over the Hermitian-completed spectrum.
  void inverse(const cplx* in, double* out) const;

 private:
  struct Impl;
  GridShape shape_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace moire
