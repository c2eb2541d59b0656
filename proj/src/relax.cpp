#include "moire/relax.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "moire/error.hpp"
#include "moire/kernels.hpp"

namespace moire {

DisplacementField DisplacementField::zero(const MoireCell& cell) {
  DisplacementField f;
  const auto dims = cell.grid_shape();
  f.shape = {dims[0], dims[1]};
  f.grid_basis = cell.grid_basis();
  f.moire_basis = cell.basis();
  f.rank = cell.rank();
  f.data.assign(4 * static_cast<std::size_t>(f.shape.nodes()), 0.0);
  return f;
}

std::span<double> DisplacementField::component(int layer, int axis) {
  if (layer < 1 || layer > 2 || axis < 0 || axis > 1) throw InvalidArgument("bad field component");
  const std::size_t n = shape.nodes();
  return {data.data() + (2 * (layer - 1) + axis) * n, n};
}

std::span<const double> DisplacementField::component(int layer, int axis) const {
  return const_cast<DisplacementField*>(this)->component(layer, axis);
}

Vec2 DisplacementField::at(int layer, int node) const {
  return {component(layer, 0)[node], component(layer, 1)[node]};
}

Vec2 DisplacementField::position(int node) const {
  const int j1 = node / shape.n2, j2 = node % shape.n2;
  return grid_basis * Vec2(double(j1) / shape.n1, double(j2) / shape.n2);
}

std::vector<cplx> DisplacementField::coefficients(int layer, int axis) const {
  RealFft fft(shape);
  std::vector<cplx> out(shape.modes());
  fft.forward(component(layer, axis).data(), out.data());
  for (auto& c : out) c /= double(shape.nodes());
  return out;
}

namespace {

// Curvature of the misfit density in v at the Bernal stacking, averaged over directions.
double bernal_curvature(const Mat2& inv1, const Mat2& inv2, const GsfeModel& model) {
  constexpr double tau = 2.0 * std::numbers::pi;
  const Vec2 xi(1.0 / 3.0, 1.0 / 3.0);
  auto grad = [&](const Vec2& v) {
    Vec2 g = Vec2::Zero();
    for (const Mat2* inv : {&inv2, &inv1}) {
      const Vec2 a = tau * (xi + *inv * v);
      const PhiSample p = phi_with_gradient(a.x(), a.y(), model);
      g += 0.5 * tau * inv->transpose() * Vec2(p.dv, p.dw);
    }
    return g;
  };
  const double h = 1e-4;
  double trace = 0.0;
  for (int j = 0; j < 2; ++j) {
    const Vec2 e = Vec2::Unit(j) * h;
    trace += (grad(e)[j] - grad(-e)[j]) / (2.0 * h);
  }
  return std::max(trace / 2.0, 0.0);
}

void remove_mean(std::span<double> a) {
  double m = 0.0;
  for (double v : a) m += v;
  m /= double(a.size());
  for (double& v : a) v -= m;
}

}  // namespace

BilayerEnergy::BilayerEnergy(const LayerPair& pair, const MoireCell& cell, const ElasticModuli& layer1,
                             const ElasticModuli& layer2, const GsfeModel& model, Backend backend)
    : grid_basis_(cell.grid_basis()),
      moire_basis_(cell.basis()),
      rank_(cell.rank()),
      moduli_{layer1, layer2},
      model_(model),
      backend_(backend) {
  layer1.validate();
  layer2.validate();
  const auto dims = cell.grid_shape();
  shape_ = {dims[0], dims[1]};
  modes_ = make_modes(shape_, grid_basis_);
  fft_ = std::make_unique<RealFft>(shape_);
  inv1_ = pair.layer1.inverse();
  inv2_ = pair.layer2.inverse();
  stacking_ = cell.difference() * grid_basis_;
  cell_area_ = cell.grid_area();
  scale_ = cell_area_ / (0.5 * (pair.layer1.cell_area() + pair.layer2.cell_area()));
  alpha_ = bernal_curvature(inv1_, inv2_, model_);
}

double BilayerEnergy::intra(std::span<const double> ux, std::span<const double> uy, int layer,
                            double* gx, double* gy) const {
  const int nm = shape_.modes();
  const double nt = shape_.nodes();
  std::vector<cplx> cx(nm), cy(nm), mx, my;
  fft_->forward(ux.data(), cx.data());
  fft_->forward(uy.data(), cy.data());
  for (int k = 0; k < nm; ++k) cx[k] /= nt, cy[k] /= nt;
  if (gx) mx.resize(nm), my.resize(nm);
  const ElasticModuli& m = moduli_[layer - 1];
  const double e = backend_ == Backend::Serial
                       ? kernels::serial::elastic(modes_, m.lambda, m.mu, cx.data(), cy.data(),
                                                  gx ? mx.data() : nullptr, gx ? my.data() : nullptr)
                       : kernels::parallel::elastic(modes_, m.lambda, m.mu, cx.data(), cy.data(),
                                                    gx ? mx.data() : nullptr, gx ? my.data() : nullptr);
  if (gx) {
    fft_->inverse(mx.data(), gx);
    fft_->inverse(my.data(), gy);
    const double f = scale_ * 2.0 / nt;
    for (int j = 0; j < shape_.nodes(); ++j) gx[j] *= f, gy[j] *= f;
  }
  return scale_ * e;
}

double BilayerEnergy::inter(std::span<const double> vx, std::span<const double> vy, double* gx,
                            double* gy) const {
  const kernels::MisfitGeometry geo{shape_, stacking_, inv1_, inv2_};
  const double raw = backend_ == Backend::Serial
                         ? kernels::serial::misfit(geo, model_, vx.data(), vy.data(), gx, gy)
                         : kernels::parallel::misfit(geo, model_, vx.data(), vy.data(), gx, gy);
  const double f = scale_ / shape_.nodes();
  if (gx) {
    for (int j = 0; j < shape_.nodes(); ++j) gx[j] *= f, gy[j] *= f;
  }
  return f * raw;
}

EnergyBreakdown BilayerEnergy::evaluate(std::span<const double> x, std::span<double> grad) const {
  if (x.size() != size() || (!grad.empty() && grad.size() != size()))
    throw InvalidArgument("field does not match the energy grid");
  const std::size_t n = shape_.nodes();
  auto part = [&](std::span<const double> s, int c) { return s.subspan(c * n, n); };
  const bool want = !grad.empty();
  double* g = want ? grad.data() : nullptr;

  EnergyBreakdown e;
  e.cell_area = cell_area_;
  e.intra1 = intra(part(x, 0), part(x, 1), 1, want ? g : nullptr, want ? g + n : nullptr);
  e.intra2 = intra(part(x, 2), part(x, 3), 2, want ? g + 2 * n : nullptr, want ? g + 3 * n : nullptr);

  std::vector<double> vx(n), vy(n), gvx, gvy;
  for (std::size_t j = 0; j < n; ++j) {
    vx[j] = x[j] - x[2 * n + j];
    vy[j] = x[n + j] - x[3 * n + j];
  }
  if (want) gvx.resize(n), gvy.resize(n);
  e.inter = inter(vx, vy, want ? gvx.data() : nullptr, want ? gvy.data() : nullptr);
  e.total = e.intra1 + e.intra2 + e.inter;

  if (want) {
    for (std::size_t j = 0; j < n; ++j) {
      g[j] += gvx[j];
      g[n + j] += gvy[j];
      g[2 * n + j] -= gvx[j];
      g[3 * n + j] -= gvy[j];
    }
    for (int c = 0; c < 4; ++c) remove_mean(grad.subspan(c * n, n));
  }
  return e;
}

EnergyBreakdown BilayerEnergy::evaluate(const DisplacementField& field) const {
  if (field.shape != shape_) throw InvalidArgument("field does not match the energy grid");
  return evaluate(field.data);
}

double BilayerEnergy::intra_energy(const DisplacementField& field, int layer, std::span<double> grad) const {
  if (field.shape != shape_) throw InvalidArgument("field does not match the energy grid");
  const std::size_t n = shape_.nodes();
  if (!grad.empty() && grad.size() != 2 * n) throw InvalidArgument("gradient buffer has the wrong size");
  return intra(field.component(layer, 0), field.component(layer, 1), layer,
               grad.empty() ? nullptr : grad.data(), grad.empty() ? nullptr : grad.data() + n);
}

double BilayerEnergy::inter_energy(const DisplacementField& field, std::span<double> grad) const {
  if (field.shape != shape_) throw InvalidArgument("field does not match the energy grid");
  const std::size_t n = shape_.nodes();
  if (!grad.empty() && grad.size() != 2 * n) throw InvalidArgument("gradient buffer has the wrong size");
  std::vector<double> vx(n), vy(n);
  for (std::size_t j = 0; j < n; ++j) {
    vx[j] = field.component(1, 0)[j] - field.component(2, 0)[j];
    vy[j] = field.component(1, 1)[j] - field.component(2, 1)[j];
  }
  return inter(vx, vy, grad.empty() ? nullptr : grad.data(), grad.empty() ? nullptr : grad.data() + n);
}

void BilayerEnergy::apply_inverse_metric(std::span<const double> in, std::span<double> out) const {
  const std::size_t n = shape_.nodes();
  const int nm = shape_.modes();
  std::vector<cplx> gx(nm), gy(nm), ox(nm), oy(nm);
  for (int layer = 0; layer < 2; ++layer) {
    const std::size_t off = 2 * layer * n;
    fft_->forward(in.data() + off, gx.data());
    fft_->forward(in.data() + off + n, gy.data());
    const ElasticModuli& m = moduli_[layer];
    if (backend_ == Backend::Serial)
      kernels::serial::precondition(modes_, m.lambda, m.mu, alpha_, gx.data(), gy.data(), ox.data(), oy.data());
    else
      kernels::parallel::precondition(modes_, m.lambda, m.mu, alpha_, gx.data(), gy.data(), ox.data(), oy.data());
    fft_->inverse(ox.data(), out.data() + off);
    fft_->inverse(oy.data(), out.data() + off + n);
  }
  for (double& v : out) v /= scale_;
}

DisplacementField BilayerEnergy::zero_field() const {
  DisplacementField f;
  f.shape = shape_;
  f.grid_basis = grid_basis_;
  f.moire_basis = moire_basis_;
  f.rank = rank_;
  f.data.assign(size(), 0.0);
  return f;
}

RelaxResult relax(const LayerPair& pair, const GsfeModel& model, const ElasticModuli& layer1,
                  const ElasticModuli& layer2, const RelaxOptions& options) {
  if (options.grad_tol <= 0.0 || options.max_iter < 0 || options.memory < 1)
    throw InvalidArgument("relaxation tolerances and limits must be positive");
  const MoireCell cell = moire_cell(pair, options.grid_n);
  const BilayerEnergy energy(pair, cell, layer1, layer2, model, options.backend);

  RelaxResult res;
  res.field = energy.zero_field();
  res.initial_energy = energy.evaluate(res.field);
  if (options.initial) {
    const DisplacementField& init = *options.initial;
    res.field.data = init.shape == energy.shape() ? init.data : resample(init, cell).data;
    for (int c = 0; c < 4; ++c)
      remove_mean(std::span<double>(res.field.data).subspan(c * energy.shape().nodes(), energy.shape().nodes()));
  }

  LbfgsOptions lo;
  lo.grad_tol = options.grad_tol;
  lo.max_iter = options.max_iter;
  lo.memory = options.memory;
  auto objective = [&](std::span<const double> x, std::span<double> g) { return energy.evaluate(x, g).total; };
  InverseMetric metric;
  if (options.precondition)
    metric = [&](std::span<const double> in, std::span<double> out) { energy.apply_inverse_metric(in, out); };

  {
    std::vector<double> g(energy.size());
    const double e0 = energy.evaluate(res.field.data, g).total;
    double sup = 0.0;
    for (double v : g) sup = std::max(sup, std::abs(v));
    res.trace.push_back({0, e0, sup});
  }
  const LbfgsReport rep = minimize_lbfgs(objective, res.field.data, lo, metric,
                                         [&](int it, double f, double gi) { res.trace.push_back({it, f, gi}); });
  res.status = rep.status;
  res.iterations = rep.iterations;
  res.grad_inf = rep.grad_inf;
  res.energy = energy.evaluate(res.field);
  return res;
}

RelaxResult relax(const LayerPair& pair, const GsfeModel& model, const ElasticModuli& moduli,
                  const RelaxOptions& options) {
  return relax(pair, model, moduli, moduli, options);
}

DisplacementField resample(const DisplacementField& field, const MoireCell& cell) {
  DisplacementField out = resample(field, GridShape{cell.grid_shape()[0], cell.grid_shape()[1]});
  out.grid_basis = cell.grid_basis();
  out.moire_basis = cell.basis();
  out.rank = cell.rank();
  return out;
}

DisplacementField resample(const DisplacementField& field, const GridShape& shape) {
  DisplacementField out = field;
  out.shape = shape;
  out.data.assign(4 * static_cast<std::size_t>(shape.nodes()), 0.0);
  const GridShape& src = field.shape;
  const GridShape& dst = out.shape;
  auto keep = [](int k, int ns, int nd) -> int {
    // Target index of source mode k, or -1 when it does not fit.
    const int s = k <= ns / 2 ? k : k - ns;
    const int lim = std::min(ns, nd);
    if (2 * std::abs(s) >= lim && !(lim == 1 && s == 0)) return -1;
    return s < 0 ? s + nd : s;
  };
  RealFft fsrc(src), fdst(dst);
  std::vector<cplx> cs(src.modes()), cd(dst.modes());
  for (int layer = 1; layer <= 2; ++layer) {
    for (int axis = 0; axis < 2; ++axis) {
      fsrc.forward(field.component(layer, axis).data(), cs.data());
      std::fill(cd.begin(), cd.end(), cplx(0.0));
      for (int k1 = 0; k1 < src.n1; ++k1) {
        const int d1 = keep(k1, src.n1, dst.n1);
        if (d1 == -1) continue;
        for (int k2 = 0; k2 < src.half2(); ++k2) {
          const int d2 = keep(k2, src.n2, dst.n2);
          if (d2 == -1 || d2 >= dst.half2()) continue;
          cd[d1 * dst.half2() + d2] = cs[k1 * src.half2() + k2] / double(src.nodes());
        }
      }
      fdst.inverse(cd.data(), out.component(layer, axis).data());
    }
  }
  return out;
}

double sobolev_norm(const DisplacementField& field, double reference_area) {
  if (!(reference_area > 0.0)) throw InvalidArgument("reference cell area must be positive");
  const GridShape& s = field.shape;
  const ModeTable modes = make_modes(s, field.grid_basis);
  RealFft fft(s);
  const double area = std::abs(field.grid_basis.determinant());
  const double rho2 = reference_area / area;
  std::vector<double> u(s.nodes());
  std::vector<cplx> c(s.modes());
  double sum = 0.0;
  for (int axis = 0; axis < 2; ++axis) {
    for (int j = 0; j < s.nodes(); ++j)
      u[j] = 0.5 * (field.component(1, axis)[j] - field.component(2, axis)[j]);
    fft.forward(u.data(), c.data());
    for (int k = 0; k < s.modes(); ++k)
      sum += modes.weight[k] * (rho2 + modes.q[k].squaredNorm()) * std::norm(c[k] / double(s.nodes()));
  }
  return std::sqrt(area * sum);
}

std::vector<ScalingRow> scaling_diagnostic(const std::vector<double>& thetas,
                                           const std::vector<DisplacementField>& fields, double reference_area) {
  if (thetas.size() != fields.size()) throw InvalidArgument("one field per angle is required");
  std::vector<ScalingRow> rows;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const double n = sobolev_norm(fields[i], reference_area);
    rows.push_back({thetas[i], n, 2.0 * std::sin(thetas[i] / 2.0) * n});
  }
  return rows;
}

}  // namespace moire
