#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "moire/kernels.hpp"
#include "moire/lattice.hpp"

namespace {

using namespace moire;

struct Setup {
  kernels::MisfitGeometry geo;
  ModeTable modes;
  std::vector<double> vx, vy, gx, gy;
  std::vector<cplx> ux, uy, mx, my;

  explicit Setup(int n) {
    const LayerPair pair = layer_pair({Family::Twist, 0.01}, Basis2::graphene());
    const MoireCell cell = moire_cell(pair, n);
    geo = {{n, n}, cell.difference() * cell.grid_basis(), pair.layer1.inverse(), pair.layer2.inverse()};
    modes = make_modes(geo.shape, cell.grid_basis());
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> d(-0.5, 0.5);
    const int nodes = geo.shape.nodes(), nm = geo.shape.modes();
    vx.resize(nodes), vy.resize(nodes), gx.resize(nodes), gy.resize(nodes);
    for (int j = 0; j < nodes; ++j) vx[j] = d(rng), vy[j] = d(rng);
    ux.resize(nm), uy.resize(nm), mx.resize(nm), my.resize(nm);
    for (int k = 0; k < nm; ++k) ux[k] = {d(rng), d(rng)}, uy[k] = {d(rng), d(rng)};
  }
};

template <bool Parallel>
void BM_Misfit(benchmark::State& state) {
  Setup s(static_cast<int>(state.range(0)));
  const GsfeModel model;
  for (auto _ : state) {
    const double e = Parallel ? kernels::parallel::misfit(s.geo, model, s.vx.data(), s.vy.data(), s.gx.data(), s.gy.data())
                              : kernels::serial::misfit(s.geo, model, s.vx.data(), s.vy.data(), s.gx.data(), s.gy.data());
    benchmark::DoNotOptimize(e);
  }
  state.SetItemsProcessed(state.iterations() * s.geo.shape.nodes());
}

template <bool Parallel>
void BM_Elastic(benchmark::State& state) {
  Setup s(static_cast<int>(state.range(0)));
  const ElasticModuli m;
  for (auto _ : state) {
    const double e = Parallel ? kernels::parallel::elastic(s.modes, m.lambda, m.mu, s.ux.data(), s.uy.data(), s.mx.data(), s.my.data())
                              : kernels::serial::elastic(s.modes, m.lambda, m.mu, s.ux.data(), s.uy.data(), s.mx.data(), s.my.data());
    benchmark::DoNotOptimize(e);
  }
  state.SetItemsProcessed(state.iterations() * s.geo.shape.modes());
}

template <bool Parallel>
void BM_Precondition(benchmark::State& state) {
  Setup s(static_cast<int>(state.range(0)));
  const ElasticModuli m;
  for (auto _ : state) {
    if (Parallel)
      kernels::parallel::precondition(s.modes, m.lambda, m.mu, 38.0, s.ux.data(), s.uy.data(), s.mx.data(), s.my.data());
    else
      kernels::serial::precondition(s.modes, m.lambda, m.mu, 38.0, s.ux.data(), s.uy.data(), s.mx.data(), s.my.data());
    benchmark::DoNotOptimize(s.mx.data());
  }
  state.SetItemsProcessed(state.iterations() * s.geo.shape.modes());
}

}  // namespace

BENCHMARK(BM_Misfit<false>)->Name("misfit/serial")->Arg(128)->Arg(256)->Arg(512);
BENCHMARK(BM_Misfit<true>)->Name("misfit/omp")->Arg(128)->Arg(256)->Arg(512);
BENCHMARK(BM_Elastic<false>)->Name("elastic/serial")->Arg(128)->Arg(256)->Arg(512);
BENCHMARK(BM_Elastic<true>)->Name("elastic/omp")->Arg(128)->Arg(256)->Arg(512);
BENCHMARK(BM_Precondition<false>)->Name("precondition/serial")->Arg(128)->Arg(256)->Arg(512);
BENCHMARK(BM_Precondition<true>)->Name("precondition/omp")->Arg(128)->Arg(256)->Arg(512);

BENCHMARK_MAIN();
