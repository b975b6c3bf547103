#include "fluidtop/equilibria.hpp"
#include "fluidtop/spectral.hpp"

#include <benchmark/benchmark.h>

using namespace fluidtop;

namespace {

BodyParams params() {
  BodyParams p;
  p.lambda = Vec3(1.0, 2.0, 3.0);
  p.beta2 = 1.0;
  p.rho = 0.5;
  p.nu = 0.5;
  return p;
}

void BM_BasisBuild(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_ball_basis(n, 0, params()));
}
BENCHMARK(BM_BasisBuild)->Arg(5)->Arg(8)->Arg(15)->Unit(benchmark::kMillisecond);

void BM_Rhs(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const RigidFluidModel m(params(), std::make_shared<const GalerkinBasis>(build_ball_basis(n, 0, params())));
  Eigen::VectorXd u = Eigen::VectorXd::Constant(m.dim(), 0.1);
  u.tail<3>() = Vec3(0.3, -0.2, 1.0).normalized();
  Eigen::VectorXd du(m.dim());
  for (auto _ : state) {
    m.rhs(u, du);
    benchmark::DoNotOptimize(du.data());
  }
}
BENCHMARK(BM_Rhs)->Arg(5)->Arg(8)->Arg(15)->Arg(50);

void BM_SpectralSplit(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const RigidFluidModel m(params(), std::make_shared<const GalerkinBasis>(build_ball_basis(n, 0, params())));
  const Eigen::MatrixXd l = assemble_linearization(make_steady(Family::SP1, 1.0, m), m);
  for (auto _ : state) benchmark::DoNotOptimize(spectral_split(l));
}
BENCHMARK(BM_SpectralSplit)->Arg(5)->Arg(8)->Arg(15)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
