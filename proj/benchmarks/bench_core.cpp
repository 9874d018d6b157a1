#include <cmath>

#include <benchmark/benchmark.h>

#include "vfd/green.hpp"
#include "vfd/profile.hpp"
#include "vfd/solver.hpp"

using namespace vfd;

namespace {

double bump(double x) {
    const double s = x / 1.5;
    return std::fabs(s) < 1.0 ? 1.25 * (1 - s * s) * (1 - s * s) : 0.0;
}

void BM_ProfileIntegration(benchmark::State& state) {
    const double dr = 1.0 / static_cast<double>(state.range(0));
    for (auto _ : state) {
        ProfileCurve c = integrate_profile(-0.5, 1.0, 40.0, dr);
        benchmark::DoNotOptimize(c.f.back());
    }
}
BENCHMARK(BM_ProfileIntegration)->Arg(100)->Arg(1000);

void BM_GreenApply(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    GreenOperator op(2.0, n);
    std::vector<double> f(n);
    for (std::size_t j = 0; j < n; ++j) f[j] = std::sin(M_PI * op.nodes()[j] / 2.0);
    for (auto _ : state) {
        auto g = op.apply_star(f);
        benchmark::DoNotOptimize(g[n / 2 + 1]);
    }
    state.SetComplexityN(static_cast<int64_t>(n));
}
BENCHMARK(BM_GreenApply)->Arg(201)->Arg(401)->Arg(801)->Complexity(benchmark::oNSquared);

void BM_SolverStep(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    PdeState init = make_initial(bump, 1e-3, 10.0, n);
    BoundarySpec bc = BoundarySpec::dirichlet_constant(-0.5, 10.0, 1.0);
    SolveControls ctl;
    const double h = init.spacing();
    for (auto _ : state) {
        PdeState s = init;
        auto rep = step(s, h, bc, -0.5, ctl);
        benchmark::DoNotOptimize(rep.second.newton_iters);
    }
}
BENCHMARK(BM_SolverStep)->Arg(401)->Arg(1601);

void BM_SolveTo(benchmark::State& state) {
    PdeState init = make_initial(bump, 1e-3, 10.0, 401);
    BoundarySpec bc = BoundarySpec::neumann_rates([](double) { return 1.0; },
                                                  [](double) { return 1.0; });
    SolveControls ctl;
    ctl.dt0 = 1e-3;
    ctl.dt_max = 5e-3;
    for (auto _ : state) {
        Trajectory tr = solve(init, bc, -0.5, 0.1, ctl);
        benchmark::DoNotOptimize(tr.ledger.rows.size());
    }
}
BENCHMARK(BM_SolveTo);

} // namespace

BENCHMARK_MAIN();
