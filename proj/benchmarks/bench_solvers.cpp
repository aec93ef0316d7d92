#include <benchmark/benchmark.h>

#include "msoc/density.hpp"
#include "msoc/hjb.hpp"
#include "msoc/homogenize.hpp"
#include "msoc/model.hpp"
#include "msoc/scenario.hpp"

namespace {

msoc::ScenarioConfig default_config() {
    msoc::ScenarioConfig cfg;
    cfg.example_id = 1;
    cfg.theta_a = 1.0;
    cfg.theta_b = 1.0;
    cfg.theta_c = 1.0;
    cfg.theta_d = 0.5;
    cfg.theta_e = 0.1;
    cfg.sigma_x = 0.3;
    cfg.sigma_y = 1.0;
    cfg.alpha = 1.0;
    cfg.beta = 1.0;
    cfg.u_lo = 0.0;
    cfg.u_hi = 1.0;
    cfg.epsilon_list = {0.4};
    return cfg;
}

void BM_GeneratorAssembly(benchmark::State& state) {
    auto cfg = default_config();
    auto [slow, fast] = msoc::build_example(cfg);
    const msoc::TorusGrid grid(2, static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto gen = msoc::assemble_generator(fast, 0.5, grid);
        benchmark::DoNotOptimize(gen.L);
    }
}
BENCHMARK(BM_GeneratorAssembly)->Arg(32)->Arg(64);

void BM_InvariantDensity(benchmark::State& state) {
    auto cfg = default_config();
    auto [slow, fast] = msoc::build_example(cfg);
    const msoc::TorusGrid grid(2, static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto rho = msoc::solve_invariant_density(fast, 0.5, grid, 1e-10);
        benchmark::DoNotOptimize(rho.values);
    }
}
BENCHMARK(BM_InvariantDensity)->Arg(32)->Arg(64);

void BM_EffectiveHjb(benchmark::State& state) {
    auto cfg = default_config();
    cfg.n_slow = static_cast<int>(state.range(0));
    auto [slow, fast] = msoc::build_example(cfg);
    const msoc::ControlBox box{cfg.u_lo, cfg.u_hi};
    const msoc::TorusGrid grid(2, cfg.n_torus);
    std::vector<double> x(static_cast<std::size_t>(cfg.n_slow));
    for (int i = 0; i < cfg.n_slow; ++i)
        x[i] = -cfg.alpha + 2.0 * cfg.alpha * i / (cfg.n_slow - 1);
    const auto dens = msoc::density_sweep(fast, x, grid, 1e-10);
    const auto tables = msoc::effective_tables(slow, dens, x);
    for (auto _ : state) {
        auto v = msoc::solve_effective_hjb(tables, slow, box, cfg.beta, cfg.theta_e, cfg.n_slow,
                                           1e-10);
        benchmark::DoNotOptimize(v.v);
    }
}
BENCHMARK(BM_EffectiveHjb)->Arg(65)->Arg(129);

}  // namespace

BENCHMARK_MAIN();
