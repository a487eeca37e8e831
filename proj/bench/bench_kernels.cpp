// Kernel benchmarks: OpenMP production paths against the serial reference
// implementations that the test suite uses as oracles.

#include <benchmark/benchmark.h>

#include <cmath>

#include "lambdaflow/eigen_herm.hpp"
#include "lambdaflow/flow.hpp"
#include "lambdaflow/parallel.hpp"
#include "lambdaflow/presets.hpp"
#include "lambdaflow/rng.hpp"
#include "lambdaflow/spectral.hpp"

using namespace lambdaflow;

namespace {

TorusGrid bench_grid() { return TorusGrid::create(3, {16, 16, 16, 16, 1, 1}); }

ScalarField bench_field(const TorusGrid& g) {
    ScalarField f(g);
    const CounterRng rng(2024);
    for (std::ptrdiff_t i = 0; i < g.total_nodes; ++i) f.v[i] = 0.01 * rng.normal(i, 0);
    return f;
}

FlowConfig bench_flow_config() {
    ParsedConfig parsed = preset_config("manufactured_sigma2");
    return parsed.flow;
}

void BM_spectral_sweep_fft(benchmark::State& state) {
    set_threads(static_cast<int>(state.range(0)));
    auto g = bench_grid();
    auto f = bench_field(g);
    Differentiator diff(g);
    ScalarField out(g);
    for (auto _ : state) {
        diff.second(f, 0, out);
        benchmark::DoNotOptimize(out.v.data());
    }
}

void BM_spectral_sweep_naive_reference(benchmark::State& state) {
    auto g = bench_grid();
    auto f = bench_field(g);
    ScalarField out(g);
    for (auto _ : state) {
        ref::derivative_naive(f, 0, true, out);
        benchmark::DoNotOptimize(out.v.data());
    }
}

void BM_flow_rhs(benchmark::State& state) {
    set_threads(static_cast<int>(state.range(0)));
    FlowConfig cfg = bench_flow_config();
    FlowEngine engine(cfg);
    auto f = engine.config().phi0;
    for (auto _ : state) {
        auto r = engine.flow_rhs(f);
        benchmark::DoNotOptimize(r.rhs.v.data());
    }
}

void BM_flow_rhs_serial_reference(benchmark::State& state) {
    FlowConfig cfg = bench_flow_config();
    auto f = cfg.phi0;
    for (auto _ : state) {
        auto rhs = ref::flow_rhs_reference(f, cfg);
        benchmark::DoNotOptimize(rhs.v.data());
    }
}

void BM_eigenvalues3_analytic(benchmark::State& state) {
    const CounterRng rng(7);
    std::vector<cplx> mats(1000 * 9);
    for (int m = 0; m < 1000; ++m) {
        cplx* A = mats.data() + m * 9;
        for (int i = 0; i < 3; ++i) {
            A[i * 3 + i] = cplx(rng.normal(m, i));
            for (int j = i + 1; j < 3; ++j) {
                const cplx z(rng.normal(m, 10 + j), rng.normal(m, 20 + j));
                A[i * 3 + j] = z;
                A[j * 3 + i] = std::conj(z);
            }
        }
    }
    double ev[3];
    for (auto _ : state) {
        for (int m = 0; m < 1000; ++m) {
            eig3_hermitian_values(mats.data() + m * 9, ev);
            benchmark::DoNotOptimize(ev);
        }
    }
}

void BM_eigenvalues3_jacobi_reference(benchmark::State& state) {
    const CounterRng rng(7);
    std::vector<cplx> mats(1000 * 9);
    for (int m = 0; m < 1000; ++m) {
        cplx* A = mats.data() + m * 9;
        for (int i = 0; i < 3; ++i) {
            A[i * 3 + i] = cplx(rng.normal(m, i));
            for (int j = i + 1; j < 3; ++j) {
                const cplx z(rng.normal(m, 10 + j), rng.normal(m, 20 + j));
                A[i * 3 + j] = z;
                A[j * 3 + i] = std::conj(z);
            }
        }
    }
    double ev[3];
    for (auto _ : state) {
        for (int m = 0; m < 1000; ++m) {
            jacobi_hermitian(mats.data() + m * 9, 3, ev, nullptr);
            benchmark::DoNotOptimize(ev);
        }
    }
}

}  // namespace

BENCHMARK(BM_spectral_sweep_fft)->Arg(1)->Arg(0)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_spectral_sweep_naive_reference)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_flow_rhs)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_flow_rhs_serial_reference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_eigenvalues3_analytic)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_eigenvalues3_jacobi_reference)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
