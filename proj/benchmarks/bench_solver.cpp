#include <benchmark/benchmark.h>

#include "stiffkrylov/dense.hpp"
#include "stiffkrylov/evolve.hpp"
#include "stiffkrylov/mna.hpp"
#include "stiffkrylov/netlist.hpp"

namespace sk = stiffkrylov;

namespace {

sk::DaeSystem mesh_system() {
    sk::MnaStamp stamp = sk::stamp_mna(sk::gen_paper_like_mesh(7));
    return std::move(stamp.system);
}

void BM_ShiftedFactorization(benchmark::State& state) {
    sk::DaeSystem sys = mesh_system();
    for (auto _ : state) {
        sk::ShiftedOperator op(sys, 1e-10);
        benchmark::DoNotOptimize(op.gamma());
    }
}
BENCHMARK(BM_ShiftedFactorization);

void BM_ArnoldiMesh(benchmark::State& state) {
    sk::DaeSystem sys = mesh_system();
    sk::StepContext ctx = sk::make_step_context(sys, 1e-10);
    sk::Vec seed = ctx.gsolve.solve(sys.u1);
    sk::ArnoldiOptions opts;
    opts.m_max = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto K = sk::c_arnoldi(ctx.op, ctx.proj, seed, opts);
        benchmark::DoNotOptimize(K.h);
    }
}
BENCHMARK(BM_ArnoldiMesh)->Arg(10)->Arg(20)->Arg(40);

void BM_SingleStepMesh(benchmark::State& state) {
    sk::DaeSystem sys = mesh_system();
    sk::SingleStepOptions opts;
    opts.m_max = 20;
    for (auto _ : state) {
        auto result = sk::single_step(sys, 2e-10, opts);
        benchmark::DoNotOptimize(result.x_full);
    }
}
BENCHMARK(BM_SingleStepMesh);

void BM_DenseExp(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    sk::CMat a = sk::CMat::Random(n, n);
    a *= 0.5;
    for (auto _ : state) {
        auto e = sk::expm_dense(a);
        benchmark::DoNotOptimize(e);
    }
}
BENCHMARK(BM_DenseExp)->Arg(32)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
