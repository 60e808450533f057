#include <benchmark/benchmark.h>

#include <random>

#include "gsov/bethe_spectra.hpp"
#include "gsov/separation_of_variables.hpp"
#include "gsov/special_functions.hpp"

using namespace gsov;

namespace {

GaudinModel rational(int N, cplx lambda)
{
    GaudinModel m;
    m.N = N;
    for (int a = 0; a < N; ++a) m.z.push_back(std::polar(1.0 + 0.3 * a, 1.7 * a));
    m.lambda.assign(N, lambda);
    return m;
}

GaudinModel elliptic(int N, cplx q)
{
    GaudinModel m;
    m.N = N;
    for (int a = 0; a < N; ++a) m.z.push_back(std::polar(0.6 - 0.1 * a, 0.3 + 2.1 * a));
    m.lambda.assign(N, -0.5);
    EllipticData d;
    d.q = q;
    m.elliptic = d;
    return m;
}

void BM_theta(benchmark::State& st)
{
    const auto p = EllipticParams::make(cplx{0.1, 0.05});
    cplx z{0.4, 0.3}, acc{};
    for (auto _ : st) {
        acc += theta(z, p);
        z *= cplx{1.0, 1e-9};
    }
    benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_theta);

void BM_wp(benchmark::State& st)
{
    const auto p = EllipticParams::make(cplx{0.1, 0.05});
    cplx z{0.4, 0.3}, acc{};
    for (auto _ : st) {
        acc += weierstrass_p(z, p);
        z *= cplx{1.0, 1e-9};
    }
    benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_wp);

void BM_joint_spectrum(benchmark::State& st)
{
    const auto m = rational(static_cast<int>(st.range(0)), -0.5);
    for (auto _ : st) benchmark::DoNotOptimize(joint_spectrum(m));
}
BENCHMARK(BM_joint_spectrum)->Arg(4)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_rational_separation(benchmark::State& st)
{
    const auto m = with_synthetic_mu(rational(static_cast<int>(st.range(0)), -0.5), 1);
    SovOptions o;
    o.trials = 1;
    for (auto _ : st) benchmark::DoNotOptimize(verify_rational_separation(m, o));
}
BENCHMARK(BM_rational_separation)->Arg(3)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_elliptic_separation(benchmark::State& st)
{
    const auto m = with_synthetic_mu(elliptic(static_cast<int>(st.range(0)), 0.1), 1);
    SovOptions o;
    o.trials = 1;
    for (auto _ : st) benchmark::DoNotOptimize(verify_elliptic_separation(m, o));
}
BENCHMARK(BM_elliptic_separation)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_elliptic_u_to_w(benchmark::State& st)
{
    const auto m = elliptic(3, cplx{0.08, 0.03});
    const std::vector<cplx> u{cplx{0.3, -1.2}, cplx{1.1, 0.4}, cplx{-0.7, 0.2}};
    for (auto _ : st) benchmark::DoNotOptimize(elliptic_u_to_w(u, cplx{0.3, 0.2}, m));
}
BENCHMARK(BM_elliptic_u_to_w)->Unit(benchmark::kMillisecond);

void BM_singlet_bethe(benchmark::State& st)
{
    const auto m = rational(static_cast<int>(st.range(0)), -0.5);
    for (auto _ : st) benchmark::DoNotOptimize(singlet_bethe_solutions(m));
}
BENCHMARK(BM_singlet_bethe)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
