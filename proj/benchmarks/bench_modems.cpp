#include <random>

#include <benchmark/benchmark.h>

#include "ddps/channel.hpp"
#include "ddps/effective.hpp"
#include "ddps/fast.hpp"
#include "ddps/metrics.hpp"
#include "ddps/modem.hpp"

using namespace ddps;

namespace {

ModemConfig config(Technique t, int M, int N, int Q)
{
    ModemConfig c;
    c.technique = t;
    c.M = M;
    c.N = N;
    c.L_us = 4;
    c.Q = Q;
    c.alpha = 0.1;
    c.L_cp = 16;
    return c;
}

DelayDopplerGrid qpsk(int M, int N)
{
    std::mt19937_64 rng(7);
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(2 * M * N));
    for (auto& b : bits)
        b = static_cast<std::uint8_t>(rng() & 1);
    return qam_map(bits, 4, M, N);
}

Technique technique(std::int64_t i) { return static_cast<Technique>(i); }

void BM_FastModulate(benchmark::State& state)
{
    const ModemConfig c = config(technique(state.range(0)), 128, 32, 12);
    const FastModem m(c);
    const DelayDopplerGrid D = qpsk(c.M, c.N);
    for (auto _ : state)
        benchmark::DoNotOptimize(m.modulate(D));
    state.SetLabel(to_string(c.technique));
}

void BM_FastDemodulate(benchmark::State& state)
{
    const ModemConfig c = config(technique(state.range(0)), 128, 32, 12);
    const FastModem m(c);
    const SampleStream x = m.modulate(qpsk(c.M, c.N)).frame;
    for (auto _ : state)
        benchmark::DoNotOptimize(m.demodulate(x));
    state.SetLabel(to_string(c.technique));
}

void BM_DirectModulate(benchmark::State& state)
{
    const ModemConfig c = config(technique(state.range(0)), 128, 32, 12);
    const DelayDopplerGrid D = qpsk(c.M, c.N);
    for (auto _ : state)
        benchmark::DoNotOptimize(modulate_unified(D, c));
    state.SetLabel(to_string(c.technique));
}

// Direct L-PS cost grows with the pulse span; the fast path does not.
void BM_LpsDirectVsQ(benchmark::State& state)
{
    const ModemConfig c = config(Technique::Lps, 128, 32, static_cast<int>(state.range(0)));
    const DelayDopplerGrid D = qpsk(c.M, c.N);
    for (auto _ : state)
        benchmark::DoNotOptimize(modulate_direct_counted(D, c));
}

void BM_LpsFastVsQ(benchmark::State& state)
{
    const ModemConfig c = config(Technique::Lps, 128, 32, static_cast<int>(state.range(0)));
    const FastModem m(c);
    const DelayDopplerGrid D = qpsk(c.M, c.N);
    for (auto _ : state)
        benchmark::DoNotOptimize(m.modulate(D));
}

void BM_OddmReference(benchmark::State& state)
{
    const ModemConfig c = config(Technique::Oddm, 128, 32, 12);
    const DelayDopplerGrid D = qpsk(c.M, c.N);
    for (auto _ : state)
        benchmark::DoNotOptimize(modulate_oddm_reference(D, c));
}

void BM_EffectiveChannel(benchmark::State& state)
{
    const int M = static_cast<int>(state.range(0));
    const ModemConfig c = config(Technique::Cps, M, 16, 12);
    const EffectiveChannelBuilder b(c);
    ChannelParams p;
    const ChannelRealization h = generate_channel(p, c.frame_len(), 3);
    for (auto _ : state)
        benchmark::DoNotOptimize(b.heff(h));
}

void BM_Welch(benchmark::State& state)
{
    const ModemConfig c = config(Technique::Lps, 128, 32, 12);
    const CVector x = FastModem(c).modulate(qpsk(c.M, c.N)).frame.samples;
    for (auto _ : state)
        benchmark::DoNotOptimize(estimate_psd(x, 4096, 2048, 0.125));
}

} // namespace

BENCHMARK(BM_FastModulate)->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_FastDemodulate)->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_DirectModulate)->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_LpsDirectVsQ)->Arg(4)->Arg(12)->Arg(22)->Arg(44)->Arg(64)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_LpsFastVsQ)->Arg(4)->Arg(12)->Arg(22)->Arg(44)->Arg(64)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_OddmReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EffectiveChannel)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Welch)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
