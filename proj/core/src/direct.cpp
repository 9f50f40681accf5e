#include <cmath>
#include <numbers>

#include "ddps/fast.hpp"
#include "ddps/fft.hpp"

namespace ddps {

namespace {

int wrap(int i, int n) { return ((i % n) + n) % n; }

void check(const DelayDopplerGrid& grid, const ModemConfig& cfg)
{
    cfg.validate();
    if (cfg.guard.active())
        throw ConfigError("instrumented reference structures take plain grids only");
    if (grid.rows() != cfg.M || grid.cols() != cfg.N)
        throw DimensionError("grid is " + std::to_string(grid.rows()) + "x" +
                             std::to_string(grid.cols()) + ", expected " + std::to_string(cfg.M) +
                             "x" + std::to_string(cfg.N));
}

} // namespace

// N-point IDFTs across Doppler, then every delay-time symbol scales the pulse.
// The pulse is real and even, so the product with p[j] serves both +j and -j:
// one real-by-complex product (half a CM) per distinct non-zero tap value.
ModemOutput modulate_direct_counted(const DelayDopplerGrid& grid, const ModemConfig& cfg,
                                    CmCounter* counter)
{
    check(grid, cfg);
    if (cfg.technique == Technique::Oddm)
        throw ConfigError("ODDM has no delay-time direct structure; use the reference structure");
    const int M = cfg.M, N = cfg.N, L = cfg.L_us;
    const int Mp = cfg.Mp();

    const CMatrix X = fft::rows(grid.symbols, fft::Dir::Inverse);
    if (counter)
        for (int l = 0; l < M; ++l)
            counter->add_fft(N);

    const bool circular = cfg.technique == Technique::Cps;
    const PulsePrototype p = circular ? make_pulse(cfg.alpha, M, L)
                                      : make_pulse(cfg.alpha, M, L, cfg.effective_Q());
    const int reach = circular ? Mp / 2 : p.span;
    std::vector<double> tap(static_cast<std::size_t>(reach) + 1);
    for (int j = 0; j <= reach; ++j)
        tap[static_cast<std::size_t>(j)] = circular ? p.periodic[j] : p.at(j);

    const int S = circular ? 0 : p.span;
    CMatrix blocks = CMatrix::Zero(cfg.block_len(), N);
    std::int64_t products = 0;
    for (int n = 0; n < N; ++n)
        for (int l = 0; l < M; ++l) {
            const cd x = X(l, n);
            for (int j = 0; j <= reach; ++j) {
                const double t = tap[static_cast<std::size_t>(j)];
                if (t == 0.0)
                    continue;
                const cd v = x * t;
                ++products;
                if (circular) {
                    blocks(wrap(l * L + j, Mp), n) += v;
                    if (j != 0 && 2 * j != Mp)
                        blocks(wrap(l * L - j, Mp), n) += v;
                } else {
                    blocks(l * L + j + S, n) += v;
                    if (j != 0)
                        blocks(l * L - j + S, n) += v;
                }
            }
        }
    if (counter)
        counter->add_half(products);
    return frame_blocks({blocks, -S}, cfg);
}

// Every symbol scales its own Doppler-modulated pulse train: N copies of the
// pulse, one per time slot, each carrying the slot's IDFT phase. The train
// taps are complex, so each one costs a full CM.
ModemOutput modulate_oddm_reference(const DelayDopplerGrid& grid, const ModemConfig& cfg,
                                    CmCounter* counter)
{
    check(grid, cfg);
    if (cfg.technique != Technique::Oddm)
        throw ConfigError("the reference structure is defined for ODDM only");
    const int M = cfg.M, N = cfg.N, L = cfg.L_us;
    const PulsePrototype p = make_pulse(cfg.alpha, M, L, cfg.effective_Q());
    const int S = p.span;
    const int taps = p.taps();
    const double s = 1.0 / std::sqrt(static_cast<double>(N));

    CMatrix blocks = CMatrix::Zero(cfg.block_len(), N);
    CMatrix train(taps, N);
    std::int64_t products = 0;
    for (int k = 0; k < N; ++k) {
        const ModulatedPulse pk = modulated_pulse(p, k, N);
        for (int n = 0; n < N; ++n) {
            const cd w = std::polar(s, 2.0 * std::numbers::pi * ((static_cast<std::int64_t>(k) * n) % N) / N);
            for (int j = 0; j < taps; ++j)
                train(j, n) = pk.taps[j] * w;
        }
        for (int l = 0; l < M; ++l) {
            const cd d = grid.symbols(l, k);
            for (int n = 0; n < N; ++n)
                for (int j = 0; j < taps; ++j) {
                    if (train(j, n) == cd{})
                        continue;
                    blocks(l * L + j, n) += d * train(j, n);
                    ++products;
                }
        }
    }
    if (counter)
        counter->add(products);
    return frame_blocks({blocks, -S}, cfg);
}

} // namespace ddps
