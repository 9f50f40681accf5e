#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ddps/fft.hpp"
#include "ddps/modem.hpp"
#include "ddps/transforms.hpp"
#include "test_util.hpp"

using namespace ddps;
using ddps::testing::max_abs;
using ddps::testing::random_matrix;
using ddps::testing::random_qpsk;
using ddps::testing::small_config;

namespace {

constexpr double pi = std::numbers::pi;

DelayDopplerGrid roundtrip(const DelayDopplerGrid& D, const ModemConfig& cfg)
{
    return extract_data(demodulate_unified(modulate_unified(D, cfg).frame, cfg), cfg);
}

// Serialized ODDM stream by the triple sum over n, k and l of the unified
// transmitter, with the index range -S .. (N-1)M' + M'_d + S - 1.
CVector oddm_triple_sum(const CMatrix& D, const ModemConfig& cfg, std::int64_t& start)
{
    const int Md = static_cast<int>(D.rows()), N = cfg.N, L = cfg.L_us, Mp = Md * L;
    const PulsePrototype p = make_pulse(cfg.alpha, Md, L, cfg.effective_Q());
    const int S = p.span;
    start = -S;
    const std::int64_t len = static_cast<std::int64_t>(N - 1) * Mp + Mp + 2 * S;
    CVector x = CVector::Zero(len);
    for (std::int64_t i = 0; i < len; ++i) {
        const std::int64_t kappa = i + start;
        cd acc{};
        for (int n = 0; n < N; ++n)
            for (int k = 0; k < N; ++k)
                for (int l = 0; l < Md; ++l) {
                    const std::int64_t j = kappa - n * Mp - l * L;
                    if (j < -S || j > S)
                        continue;
                    const cd pk = p.at(static_cast<int>(j)) * std::polar(1.0, 2 * pi * k * j / (double(Mp) * N));
                    acc += D(l, k) * pk * std::polar(1.0, 2 * pi * n * k / N) / std::sqrt(double(N));
                }
        x[i] = acc;
    }
    return x;
}

// Staggered multicarrier form: M delayed N-subcarrier signals, each carrying
// the pulse train sum_n p[t - nM'], sampled at T/M'.
CVector oddm_staggered(const CMatrix& D, const ModemConfig& cfg, std::int64_t start, std::int64_t len)
{
    const int Md = static_cast<int>(D.rows()), N = cfg.N, L = cfg.L_us, Mp = Md * L;
    const PulsePrototype p = make_pulse(cfg.alpha, Md, L, cfg.effective_Q());
    CVector x = CVector::Zero(len);
    for (std::int64_t i = 0; i < len; ++i) {
        const std::int64_t kappa = i + start;
        cd acc{};
        for (int l = 0; l < Md; ++l) {
            const std::int64_t t = kappa - l * L;
            double train = 0.0;
            for (int n = 0; n < N; ++n)
                train += p.at(static_cast<int>(std::clamp<std::int64_t>(t - n * Mp, -1000000, 1000000)));
            if (train == 0.0)
                continue;
            cd sub{};
            for (int k = 0; k < N; ++k)
                sub += D(l, k) * std::polar(1.0, 2 * pi * k * t / (double(Mp) * N));
            acc += sub * train;
        }
        x[i] = acc / std::sqrt(double(N));
    }
    return x;
}

} // namespace

TEST(ModulateCps, DeltaByHand)
{
    ModemConfig cfg = small_config(Technique::Cps, 2, 2, 2, std::nullopt, 0.0);
    cfg.L_cp = 1;
    CMatrix D = CMatrix::Zero(2, 2);
    D(0, 0) = 1.0;
    const ModemOutput out = modulate_cps({D}, cfg);
    const PulsePrototype p = make_pulse(0.0, 2, 2);
    for (int n = 0; n < 2; ++n)
        for (int l = 0; l < 4; ++l)
            EXPECT_NEAR(std::abs(out.per_block.values(l, n) - p.periodic[l] / std::sqrt(2.0)), 0.0, 1e-15);
}

TEST(Modulate, ZeroGridGivesZeroFrame)
{
    for (Technique t : {Technique::Cps, Technique::Lps, Technique::Oddm}) {
        const ModemConfig cfg = small_config(t, 8, 4, 2, 2);
        const ModemOutput out = modulate_unified({CMatrix::Zero(8, 4)}, cfg);
        EXPECT_EQ(out.frame.size(), cfg.frame_len());
        EXPECT_EQ(out.frame.samples.cwiseAbs().maxCoeff(), 0.0);
        EXPECT_EQ(demodulate_unified(out.frame, cfg).symbols.cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(ModulateCps, MatchesFrequencyDomainInterpolation)
{
    std::mt19937_64 rng(11);
    const ModemConfig cfg = small_config(Technique::Cps, 8, 4, 2, std::nullopt, 0.25);
    const CMatrix D = random_matrix(8, 4, rng);
    const ModemOutput out = modulate_cps({D}, cfg);

    const int M = 8, Mp = 16;
    const CMatrix X = isfft({D}).values;
    const RVector psi = srrc_freq(0.25, M, 2);
    for (int n = 0; n < 4; ++n)
        for (int lp = 0; lp < Mp; ++lp) {
            cd acc{};
            for (int m = 0; m < Mp; ++m)
                acc += psi[m] * X(m % M, n) * std::polar(1.0, 2 * pi * m * lp / Mp);
            // the time-domain convolution carries an extra sqrt(M)
            acc *= std::sqrt(double(M)) / std::sqrt(double(Mp));
            EXPECT_LT(std::abs(out.per_block.values(lp, n) - acc), 1e-11);
        }
}

TEST(ModulateCps, FrameIsCpPlusConcatenatedBlocks)
{
    std::mt19937_64 rng(12);
    const ModemConfig cfg = small_config(Technique::Cps, 8, 4, 2);
    const ModemOutput out = modulate_cps(random_qpsk(8, 4, rng), cfg);
    const CMatrix& B = out.per_block.values;
    const CVector core = Eigen::Map<const CVector>(B.data(), B.size());
    EXPECT_EQ(out.frame.start_index, -cfg.Lcp_us());
    EXPECT_EQ(max_abs(CVector(out.frame.samples.tail(core.size())), core), 0.0);
    EXPECT_EQ(max_abs(CVector(out.frame.samples.head(cfg.Lcp_us())), CVector(core.tail(cfg.Lcp_us()))), 0.0);
}

TEST(PerfectReconstruction, CircularAndOddm)
{
    std::mt19937_64 rng(13);
    for (Technique t : {Technique::Cps, Technique::Oddm})
        for (auto [M, N, L] : {std::tuple{8, 4, 2}, std::tuple{32, 8, 4}, std::tuple{64, 16, 2}}) {
            const ModemConfig cfg = small_config(t, M, N, L, std::nullopt, 0.2);
            const DelayDopplerGrid D = random_qpsk(M, N, rng);
            EXPECT_LT(max_abs(roundtrip(D, cfg).symbols, D.symbols), 1e-9) << to_string(t) << " M=" << M;
        }
}

TEST(PerfectReconstruction, LinearOnDopplerBinZero)
{
    std::mt19937_64 rng(14);
    const ModemConfig cfg = small_config(Technique::Lps, 32, 8, 4, std::nullopt, 0.2);
    DelayDopplerGrid D{CMatrix::Zero(32, 8)};
    D.symbols.col(0) = random_qpsk(32, 1, rng).symbols;
    EXPECT_LT(max_abs(roundtrip(D, cfg).symbols, D.symbols), 1e-9);
}

TEST(PerfectReconstruction, LinearFullGridDecisions)
{
    // untruncated L-PS leaks across block boundaries for k != 0; decisions survive
    std::mt19937_64 rng(15);
    const ModemConfig cfg = small_config(Technique::Lps, 64, 16, 2, std::nullopt, 0.1);
    const DelayDopplerGrid D = random_qpsk(64, 16, rng);
    const CMatrix R = roundtrip(D, cfg).symbols;
    for (Eigen::Index i = 0; i < R.size(); ++i) {
        EXPECT_EQ(std::signbit(R.data()[i].real()), std::signbit(D.symbols.data()[i].real()));
        EXPECT_EQ(std::signbit(R.data()[i].imag()), std::signbit(D.symbols.data()[i].imag()));
    }
}

TEST(PerfectReconstruction, TruncatedPulseDecisions)
{
    std::mt19937_64 rng(16);
    for (Technique t : {Technique::Lps, Technique::Oddm}) {
        const ModemConfig cfg = small_config(t, 64, 16, 4, 12, 0.1);
        const DelayDopplerGrid D = random_qpsk(64, 16, rng);
        const CMatrix R = roundtrip(D, cfg).symbols;
        EXPECT_LT(max_abs(R, D.symbols), 0.5) << to_string(t);
    }
}

TEST(FilterOrder, BothOrdersAgree)
{
    std::mt19937_64 rng(17);
    const ModemConfig c = small_config(Technique::Cps, 16, 8, 2);
    const SampleStream fc = modulate_cps(random_qpsk(16, 8, rng), c).frame;
    EXPECT_LT(max_abs(demodulate_cps(fc, c, FilterOrder::TransformFirst).symbols,
                      demodulate_cps(fc, c, FilterOrder::FilterFirst).symbols),
              1e-12);
    const ModemConfig l = small_config(Technique::Lps, 16, 8, 2, 3);
    const SampleStream fl = modulate_lps(random_qpsk(16, 8, rng), l).frame;
    EXPECT_LT(max_abs(demodulate_lps(fl, l, FilterOrder::TransformFirst).symbols,
                      demodulate_lps(fl, l, FilterOrder::FilterFirst).symbols),
              1e-12);
}

TEST(ModulateLps, SingleBlockIsZeroStuffedConvolution)
{
    std::mt19937_64 rng(18);
    const ModemConfig cfg = small_config(Technique::Lps, 8, 1, 2, 2);
    const CMatrix D = random_matrix(8, 1, rng);
    const ModemOutput out = modulate_lps({D}, cfg);
    const PulsePrototype p = make_pulse(cfg.alpha, 8, 2, 2);
    const CMatrix De = expand_delay({D}, 2).symbols;
    for (int r = 0; r < out.per_block.block_len(); ++r) {
        const int lp = r + out.per_block.delay_origin;
        cd acc{};
        for (int j = 0; j < 16; ++j)
            acc += De(j, 0) * p.at(lp - j);
        EXPECT_LT(std::abs(out.per_block.values(r, 0) - acc), 1e-12);
    }
}

TEST(ModulateLps, OverlapAddMatchesFlatLoop)
{
    std::mt19937_64 rng(19);
    const ModemConfig cfg = small_config(Technique::Lps, 8, 4, 2, 4); // Q = M/2
    const CMatrix D = random_matrix(8, 4, rng);
    const ModemOutput out = modulate_lps({D}, cfg);
    EXPECT_EQ(out.per_block.block_len() - 16, 16); // overlap width 2Q' = M'
    const CMatrix X = fft::rows(D, fft::Dir::Inverse);
    const PulsePrototype p = make_pulse(cfg.alpha, 8, 2, 4);
    for (std::int64_t kappa = out.stream.start_index; kappa < out.stream.end_index(); ++kappa) {
        cd acc{};
        for (int n = 0; n < 4; ++n)
            for (int l = 0; l < 8; ++l)
                acc += X(l, n) * p.at(static_cast<int>(kappa - n * 16 - l * 2));
        EXPECT_LT(std::abs(out.stream.samples[kappa - out.stream.start_index] - acc), 1e-11);
    }
}

TEST(ModulateLps, FoldingGivesCircularShaping)
{
    std::mt19937_64 rng(20);
    const DelayDopplerGrid D = random_qpsk(16, 4, rng);
    const ModemOutput lin = modulate_lps(D, small_config(Technique::Lps, 16, 4, 2));
    const ModemOutput cir = modulate_cps(D, small_config(Technique::Cps, 16, 4, 2));
    const int Mp = 32;
    CMatrix folded = CMatrix::Zero(Mp, 4);
    for (int r = 0; r < lin.per_block.block_len(); ++r) {
        const int lp = r + lin.per_block.delay_origin;
        folded.row(((lp % Mp) + Mp) % Mp) += lin.per_block.values.row(r);
    }
    EXPECT_LT(max_abs(folded, cir.per_block.values), 1e-11);
}

TEST(ModulateOddm, EqualsLpsOnDopplerBinZero)
{
    std::mt19937_64 rng(21);
    for (std::optional<int> Q : {std::optional<int>{}, std::optional<int>{3}}) {
        DelayDopplerGrid D{CMatrix::Zero(16, 8)};
        D.symbols.col(0) = random_qpsk(16, 1, rng).symbols;
        const ModemOutput a = modulate_oddm(D, small_config(Technique::Oddm, 16, 8, 2, Q));
        const ModemOutput b = modulate_lps(D, small_config(Technique::Lps, 16, 8, 2, Q));
        EXPECT_LT(max_abs(a.frame.samples, b.frame.samples), 1e-12);
    }
}

TEST(ModulateOddm, MatchesTripleSumAndStaggeredForm)
{
    std::mt19937_64 rng(22);
    const ModemConfig cfg = small_config(Technique::Oddm, 4, 4, 2, 2, 0.25);
    // one active symbol, then a full random grid
    CMatrix single = CMatrix::Zero(4, 4);
    single(2, 3) = cd{0.6, -0.8};
    for (const CMatrix& D : {single, CMatrix(random_matrix(4, 4, rng))}) {
        const ModemOutput out = modulate_oddm({D}, cfg);
        std::int64_t start = 0;
        const CVector ref = oddm_triple_sum(D, cfg, start);
        EXPECT_EQ(out.stream.start_index, start);
        EXPECT_LT(max_abs(out.stream.samples, ref), 1e-11);
        EXPECT_LT(max_abs(ref, oddm_staggered(D, cfg, start, ref.size())), 1e-11);
    }
}

TEST(DemodulateOddm, WrongPulseBreaksReconstruction)
{
    // filtering bin k with p_{k'} for k' != k leaves a visible error
    std::mt19937_64 rng(23);
    const ModemConfig cfg = small_config(Technique::Oddm, 16, 8, 2);
    const DelayDopplerGrid D = random_qpsk(16, 8, rng);
    const SampleStream frame = modulate_oddm(D, cfg).frame;
    const ModemConfig lps = small_config(Technique::Lps, 16, 8, 2);
    // L-PS receiver uses p_0 on every bin
    const CMatrix wrong = demodulate_lps(frame, lps).symbols;
    EXPECT_GT((wrong.rightCols(7) - D.symbols.rightCols(7)).cwiseAbs().maxCoeff(), 1e-3);
    EXPECT_LT(max_abs(demodulate_oddm(frame, cfg).symbols, D.symbols), 1e-9);
}

TEST(Unified, DispatchMatchesSpecializedModems)
{
    std::mt19937_64 rng(24);
    const DelayDopplerGrid D = random_qpsk(16, 4, rng);
    const auto check = [&](Technique t, auto mod, auto demod) {
        const ModemConfig cfg = small_config(t, 16, 4, 2, 5);
        const ModemOutput a = modulate_unified(D, cfg);
        const ModemOutput b = mod(D, cfg);
        EXPECT_EQ(max_abs(a.frame.samples, b.frame.samples), 0.0);
        EXPECT_EQ(max_abs(demodulate_unified(a.frame, cfg).symbols, demod(b.frame, cfg)), 0.0);
    };
    check(Technique::Cps, modulate_cps, [](const SampleStream& f, const ModemConfig& c) {
        return demodulate_cps(f, c).symbols;
    });
    check(Technique::Lps, modulate_lps, [](const SampleStream& f, const ModemConfig& c) {
        return demodulate_lps(f, c).symbols;
    });
    check(Technique::Oddm, modulate_oddm, [](const SampleStream& f, const ModemConfig& c) {
        return demodulate_oddm(f, c).symbols;
    });
}

TEST(Modulate, RejectsMismatchedInput)
{
    const ModemConfig cfg = small_config(Technique::Cps, 8, 4, 2);
    EXPECT_THROW(modulate_cps({CMatrix::Zero(8, 3)}, cfg), DimensionError);
    EXPECT_THROW(modulate_lps({CMatrix::Zero(8, 4)}, cfg), ConfigError);
    SampleStream shortf;
    shortf.samples = CVector::Zero(10);
    EXPECT_THROW(demodulate_cps(shortf, cfg), DimensionError);
}

TEST(ZeroGuards, LayoutAndInverse)
{
    std::mt19937_64 rng(25);
    const DelayDopplerGrid D = random_qpsk(128, 4, rng);
    const DelayDopplerGrid G = insert_zero_guards(D, 6);
    ASSERT_EQ(G.rows(), 134);
    for (int r : {0, 1, 2, 131, 132, 133})
        EXPECT_EQ(G.symbols.row(r).cwiseAbs().maxCoeff(), 0.0) << r;
    EXPECT_EQ(max_abs(G.symbols.middleRows(3, 128), D.symbols), 0.0);
    EXPECT_EQ(max_abs(strip_zero_guards(G, 6).symbols, D.symbols), 0.0);
    EXPECT_EQ(max_abs(insert_zero_guards(D, 0).symbols, D.symbols), 0.0);
    // odd length: the extra guard goes to the head
    const DelayDopplerGrid O = insert_zero_guards(D, 5);
    EXPECT_EQ(O.symbols.row(2).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(max_abs(O.symbols.middleRows(3, 128), D.symbols), 0.0);
}

TEST(ZeroGuards, CircularReconstructionOfData)
{
    std::mt19937_64 rng(26);
    for (Technique t : {Technique::Cps, Technique::Oddm}) {
        ModemConfig cfg = small_config(t, 32, 8, 4);
        cfg.guard = GuardConfig::zero_guard(6);
        const DelayDopplerGrid D = random_qpsk(32, 8, rng);
        const ModemOutput out = modulate_unified(D, cfg);
        EXPECT_EQ(out.frame.size(), static_cast<std::int64_t>(8) * 38 * 4 + cfg.Lcp_us());
        EXPECT_LT(max_abs(roundtrip(D, cfg).symbols, D.symbols), 1e-9) << to_string(t);
    }
}

TEST(CyclicExtension, WrapsDelayRows)
{
    std::mt19937_64 rng(27);
    const DelayDopplerGrid D = random_qpsk(8, 2, rng);
    const DelayDopplerGrid E = cyclic_extend(D, 4);
    ASSERT_EQ(E.rows(), 12);
    for (int r = 0; r < 12; ++r)
        EXPECT_EQ(max_abs(CMatrix(E.symbols.row(r)), CMatrix(D.symbols.row(((r - 2) % 8 + 8) % 8))), 0.0);
}

TEST(WindowCe, ZeroLengthIsPlainCps)
{
    std::mt19937_64 rng(28);
    const DelayDopplerGrid D = random_qpsk(16, 4, rng);
    for (GuardMode mode : {GuardMode::CeBeforePs, GuardMode::CeAfterPs}) {
        ModemConfig cfg = small_config(Technique::Cps, 16, 4, 2);
        cfg.guard = {mode, 0, 0.0};
        EXPECT_EQ(max_abs(apply_window_ce(D, cfg).frame.samples,
                          modulate_cps(D, small_config(Technique::Cps, 16, 4, 2)).frame.samples),
                  0.0);
    }
}

TEST(WindowCe, FlatRegionAndEdgeSample)
{
    std::mt19937_64 rng(29);
    const int M = 16, L = 2, Lce = 4;
    const DelayDopplerGrid D = random_qpsk(M, 4, rng);
    const WindowProfile w = rc_window(double(Lce) / M, M, L);

    ModemConfig before = small_config(Technique::Cps, M, 4, L);
    before.guard = GuardConfig::cyclic(GuardMode::CeBeforePs, Lce, M);
    const CMatrix wb = apply_window_ce(D, before).per_block.values;
    ModemConfig ext = small_config(Technique::Cps, M + Lce, 4, L);
    const CMatrix ub = modulate_cps(cyclic_extend(D, Lce), ext).per_block.values;

    ModemConfig after = small_config(Technique::Cps, M, 4, L);
    after.guard = GuardConfig::cyclic(GuardMode::CeAfterPs, Lce, M);
    const CMatrix wa = apply_window_ce(D, after).per_block.values;
    const CMatrix plain = modulate_cps(D, small_config(Technique::Cps, M, 4, L)).per_block.values;
    const int head = 2 * L, Mp = M * L;

    ASSERT_EQ(wb.rows(), (M + Lce) * L);
    ASSERT_EQ(wa.rows(), (M + Lce) * L);
    for (int r = 0; r < wb.rows(); ++r) {
        const cd unwindowed_after = plain(((r - head) % Mp + Mp) % Mp, 1);
        if (w.taps[r] == 1.0) {
            EXPECT_LT(std::abs(wb(r, 1) - ub(r, 1)), 1e-12) << r;
            EXPECT_LT(std::abs(wa(r, 1) - unwindowed_after), 1e-12) << r;
        }
    }
    EXPECT_LT(std::abs(wb(0, 2) - w.taps[0] * ub(0, 2)), 1e-15);
    EXPECT_LT(std::abs(wa(0, 2) - w.taps[0] * plain(Mp - head, 2)), 1e-15);
}

TEST(WindowCe, RejectsOtherTechniquesAndBadLengths)
{
    ModemConfig cfg = small_config(Technique::Lps, 16, 4, 2, 4);
    cfg.guard = GuardConfig::cyclic(GuardMode::CeBeforePs, 4, 16);
    EXPECT_THROW(cfg.validate(), ConfigError);
    ModemConfig c2 = small_config(Technique::Cps, 16, 4, 2);
    c2.guard = {GuardMode::CeAfterPs, 4, 0.5};
    EXPECT_THROW(c2.validate(), ConfigError);
}
