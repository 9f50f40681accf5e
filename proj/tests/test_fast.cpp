#include <gtest/gtest.h>

#include "ddps/fast.hpp"
#include "test_util.hpp"

using namespace ddps;
using ddps::testing::max_abs;
using ddps::testing::random_matrix;
using ddps::testing::random_qpsk;
using ddps::testing::small_config;

namespace {

struct Size {
    int M, N, L;
    std::optional<int> Q;
    double alpha;
};

void expect_fast_equals_direct(const ModemConfig& cfg, const DelayDopplerGrid& D)
{
    const FastModem fast(cfg);
    const ModemOutput a = fast.modulate(D);
    const ModemOutput b = modulate_unified(D, cfg);
    EXPECT_LT(max_abs(a.frame.samples, b.frame.samples), 1e-10) << to_string(cfg.technique);
    EXPECT_EQ(a.frame.start_index, b.frame.start_index);
    EXPECT_LT(max_abs(a.per_block.values, b.per_block.values), 1e-10);
    EXPECT_EQ(a.per_block.delay_origin, b.per_block.delay_origin);
    EXPECT_LT(max_abs(fast.demodulate(b.frame).symbols, demodulate_unified(b.frame, cfg).symbols), 1e-10);
}

CmParams params(const ModemConfig& c)
{
    return {c.M, c.N, c.L_us, c.effective_Q(), c.alpha};
}

} // namespace

TEST(FastModem, MatchesDirectAcrossSizes)
{
    std::mt19937_64 rng(31);
    const Size sizes[] = {{8, 4, 2, 2, 0.25}, {32, 8, 4, 8, 0.1}, {16, 8, 2, std::nullopt, 0.5},
                          {8, 4, 2, 4, 0.0}};
    for (const Size& s : sizes)
        for (Technique t : {Technique::Cps, Technique::Lps, Technique::Oddm})
            for (int rep = 0; rep < 10; ++rep) {
                const ModemConfig cfg = small_config(t, s.M, s.N, s.L, s.Q, s.alpha);
                const DelayDopplerGrid D = rep % 2 ? random_qpsk(s.M, s.N, rng)
                                                   : DelayDopplerGrid{random_matrix(s.M, s.N, rng)};
                expect_fast_equals_direct(cfg, D);
            }
}

TEST(FastModem, MatchesDirectAtPaperSize)
{
    std::mt19937_64 rng(32);
    for (Technique t : {Technique::Cps, Technique::Lps, Technique::Oddm}) {
        ModemConfig cfg = small_config(t, 128, 32, 4, 12, 0.1);
        cfg.L_cp = 16;
        expect_fast_equals_direct(cfg, random_qpsk(128, 32, rng));
    }
}

TEST(FastModem, FreeFunctionsMatchClass)
{
    std::mt19937_64 rng(33);
    const DelayDopplerGrid D = random_qpsk(16, 4, rng);
    const ModemConfig c = small_config(Technique::Cps, 16, 4, 2);
    const ModemConfig l = small_config(Technique::Lps, 16, 4, 2, 3);
    const ModemConfig o = small_config(Technique::Oddm, 16, 4, 2, 3);
    EXPECT_EQ(max_abs(modulate_cps_fast(D, c).frame.samples, FastModem(c).modulate(D).frame.samples), 0.0);
    const SampleStream fl = modulate_lps_fast(D, l).frame;
    const SampleStream fo = modulate_oddm_fast(D, o).frame;
    EXPECT_EQ(max_abs(fl.samples, FastModem(l).modulate(D).frame.samples), 0.0);
    EXPECT_EQ(max_abs(fo.samples, FastModem(o).modulate(D).frame.samples), 0.0);
    EXPECT_LT(max_abs(demodulate_lps_fast(fl, l).symbols, demodulate_lps(fl, l).symbols), 1e-10);
    EXPECT_LT(max_abs(demodulate_oddm_fast(fo, o).symbols, demodulate_oddm(fo, o).symbols), 1e-10);
    const SampleStream fc = modulate_cps(D, c).frame;
    EXPECT_LT(max_abs(demodulate_cps_fast(fc, c).symbols, demodulate_cps(fc, c).symbols), 1e-10);
}

TEST(FastModem, RequiresPowersOfTwoAndNoGuards)
{
    EXPECT_THROW(FastModem(small_config(Technique::Cps, 12, 4, 2)), ConfigError);
    EXPECT_THROW(FastModem(small_config(Technique::Lps, 16, 6, 2, 4)), ConfigError);
    EXPECT_THROW(FastModem(small_config(Technique::Oddm, 16, 4, 3, 4)), ConfigError);
    ModemConfig g = small_config(Technique::Cps, 16, 4, 2);
    g.guard = GuardConfig::zero_guard(2);
    EXPECT_THROW(FastModem{g}, ConfigError);
}

TEST(CmCounter, FftCostModel)
{
    CmCounter c;
    c.add_fft(8);
    EXPECT_EQ(c.value(), 12); // (8/2) log2 8
    c.add_half(1);
    EXPECT_EQ(c.halves(), 25);
    c.add(3);
    EXPECT_EQ(c.halves(), 31);
    c.reset();
    EXPECT_EQ(c.value(), 0);
    EXPECT_THROW(c.add_fft(12), ConfigError);
}

TEST(PredictCm, TableValuesAtPaperParameters)
{
    const CmParams p22{128, 32, 4, 22, 0.1};
    const CmParams p12{128, 32, 4, 12, 0.1};
    // 4096 (2.5 + 3.5 + 18) + 16 * 13
    EXPECT_EQ(predict_cm(Technique::Cps, Impl::Fast, p12), 98512);
    // 4096 (2.5 + 132 / 4)
    EXPECT_EQ(predict_cm(Technique::Lps, Impl::Direct, p22), 145408);
    EXPECT_EQ(predict_cm(Technique::Cps, Impl::Direct, p22), 145408);
    // 32^2 * 128 * 132
    EXPECT_EQ(predict_cm(Technique::Oddm, Impl::ReferenceOddm, p22), 17301504);
    // 4096 (2.5 + 8 + 40) + 16 * 26
    EXPECT_EQ(predict_cm(Technique::Lps, Impl::Fast, p12), 207264);
    // 4096 (8 + 4 * 15) + 32 * 26
    EXPECT_EQ(predict_cm(Technique::Oddm, Impl::Fast, p22), 279360);
}

TEST(PredictCm, DirectTermVanishesWithoutOversampling)
{
    const CmParams p{64, 16, 1, 8, 0.1};
    EXPECT_EQ(predict_cm(Technique::Cps, Impl::Direct, p), 64 * 16 * 4 / 2);
}

TEST(PredictCm, RejectsUndefinedRows)
{
    const CmParams p{128, 32, 4, 12, 0.1};
    EXPECT_THROW(predict_cm(Technique::Oddm, Impl::Direct, p), ConfigError);
    EXPECT_THROW(predict_cm(Technique::Lps, Impl::ReferenceOddm, p), ConfigError);
    EXPECT_THROW(predict_cm(Technique::Lps, Impl::Direct, CmParams{128, 32, 4, 65, 0.1}), ConfigError);
    EXPECT_THROW(predict_cm(Technique::Cps, Impl::Fast, CmParams{96, 32, 4, 12, 0.1}), ConfigError);
}

TEST(CmCounter, MatchesPredictionForEveryCall)
{
    std::mt19937_64 rng(34);
    const Size sizes[] = {{8, 4, 2, 2, 0.25}, {32, 8, 4, 8, 0.1}, {128, 32, 4, 12, 0.1},
                          {128, 32, 4, 22, 0.1}, {64, 16, 2, 5, 0.37}};
    for (const Size& s : sizes)
        for (Technique t : {Technique::Cps, Technique::Lps, Technique::Oddm}) {
            const ModemConfig cfg = small_config(t, s.M, s.N, s.L, s.Q, s.alpha);
            const FastModem fast(cfg);
            const std::int64_t expect = predict_cm(t, Impl::Fast, params(cfg));
            CmCounter tx, rx;
            const ModemOutput out = fast.modulate(random_qpsk(s.M, s.N, rng), &tx);
            fast.demodulate(out.frame, &rx);
            EXPECT_EQ(tx.value(), expect) << to_string(t) << " M=" << s.M;
            EXPECT_EQ(rx.value(), expect) << to_string(t) << " M=" << s.M;
            // the counter follows the structure, not the data
            CmCounter zero;
            fast.modulate({CMatrix::Zero(s.M, s.N)}, &zero);
            EXPECT_EQ(zero.value(), expect);
        }
}

TEST(ReferenceStructures, MatchDirectModems)
{
    std::mt19937_64 rng(35);
    const Size sizes[] = {{8, 4, 2, 2, 0.25}, {32, 8, 4, 8, 0.1}, {16, 8, 2, std::nullopt, 0.5}};
    for (const Size& s : sizes) {
        const DelayDopplerGrid D = random_qpsk(s.M, s.N, rng);
        const ModemConfig c = small_config(Technique::Cps, s.M, s.N, s.L, s.Q, s.alpha);
        const ModemConfig l = small_config(Technique::Lps, s.M, s.N, s.L, s.Q, s.alpha);
        const ModemConfig o = small_config(Technique::Oddm, s.M, s.N, s.L, s.Q, s.alpha);
        EXPECT_LT(max_abs(modulate_direct_counted(D, c).frame.samples, modulate_cps(D, c).frame.samples), 1e-12);
        EXPECT_LT(max_abs(modulate_direct_counted(D, l).frame.samples, modulate_lps(D, l).frame.samples), 1e-12);
        EXPECT_LT(max_abs(modulate_oddm_reference(D, o).frame.samples, modulate_oddm(D, o).frame.samples), 1e-12);
    }
    EXPECT_THROW(modulate_direct_counted(random_qpsk(8, 4, rng), small_config(Technique::Oddm, 8, 4, 2, 2)),
                 ConfigError);
    EXPECT_THROW(modulate_oddm_reference(random_qpsk(8, 4, rng), small_config(Technique::Lps, 8, 4, 2, 2)),
                 ConfigError);
}

TEST(ReferenceStructures, CountEveryProduct)
{
    // SRRC samples do not vanish at multiples of L, so every distinct tap is charged
    std::mt19937_64 rng(36);
    const int M = 32, N = 8, L = 4, Q = 8;
    const int Qp = Q * L;
    const DelayDopplerGrid D = random_qpsk(M, N, rng);
    CmCounter lin, circ, ref;
    modulate_direct_counted(D, small_config(Technique::Lps, M, N, L, Q, 0.1), &lin);
    EXPECT_EQ(lin.halves(), 2 * M * (N / 2) * 3 + M * N * (Qp + 1));
    modulate_direct_counted(D, small_config(Technique::Cps, M, N, L, Q, 0.1), &circ);
    EXPECT_EQ(circ.halves(), 2 * M * (N / 2) * 3 + M * N * (M * L / 2 + 1));
    modulate_oddm_reference(D, small_config(Technique::Oddm, M, N, L, Q, 0.1), &ref);
    EXPECT_EQ(ref.value(), std::int64_t(N) * N * M * (2 * Qp + 1));
}
