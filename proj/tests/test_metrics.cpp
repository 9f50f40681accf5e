#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ddps/ber.hpp"
#include "ddps/metrics.hpp"
#include "ddps/modem.hpp"
#include "test_util.hpp"

using namespace ddps;
using ddps::testing::max_abs;
using ddps::testing::random_vector;
using ddps::testing::small_config;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<std::uint8_t> random_bits(std::size_t n, std::mt19937_64& rng)
{
    std::vector<std::uint8_t> b(n);
    for (auto& x : b)
        x = static_cast<std::uint8_t>(rng() & 1);
    return b;
}

} // namespace

TEST(Qam, FourQamByHand)
{
    const double a = 1 / std::sqrt(2.0);
    const CVector s = qam_map({0, 0, 0, 1, 1, 0, 1, 1}, 4);
    ASSERT_EQ(s.size(), 4);
    EXPECT_LT(std::abs(s[0] - cd(a, a)), 1e-15);
    EXPECT_LT(std::abs(s[1] - cd(a, -a)), 1e-15);
    EXPECT_LT(std::abs(s[2] - cd(-a, a)), 1e-15);
    EXPECT_LT(std::abs(s[3] - cd(-a, -a)), 1e-15);
}

TEST(Qam, SixteenQamGrayLevels)
{
    // axis levels for bit pairs 00, 01, 11, 10
    const double scale = std::sqrt(10.0);
    const CVector s = qam_map({0, 0, 0, 0, 0, 1, 0, 1, 1, 1, 1, 1, 1, 0, 1, 0}, 16);
    const double expect[] = {3, 1, -1, -3};
    for (int i = 0; i < 4; ++i)
        EXPECT_LT(std::abs(s[i] - cd(expect[i], expect[i]) / scale), 1e-15);
}

TEST(Qam, UnitAverageEnergyAndGrayNeighbours)
{
    for (int order : {4, 16, 64}) {
        const int b = bits_per_symbol(order);
        std::vector<std::uint8_t> bits;
        for (int v = 0; v < order; ++v)
            for (int i = b - 1; i >= 0; --i)
                bits.push_back(static_cast<std::uint8_t>((v >> i) & 1));
        const CVector s = qam_map(bits, order);
        EXPECT_NEAR(s.squaredNorm() / order, 1.0, 1e-12) << order;
        // nearest neighbours differ in exactly one bit
        const double dmin = 2.0 / std::sqrt(2.0 * (order - 1) / 3.0);
        for (int u = 0; u < order; ++u)
            for (int v = 0; v < order; ++v)
                if (std::abs(std::abs(s[u] - s[v]) - dmin) < 1e-9)
                    EXPECT_EQ(__builtin_popcount(u ^ v), 1) << order;
    }
}

TEST(Qam, RoundTripAndGridForm)
{
    std::mt19937_64 rng(70);
    for (int order : {4, 16, 64}) {
        const auto bits = random_bits(static_cast<std::size_t>(8 * 4 * bits_per_symbol(order)), rng);
        const DelayDopplerGrid g = qam_map(bits, order, 8, 4);
        EXPECT_EQ(g.rows(), 8);
        EXPECT_EQ(qam_demap(g, order), bits);
        // small perturbations do not change decisions
        const CVector noisy = Eigen::Map<const CVector>(g.symbols.data(), 32).array() + cd(0.01, -0.01);
        EXPECT_EQ(qam_demap(noisy, order), bits);
    }
    EXPECT_THROW(qam_map({0, 1, 1}, 4), DimensionError);
    EXPECT_THROW(qam_map({0, 1}, 8), ConfigError);
    EXPECT_THROW(qam_map({0, 1, 1, 0}, 4, 4, 4), DimensionError);
}

TEST(Qam, FourQamBerClosedForm)
{
    for (double e : {0.0, 4.0, 8.0})
        EXPECT_NEAR(qam_ber_awgn(4, e), 0.5 * std::erfc(std::sqrt(std::pow(10.0, e / 10))), 1e-15);
}

TEST(Qam, SixteenQamBerMatchesSimulation)
{
    std::mt19937_64 rng(71);
    const double ebn0 = 6.0;
    const int n = 200000;
    const auto bits = random_bits(static_cast<std::size_t>(n) * 4, rng);
    const CVector s = qam_map(bits, 16);
    const double sigma2 = noise_variance(1.0, 4, ebn0);
    std::normal_distribution<double> g(0.0, std::sqrt(sigma2 / 2));
    CVector y = s;
    for (Eigen::Index i = 0; i < y.size(); ++i)
        y[i] += cd{g(rng), g(rng)};
    const auto got = qam_demap(y, 16);
    std::int64_t err = 0;
    for (std::size_t i = 0; i < bits.size(); ++i)
        err += got[i] != bits[i];
    const auto [lo, hi] = wilson_interval(err, static_cast<std::int64_t>(bits.size()), 3.5);
    const double theory = qam_ber_awgn(16, ebn0);
    EXPECT_GE(theory, lo);
    EXPECT_LE(theory, hi);
}

TEST(Psd, ToneLandsInItsBin)
{
    const int seg = 64;
    const int n = 64 * 40;
    CVector x(n);
    for (int i = 0; i < n; ++i)
        x[i] = std::polar(1.0, 2 * pi * 8.0 * i / seg);
    const PsdEstimate p = estimate_psd(x, seg, seg / 2, 0.5);
    Eigen::Index peak = 0;
    p.power_db.maxCoeff(&peak);
    EXPECT_NEAR(p.freqs[peak], 8.0 / seg, 1e-15);
    EXPECT_EQ(p.freqs[0], -0.5);
    EXPECT_EQ(p.averages, 79);
    // Hann leakage stops after the neighbouring bins
    EXPECT_LT(p.power_db[peak + 3], -150.0);
}

TEST(Psd, WhiteNoiseIsFlat)
{
    std::mt19937_64 rng(72);
    const PsdEstimate p = estimate_psd(random_vector(1 << 20, rng), 256, 128, 0.5);
    EXPECT_LT(p.power_db.cwiseAbs().maxCoeff(), 1.5);
    EXPECT_LT(std::abs(p.power_db.mean()), 0.1);
}

TEST(Psd, CircularStreamOccupiesOneOverL)
{
    std::mt19937_64 rng(76);
    ModemConfig cfg = small_config(Technique::Cps, 128, 32, 4, std::nullopt, 0.1);
    cfg.L_cp = 16;
    WelchPsd w(1024, 512);
    for (int f = 0; f < 8; ++f)
        w.add(modulate_unified(ddps::testing::random_qpsk(128, 32, rng), cfg).frame.samples);
    const PsdEstimate p = w.finish(0.125);
    // bins within 6 dB of the in-band level
    const double occupied = double((p.power_db.array() > -6.0).count()) / p.seg_len;
    EXPECT_NEAR(occupied, 128.0 / 512.0, 0.02);
}

TEST(Psd, WelchAccumulatesAcrossStreams)
{
    std::mt19937_64 rng(73);
    const CVector a = random_vector(640, rng), b = random_vector(640, rng);
    WelchPsd w(64, 0);
    w.add(a);
    w.add(b);
    EXPECT_EQ(w.averages(), 20);
    CVector ab(1280);
    ab << a, b;
    EXPECT_LT((w.finish().power_db - estimate_psd(ab, 64, 0).power_db).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_THROW(WelchPsd(64, 64), ConfigError);
    EXPECT_THROW(w.add(CVector::Zero(10)), DimensionError);
    EXPECT_THROW(WelchPsd(8, 0).finish(), Error);
}

TEST(Psd, OutOfBandPower)
{
    PsdEstimate p;
    p.freqs = RVector::LinSpaced(8, -0.5, 0.375);
    p.power_db = RVector::Constant(8, -30.0);
    for (int i = 2; i < 7; ++i)
        p.power_db[i] = 0.0; // |f| < 0.25 and f = 0.25
    // bins at |f| >= 0.375: -0.5, -0.375, 0.375
    EXPECT_NEAR(oob_power(p, 0.25, 0.125), -30.0, 1e-12);
    p.power_db[0] = p.power_db[1] = p.power_db[7] = -400.0;
    EXPECT_EQ(oob_power(p, 0.25, 0.125), -200.0);
    EXPECT_THROW(oob_power(p, 0.6, 0.0), ConfigError);
}

TEST(Psd, ShiftBetweenSpectra)
{
    PsdEstimate a, b;
    a.freqs = b.freqs = RVector::LinSpaced(64, -0.5, 0.5 - 1.0 / 64);
    a.power_db = RVector::Constant(64, -60.0);
    a.power_db.segment(20, 10).setZero();
    b.power_db = RVector::Constant(64, -60.0);
    b.power_db.segment(23, 10).setZero();
    EXPECT_EQ(psd_shift(a, b), 3);
    EXPECT_EQ(psd_shift(b, a), -3);
}

TEST(Papr, ByHand)
{
    CVector x = CVector::Ones(100);
    x[17] = 2.0; // mean power 1.03, peak 4
    EXPECT_NEAR(papr_db(x), 10 * std::log10(4.0 / 1.03), 1e-12);
    CVector c(16);
    for (int i = 0; i < 16; ++i)
        c[i] = std::polar(1.0, 0.3 * i);
    EXPECT_NEAR(papr_db(c), 0.0, 1e-12);
    EXPECT_THROW(papr_db(CVector::Zero(3)), Error);
    EXPECT_THROW(papr_db(CVector()), DimensionError);
}

TEST(Papr, CcdfIsMonotone)
{
    std::mt19937_64 rng(74);
    std::vector<CVector> frames;
    for (int i = 0; i < 300; ++i)
        frames.push_back(random_vector(256, rng));
    const RVector th = RVector::LinSpaced(30, 0.0, 14.0);
    const PaprCcdf c = papr_ccdf(frames, th);
    EXPECT_EQ(c.frames, 300);
    EXPECT_EQ(c.ccdf[0], 1.0);
    for (Eigen::Index i = 1; i < th.size(); ++i)
        EXPECT_LE(c.ccdf[i], c.ccdf[i - 1]);
    EXPECT_EQ(c.ccdf[th.size() - 1], 0.0);
    // Gaussian samples: P(max |x|^2 / mean > g) is about 1 - (1 - e^-g)^n
    const double g = std::pow(10.0, 0.9);
    const double expect = 1 - std::pow(1 - std::exp(-g), 256);
    const PaprCcdf at9 = papr_ccdf(frames, RVector::Constant(1, 9.0));
    EXPECT_NEAR(at9.ccdf[0], expect, 0.12);
    frames.resize(50);
    EXPECT_THROW(papr_ccdf(frames, th), ConfigError);
}

TEST(Stats, WilsonInterval)
{
    const auto [lo, hi] = wilson_interval(10, 100);
    EXPECT_NEAR(lo, 0.0552, 1e-4);
    EXPECT_NEAR(hi, 0.1744, 1e-4);
    const auto [zl, zh] = wilson_interval(0, 50);
    EXPECT_EQ(zl, 0.0);
    EXPECT_NEAR(zh, 0.0714, 1e-4);
    EXPECT_EQ(wilson_interval(0, 0), std::make_pair(0.0, 1.0));
}

TEST(Stats, KolmogorovSmirnov)
{
    std::mt19937_64 rng(75);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> a(2000), b(2000), c(2000);
    for (int i = 0; i < 2000; ++i) {
        a[i] = g(rng);
        b[i] = g(rng);
        c[i] = g(rng) + 0.3;
    }
    EXPECT_GT(ks_two_sample(a, b).p_value, 0.01);
    EXPECT_LT(ks_two_sample(a, c).p_value, 1e-6);
    EXPECT_EQ(ks_two_sample({1, 2, 3}, {1, 2, 3}).statistic, 0.0);
    EXPECT_EQ(ks_two_sample({0, 1}, {5, 6}).statistic, 1.0);
    EXPECT_THROW(ks_two_sample({}, {1.0}), ConfigError);
}

TEST(Ber, SeedsAreSplitMix)
{
    // reference output of splitmix64 seeded with 0
    EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
    EXPECT_NE(trial_seed(1, 0), trial_seed(1, 1));
    EXPECT_NE(trial_seed(1, 0), trial_seed(2, 0));
}

TEST(Ber, NoiselessIdealChannelIsErrorFree)
{
    for (Technique t : {Technique::Cps, Technique::Oddm}) {
        const ModemConfig cfg = small_config(t, 16, 8, 2, 4);
        ChannelParams ch;
        ch.profile = ChannelProfile::Ideal;
        ch.L_us = 2;
        BerOptions opt;
        opt.max_trials = 4;
        const BerRecord r = run_ber_point(cfg, ch, INFINITY, opt, 1);
        EXPECT_EQ(r.bit_errors, 0);
        EXPECT_EQ(r.trials, 4);
        EXPECT_EQ(r.total_bits, 4 * 256);
    }
}

TEST(Ber, IdealCircularMatchesAwgnTheory)
{
    const ModemConfig cfg = small_config(Technique::Cps, 16, 8, 2);
    ChannelParams ch;
    ch.profile = ChannelProfile::Ideal;
    ch.L_us = 2;
    BerOptions opt;
    opt.max_trials = 400;
    opt.min_errors = 1 << 30;
    const BerRecord r = run_ber_point(cfg, ch, 4.0, opt, 2);
    const auto [lo, hi] = wilson_interval(r.bit_errors, r.total_bits, 3.5);
    EXPECT_GE(qam_ber_awgn(4, 4.0), lo);
    EXPECT_LE(qam_ber_awgn(4, 4.0), hi);
}

TEST(Ber, DependsOnTheSeedOnly)
{
    const ModemConfig cfg = small_config(Technique::Lps, 16, 4, 2, 3);
    ChannelParams ch;
    ch.L_us = 2;
    ch.bw_hz = 0.96e6;
    BerOptions opt;
    opt.max_trials = 6;
    opt.batch = 3;
    const BerRecord a = run_ber_point(cfg, ch, 8.0, opt, 9);
    opt.threads = 3;
    const BerRecord b = run_ber_point(cfg, ch, 8.0, opt, 9);
    EXPECT_EQ(a.bit_errors, b.bit_errors);
    EXPECT_EQ(a.total_bits, b.total_bits);
    const BerRecord c = run_ber_point(cfg, ch, 8.0, opt, 10);
    EXPECT_EQ(c.total_bits, a.total_bits);
    EXPECT_EQ(c.seed, 10u);
}

TEST(Ber, StopsAtMinimumErrors)
{
    const ModemConfig cfg = small_config(Technique::Cps, 16, 8, 2);
    ChannelParams ch;
    ch.profile = ChannelProfile::Ideal;
    ch.L_us = 2;
    BerOptions opt;
    opt.max_trials = 1000;
    opt.min_errors = 50;
    opt.batch = 2;
    const BerRecord r = run_ber_point(cfg, ch, -2.0, opt, 3);
    EXPECT_GE(r.bit_errors, 50);
    EXPECT_LT(r.trials, 1000);
    EXPECT_EQ(r.trials % 2, 0);
}

TEST(Ber, RejectsBadOptions)
{
    const ModemConfig cfg = small_config(Technique::Cps, 16, 8, 2);
    ChannelParams ch;
    BerOptions opt;
    EXPECT_THROW(run_ber_point(cfg, ch, 0.0, opt, 0), ConfigError); // L_us mismatch
    ch.L_us = 2;
    opt.order = 8;
    EXPECT_THROW(run_ber_point(cfg, ch, 0.0, opt, 0), ConfigError);
    opt.order = 4;
    opt.threads = 0;
    EXPECT_THROW(run_ber_point(cfg, ch, 0.0, opt, 0), ConfigError);
}
