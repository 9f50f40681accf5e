#include "ddps/ber.hpp"

#include <optional>
#include <random>
#include <thread>
#include <vector>

#include "ddps/effective.hpp"
#include "ddps/metrics.hpp"
#include "ddps/modem.hpp"

namespace ddps {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial)
{
    return splitmix64(splitmix64(master) ^ trial);
}

namespace {

struct Tally {
    std::int64_t errors = 0;
    std::int64_t bits = 0;
};

// Mean transmitted energy per data symbol for unit-energy data. The
// modulator is linear, so this is the energy summed over unit impulses.
double mean_symbol_energy(const ModemConfig& cfg)
{
    double total = 0.0;
    DelayDopplerGrid e{CMatrix::Zero(cfg.M, cfg.N)};
    for (int k = 0; k < cfg.N; ++k)
        for (int l = 0; l < cfg.M; ++l) {
            e.symbols(l, k) = 1.0;
            total += modulate_unified(e, cfg).frame.samples.tail(cfg.core_len()).squaredNorm();
            e.symbols(l, k) = 0.0;
        }
    return total / (static_cast<double>(cfg.M) * cfg.N);
}

class TrialRunner {
public:
    TrialRunner(const ModemConfig& cfg, const ChannelParams& ch, double sigma2,
                const BerOptions& opt, const EffectiveChannelBuilder& builder,
                const CMatrix* fixed_A)
        : cfg_(cfg), ch_(ch), sigma2_(sigma2), opt_(opt), builder_(builder), fixed_A_(fixed_A)
    {
    }

    Tally run(std::uint64_t seed)
    {
        const int bps = bits_per_symbol(opt_.order);
        std::mt19937_64 rng(seed);
        std::vector<std::uint8_t> bits(static_cast<std::size_t>(cfg_.M) * cfg_.N * bps);
        for (auto& b : bits)
            b = static_cast<std::uint8_t>(rng() >> 63);
        const DelayDopplerGrid data = qam_map(bits, opt_.order, cfg_.M, cfg_.N);

        const ModemOutput tx = modulate_unified(data, cfg_);
        const ChannelRealization ch = generate_channel(ch_, cfg_.frame_len(), splitmix64(seed ^ 0x1));
        const SampleStream rx = add_awgn(apply_channel(ch, tx.frame), sigma2_, splitmix64(seed ^ 0x2));

        const DelayDopplerGrid obs = demodulate_unified(rx, cfg_);
        const CVector y = Eigen::Map<const CVector>(obs.symbols.data(), obs.symbols.size());

        CVector d_hat;
        if (fixed_A_) {
            if (!eq_)
                eq_.emplace(*fixed_A_, builder_.unit_noise_cov(), sigma2_, opt_.unbiased);
            d_hat = eq_->equalize(y);
        } else {
            const CMatrix A = builder_.detection_matrix(builder_.heff(ch));
            d_hat = MmseEqualizer(A, builder_.unit_noise_cov(), sigma2_, opt_.unbiased).equalize(y);
        }

        const std::vector<std::uint8_t> got = qam_demap(d_hat, opt_.order);
        Tally t;
        t.bits = static_cast<std::int64_t>(bits.size());
        for (std::size_t i = 0; i < bits.size(); ++i)
            t.errors += got[i] != bits[i];
        return t;
    }

private:
    const ModemConfig& cfg_;
    const ChannelParams& ch_;
    double sigma2_;
    const BerOptions& opt_;
    const EffectiveChannelBuilder& builder_;
    const CMatrix* fixed_A_;
    std::optional<MmseEqualizer> eq_;
};

} // namespace

BerRecord run_ber_point(const ModemConfig& cfg, const ChannelParams& channel, double ebn0_db,
                        const BerOptions& opt, std::uint64_t seed)
{
    cfg.validate();
    if (opt.max_trials < 1 || opt.batch < 1 || opt.threads < 1)
        throw ConfigError("BER run needs at least one trial, batch and thread");
    if (channel.L_us != cfg.L_us)
        throw ConfigError("channel and modem disagree on the oversampling factor");
    bits_per_symbol(opt.order);

    const EffectiveChannelBuilder builder(cfg);
    std::optional<CMatrix> fixed_A;
    if (channel.profile == ChannelProfile::Ideal)
        fixed_A = builder.detection_matrix(
            builder.heff(generate_channel(channel, cfg.frame_len(), 0)));

    const double sigma2 = noise_variance(mean_symbol_energy(cfg), bits_per_symbol(opt.order), ebn0_db);
    const int workers = opt.threads;
    std::vector<TrialRunner> runners;
    for (int w = 0; w < workers; ++w)
        runners.emplace_back(cfg, channel, sigma2, opt, builder, fixed_A ? &*fixed_A : nullptr);

    BerRecord rec;
    rec.ebn0_db = ebn0_db;
    rec.technique = cfg.technique;
    rec.guard = cfg.guard.active() ? cfg.guard.mode : GuardMode::None;
    rec.order = opt.order;
    rec.seed = seed;

    std::int64_t next = 0;
    while (next < opt.max_trials && rec.bit_errors < opt.min_errors) {
        const std::int64_t count = std::min<std::int64_t>(opt.batch, opt.max_trials - next);
        std::vector<Tally> tallies(static_cast<std::size_t>(count));
        auto work = [&](int w) {
            for (std::int64_t i = w; i < count; i += workers)
                tallies[static_cast<std::size_t>(i)] =
                    runners[static_cast<std::size_t>(w)].run(trial_seed(seed, static_cast<std::uint64_t>(next + i)));
        };
        if (workers == 1) {
            work(0);
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w)
                pool.emplace_back(work, w);
            for (auto& t : pool)
                t.join();
        }
        for (const Tally& t : tallies) {
            rec.bit_errors += t.errors;
            rec.total_bits += t.bits;
        }
        next += count;
    }
    rec.trials = next;
    rec.ber = rec.total_bits ? static_cast<double>(rec.bit_errors) / rec.total_bits : 0.0;
    return rec;
}

} // namespace ddps
