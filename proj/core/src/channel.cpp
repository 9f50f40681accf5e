#include "ddps/channel.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace ddps {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::vector<ChannelPath> quantize(const std::vector<TapSpec>& taps, double rate)
{
    std::map<int, double> power; // merged by quantized delay
    for (const TapSpec& t : taps) {
        if (t.delay_s < 0.0)
            throw ConfigError("channel tap delays must be non-negative");
        power[static_cast<int>(std::lround(t.delay_s * rate))] += std::pow(10.0, t.power_db / 10.0);
    }
    double total = 0.0;
    for (const auto& [d, p] : power)
        total += p;
    std::vector<ChannelPath> out;
    for (const auto& [d, p] : power)
        out.push_back({d, cd{std::sqrt(p / total), 0.0}, 0.0});
    return out;
}

} // namespace

std::string to_string(ChannelProfile p)
{
    switch (p) {
    case ChannelProfile::Ideal: return "ideal";
    case ChannelProfile::Eva: return "eva";
    case ChannelProfile::Custom: return "custom";
    }
    return "?";
}

ChannelProfile parse_channel_profile(const std::string& s)
{
    if (s == "ideal" || s == "awgn")
        return ChannelProfile::Ideal;
    if (s == "eva" || s == "EVA")
        return ChannelProfile::Eva;
    if (s == "custom")
        return ChannelProfile::Custom;
    throw ConfigError("unknown channel profile '" + s + "'");
}

double max_doppler(double v_kmh, double fc_hz) { return v_kmh / 3.6 / kSpeedOfLight * fc_hz; }

const std::vector<TapSpec>& eva_profile()
{
    static const std::vector<TapSpec> taps = {
        {0e-9, 0.0},     {30e-9, -1.5},   {150e-9, -1.4},  {310e-9, -3.6},  {370e-9, -0.6},
        {710e-9, -9.1},  {1090e-9, -7.0}, {1730e-9, -12.0}, {2510e-9, -16.9},
    };
    return taps;
}

ChannelRealization::ChannelRealization(std::vector<ChannelPath> paths, double sample_rate,
                                       int L_us, std::int64_t frame_len, std::uint64_t seed)
    : paths_(std::move(paths)), sample_rate_(sample_rate), L_us_(L_us), frame_len_(frame_len),
      seed_(seed)
{
    if (paths_.empty())
        throw ConfigError("channel needs at least one path");
    if (!(sample_rate_ > 0.0) || L_us_ < 1 || frame_len_ < 1)
        throw ConfigError("channel geometry must be positive");
    int dmax = 0;
    for (const ChannelPath& p : paths_) {
        if (p.delay < 0)
            throw ConfigError("path delay must be non-negative");
        dmax = std::max(dmax, p.delay);
        taps_.push_back(p.delay);
    }
    std::sort(taps_.begin(), taps_.end());
    taps_.erase(std::unique(taps_.begin(), taps_.end()), taps_.end());

    h_ = CMatrix::Zero(frame_len_, dmax + 1);
    for (const ChannelPath& p : paths_) {
        const double w = two_pi * p.doppler / sample_rate_;
        for (std::int64_t k = 0; k < frame_len_; ++k)
            h_(k, p.delay) += p.gain * std::polar(1.0, w * static_cast<double>(k));
    }
}

bool ChannelRealization::time_invariant() const
{
    return std::all_of(paths_.begin(), paths_.end(),
                       [](const ChannelPath& p) { return p.doppler == 0.0; });
}

ChannelRealization ideal_channel(int L_us, std::int64_t frame_len)
{
    return ChannelRealization({ChannelPath{}}, 1.0, L_us, frame_len);
}

ChannelRealization generate_channel(const ChannelParams& params, std::int64_t frame_len,
                                    std::uint64_t seed)
{
    if (params.v_kmh < 0.0)
        throw ConfigError("velocity must be non-negative");
    const double rate = params.sample_rate();
    if (params.profile == ChannelProfile::Ideal)
        return ChannelRealization({ChannelPath{}}, rate, params.L_us, frame_len, seed);

    const std::vector<ChannelPath> taps =
        quantize(params.profile == ChannelProfile::Eva ? eva_profile() : params.custom_taps, rate);
    if (taps.empty())
        throw ConfigError("custom channel profile has no taps");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    std::uniform_real_distribution<double> angle(0.0, two_pi);
    const double nu_max = params.nu_max();
    const int rays = params.doppler_model == DopplerModel::Jakes ? params.jakes_rays : 1;
    if (rays < 1)
        throw ConfigError("Jakes model needs at least one ray per tap");

    std::vector<ChannelPath> paths;
    for (const ChannelPath& t : taps) {
        const double amp = std::abs(t.gain) / std::sqrt(static_cast<double>(rays));
        for (int r = 0; r < rays; ++r) {
            ChannelPath p;
            p.delay = t.delay;
            p.gain = amp * cd{gauss(rng), gauss(rng)};
            p.doppler = nu_max * std::cos(angle(rng));
            paths.push_back(p);
        }
    }
    return ChannelRealization(std::move(paths), rate, params.L_us, frame_len, seed);
}

SampleStream apply_channel(const ChannelRealization& ch, const SampleStream& stream)
{
    if (stream.size() > ch.frame_len())
        throw DimensionError("stream is longer than the channel realization");
    if (-stream.start_index < ch.max_delay())
        throw ConfigError("cyclic prefix of " + std::to_string(-stream.start_index) +
                          " samples is shorter than the channel delay spread of " +
                          std::to_string(ch.max_delay()) + " samples");
    SampleStream out = stream;
    out.samples.setZero();
    const CMatrix& h = ch.sampled();
    const Eigen::Index n = stream.size();
    for (int i : ch.active_taps())
        for (Eigen::Index k = i; k < n; ++k)
            out.samples[k] += h(k, i) * stream.samples[k - i];
    return out;
}

double noise_variance(double Es, int bits_per_symbol, double ebn0_db)
{
    if (std::isinf(ebn0_db) && ebn0_db > 0)
        return 0.0;
    if (bits_per_symbol < 1)
        throw ConfigError("bits per symbol must be positive");
    return Es / (bits_per_symbol * std::pow(10.0, ebn0_db / 10.0));
}

SampleStream add_awgn(const SampleStream& stream, double sigma2, std::uint64_t seed)
{
    if (sigma2 < 0.0)
        throw ConfigError("noise variance must be non-negative");
    SampleStream out = stream;
    if (sigma2 == 0.0)
        return out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(sigma2 / 2.0));
    for (Eigen::Index k = 0; k < out.samples.size(); ++k)
        out.samples[k] += cd{gauss(rng), gauss(rng)};
    return out;
}

SampleStream add_awgn(const SampleStream& stream, double ebn0_db, int bits_per_symbol,
                      double samples_per_symbol, std::uint64_t seed)
{
    if (stream.size() == 0)
        return stream;
    const double power = stream.samples.squaredNorm() / static_cast<double>(stream.size());
    return add_awgn(stream, noise_variance(power * samples_per_symbol, bits_per_symbol, ebn0_db),
                    seed);
}

void save_channel(std::ostream& os, const ChannelRealization& ch)
{
    os.precision(17);
    os << "ddps-channel 1\n";
    os << ch.sample_rate() << ' ' << ch.L_us() << ' ' << ch.frame_len() << ' ' << ch.seed() << ' '
       << ch.paths().size() << '\n';
    for (const ChannelPath& p : ch.paths())
        os << p.delay << ' ' << p.gain.real() << ' ' << p.gain.imag() << ' ' << p.doppler << '\n';
}

ChannelRealization load_channel(std::istream& is)
{
    std::string magic;
    int version = 0;
    if (!(is >> magic >> version) || magic != "ddps-channel" || version != 1)
        throw ConfigError("not a channel file");
    double rate = 0.0;
    int L_us = 0;
    std::int64_t frame_len = 0;
    std::uint64_t seed = 0;
    std::size_t count = 0;
    if (!(is >> rate >> L_us >> frame_len >> seed >> count))
        throw ConfigError("channel file: bad header");
    std::vector<ChannelPath> paths(count);
    for (std::size_t i = 0; i < count; ++i) {
        double re = 0.0, im = 0.0;
        if (!(is >> paths[i].delay >> re >> im >> paths[i].doppler))
            throw ConfigError("channel file: truncated path list at entry " + std::to_string(i));
        paths[i].gain = {re, im};
    }
    return ChannelRealization(std::move(paths), rate, L_us, frame_len, seed);
}

} // namespace ddps
