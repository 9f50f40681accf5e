#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ddps/types.hpp"

namespace ddps {

enum class ChannelProfile { Ideal, Eva, Custom };
enum class DopplerModel { SingleRay, Jakes };

std::string to_string(ChannelProfile p);
ChannelProfile parse_channel_profile(const std::string& s);

constexpr double kSpeedOfLight = 299792458.0;

// Maximum Doppler shift in Hz for a speed in km/h.
double max_doppler(double v_kmh, double fc_hz);

// One discrete path. The delay is counted in samples of the simulation rate
// L_us * BW, after quantization of the profile's excess delay.
struct ChannelPath {
    int delay = 0;
    cd gain{1.0, 0.0};
    double doppler = 0.0; // Hz
};

struct TapSpec {
    double delay_s = 0.0;
    double power_db = 0.0;
};

// EVA power-delay profile.
const std::vector<TapSpec>& eva_profile();

struct ChannelParams {
    ChannelProfile profile = ChannelProfile::Eva;
    double v_kmh = 500.0;
    double fc_hz = 5.9e9;
    double bw_hz = 1.92e6;
    int L_us = 4;
    DopplerModel doppler_model = DopplerModel::SingleRay;
    int jakes_rays = 16;
    std::vector<TapSpec> custom_taps; // used by ChannelProfile::Custom

    double sample_rate() const { return L_us * bw_hz; }
    double nu_max() const { return max_doppler(v_kmh, fc_hz); }
};

// h[kappa', i] for kappa' = 0 .. frame_len-1, where kappa' = 0 is the first
// transmitted sample (the first CP sample).
class ChannelRealization {
public:
    ChannelRealization() = default;
    ChannelRealization(std::vector<ChannelPath> paths, double sample_rate, int L_us,
                       std::int64_t frame_len, std::uint64_t seed = 0);

    const std::vector<ChannelPath>& paths() const { return paths_; }
    double sample_rate() const { return sample_rate_; }
    int L_us() const { return L_us_; }
    std::int64_t frame_len() const { return frame_len_; }
    std::uint64_t seed() const { return seed_; }

    int max_delay() const { return static_cast<int>(h_.cols()) - 1; }
    // Base-rate delay spread L_ch.
    int L_ch() const { return (max_delay() + L_us_) / L_us_; }
    // Distinct delays carrying at least one path, ascending.
    const std::vector<int>& active_taps() const { return taps_; }
    bool time_invariant() const;

    cd h(std::int64_t kappa, int i) const { return h_(kappa, i); }
    const CMatrix& sampled() const { return h_; }

private:
    std::vector<ChannelPath> paths_;
    double sample_rate_ = 1.0;
    int L_us_ = 1;
    std::int64_t frame_len_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<int> taps_;
    CMatrix h_; // frame_len x (max_delay + 1)
};

ChannelRealization ideal_channel(int L_us, std::int64_t frame_len);
ChannelRealization generate_channel(const ChannelParams& params, std::int64_t frame_len,
                                    std::uint64_t seed);

// Time-varying convolution over a transmitted frame. The stream's start index
// must be -L'_cp (CP first), and the CP has to cover the channel's delay spread.
SampleStream apply_channel(const ChannelRealization& ch, const SampleStream& stream);

// Noise variance per complex sample. Es is the transmitted energy per data symbol.
double noise_variance(double Es, int bits_per_symbol, double ebn0_db);
SampleStream add_awgn(const SampleStream& stream, double sigma2, std::uint64_t seed);
// Derives sigma^2 from the stream's mean power: one data symbol occupies
// samples_per_symbol samples.
SampleStream add_awgn(const SampleStream& stream, double ebn0_db, int bits_per_symbol,
                      double samples_per_symbol, std::uint64_t seed);

void save_channel(std::ostream& os, const ChannelRealization& ch);
ChannelRealization load_channel(std::istream& is);

} // namespace ddps
