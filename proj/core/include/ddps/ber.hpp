#pragma once

#include <cstdint>

#include "ddps/channel.hpp"
#include "ddps/types.hpp"

namespace ddps {

struct BerOptions {
    int order = 4;
    std::int64_t max_trials = 1000;
    std::int64_t min_errors = 200; // stop once reached (checked between batches)
    int batch = 8;
    int threads = 1;
    bool unbiased = true; // rescale MMSE estimates before hard decisions
};

struct BerRecord {
    double ebn0_db = 0.0;
    Technique technique = Technique::Cps;
    GuardMode guard = GuardMode::None;
    int order = 4;
    std::int64_t trials = 0;
    std::int64_t bit_errors = 0;
    std::int64_t total_bits = 0;
    double ber = 0.0;
    std::uint64_t seed = 0;
};

std::uint64_t splitmix64(std::uint64_t x);
// Seed of trial t under master seed s.
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial);

// Full chain per trial: map, guards, modulate, CP, channel, noise,
// demodulate, H_eff on the same realization, MMSE, demap. Trials run in
// fixed-size batches, so results depend on the seed only.
BerRecord run_ber_point(const ModemConfig& cfg, const ChannelParams& channel, double ebn0_db,
                        const BerOptions& opt, std::uint64_t seed);

} // namespace ddps
