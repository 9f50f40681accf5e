#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ddps {

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

enum class Technique { Cps, Lps, Oddm };
enum class GuardMode { None, CeBeforePs, CeAfterPs, ZeroGuard };

std::string to_string(Technique t);
std::string to_string(GuardMode g);
Technique parse_technique(const std::string& s);
GuardMode parse_guard_mode(const std::string& s);

struct GuardConfig {
    GuardMode mode = GuardMode::None;
    int length = 0;    // L_CE or L_ZG in base-rate delay bins
    double beta = 0.0; // RC window roll-off, CE modes only

    int head() const { return (length + 1) / 2; }
    int tail() const { return length / 2; }
    bool active() const { return mode != GuardMode::None && length > 0; }
    bool cyclic_extension() const
    {
        return mode == GuardMode::CeBeforePs || mode == GuardMode::CeAfterPs;
    }

    static GuardConfig none() { return {}; }
    static GuardConfig zero_guard(int len) { return {GuardMode::ZeroGuard, len, 0.0}; }
    // beta is chosen so that floor(beta * M) == len
    static GuardConfig cyclic(GuardMode mode, int len, int M)
    {
        return {mode, len, static_cast<double>(len) / M};
    }
};

// Rows are delay bins, columns Doppler bins. d[l + k*M] = D(l, k) is the
// column-major flattening used by the matrix model.
struct DelayDopplerGrid {
    CMatrix symbols;

    int rows() const { return static_cast<int>(symbols.rows()); }
    int cols() const { return static_cast<int>(symbols.cols()); }
};

struct TimeFrequencyGrid {
    CMatrix values;
};

// One column per time slot. Row r holds delay sample l' = r + delay_origin.
struct DelayTimeGrid {
    CMatrix values;
    int delay_origin = 0;

    int block_len() const { return static_cast<int>(values.rows()); }
    int blocks() const { return static_cast<int>(values.cols()); }
};

struct SampleStream {
    CVector samples;
    std::int64_t start_index = 0; // sample index of samples[0]
    int rate_factor = 1;

    std::int64_t size() const { return samples.size(); }
    std::int64_t end_index() const { return start_index + samples.size(); }
};

struct ModemConfig {
    int M = 128;
    int N = 32;
    int L_us = 4;
    double alpha = 0.1;
    std::optional<int> Q = 12;
    int L_cp = 16;
    GuardConfig guard;
    Technique technique = Technique::Cps;
    double delta_tau = 1.0 / 1.92e6;

    int Mp() const { return M * L_us; }
    int Lcp_us() const { return L_cp * L_us; }
    double T() const { return M * delta_tau; }
    double delta_nu() const { return 1.0 / (N * T()); }
    bool linear() const { return technique != Technique::Cps; }

    // Delay rows fed to the pulse shaper.
    int shaped_rows() const;
    // Distance between consecutive blocks in the transmitted core.
    int block_stride() const;
    // Samples per block handed to the serializer.
    int block_len() const;
    int block_origin() const;
    // Truncation used by linear shaping; C-PS always uses the full pulse.
    int effective_Q() const;
    bool untruncated() const;
    std::int64_t core_len() const { return static_cast<std::int64_t>(N) * block_stride(); }
    std::int64_t frame_len() const { return core_len() + Lcp_us(); }

    void validate() const;
};

bool is_power_of_two(std::int64_t v);

} // namespace ddps
