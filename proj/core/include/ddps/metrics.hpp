#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ddps/types.hpp"

namespace ddps {

// Square Gray QAM with unit average energy. The first half of each symbol's
// bits selects the in-phase level, the second half the quadrature level;
// within an axis the first bit is the most significant.
int bits_per_symbol(int order);
CVector qam_map(const std::vector<std::uint8_t>& bits, int order);
DelayDopplerGrid qam_map(const std::vector<std::uint8_t>& bits, int order, int M, int N);
std::vector<std::uint8_t> qam_demap(const CVector& symbols, int order);
std::vector<std::uint8_t> qam_demap(const DelayDopplerGrid& grid, int order);

// Exact bit error rate of Gray-coded square QAM over AWGN.
double qam_ber_awgn(int order, double ebn0_db);

struct PsdEstimate {
    RVector freqs;    // cycles per sample, ascending in [-0.5, 0.5)
    RVector power_db; // relative to the mean in-band level
    int seg_len = 0;
    int overlap = 0;
    std::int64_t averages = 0;
    double inband_edge = 0.5;
    std::string taper = "hann";
};

// Welch averaging over any number of streams; every stream contributes its
// own complete segments.
class WelchPsd {
public:
    WelchPsd(int seg_len, int overlap);

    void add(const CVector& x);
    std::int64_t averages() const { return count_; }
    // Normalizes so that the mean power over |f| < inband_edge is 0 dB.
    PsdEstimate finish(double inband_edge = 0.5) const;

private:
    int seg_len_;
    int overlap_;
    RVector taper_;
    RVector acc_;
    std::int64_t count_ = 0;
};

PsdEstimate estimate_psd(const CVector& x, int seg_len, int overlap, double inband_edge = 0.5);

// Mean power over |f| >= band_edge + offset relative to the mean over
// |f| < band_edge, in dB, floored at -200 dB.
double oob_power(const PsdEstimate& psd, double band_edge, double offset);

// Circular lag (in bins) maximizing the cross-correlation of two dB spectra:
// b is approximately a shifted towards higher frequencies by the result.
int psd_shift(const PsdEstimate& a, const PsdEstimate& b);

double papr_db(const CVector& x);

struct PaprCcdf {
    RVector thresholds_db;
    RVector ccdf;
    std::int64_t frames = 0;
};

PaprCcdf papr_ccdf(const std::vector<double>& papr_values_db, const RVector& thresholds_db);
PaprCcdf papr_ccdf(const std::vector<CVector>& frames, const RVector& thresholds_db);

// Wilson score interval for k successes out of n.
std::pair<double, double> wilson_interval(std::int64_t k, std::int64_t n, double z = 1.96);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};
// Two-sample Kolmogorov-Smirnov test (asymptotic p-value).
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

} // namespace ddps
