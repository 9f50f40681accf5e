#pragma once

#include <cstdint>
#include <vector>

#include "ddps/modem.hpp"

// FFT-based modem structures with complex-multiplication (CM) accounting.
//
// Cost model: an L-point FFT costs (L/2) log2 L CMs; a real frequency-domain
// coefficient costs half a CM. Stage costs are charged per call, independent
// of the data.
namespace ddps {

class CmCounter {
public:
    void add_fft(int L);
    void add_half(std::int64_t halves) { halves_ += halves; }
    void add(std::int64_t cms) { halves_ += 2 * cms; }
    void reset() { halves_ = 0; }

    std::int64_t halves() const { return halves_; }
    std::int64_t value() const { return halves_ / 2; }

private:
    std::int64_t halves_ = 0;
};

enum class Impl { Direct, ReferenceOddm, Fast };

struct CmParams {
    int M = 128;
    int N = 32;
    int L_us = 4;
    int Q = 12;
    double alpha = 0.1;
};

// Closed-form CM count for one modulator (or demodulator) call.
std::int64_t predict_cm(Technique t, Impl impl, const CmParams& p);

// Fast modem for one configuration. Frequency responses are computed once at
// construction; modulate/demodulate are then read-only and thread-safe.
class FastModem {
public:
    explicit FastModem(const ModemConfig& cfg);

    ModemOutput modulate(const DelayDopplerGrid& grid, CmCounter* counter = nullptr) const;
    DelayDopplerGrid demodulate(const SampleStream& frame, CmCounter* counter = nullptr) const;

    const ModemConfig& config() const { return cfg_; }
    // CMs spent building the stored responses (not part of per-call counts).
    std::int64_t setup_cms() const { return setup_cms_; }

private:
    ModemConfig cfg_;
    int Mp_ = 0;
    int rolloff_bins_ = 0;     // ceil(alpha M) or ceil(2 alpha M)
    RVector cps_response_;     // sqrt(M) psi_bar over M' bins
    std::vector<CVector> lin_; // per-k response over 2M' bins (one entry for L-PS)
    std::int64_t setup_cms_ = 0;

    ModemOutput modulate_cps(const DelayDopplerGrid& grid, CmCounter* c) const;
    ModemOutput modulate_lps(const DelayDopplerGrid& grid, CmCounter* c) const;
    ModemOutput modulate_oddm(const DelayDopplerGrid& grid, CmCounter* c) const;
    DelayDopplerGrid demodulate_cps(const SampleStream& frame, CmCounter* c) const;
    DelayDopplerGrid demodulate_lps(const SampleStream& frame, CmCounter* c) const;
    DelayDopplerGrid demodulate_oddm(const SampleStream& frame, CmCounter* c) const;
};

ModemOutput modulate_cps_fast(const DelayDopplerGrid& grid, const ModemConfig& cfg,
                              CmCounter* counter = nullptr);
ModemOutput modulate_lps_fast(const DelayDopplerGrid& grid, const ModemConfig& cfg,
                              CmCounter* counter = nullptr);
ModemOutput modulate_oddm_fast(const DelayDopplerGrid& grid, const ModemConfig& cfg,
                               CmCounter* counter = nullptr);
DelayDopplerGrid demodulate_cps_fast(const SampleStream& frame, const ModemConfig& cfg,
                                     CmCounter* counter = nullptr);
DelayDopplerGrid demodulate_lps_fast(const SampleStream& frame, const ModemConfig& cfg,
                                     CmCounter* counter = nullptr);
DelayDopplerGrid demodulate_oddm_fast(const SampleStream& frame, const ModemConfig& cfg,
                                      CmCounter* counter = nullptr);

// Instrumented versions of the structures the fast modems are compared with.
// They produce the same frames as modulate_cps/modulate_lps and modulate_oddm
// and charge every multiplication they actually perform.
ModemOutput modulate_direct_counted(const DelayDopplerGrid& grid, const ModemConfig& cfg,
                                    CmCounter* counter = nullptr);
ModemOutput modulate_oddm_reference(const DelayDopplerGrid& grid, const ModemConfig& cfg,
                                    CmCounter* counter = nullptr);

} // namespace ddps
