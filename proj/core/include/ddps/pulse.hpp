#pragma once

#include <iosfwd>
#include <optional>

#include "ddps/types.hpp"

namespace ddps {

// SRRC prototype in both domains.
//
// freq_taps holds the spectrum centred on bin 0 (length M'), periodic holds
// its unitary inverse DFT, i.e. the pulse used by circular shaping.
// time_taps holds p[l'] for l' in [-span, span] at index l' + span.
struct PulsePrototype {
    double alpha = 0.0;
    int M = 0;
    int L_us = 1;
    std::optional<int> Q;
    int span = 0;
    RVector time_taps;
    RVector freq_taps;
    RVector periodic;

    int Mp() const { return M * L_us; }
    int taps() const { return 2 * span + 1; }
    double at(int l) const { return (l < -span || l > span) ? 0.0 : time_taps[l + span]; }
};

RVector srrc_freq(double alpha, int M, int L_us);

// Without Q the span is M'/2 and the two taps at +-M'/2 carry half of
// p[M'/2] each, so the linear pulse periodizes exactly to the circular one.
RVector srrc_time(double alpha, int M, int L_us, std::optional<int> Q = std::nullopt);

PulsePrototype make_pulse(double alpha, int M, int L_us, std::optional<int> Q = std::nullopt);

struct WindowProfile {
    double beta = 0.0;
    int M = 0;
    int L_us = 1;
    int L_ce = 0;
    RVector taps; // length (M + L_ce) * L_us
};

WindowProfile rc_window(double beta, int M, int L_us);

struct ModulatedPulse {
    int k = 0;
    int N = 1;
    int span = 0;
    CVector taps; // p[l'] exp(j 2 pi k l' / (M' N)), l' in [-span, span]

    cd at(int l) const { return (l < -span || l > span) ? cd{} : taps[l + span]; }
};

ModulatedPulse modulated_pulse(const PulsePrototype& p, int k, int N);

void write_csv(std::ostream& os, const PulsePrototype& p);
void write_csv(std::ostream& os, const WindowProfile& w);

} // namespace ddps
