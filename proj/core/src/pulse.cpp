#include "ddps/pulse.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "ddps/fft.hpp"

namespace ddps {

namespace {

constexpr double pi = std::numbers::pi;

// SRRC amplitude at signed bin offset x from the band centre.
double srrc_bin(int x, double alpha, int M)
{
    const double ax = std::abs(x);
    const double flat = 1.0 / std::sqrt(static_cast<double>(M));
    if (alpha == 0.0) {
        // band-edge bin takes the alpha -> 0 limit of the roll-off branch
        if (2.0 * ax < M)
            return flat;
        return 2.0 * ax == M ? flat / std::sqrt(2.0) : 0.0;
    }
    const double lo = (1.0 - alpha) * M / 2.0;
    const double hi = (1.0 + alpha) * M / 2.0;
    if (ax < lo)
        return flat;
    if (ax > hi)
        return 0.0;
    const double arg = pi / alpha * (ax / M - (1.0 - alpha) / 2.0);
    return std::sqrt(0.5 * (1.0 + std::cos(arg))) * flat;
}

void check_srrc_args(double alpha, int M, int L_us)
{
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw ConfigError("srrc: alpha must lie in [0, 1]");
    if (M < 1 || L_us < 1)
        throw ConfigError("srrc: M and L_us must be positive");
    if (L_us * M < (1.0 + alpha) * M - 1e-9)
        throw ConfigError("srrc: M' must cover the (1 + alpha) M occupied bins");
}

} // namespace

RVector srrc_freq(double alpha, int M, int L_us)
{
    check_srrc_args(alpha, M, L_us);
    const int Mp = M * L_us;
    RVector psi(Mp);
    for (int m = 0; m < Mp; ++m) {
        const int x = (2 * m <= Mp) ? m : m - Mp;
        psi[m] = srrc_bin(x, alpha, M);
    }
    return psi;
}

PulsePrototype make_pulse(double alpha, int M, int L_us, std::optional<int> Q)
{
    check_srrc_args(alpha, M, L_us);
    if (Q && (*Q < 1 || 2 * *Q > M))
        throw ConfigError("srrc: Q must lie in 1..M/2");

    PulsePrototype p;
    p.alpha = alpha;
    p.M = M;
    p.L_us = L_us;
    p.Q = Q;
    const int Mp = M * L_us;
    p.freq_taps = srrc_freq(alpha, M, L_us);
    const CVector t = fft::unitary(CVector(p.freq_taps.cast<cd>()), fft::Dir::Inverse);
    p.periodic = t.real();

    p.span = Q ? *Q * L_us : Mp / 2;
    p.time_taps.resize(2 * p.span + 1);
    for (int l = -p.span; l <= p.span; ++l)
        p.time_taps[l + p.span] = p.periodic[((l % Mp) + Mp) % Mp];
    if (2 * p.span == Mp) {
        p.time_taps[0] *= 0.5;
        p.time_taps[2 * p.span] *= 0.5;
    }
    return p;
}

RVector srrc_time(double alpha, int M, int L_us, std::optional<int> Q)
{
    return make_pulse(alpha, M, L_us, Q).time_taps;
}

WindowProfile rc_window(double beta, int M, int L_us)
{
    if (!(beta > 0.0 && beta <= 1.0))
        throw ConfigError("rc_window: beta must lie in (0, 1]");
    WindowProfile w;
    w.beta = beta;
    w.M = M;
    w.L_us = L_us;
    w.L_ce = static_cast<int>(std::floor(beta * M + 1e-9));

    const double Mp = static_cast<double>(M) * L_us;
    const int len = (M + w.L_ce) * L_us;
    const double rise_end = beta / 2.0 * Mp;
    const double fall_end = (1.0 + beta / 2.0) * Mp;
    const double c = std::floor(fall_end / 2.0 + 1e-9);
    const double eps = 1e-9;

    auto g = [&](double l) {
        const double arg = 2.0 * pi / beta * (std::abs(l - c) / Mp - (1.0 - beta / 2.0) / 2.0);
        return 0.5 * (1.0 + std::cos(arg));
    };

    w.taps.resize(len);
    for (int i = 0; i < len; ++i) {
        const double l = i;
        if (l <= rise_end + eps || (l >= Mp && l <= fall_end + eps))
            w.taps[i] = g(l);
        else if (l <= Mp)
            w.taps[i] = 1.0;
        else
            w.taps[i] = 0.0;
    }
    return w;
}

ModulatedPulse modulated_pulse(const PulsePrototype& p, int k, int N)
{
    if (N < 1 || k < 0 || k >= N)
        throw ConfigError("modulated_pulse: k must lie in 0..N-1");
    ModulatedPulse out;
    out.k = k;
    out.N = N;
    out.span = p.span;
    out.taps.resize(p.taps());
    const double w = 2.0 * pi * k / (static_cast<double>(p.Mp()) * N);
    for (int l = -p.span; l <= p.span; ++l)
        out.taps[l + p.span] = p.time_taps[l + p.span] * std::polar(1.0, w * l);
    return out;
}

void write_csv(std::ostream& os, const PulsePrototype& p)
{
    os << "index,value\n";
    os.precision(17);
    for (int l = -p.span; l <= p.span; ++l)
        os << l << ',' << p.at(l) << '\n';
}

void write_csv(std::ostream& os, const WindowProfile& w)
{
    os << "index,value\n";
    os.precision(17);
    for (Eigen::Index i = 0; i < w.taps.size(); ++i)
        os << i << ',' << w.taps[i] << '\n';
}

} // namespace ddps
