#include "ddps/fast.hpp"

#include <cmath>

#include "ddps/fft.hpp"

namespace ddps {

using fft::Dir;

namespace {

int log2_exact(std::int64_t v)
{
    if (!is_power_of_two(v))
        throw ConfigError("radix-2 CM model needs power-of-two sizes, got " + std::to_string(v));
    int k = 0;
    while ((std::int64_t{1} << k) < v)
        ++k;
    return k;
}

std::int64_t ceil_mul(double alpha, int M)
{
    return static_cast<std::int64_t>(std::ceil(alpha * M - 1e-9));
}

int wrap(int i, int n) { return ((i % n) + n) % n; }

void count_fft(CmCounter* c, int L, std::int64_t times = 1)
{
    if (c)
        for (std::int64_t i = 0; i < times; ++i)
            c->add_fft(L);
}

void count_halves(CmCounter* c, std::int64_t h)
{
    if (c)
        c->add_half(h);
}

// Response of a pulse placed circularly on 2M' bins, scaled so that shaping
// is a plain product with the 2M-point spectrum of the zero-padded block.
template <typename Pulse>
CVector linear_response(const Pulse& taps, int span, int M, int L_us)
{
    const int n2 = 2 * M * L_us;
    CVector buf = CVector::Zero(n2);
    for (int l = -span; l <= span; ++l)
        buf[wrap(l, n2)] += taps[l + span];
    return fft::unitary(buf, Dir::Forward) * std::sqrt(2.0 * M);
}

} // namespace

void CmCounter::add_fft(int L)
{
    halves_ += static_cast<std::int64_t>(L) * log2_exact(L);
}

std::int64_t predict_cm(Technique t, Impl impl, const CmParams& p)
{
    if (p.M < 1 || p.N < 1 || p.L_us < 1)
        throw ConfigError("predict_cm: sizes must be positive");
    const std::int64_t M = p.M, N = p.N, L = p.L_us;
    const int lN = log2_exact(N);
    std::int64_t halves = 0;
    switch (impl) {
    case Impl::Direct: {
        if (t == Technique::Oddm)
            throw ConfigError("predict_cm: use the reference structure for ODDM");
        if (p.Q < 1 || 2 * p.Q > p.M)
            throw ConfigError("predict_cm: Q must lie in 1..M/2");
        const std::int64_t Q = p.Q, Qp = p.Q * L;
        halves = N * M * lN + N * M * (Qp - Q);
        break;
    }
    case Impl::ReferenceOddm: {
        if (t != Technique::Oddm)
            throw ConfigError("predict_cm: the reference structure exists for ODDM only");
        const std::int64_t Q = p.Q, Qp = p.Q * L;
        halves = 2 * N * N * M * (2 * Qp - 2 * Q);
        break;
    }
    case Impl::Fast: {
        const int lM = log2_exact(M);
        const int lMp = log2_exact(M * L);
        switch (t) {
        case Technique::Cps:
            halves = N * M * (lN + lM + L * lMp) + N * ceil_mul(p.alpha, p.M);
            break;
        case Technique::Lps:
            halves = N * M * (lN + 2 * (lM + 1) + 2 * L * (lMp + 1)) + N * ceil_mul(2 * p.alpha, p.M);
            break;
        case Technique::Oddm:
            halves = 2 * N * M * ((lM + 1) + L * (lN + lMp + 1)) + 2 * N * ceil_mul(2 * p.alpha, p.M);
            break;
        }
        break;
    }
    }
    return halves / 2;
}

FastModem::FastModem(const ModemConfig& cfg) : cfg_(cfg)
{
    cfg_.validate();
    if (cfg_.guard.active())
        throw ConfigError("fast structures are defined for unguarded grids");
    log2_exact(cfg_.M);
    log2_exact(cfg_.N);
    log2_exact(cfg_.Mp());
    Mp_ = cfg_.Mp();

    const PulsePrototype p = cfg_.linear()
                                 ? make_pulse(cfg_.alpha, cfg_.M, cfg_.L_us, cfg_.effective_Q())
                                 : make_pulse(cfg_.alpha, cfg_.M, cfg_.L_us);
    switch (cfg_.technique) {
    case Technique::Cps:
        rolloff_bins_ = static_cast<int>(ceil_mul(cfg_.alpha, cfg_.M));
        cps_response_ = p.freq_taps * std::sqrt(static_cast<double>(cfg_.M));
        break;
    case Technique::Lps:
        rolloff_bins_ = static_cast<int>(ceil_mul(2 * cfg_.alpha, cfg_.M));
        lin_.push_back(linear_response(p.time_taps, p.span, cfg_.M, cfg_.L_us));
        setup_cms_ = static_cast<std::int64_t>(Mp_) * (log2_exact(Mp_) + 1);
        break;
    case Technique::Oddm:
        rolloff_bins_ = static_cast<int>(ceil_mul(2 * cfg_.alpha, cfg_.M));
        for (int k = 0; k < cfg_.N; ++k) {
            const ModulatedPulse pk = modulated_pulse(p, k, cfg_.N);
            lin_.push_back(linear_response(pk.taps, pk.span, cfg_.M, cfg_.L_us));
        }
        setup_cms_ = static_cast<std::int64_t>(cfg_.N) * Mp_ * (log2_exact(Mp_) + 1);
        break;
    }
}

ModemOutput FastModem::modulate(const DelayDopplerGrid& grid, CmCounter* counter) const
{
    if (grid.rows() != cfg_.M || grid.cols() != cfg_.N)
        throw DimensionError("fast modulator expects an M x N grid");
    switch (cfg_.technique) {
    case Technique::Cps: return modulate_cps(grid, counter);
    case Technique::Lps: return modulate_lps(grid, counter);
    case Technique::Oddm: return modulate_oddm(grid, counter);
    }
    throw ConfigError("unknown technique");
}

DelayDopplerGrid FastModem::demodulate(const SampleStream& frame, CmCounter* counter) const
{
    switch (cfg_.technique) {
    case Technique::Cps: return demodulate_cps(frame, counter);
    case Technique::Lps: return demodulate_lps(frame, counter);
    case Technique::Oddm: return demodulate_oddm(frame, counter);
    }
    throw ConfigError("unknown technique");
}

ModemOutput FastModem::modulate_cps(const DelayDopplerGrid& grid, CmCounter* c) const
{
    const int M = cfg_.M, N = cfg_.N;
    const CMatrix X = fft::rows(grid.symbols, Dir::Inverse);
    count_fft(c, N, M);

    CMatrix blocks(Mp_, N);
    CVector spec(M), Z(Mp_);
    for (int n = 0; n < N; ++n) {
        fft::unitary(X.col(n).data(), spec.data(), M, Dir::Forward);
        count_fft(c, M);
        for (int m = 0; m < Mp_; ++m) {
            const double h = cps_response_[m];
            const cd v = spec[m % M];
            Z[m] = (h == 0.0) ? cd{} : (std::abs(h - 1.0) < 1e-12 ? v : h * v);
        }
        count_halves(c, rolloff_bins_);
        fft::unitary(Z.data(), blocks.col(n).data(), Mp_, Dir::Inverse);
        count_fft(c, Mp_);
    }
    return frame_blocks({blocks, 0}, cfg_);
}

DelayDopplerGrid FastModem::demodulate_cps(const SampleStream& frame, CmCounter* c) const
{
    const int M = cfg_.M, N = cfg_.N;
    const DelayTimeGrid Y = receive_blocks(frame, cfg_);
    CMatrix out(M, N);
    CVector spec(Mp_), acc(M);
    for (int n = 0; n < N; ++n) {
        fft::unitary(Y.values.col(n).data(), spec.data(), Mp_, Dir::Forward);
        count_fft(c, Mp_);
        acc.setZero();
        for (int m = 0; m < Mp_; ++m) {
            const double h = cps_response_[m];
            if (h != 0.0)
                acc[m % M] += (std::abs(h - 1.0) < 1e-12) ? spec[m] : h * spec[m];
        }
        count_halves(c, rolloff_bins_);
        fft::unitary(acc.data(), out.col(n).data(), M, Dir::Inverse);
        count_fft(c, M);
    }
    count_fft(c, N, M);
    return {fft::rows(out, Dir::Forward)};
}

ModemOutput FastModem::modulate_lps(const DelayDopplerGrid& grid, CmCounter* c) const
{
    const int M = cfg_.M, N = cfg_.N;
    const int n2 = 2 * Mp_;
    const int S = cfg_.effective_Q() * cfg_.L_us;
    const CMatrix X = fft::rows(grid.symbols, Dir::Inverse);
    count_fft(c, N, M);

    CMatrix blocks(cfg_.block_len(), N);
    CVector pad = CVector::Zero(2 * M), spec(2 * M), Z(n2), z(n2);
    const CVector& H = lin_[0];
    for (int n = 0; n < N; ++n) {
        pad.head(M) = X.col(n);
        fft::unitary(pad.data(), spec.data(), 2 * M, Dir::Forward);
        count_fft(c, 2 * M);
        for (int m = 0; m < n2; ++m)
            Z[m] = H[m] * spec[m % (2 * M)];
        count_halves(c, rolloff_bins_);
        fft::unitary(Z.data(), z.data(), n2, Dir::Inverse);
        count_fft(c, n2);
        for (int r = 0; r < blocks.rows(); ++r)
            blocks(r, n) = z[wrap(r - S, n2)];
    }
    return frame_blocks({blocks, -S}, cfg_);
}

DelayDopplerGrid FastModem::demodulate_lps(const SampleStream& frame, CmCounter* c) const
{
    const int M = cfg_.M, N = cfg_.N, L = cfg_.L_us;
    const int n2 = 2 * Mp_;
    const int S = cfg_.effective_Q() * L;
    const DelayTimeGrid Y = receive_blocks(frame, cfg_);
    const CVector& H = lin_[0];

    CMatrix out(M, N);
    CVector buf(n2), spec(n2), acc(2 * M), z(2 * M);
    for (int n = 0; n < N; ++n) {
        buf.setZero();
        for (int r = 0; r < Y.block_len(); ++r)
            buf[wrap(r - S, n2)] = Y.values(r, n);
        fft::unitary(buf.data(), spec.data(), n2, Dir::Forward);
        count_fft(c, n2);
        acc.setZero();
        for (int m = 0; m < n2; ++m)
            acc[m % (2 * M)] += std::conj(H[m]) * spec[m];
        count_halves(c, rolloff_bins_);
        fft::unitary(acc.data(), z.data(), 2 * M, Dir::Inverse);
        count_fft(c, 2 * M);
        out.col(n) = z.head(M);
    }
    count_fft(c, N, M);
    return {fft::rows(out, Dir::Forward)};
}

ModemOutput FastModem::modulate_oddm(const DelayDopplerGrid& grid, CmCounter* c) const
{
    const int M = cfg_.M, N = cfg_.N;
    const int n2 = 2 * Mp_;
    const int S = cfg_.effective_Q() * cfg_.L_us;

    CMatrix W(n2, N);
    CVector pad = CVector::Zero(2 * M), spec(2 * M), Z(n2);
    for (int k = 0; k < N; ++k) {
        pad.head(M) = grid.symbols.col(k);
        fft::unitary(pad.data(), spec.data(), 2 * M, Dir::Forward);
        count_fft(c, 2 * M);
        const CVector& H = lin_[k];
        for (int m = 0; m < n2; ++m)
            Z[m] = H[m] * spec[m % (2 * M)];
        count_halves(c, 2 * rolloff_bins_);
        fft::unitary(Z.data(), W.col(k).data(), n2, Dir::Inverse);
        count_fft(c, n2);
    }
    const CMatrix T = fft::rows(W, Dir::Inverse);
    count_fft(c, N, n2);

    CMatrix blocks(cfg_.block_len(), N);
    for (int r = 0; r < blocks.rows(); ++r)
        blocks.row(r) = T.row(wrap(r - S, n2));
    return frame_blocks({blocks, -S}, cfg_);
}

DelayDopplerGrid FastModem::demodulate_oddm(const SampleStream& frame, CmCounter* c) const
{
    const int M = cfg_.M, N = cfg_.N;
    const int n2 = 2 * Mp_;
    const int S = cfg_.effective_Q() * cfg_.L_us;
    const DelayTimeGrid Y = receive_blocks(frame, cfg_);

    CMatrix buf = CMatrix::Zero(n2, N);
    for (int r = 0; r < Y.block_len(); ++r)
        buf.row(wrap(r - S, n2)) = Y.values.row(r);
    const CMatrix Zt = fft::rows(buf, Dir::Forward);
    count_fft(c, N, n2);

    CMatrix out(M, N);
    CVector spec(n2), acc(2 * M), z(2 * M);
    for (int k = 0; k < N; ++k) {
        fft::unitary(Zt.col(k).data(), spec.data(), n2, Dir::Forward);
        count_fft(c, n2);
        const CVector& H = lin_[k];
        acc.setZero();
        for (int m = 0; m < n2; ++m)
            acc[m % (2 * M)] += std::conj(H[m]) * spec[m];
        count_halves(c, 2 * rolloff_bins_);
        fft::unitary(acc.data(), z.data(), 2 * M, Dir::Inverse);
        count_fft(c, 2 * M);
        out.col(k) = z.head(M);
    }
    return {out};
}

ModemOutput modulate_cps_fast(const DelayDopplerGrid& grid, const ModemConfig& cfg, CmCounter* counter)
{
    if (cfg.technique != Technique::Cps)
        throw ConfigError("modulate_cps_fast needs a C-PS configuration");
    return FastModem(cfg).modulate(grid, counter);
}

ModemOutput modulate_lps_fast(const DelayDopplerGrid& grid, const ModemConfig& cfg, CmCounter* counter)
{
    if (cfg.technique != Technique::Lps)
        throw ConfigError("modulate_lps_fast needs an L-PS configuration");
    return FastModem(cfg).modulate(grid, counter);
}

ModemOutput modulate_oddm_fast(const DelayDopplerGrid& grid, const ModemConfig& cfg, CmCounter* counter)
{
    if (cfg.technique != Technique::Oddm)
        throw ConfigError("modulate_oddm_fast needs an ODDM configuration");
    return FastModem(cfg).modulate(grid, counter);
}

DelayDopplerGrid demodulate_cps_fast(const SampleStream& frame, const ModemConfig& cfg, CmCounter* counter)
{
    if (cfg.technique != Technique::Cps)
        throw ConfigError("demodulate_cps_fast needs a C-PS configuration");
    return FastModem(cfg).demodulate(frame, counter);
}

DelayDopplerGrid demodulate_lps_fast(const SampleStream& frame, const ModemConfig& cfg, CmCounter* counter)
{
    if (cfg.technique != Technique::Lps)
        throw ConfigError("demodulate_lps_fast needs an L-PS configuration");
    return FastModem(cfg).demodulate(frame, counter);
}

DelayDopplerGrid demodulate_oddm_fast(const SampleStream& frame, const ModemConfig& cfg, CmCounter* counter)
{
    if (cfg.technique != Technique::Oddm)
        throw ConfigError("demodulate_oddm_fast needs an ODDM configuration");
    return FastModem(cfg).demodulate(frame, counter);
}

} // namespace ddps
