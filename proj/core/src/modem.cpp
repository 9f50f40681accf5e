#include "ddps/modem.hpp"

#include <vector>

#include "ddps/fft.hpp"
#include "ddps/transforms.hpp"

namespace ddps {

using fft::Dir;

namespace {

void check_grid(const DelayDopplerGrid& grid, const ModemConfig& cfg, Technique expected)
{
    cfg.validate();
    if (cfg.technique != expected)
        throw ConfigError("modem called with a configuration for " + to_string(cfg.technique));
    if (grid.rows() != cfg.shaped_rows() || grid.cols() != cfg.N)
        throw DimensionError("grid is " + std::to_string(grid.rows()) + "x" +
                             std::to_string(grid.cols()) + ", configuration expects " +
                             std::to_string(cfg.shaped_rows()) + "x" + std::to_string(cfg.N));
}

int wrap(int i, int n) { return ((i % n) + n) % n; }

// Circular shaping of each Doppler column, then IDFT across Doppler.
CMatrix cps_shape(const CMatrix& D, const PulsePrototype& p)
{
    const int Md = static_cast<int>(D.rows());
    const int L = p.L_us;
    const int Mp = Md * L;
    CMatrix Y = CMatrix::Zero(Mp, D.cols());
    for (Eigen::Index k = 0; k < D.cols(); ++k)
        for (int l = 0; l < Md; ++l) {
            const cd d = D(l, k);
            if (d == cd{})
                continue;
            // rows [s, Mp) see taps [0, Mp - s), rows [0, s) the wrapped tail
            const int s = l * L;
            auto y = Y.col(k);
            y.segment(s, Mp - s).real() += d.real() * p.periodic.head(Mp - s);
            y.segment(s, Mp - s).imag() += d.imag() * p.periodic.head(Mp - s);
            y.head(s).real() += d.real() * p.periodic.tail(s);
            y.head(s).imag() += d.imag() * p.periodic.tail(s);
        }
    return fft::rows(Y, Dir::Inverse);
}

CMatrix cps_matched(const CMatrix& Y, const PulsePrototype& p)
{
    const int Mp = static_cast<int>(Y.rows());
    const int L = p.L_us;
    const int Md = Mp / L;
    CMatrix out = CMatrix::Zero(Md, Y.cols());
    for (Eigen::Index c = 0; c < Y.cols(); ++c)
        for (int l = 0; l < Md; ++l) {
            const int s = l * L;
            const auto y = Y.col(c);
            out(l, c) = cd(y.segment(s, Mp - s).real().dot(p.periodic.head(Mp - s)) + y.head(s).real().dot(p.periodic.tail(s)),
                           y.segment(s, Mp - s).imag().dot(p.periodic.head(Mp - s)) + y.head(s).imag().dot(p.periodic.tail(s)));
        }
    return out;
}

CMatrix lps_matched(const CMatrix& Y, const PulsePrototype& p, int Md)
{
    const int L = p.L_us;
    const int S = p.span;
    CMatrix out = CMatrix::Zero(Md, Y.cols());
    for (Eigen::Index c = 0; c < Y.cols(); ++c)
        for (int l = 0; l < Md; ++l) {
            cd acc{};
            for (int j = -S; j <= S; ++j)
                acc += Y(l * L + j + S, c) * p.time_taps[j + S];
            out(l, c) = acc;
        }
    return out;
}

PulsePrototype shaping_pulse(const ModemConfig& cfg, int rows)
{
    if (cfg.technique == Technique::Cps)
        return make_pulse(cfg.alpha, rows, cfg.L_us);
    return make_pulse(cfg.alpha, rows, cfg.L_us, cfg.effective_Q());
}

void apply_window(CMatrix& blocks, const WindowProfile& w)
{
    for (Eigen::Index c = 0; c < blocks.cols(); ++c)
        blocks.col(c).array() *= w.taps.array().cast<cd>();
}

} // namespace

ModemOutput frame_blocks(DelayTimeGrid per_block, const ModemConfig& cfg)
{
    ModemOutput out;
    out.config = cfg;
    out.stream = serialize(per_block, cfg.block_stride());
    out.stream.rate_factor = cfg.L_us;
    out.frame = cp_add(fold_cyclic(out.stream, cfg.core_len()), cfg.Lcp_us());
    out.per_block = std::move(per_block);
    return out;
}

DelayTimeGrid receive_blocks(const SampleStream& frame, const ModemConfig& cfg)
{
    if (frame.size() != cfg.frame_len())
        throw DimensionError("received frame has " + std::to_string(frame.size()) +
                             " samples, expected " + std::to_string(cfg.frame_len()));
    SampleStream core = cp_remove(frame, cfg.Lcp_us());
    core.start_index = 0;
    return deserialize(core, cfg.block_len(), cfg.block_stride(), cfg.N, cfg.block_origin(),
                       EdgePolicy::Cyclic);
}

ModemOutput modulate_cps(const DelayDopplerGrid& grid, const ModemConfig& cfg)
{
    check_grid(grid, cfg, Technique::Cps);
    const PulsePrototype p = shaping_pulse(cfg, grid.rows());
    return frame_blocks({cps_shape(grid.symbols, p), 0}, cfg);
}

ModemOutput modulate_lps(const DelayDopplerGrid& grid, const ModemConfig& cfg)
{
    check_grid(grid, cfg, Technique::Lps);
    const int Md = grid.rows();
    const int L = cfg.L_us;
    const PulsePrototype p = shaping_pulse(cfg, Md);
    const int S = p.span;

    const CMatrix X = fft::rows(grid.symbols, Dir::Inverse);
    CMatrix blocks = CMatrix::Zero(cfg.block_len(), cfg.N);
    for (int n = 0; n < cfg.N; ++n)
        for (int l = 0; l < Md; ++l)
            for (int j = -S; j <= S; ++j)
                blocks(l * L + j + S, n) += X(l, n) * p.time_taps[j + S];
    return frame_blocks({blocks, -S}, cfg);
}

ModemOutput modulate_oddm(const DelayDopplerGrid& grid, const ModemConfig& cfg)
{
    check_grid(grid, cfg, Technique::Oddm);
    const int Md = grid.rows();
    const int L = cfg.L_us;
    const PulsePrototype p = shaping_pulse(cfg, Md);
    const int S = p.span;

    CMatrix Y = CMatrix::Zero(cfg.block_len(), cfg.N);
    for (int k = 0; k < cfg.N; ++k) {
        const ModulatedPulse pk = modulated_pulse(p, k, cfg.N);
        for (int l = 0; l < Md; ++l)
            for (int j = -S; j <= S; ++j)
                Y(l * L + j + S, k) += grid.symbols(l, k) * pk.taps[j + S];
    }
    return frame_blocks({fft::rows(Y, Dir::Inverse), -S}, cfg);
}

DelayDopplerGrid demodulate_cps(const SampleStream& frame, const ModemConfig& cfg,
                                FilterOrder order)
{
    cfg.validate();
    if (cfg.technique != Technique::Cps)
        throw ConfigError("demodulate_cps called with a " + to_string(cfg.technique) + " configuration");
    DelayTimeGrid blocks = receive_blocks(frame, cfg);
    int rows = cfg.shaped_rows();
    if (cfg.guard.active() && cfg.guard.mode == GuardMode::CeAfterPs) {
        // discard the cyclic extensions before demodulation
        blocks.values = blocks.values.middleRows(cfg.guard.head() * cfg.L_us, cfg.Mp()).eval();
        rows = cfg.M;
    }
    const PulsePrototype p = shaping_pulse(cfg, rows);
    if (order == FilterOrder::TransformFirst)
        return {cps_matched(fft::rows(blocks.values, Dir::Forward), p)};
    return {fft::rows(cps_matched(blocks.values, p), Dir::Forward)};
}

DelayDopplerGrid demodulate_lps(const SampleStream& frame, const ModemConfig& cfg, FilterOrder order)
{
    cfg.validate();
    if (cfg.technique != Technique::Lps)
        throw ConfigError("demodulate_lps called with a " + to_string(cfg.technique) + " configuration");
    const DelayTimeGrid blocks = receive_blocks(frame, cfg);
    const int Md = cfg.shaped_rows();
    const PulsePrototype p = shaping_pulse(cfg, Md);
    if (order == FilterOrder::TransformFirst)
        return {lps_matched(fft::rows(blocks.values, Dir::Forward), p, Md)};
    return {fft::rows(lps_matched(blocks.values, p, Md), Dir::Forward)};
}

DelayDopplerGrid demodulate_oddm(const SampleStream& frame, const ModemConfig& cfg)
{
    cfg.validate();
    if (cfg.technique != Technique::Oddm)
        throw ConfigError("demodulate_oddm called with a " + to_string(cfg.technique) + " configuration");
    const DelayTimeGrid blocks = receive_blocks(frame, cfg);
    const int Md = cfg.shaped_rows();
    const int L = cfg.L_us;
    const PulsePrototype p = shaping_pulse(cfg, Md);
    const int S = p.span;

    // matched filtering has to happen per Doppler bin, so transform first
    const CMatrix Z = fft::rows(blocks.values, Dir::Forward);
    CMatrix out = CMatrix::Zero(Md, cfg.N);
    for (int k = 0; k < cfg.N; ++k) {
        const ModulatedPulse pk = modulated_pulse(p, k, cfg.N);
        for (int l = 0; l < Md; ++l) {
            cd acc{};
            for (int j = -S; j <= S; ++j)
                acc += Z(l * L + j + S, k) * std::conj(pk.taps[j + S]);
            out(l, k) = acc;
        }
    }
    return {out};
}

ModemOutput apply_window_ce(const DelayDopplerGrid& data, const ModemConfig& cfg)
{
    cfg.validate();
    if (!cfg.guard.cyclic_extension())
        throw ConfigError("apply_window_ce needs a cyclic-extension guard mode");
    if (data.rows() != cfg.M || data.cols() != cfg.N)
        throw DimensionError("apply_window_ce expects the M x N data grid");
    if (!cfg.guard.active())
        return modulate_cps(data, cfg);

    const WindowProfile w = rc_window(cfg.guard.beta, cfg.M, cfg.L_us);
    CMatrix blocks;
    if (cfg.guard.mode == GuardMode::CeBeforePs) {
        const DelayDopplerGrid ext = cyclic_extend(data, cfg.guard.length);
        blocks = cps_shape(ext.symbols, shaping_pulse(cfg, ext.rows()));
    } else {
        const CMatrix X = cps_shape(data.symbols, shaping_pulse(cfg, cfg.M));
        const int Mp = cfg.Mp();
        const int head = cfg.guard.head() * cfg.L_us;
        blocks.resize(cfg.block_stride(), cfg.N);
        for (int r = 0; r < blocks.rows(); ++r)
            blocks.row(r) = X.row(wrap(r - head, Mp));
    }
    apply_window(blocks, w);
    return frame_blocks({blocks, 0}, cfg);
}

DelayDopplerGrid insert_zero_guards(const DelayDopplerGrid& grid, int L_zg)
{
    if (L_zg < 0)
        throw ConfigError("zero-guard length must be non-negative");
    const int head = (L_zg + 1) / 2;
    CMatrix out = CMatrix::Zero(grid.rows() + L_zg, grid.cols());
    out.middleRows(head, grid.rows()) = grid.symbols;
    return {out};
}

DelayDopplerGrid strip_zero_guards(const DelayDopplerGrid& grid, int L_zg)
{
    if (L_zg < 0 || L_zg > grid.rows())
        throw ConfigError("zero-guard length out of range");
    const int head = (L_zg + 1) / 2;
    return {grid.symbols.middleRows(head, grid.rows() - L_zg)};
}

DelayDopplerGrid cyclic_extend(const DelayDopplerGrid& grid, int L_ce)
{
    if (L_ce < 0)
        throw ConfigError("cyclic-extension length must be non-negative");
    const int M = grid.rows();
    const int head = (L_ce + 1) / 2;
    CMatrix out(M + L_ce, grid.cols());
    for (int r = 0; r < out.rows(); ++r)
        out.row(r) = grid.symbols.row(wrap(r - head, M));
    return {out};
}

DelayDopplerGrid extract_data(const DelayDopplerGrid& observation, const ModemConfig& cfg)
{
    if (!cfg.guard.active() || cfg.guard.mode == GuardMode::CeAfterPs)
        return observation;
    return {observation.symbols.middleRows(cfg.guard.head(), cfg.M)};
}

ModemOutput modulate_unified(const DelayDopplerGrid& data, const ModemConfig& cfg)
{
    cfg.validate();
    if (cfg.guard.cyclic_extension() && cfg.guard.active())
        return apply_window_ce(data, cfg);
    if (data.rows() != cfg.M || data.cols() != cfg.N)
        throw DimensionError("modulate_unified expects the M x N data grid");
    const DelayDopplerGrid g = (cfg.guard.mode == GuardMode::ZeroGuard && cfg.guard.active())
                                   ? insert_zero_guards(data, cfg.guard.length)
                                   : data;
    switch (cfg.technique) {
    case Technique::Cps: return modulate_cps(g, cfg);
    case Technique::Lps: return modulate_lps(g, cfg);
    case Technique::Oddm: return modulate_oddm(g, cfg);
    }
    throw ConfigError("unknown technique");
}

DelayDopplerGrid demodulate_unified(const SampleStream& frame, const ModemConfig& cfg)
{
    switch (cfg.technique) {
    case Technique::Cps: return demodulate_cps(frame, cfg);
    case Technique::Lps: return demodulate_lps(frame, cfg);
    case Technique::Oddm: return demodulate_oddm(frame, cfg);
    }
    throw ConfigError("unknown technique");
}

} // namespace ddps
