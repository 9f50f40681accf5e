#include "ddps/transforms.hpp"

#include "ddps/fft.hpp"

namespace ddps {

using fft::Dir;

TimeFrequencyGrid isfft(const DelayDopplerGrid& grid)
{
    // DFT along delay, IDFT along Doppler
    return {fft::columns(fft::rows(grid.symbols, Dir::Inverse), Dir::Forward)};
}

DelayDopplerGrid sfft(const TimeFrequencyGrid& grid)
{
    return {fft::columns(fft::rows(grid.values, Dir::Forward), Dir::Inverse)};
}

DelayTimeGrid ofdm_modulate(const TimeFrequencyGrid& tf)
{
    return {fft::columns(tf.values, Dir::Inverse), 0};
}

TimeFrequencyGrid ofdm_demodulate(const DelayTimeGrid& dt)
{
    return {fft::columns(dt.values, Dir::Forward)};
}

DelayDopplerGrid expand_delay(const DelayDopplerGrid& grid, int L_us)
{
    if (L_us < 1)
        throw DimensionError("expand_delay: L_us must be >= 1");
    CMatrix out = CMatrix::Zero(grid.symbols.rows() * L_us, grid.symbols.cols());
    for (Eigen::Index l = 0; l < grid.symbols.rows(); ++l)
        out.row(l * L_us) = grid.symbols.row(l);
    return {out};
}

SampleStream serialize(const DelayTimeGrid& dt, int stride)
{
    const int gamma = dt.block_len();
    const int N = dt.blocks();
    if (gamma < stride)
        throw DimensionError("serialize: block length shorter than the stride");
    const std::int64_t len = static_cast<std::int64_t>(N - 1) * stride + gamma;
    SampleStream s;
    s.samples = CVector::Zero(len);
    s.start_index = dt.delay_origin;
    for (int n = 0; n < N; ++n)
        s.samples.segment(static_cast<std::int64_t>(n) * stride, gamma) += dt.values.col(n);
    return s;
}

DelayTimeGrid deserialize(const SampleStream& stream, int block_len, int stride, int blocks,
                          int delay_origin, EdgePolicy edge)
{
    const std::int64_t period = static_cast<std::int64_t>(blocks) * stride;
    if (edge == EdgePolicy::Cyclic) {
        if (stream.start_index != 0 || stream.size() != period)
            throw DimensionError("deserialize: cyclic read needs exactly one frame starting at 0");
    } else if (stream.start_index > 0 || stream.end_index() < period) {
        throw DimensionError("deserialize: stream does not cover the frame");
    }

    DelayTimeGrid dt;
    dt.values = CMatrix::Zero(block_len, blocks);
    dt.delay_origin = delay_origin;
    for (int n = 0; n < blocks; ++n) {
        for (int r = 0; r < block_len; ++r) {
            std::int64_t k = static_cast<std::int64_t>(n) * stride + delay_origin + r;
            if (edge == EdgePolicy::Cyclic) {
                k %= period;
                if (k < 0)
                    k += period;
                dt.values(r, n) = stream.samples[k];
            } else {
                const std::int64_t i = k - stream.start_index;
                if (i >= 0 && i < stream.size())
                    dt.values(r, n) = stream.samples[i];
            }
        }
    }
    return dt;
}

SampleStream fold_cyclic(const SampleStream& stream, std::int64_t period)
{
    if (period < 1)
        throw DimensionError("fold_cyclic: period must be positive");
    SampleStream out;
    out.samples = CVector::Zero(period);
    out.start_index = 0;
    out.rate_factor = stream.rate_factor;
    for (std::int64_t i = 0; i < stream.size(); ++i) {
        std::int64_t k = (stream.start_index + i) % period;
        if (k < 0)
            k += period;
        out.samples[k] += stream.samples[i];
    }
    return out;
}

SampleStream cp_add(const SampleStream& stream, int Lcp)
{
    if (Lcp < 0 || Lcp > stream.size())
        throw DimensionError("cp_add: CP length out of range");
    SampleStream out;
    out.samples.resize(stream.size() + Lcp);
    out.samples.head(Lcp) = stream.samples.tail(Lcp);
    out.samples.tail(stream.size()) = stream.samples;
    out.start_index = stream.start_index - Lcp;
    out.rate_factor = stream.rate_factor;
    return out;
}

SampleStream cp_remove(const SampleStream& stream, int Lcp)
{
    if (Lcp < 0 || Lcp > stream.size())
        throw DimensionError("cp_remove: CP length out of range");
    SampleStream out;
    out.samples = stream.samples.tail(stream.size() - Lcp);
    out.start_index = stream.start_index + Lcp;
    out.rate_factor = stream.rate_factor;
    return out;
}

} // namespace ddps
