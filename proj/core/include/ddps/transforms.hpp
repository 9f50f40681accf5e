#pragma once

#include "ddps/types.hpp"

namespace ddps {

TimeFrequencyGrid isfft(const DelayDopplerGrid& grid);
DelayDopplerGrid sfft(const TimeFrequencyGrid& grid);

// Per-column unitary IDFT / DFT of length M_d.
DelayTimeGrid ofdm_modulate(const TimeFrequencyGrid& tf);
TimeFrequencyGrid ofdm_demodulate(const DelayTimeGrid& dt);

DelayDopplerGrid expand_delay(const DelayDopplerGrid& grid, int L_us);

// Overlap-add of the blocks at the given stride. The result starts at the
// first block's delay origin and spans (N-1)*stride + block_len samples.
SampleStream serialize(const DelayTimeGrid& dt, int stride);

enum class EdgePolicy {
    Zero,   // reads outside the stream return zero
    Cyclic, // the stream is one period of a periodic sequence starting at 0
};

// Inverse of serialize: block n collects [n*stride + origin, ... + block_len).
DelayTimeGrid deserialize(const SampleStream& stream, int block_len, int stride, int blocks,
                          int delay_origin, EdgePolicy edge = EdgePolicy::Zero);

// Wraps every sample onto index (k mod period), giving a stream that starts at 0.
SampleStream fold_cyclic(const SampleStream& stream, std::int64_t period);

SampleStream cp_add(const SampleStream& stream, int Lcp);
SampleStream cp_remove(const SampleStream& stream, int Lcp);

} // namespace ddps
