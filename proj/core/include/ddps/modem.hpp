#pragma once

#include "ddps/pulse.hpp"
#include "ddps/types.hpp"

// Reference transmit/receive chains evaluated straight from the defining sums.
//
// Framing: the overlap-added stream of one frame is folded onto N * stride
// samples (ramp-up wraps to the tail, ramp-down to the head), so the frame is
// one period of a cyclic sequence. The CP copies the last L'_cp samples of
// that core and receivers read their block windows cyclically.
namespace ddps {

struct ModemOutput {
    DelayTimeGrid per_block; // after shaping and windowing, before serialization
    SampleStream stream;     // serialize(per_block); ramps kept at their own indices
    SampleStream frame;      // CP followed by the folded core
    ModemConfig config;
};

enum class FilterOrder { TransformFirst, FilterFirst };

ModemOutput modulate_cps(const DelayDopplerGrid& grid, const ModemConfig& cfg);
ModemOutput modulate_lps(const DelayDopplerGrid& grid, const ModemConfig& cfg);
ModemOutput modulate_oddm(const DelayDopplerGrid& grid, const ModemConfig& cfg);

// The C-PS receiver also covers both CE modes.
DelayDopplerGrid demodulate_cps(const SampleStream& frame, const ModemConfig& cfg,
                                FilterOrder order = FilterOrder::TransformFirst);
DelayDopplerGrid demodulate_lps(const SampleStream& frame, const ModemConfig& cfg,
                                FilterOrder order = FilterOrder::TransformFirst);
DelayDopplerGrid demodulate_oddm(const SampleStream& frame, const ModemConfig& cfg);

// Takes the M x N data grid and applies the configured guard handling.
ModemOutput modulate_unified(const DelayDopplerGrid& data, const ModemConfig& cfg);
// Returns the full observation grid (shaped_rows() x N); see extract_data.
DelayDopplerGrid demodulate_unified(const SampleStream& frame, const ModemConfig& cfg);

ModemOutput apply_window_ce(const DelayDopplerGrid& data, const ModemConfig& cfg);

DelayDopplerGrid insert_zero_guards(const DelayDopplerGrid& grid, int L_zg);
DelayDopplerGrid strip_zero_guards(const DelayDopplerGrid& grid, int L_zg);
// Rows -ceil(L/2) .. M + floor(L/2) - 1 of the delay-periodic grid.
DelayDopplerGrid cyclic_extend(const DelayDopplerGrid& grid, int L_ce);

// Observation grid -> the M x N data positions.
DelayDopplerGrid extract_data(const DelayDopplerGrid& observation, const ModemConfig& cfg);

// Shared framing used by the direct and fast modems.
ModemOutput frame_blocks(DelayTimeGrid per_block, const ModemConfig& cfg);
DelayTimeGrid receive_blocks(const SampleStream& frame, const ModemConfig& cfg);

} // namespace ddps
