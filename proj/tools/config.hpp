#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ddps/channel.hpp"
#include "ddps/types.hpp"

namespace ddps::tool {

enum class RunKind { Psd, Ber, Papr, Complexity, Verify };

std::string to_string(RunKind r);

struct ExperimentConfig {
    ModemConfig modem;
    bool fast = false; // use the FFT structures where a run synthesizes frames
    ChannelParams channel;
    RunKind run = RunKind::Verify;

    std::vector<double> ebn0_db = {0, 4, 8, 12, 16, 20, 24, 28};
    std::vector<double> v_kmh;
    std::vector<double> alpha;
    std::vector<int> Q;
    std::vector<std::string> sweep_axes; // axes named in the config file

    int order = 4;
    std::int64_t trials = 200;
    std::int64_t min_errors = 200;
    int psd_seg_len = 4096;
    double oob_offset = 0.25; // fraction of the occupied band
    std::uint64_t seed = 1;
    std::string out = "results";
    int threads = 1;

    nlohmann::json resolved; // full config after defaults, echoed into outputs
};

// An empty string parses as an empty object. Errors carry the offending
// field or the parser's line and column.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Checks the invariants and refreshes `resolved`.
void validate(ExperimentConfig& cfg);

} // namespace ddps::tool
