#pragma once

#include <filesystem>
#include <iosfwd>

#include "config.hpp"

namespace ddps::tool {

// Each run writes its CSV files under cfg.out and a short report to `log`.
// The return value is the process exit status.
int run_psd(const ExperimentConfig& cfg, std::ostream& log);
int run_ber(const ExperimentConfig& cfg, std::ostream& log);
int run_papr(const ExperimentConfig& cfg, std::ostream& log);
int run_complexity(const ExperimentConfig& cfg, std::ostream& log);
int run_verify(const ExperimentConfig& cfg, std::ostream& log);

int run_experiment(const ExperimentConfig& cfg, std::ostream& log);

} // namespace ddps::tool
