#include "ddps/types.hpp"

#include <cmath>

namespace ddps {

std::string to_string(Technique t)
{
    switch (t) {
    case Technique::Cps: return "cps";
    case Technique::Lps: return "lps";
    case Technique::Oddm: return "oddm";
    }
    return "?";
}

std::string to_string(GuardMode g)
{
    switch (g) {
    case GuardMode::None: return "none";
    case GuardMode::CeBeforePs: return "ce_before_ps";
    case GuardMode::CeAfterPs: return "ce_after_ps";
    case GuardMode::ZeroGuard: return "zero_guard";
    }
    return "?";
}

Technique parse_technique(const std::string& s)
{
    if (s == "cps" || s == "CPS" || s == "c-ps")
        return Technique::Cps;
    if (s == "lps" || s == "LPS" || s == "l-ps")
        return Technique::Lps;
    if (s == "oddm" || s == "ODDM")
        return Technique::Oddm;
    throw ConfigError("unknown technique '" + s + "'");
}

GuardMode parse_guard_mode(const std::string& s)
{
    if (s == "none")
        return GuardMode::None;
    if (s == "ce_before_ps")
        return GuardMode::CeBeforePs;
    if (s == "ce_after_ps")
        return GuardMode::CeAfterPs;
    if (s == "zero_guard" || s == "zg")
        return GuardMode::ZeroGuard;
    throw ConfigError("unknown guard mode '" + s + "'");
}

bool is_power_of_two(std::int64_t v) { return v > 0 && (v & (v - 1)) == 0; }

int ModemConfig::shaped_rows() const
{
    if (guard.active() && guard.mode != GuardMode::CeAfterPs)
        return M + guard.length;
    return M;
}

int ModemConfig::block_stride() const
{
    return guard.active() ? (M + guard.length) * L_us : M * L_us;
}

int ModemConfig::block_len() const
{
    if (linear())
        return shaped_rows() * L_us + 2 * effective_Q() * L_us;
    return block_stride();
}

int ModemConfig::block_origin() const { return linear() ? -effective_Q() * L_us : 0; }

int ModemConfig::effective_Q() const { return Q.value_or(shaped_rows() / 2); }

bool ModemConfig::untruncated() const { return 2 * effective_Q() == shaped_rows(); }

void ModemConfig::validate() const
{
    if (M < 1 || N < 1 || L_us < 1)
        throw ConfigError("M, N and L_us must be positive");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw ConfigError("alpha must lie in [0, 1]");
    if (L_us * M < (1.0 + alpha) * M - 1e-9)
        throw ConfigError("L_us must be at least 1 + alpha");
    if (L_cp < 0)
        throw ConfigError("L_cp must be non-negative");
    if (!(delta_tau > 0.0))
        throw ConfigError("delta_tau must be positive");
    if (guard.length < 0)
        throw ConfigError("guard length must be non-negative");
    if (guard.cyclic_extension() && guard.length > 0) {
        if (technique != Technique::Cps)
            throw ConfigError("cyclic-extension windowing applies to C-PS only");
        if (!(guard.beta > 0.0 && guard.beta <= 1.0))
            throw ConfigError("window roll-off beta must lie in (0, 1]");
        if (static_cast<int>(std::floor(guard.beta * M + 1e-9)) != guard.length)
            throw ConfigError("CE length must equal floor(beta * M)");
    }
    if (Q) {
        if (*Q < 1 || *Q > shaped_rows() / 2)
            throw ConfigError("Q must lie in 1..M/2");
    }
    if (Lcp_us() > core_len())
        throw ConfigError("cyclic prefix longer than the frame");
}

} // namespace ddps
