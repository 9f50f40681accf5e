#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "ddps/fast.hpp"

namespace ddps::tool {

using nlohmann::json;

namespace {

// Reads fields of one object and remembers which keys were consumed, so that
// typos surface as errors instead of silently falling back to defaults.
class Fields {
public:
    Fields(const json& j, std::string where) : j_(j), where_(std::move(where))
    {
        if (!j_.is_object())
            throw ConfigError(label() + ": expected an object");
    }

    template <class T> void get(const char* key, T& out)
    {
        seen_.insert(key);
        if (!j_.contains(key))
            return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(path(key) + ": " + e.what());
        }
    }

    bool has(const char* key) const { return j_.contains(key); }
    const json& at(const char* key)
    {
        seen_.insert(key);
        return j_.at(key);
    }
    std::string path(const char* key) const { return where_.empty() ? key : where_ + "." + key; }

    void finish() const
    {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k))
                throw ConfigError(path(k.c_str()) + ": unknown field");
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;

    std::string label() const { return where_.empty() ? "config" : where_; }
};

template <class F> auto with_field(const std::string& field, F f)
{
    try {
        return f();
    } catch (const ConfigError& e) {
        throw ConfigError(field + ": " + e.what());
    }
}

RunKind parse_run(const std::string& s)
{
    if (s == "psd") return RunKind::Psd;
    if (s == "ber") return RunKind::Ber;
    if (s == "papr") return RunKind::Papr;
    if (s == "complexity") return RunKind::Complexity;
    if (s == "verify") return RunKind::Verify;
    throw ConfigError("unknown run '" + s + "' (psd, ber, papr, complexity, verify)");
}

DopplerModel parse_doppler(const std::string& s)
{
    if (s == "single" || s == "single_ray") return DopplerModel::SingleRay;
    if (s == "jakes") return DopplerModel::Jakes;
    throw ConfigError("unknown Doppler model '" + s + "' (single, jakes)");
}

json to_json(const ExperimentConfig& c)
{
    const ModemConfig& m = c.modem;
    json guard = {{"mode", to_string(m.guard.mode)}, {"length", m.guard.length}};
    if (m.guard.cyclic_extension())
        guard["beta"] = m.guard.beta;
    json taps = json::array();
    for (const TapSpec& t : c.channel.custom_taps)
        taps.push_back({{"delay_s", t.delay_s}, {"power_db", t.power_db}});
    json channel = {{"profile", to_string(c.channel.profile)},
                    {"v_kmh", c.channel.v_kmh},
                    {"fc_hz", c.channel.fc_hz},
                    {"bw_hz", c.channel.bw_hz},
                    {"doppler_model", c.channel.doppler_model == DopplerModel::Jakes ? "jakes" : "single"},
                    {"jakes_rays", c.channel.jakes_rays}};
    if (c.channel.profile == ChannelProfile::Custom)
        channel["taps"] = taps;
    json sweep = json::object();
    if (c.run == RunKind::Ber) {
        sweep["ebn0_db"] = c.ebn0_db;
        if (!c.v_kmh.empty())
            sweep["v_kmh"] = c.v_kmh;
    }
    if (!c.alpha.empty())
        sweep["alpha"] = c.alpha;
    if (!c.Q.empty())
        sweep["Q"] = c.Q;
    return {{"modem",
             {{"M", m.M},
              {"N", m.N},
              {"L_us", m.L_us},
              {"alpha", m.alpha},
              {"Q", m.Q ? json(*m.Q) : json(nullptr)},
              {"L_cp", m.L_cp},
              {"technique", to_string(m.technique)},
              {"impl", c.fast ? "fast" : "direct"},
              {"guard", guard}}},
            {"channel", channel},
            {"run", to_string(c.run)},
            {"sweep", sweep},
            {"order", c.order},
            {"trials", c.trials},
            {"min_errors", c.min_errors},
            {"psd", {{"seg_len", c.psd_seg_len}, {"oob_offset", c.oob_offset}}},
            {"seed", c.seed},
            {"out", c.out},
            {"threads", c.threads}};
}

} // namespace

std::string to_string(RunKind r)
{
    switch (r) {
    case RunKind::Psd: return "psd";
    case RunKind::Ber: return "ber";
    case RunKind::Papr: return "papr";
    case RunKind::Complexity: return "complexity";
    case RunKind::Verify: return "verify";
    }
    return "?";
}

ExperimentConfig parse_config(const std::string& text)
{
    json root = json::object();
    const bool blank = std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); });
    if (!blank) {
        try {
            root = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("parse error: ") + e.what());
        }
    }

    ExperimentConfig c;
    Fields top(root, "");

    if (top.has("modem")) {
        Fields m(top.at("modem"), "modem");
        m.get("M", c.modem.M);
        m.get("N", c.modem.N);
        m.get("L_us", c.modem.L_us);
        m.get("alpha", c.modem.alpha);
        if (m.has("Q")) {
            const json& q = m.at("Q");
            if (q.is_null())
                c.modem.Q.reset();
            else if (q.is_number_integer())
                c.modem.Q = q.get<int>();
            else
                throw ConfigError("modem.Q: expected an integer or null");
        }
        m.get("L_cp", c.modem.L_cp);
        std::string technique = to_string(c.modem.technique), impl = "direct";
        m.get("technique", technique);
        m.get("impl", impl);
        c.modem.technique = with_field("modem.technique", [&] { return parse_technique(technique); });
        if (impl != "direct" && impl != "fast")
            throw ConfigError("modem.impl: expected 'direct' or 'fast'");
        c.fast = impl == "fast";
        if (m.has("guard")) {
            Fields g(m.at("guard"), "modem.guard");
            std::string mode = "none";
            int length = 0;
            double beta = -1.0;
            g.get("mode", mode);
            g.get("length", length);
            g.get("beta", beta);
            g.finish();
            c.modem.guard.mode = with_field("modem.guard.mode", [&] { return parse_guard_mode(mode); });
            c.modem.guard.length = length;
            if (c.modem.guard.cyclic_extension())
                c.modem.guard.beta = beta >= 0.0 ? beta : static_cast<double>(length) / c.modem.M;
            else if (beta >= 0.0)
                throw ConfigError("modem.guard.beta: only cyclic-extension modes take a window roll-off");
        }
        m.finish();
    }
    c.modem.delta_tau = 1.0 / c.channel.bw_hz;

    if (top.has("channel")) {
        Fields ch(top.at("channel"), "channel");
        std::string profile = to_string(c.channel.profile), doppler = "single";
        ch.get("profile", profile);
        ch.get("v_kmh", c.channel.v_kmh);
        ch.get("fc_hz", c.channel.fc_hz);
        ch.get("bw_hz", c.channel.bw_hz);
        ch.get("doppler_model", doppler);
        ch.get("jakes_rays", c.channel.jakes_rays);
        c.channel.profile = with_field("channel.profile", [&] { return parse_channel_profile(profile); });
        c.channel.doppler_model = with_field("channel.doppler_model", [&] { return parse_doppler(doppler); });
        if (ch.has("taps")) {
            const json& taps = ch.at("taps");
            if (!taps.is_array())
                throw ConfigError("channel.taps: expected an array");
            for (std::size_t i = 0; i < taps.size(); ++i) {
                Fields t(taps[i], "channel.taps[" + std::to_string(i) + "]");
                TapSpec spec;
                t.get("delay_s", spec.delay_s);
                t.get("power_db", spec.power_db);
                t.finish();
                c.channel.custom_taps.push_back(spec);
            }
        }
        ch.finish();
    }

    if (top.has("run")) {
        std::string run;
        top.get("run", run);
        c.run = with_field("run", [&] { return parse_run(run); });
    }

    if (top.has("sweep")) {
        Fields s(top.at("sweep"), "sweep");
        for (const char* axis : {"ebn0_db", "v_kmh", "alpha", "Q"})
            if (s.has(axis))
                c.sweep_axes.push_back(axis);
        s.get("ebn0_db", c.ebn0_db);
        s.get("v_kmh", c.v_kmh);
        s.get("alpha", c.alpha);
        s.get("Q", c.Q);
        s.finish();
    }

    top.get("order", c.order);
    top.get("trials", c.trials);
    top.get("min_errors", c.min_errors);
    if (top.has("psd")) {
        Fields p(top.at("psd"), "psd");
        p.get("seg_len", c.psd_seg_len);
        p.get("oob_offset", c.oob_offset);
        p.finish();
    }
    top.get("seed", c.seed);
    top.get("out", c.out);
    top.get("threads", c.threads);
    top.finish();

    validate(c);
    return c;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

void validate(ExperimentConfig& c)
{
    auto allowed = [&](const std::string& axis) {
        switch (c.run) {
        case RunKind::Ber: return axis != "Q";
        case RunKind::Psd:
        case RunKind::Papr: return axis == "alpha";
        case RunKind::Complexity: return axis == "Q";
        case RunKind::Verify: return false;
        }
        return false;
    };
    for (const std::string& axis : c.sweep_axes)
        if (!allowed(axis))
            throw ConfigError("sweep." + axis + ": not used by the '" + to_string(c.run) + "' run");
    c.channel.L_us = c.modem.L_us;
    c.modem.delta_tau = 1.0 / c.channel.bw_hz;
    with_field("modem", [&] {
        c.modem.validate();
        return 0;
    });
    if (c.fast)
        with_field("modem.impl", [&] {
            FastModem check(c.modem);
            return 0;
        });
    for (double a : c.alpha)
        if (a < 0.0 || a > 1.0)
            throw ConfigError("sweep.alpha: roll-off " + std::to_string(a) + " outside [0, 1]");
    for (int q : c.Q)
        if (q < 1 || q > c.modem.M / 2)
            throw ConfigError("sweep.Q: " + std::to_string(q) + " outside [1, M/2]");
    for (double v : c.v_kmh)
        if (v < 0.0)
            throw ConfigError("sweep.v_kmh: speeds must be non-negative");
    if (c.order != 4 && c.order != 16 && c.order != 64)
        throw ConfigError("order: QAM order must be 4, 16 or 64");
    if (c.trials < 1)
        throw ConfigError("trials: need at least one trial");
    if (c.run == RunKind::Papr && c.trials < 100)
        throw ConfigError("trials: the PAPR CCDF needs at least 100 frames");
    if (c.min_errors < 0)
        throw ConfigError("min_errors: must be non-negative");
    if (c.threads < 1)
        throw ConfigError("threads: need at least one thread");
    if (c.run == RunKind::Psd && (c.psd_seg_len < 2 || c.psd_seg_len > c.modem.frame_len()))
        throw ConfigError("psd.seg_len: must lie between 2 and the frame length");
    if (!(c.oob_offset >= 0.0 && c.oob_offset < 1.0))
        throw ConfigError("psd.oob_offset: must lie in [0, 1)");
    if (!(c.channel.bw_hz > 0.0) || !(c.channel.fc_hz > 0.0) || c.channel.v_kmh < 0.0)
        throw ConfigError("channel: bandwidth and carrier must be positive, speed non-negative");
    with_field("channel", [&] {
        const ChannelRealization probe = generate_channel(c.channel, 1, 0);
        if (probe.max_delay() > c.modem.Lcp_us())
            throw ConfigError("delay spread of " + std::to_string(probe.max_delay()) +
                              " samples exceeds the cyclic prefix of " +
                              std::to_string(c.modem.Lcp_us()));
        return 0;
    });
    c.resolved = to_json(c);
}

} // namespace ddps::tool
