#include "runs.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>

#include "ddps/ber.hpp"
#include "ddps/effective.hpp"
#include "ddps/fast.hpp"
#include "ddps/metrics.hpp"
#include "ddps/modem.hpp"
#include "version.hpp"

namespace ddps::tool {

namespace fs = std::filesystem;

namespace {

std::string utc_now()
{
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream ss;
    ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return ss.str();
}

using Meta = std::vector<std::pair<std::string, std::string>>;

// Metadata lines start with '#'; everything after the column header is
// a deterministic function of the config and seed.
class CsvFile {
public:
    CsvFile(const ExperimentConfig& cfg, const std::string& name, const Meta& meta,
            const std::string& columns)
        : path_(fs::path(cfg.out) / name)
    {
        fs::create_directories(cfg.out);
        os_.open(path_);
        if (!os_)
            throw Error("cannot write " + path_.string());
        os_ << "# ddps " << DDPS_VERSION << " (" << DDPS_GIT_DESCRIBE << ")\n";
        os_ << "# run: " << to_string(cfg.run) << "\n";
        os_ << "# seed: " << cfg.seed << "\n";
        os_ << "# generated: " << utc_now() << "\n";
        for (const auto& [k, v] : meta)
            os_ << "# " << k << ": " << v << "\n";
        os_ << "# config: " << cfg.resolved.dump() << "\n";
        os_ << columns << "\n";
        os_ << std::setprecision(12);
    }

    std::ostream& out() { return os_; }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
    std::ofstream os_;
};

DelayDopplerGrid random_grid(std::mt19937_64& rng, int order, int M, int N)
{
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(M) * N * bits_per_symbol(order));
    for (auto& b : bits)
        b = static_cast<std::uint8_t>(rng() >> 63);
    return qam_map(bits, order, M, N);
}

class Synth {
public:
    Synth(const ModemConfig& cfg, bool fast) : cfg_(cfg)
    {
        if (fast && !cfg.guard.active())
            fast_.emplace(cfg);
    }
    SampleStream frame(const DelayDopplerGrid& D) const
    {
        return fast_ ? fast_->modulate(D).frame : modulate_unified(D, cfg_).frame;
    }

private:
    ModemConfig cfg_;
    std::optional<FastModem> fast_;
};

std::string alpha_tag(double a)
{
    std::ostringstream ss;
    ss << "a" << std::setprecision(4) << a;
    return ss.str();
}

std::vector<double> alphas(const ExperimentConfig& cfg)
{
    return cfg.alpha.empty() ? std::vector<double>{cfg.modem.alpha} : cfg.alpha;
}

struct Variant {
    std::string label;
    ModemConfig cfg;
};

// The spectra compared in the OOB study: plain C-PS, its two OOB remedies,
// and the two linear techniques.
std::vector<Variant> psd_variants(const ModemConfig& base, int guard_len)
{
    auto with = [&](Technique t, GuardConfig g) {
        ModemConfig c = base;
        c.technique = t;
        c.guard = g;
        return c;
    };
    return {{"cps", with(Technique::Cps, GuardConfig::none())},
            {"cps_ce_window", with(Technique::Cps, GuardConfig::cyclic(GuardMode::CeBeforePs, guard_len, base.M))},
            {"cps_zg", with(Technique::Cps, GuardConfig::zero_guard(guard_len))},
            {"lps", with(Technique::Lps, GuardConfig::none())},
            {"oddm", with(Technique::Oddm, GuardConfig::none())}};
}

} // namespace

int run_psd(const ExperimentConfig& cfg, std::ostream& log)
{
    const int guard_len = cfg.modem.guard.length > 0 ? cfg.modem.guard.length : 6;
    const double edge = 0.5 / cfg.modem.L_us; // occupied band is 1/L_us of the sampled band
    const double offset = cfg.oob_offset * 2 * edge;
    const Meta meta = {{"taper", "hann"},
                       {"seg_len", std::to_string(cfg.psd_seg_len)},
                       {"overlap", std::to_string(cfg.psd_seg_len / 2)},
                       {"frames", std::to_string(cfg.trials)},
                       {"normalization", "mean over |f| < " + std::to_string(edge) + " is 0 dB"}};
    CsvFile summary(cfg, "oob.csv", meta, "label,alpha,oob_db,averages");
    for (double a : alphas(cfg))
        for (Variant v : psd_variants(cfg.modem, guard_len)) {
            v.cfg.alpha = a;
            const Synth synth(v.cfg, cfg.fast);
            std::mt19937_64 rng(cfg.seed);
            WelchPsd w(cfg.psd_seg_len, cfg.psd_seg_len / 2);
            for (std::int64_t f = 0; f < cfg.trials; ++f)
                w.add(synth.frame(random_grid(rng, cfg.order, cfg.modem.M, cfg.modem.N)).samples);
            const PsdEstimate p = w.finish(edge);
            const std::string name = v.label + (cfg.alpha.empty() ? "" : "_" + alpha_tag(a));
            CsvFile csv(cfg, "psd_" + name + ".csv", meta, "freq,power_db");
            for (Eigen::Index i = 0; i < p.freqs.size(); ++i)
                csv.out() << p.freqs[i] << ',' << p.power_db[i] << '\n';
            const double oob = oob_power(p, edge, offset);
            summary.out() << v.label << ',' << a << ',' << oob << ',' << p.averages << '\n';
            log << "psd " << std::left << std::setw(14) << v.label << " alpha=" << a
                << "  OOB " << std::fixed << std::setprecision(1) << oob << " dB" << std::defaultfloat
                << std::setprecision(6) << "  -> " << csv.path().string() << '\n';
        }
    return 0;
}

int run_ber(const ExperimentConfig& cfg, std::ostream& log)
{
    const std::vector<double> speeds = cfg.v_kmh.empty() ? std::vector<double>{cfg.channel.v_kmh} : cfg.v_kmh;
    CsvFile csv(cfg, "ber.csv", {{"stopping", "min_errors or trials, checked between batches"}},
                "technique,guard,order,alpha,v_kmh,ebn0_db,trials,bit_errors,total_bits,ber,ci_low,ci_high");
    BerOptions opt;
    opt.order = cfg.order;
    opt.max_trials = cfg.trials;
    opt.min_errors = cfg.min_errors;
    opt.threads = cfg.threads;
    for (double a : alphas(cfg))
        for (double v : speeds)
            for (double e : cfg.ebn0_db) {
                ModemConfig m = cfg.modem;
                m.alpha = a;
                ChannelParams ch = cfg.channel;
                ch.v_kmh = v;
                const BerRecord r = run_ber_point(m, ch, e, opt, cfg.seed);
                const auto [lo, hi] = wilson_interval(r.bit_errors, r.total_bits);
                csv.out() << to_string(m.technique) << ',' << to_string(r.guard) << ',' << r.order << ','
                          << a << ',' << v << ',' << e << ',' << r.trials << ',' << r.bit_errors << ','
                          << r.total_bits << ',' << r.ber << ',' << lo << ',' << hi << '\n';
                csv.out().flush();
                log << "ber alpha=" << a << " v=" << v << " Eb/N0=" << e << " dB: " << r.bit_errors
                    << "/" << r.total_bits << " = " << r.ber << " (" << r.trials << " trials)\n";
            }
    log << "-> " << csv.path().string() << '\n';
    return 0;
}

int run_papr(const ExperimentConfig& cfg, std::ostream& log)
{
    RVector th(141);
    for (int i = 0; i < th.size(); ++i)
        th[i] = 0.1 * i;
    CsvFile csv(cfg, "papr.csv", {{"measured_on", "CP-stripped frame at L_us times the symbol rate"}},
                "alpha,threshold_db,ccdf");
    for (double a : alphas(cfg)) {
        ModemConfig m = cfg.modem;
        m.alpha = a;
        const Synth synth(m, cfg.fast);
        std::mt19937_64 rng(cfg.seed);
        std::vector<double> values;
        values.reserve(static_cast<std::size_t>(cfg.trials));
        for (std::int64_t f = 0; f < cfg.trials; ++f) {
            const SampleStream x = synth.frame(random_grid(rng, cfg.order, m.M, m.N));
            values.push_back(papr_db(x.samples.tail(m.core_len())));
        }
        const PaprCcdf c = papr_ccdf(values, th);
        for (Eigen::Index i = 0; i < th.size(); ++i)
            csv.out() << a << ',' << th[i] << ',' << c.ccdf[i] << '\n';
        log << "papr alpha=" << a << ": " << c.frames << " frames\n";
    }
    log << "-> " << csv.path().string() << '\n';
    return 0;
}

int run_complexity(const ExperimentConfig& cfg, std::ostream& log)
{
    const ModemConfig& m = cfg.modem;
    std::vector<int> qs = cfg.Q;
    if (qs.empty())
        for (int q = 1; q <= m.M / 2; ++q)
            qs.push_back(q);
    const bool pow2 = is_power_of_two(m.M) && is_power_of_two(m.N) && is_power_of_two(m.L_us);

    struct Row {
        int Q;
        std::int64_t direct, direct_counted, lps_fast, lps_fast_counted, cps_fast, oddm_fast, oddm_ref;
    };
    std::vector<Row> rows;
    std::mt19937_64 rng(cfg.seed);
    const DelayDopplerGrid D = random_grid(rng, 4, m.M, m.N);
    for (int q : qs) {
        const CmParams p{m.M, m.N, m.L_us, q, m.alpha};
        ModemConfig lin = m;
        lin.technique = Technique::Lps;
        lin.guard = GuardConfig::none();
        lin.Q = q;
        Row r{q, predict_cm(Technique::Lps, Impl::Direct, p), 0, -1, -1, -1,
              predict_cm(Technique::Oddm, Impl::Fast, p), predict_cm(Technique::Oddm, Impl::ReferenceOddm, p)};
        CmCounter direct;
        modulate_direct_counted(D, lin, &direct);
        r.direct_counted = direct.value();
        if (pow2) {
            r.lps_fast = predict_cm(Technique::Lps, Impl::Fast, p);
            r.cps_fast = predict_cm(Technique::Cps, Impl::Fast, p);
            CmCounter fast;
            FastModem(lin).modulate(D, &fast);
            r.lps_fast_counted = fast.value();
        }
        rows.push_back(r);
    }

    // smallest 2Q/M at which the fast L-PS structure needs fewer CMs
    auto crossover = [&](auto direct, auto fast) {
        for (const Row& r : rows)
            if (fast(r) >= 0 && direct(r) > fast(r))
                return std::to_string(2.0 * r.Q / m.M);
        return std::string("none");
    };
    const std::string x_pred = crossover([](const Row& r) { return r.direct; }, [](const Row& r) { return r.lps_fast; });
    const std::string x_count = crossover([](const Row& r) { return r.direct_counted; },
                                          [](const Row& r) { return r.lps_fast_counted; });

    CsvFile csv(cfg, "complexity.csv",
                {{"unit", "complex multiplications per modulator call"},
                 {"crossover_2Q_over_M_predicted", x_pred},
                 {"crossover_2Q_over_M_counted", x_count}},
                "Q,two_q_over_m,direct,direct_counted,lps_fast,lps_fast_counted,cps_fast,oddm_fast,oddm_reference");
    auto cell = [](std::int64_t v) { return v < 0 ? std::string() : std::to_string(v); };
    for (const Row& r : rows)
        csv.out() << r.Q << ',' << 2.0 * r.Q / m.M << ',' << r.direct << ',' << r.direct_counted << ','
                  << cell(r.lps_fast) << ',' << cell(r.lps_fast_counted) << ',' << cell(r.cps_fast) << ','
                  << cell(r.oddm_fast) << ',' << r.oddm_ref << '\n';
    log << "complexity: direct L-PS stops being cheaper at 2Q/M = " << x_pred << " (formulas), " << x_count
        << " (counted)\n-> " << csv.path().string() << '\n';
    return 0;
}

int run_verify(const ExperimentConfig& cfg, std::ostream& log)
{
    struct Check {
        std::string name;
        std::string status;
        std::string detail;
    };
    std::vector<Check> checks;
    auto report = [&](const std::string& name, bool ok, const std::string& detail) {
        checks.push_back({name, ok ? "PASS" : "FAIL", detail});
        log << (ok ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
    };
    auto info = [&](const std::string& name, const std::string& detail) {
        checks.push_back({name, "INFO", detail});
        log << "INFO " << name << ": " << detail << '\n';
    };
    auto sci = [](double v) {
        std::ostringstream ss;
        ss << std::scientific << std::setprecision(2) << v;
        return ss.str();
    };

    const ModemConfig& base = cfg.modem;
    std::mt19937_64 rng(cfg.seed);
    const Technique techniques[] = {Technique::Cps, Technique::Lps, Technique::Oddm};
    const bool pow2 = is_power_of_two(base.M) && is_power_of_two(base.N) && is_power_of_two(base.L_us);

    // fast structures against the defining sums, and their counters
    for (Technique t : techniques) {
        ModemConfig c = base;
        c.technique = t;
        c.guard = GuardConfig::none();
        const std::string tag = to_string(t);
        if (!pow2) {
            info("fast/" + tag, "skipped: M, N and L_us must be powers of two");
            continue;
        }
        const FastModem fast(c);
        double err = 0.0;
        for (int i = 0; i < 20; ++i) {
            const DelayDopplerGrid D = random_grid(rng, 4, c.M, c.N);
            const ModemOutput a = fast.modulate(D), b = modulate_unified(D, c);
            err = std::max(err, (a.frame.samples - b.frame.samples).cwiseAbs().maxCoeff());
            err = std::max(err, (fast.demodulate(b.frame).symbols - demodulate_unified(b.frame, c).symbols)
                                    .cwiseAbs()
                                    .maxCoeff());
        }
        report("fast_vs_direct/" + tag, err <= 1e-10, "max error " + sci(err) + " over 20 grids");

        const CmParams p{c.M, c.N, c.L_us, c.effective_Q(), c.alpha};
        const std::int64_t expect = predict_cm(t, Impl::Fast, p);
        CmCounter tx, rx;
        const ModemOutput o = fast.modulate(random_grid(rng, 4, c.M, c.N), &tx);
        fast.demodulate(o.frame, &rx);
        report("counter/" + tag, tx.value() == expect && rx.value() == expect,
               "modulator " + std::to_string(tx.value()) + ", demodulator " + std::to_string(rx.value()) +
                   ", closed form " + std::to_string(expect));
    }

    // the direct and reference rows count the structures as actually run
    {
        ModemConfig lin = base;
        lin.technique = Technique::Lps;
        lin.guard = GuardConfig::none();
        const CmParams p{lin.M, lin.N, lin.L_us, lin.effective_Q(), lin.alpha};
        CmCounter d;
        modulate_direct_counted(random_grid(rng, 4, lin.M, lin.N), lin, &d);
        info("table/direct", "counted " + std::to_string(d.value()) + ", closed form " +
                                 std::to_string(predict_cm(Technique::Lps, Impl::Direct, p)));
        ModemConfig od = lin;
        od.technique = Technique::Oddm;
        CmCounter r;
        modulate_oddm_reference(random_grid(rng, 4, od.M, od.N), od, &r);
        info("table/reference_oddm", "counted " + std::to_string(r.value()) + ", closed form " +
                                         std::to_string(predict_cm(Technique::Oddm, Impl::ReferenceOddm, p)));
    }

    // matrix model against the sample-level chain; large grids are checked at 32 x 8
    ModemConfig small = base;
    if (static_cast<std::int64_t>(base.M) * base.N > 512) {
        small.M = 32;
        small.N = 8;
        if (small.Q)
            small.Q = std::min(*small.Q, small.M / 2);
        info("matrix/size", "checked at M=32, N=8");
    }
    std::vector<std::pair<std::string, ModemConfig>> modes;
    for (Technique t : techniques) {
        ModemConfig c = small;
        c.technique = t;
        c.guard = GuardConfig::none();
        modes.push_back({to_string(t), c});
    }
    for (auto [tag, t, g] : {std::tuple{"cps+zg", Technique::Cps, GuardConfig::zero_guard(6)},
                             std::tuple{"oddm+zg", Technique::Oddm, GuardConfig::zero_guard(6)},
                             std::tuple{"cps+ce_before_ps", Technique::Cps,
                                        GuardConfig::cyclic(GuardMode::CeBeforePs, 6, small.M)},
                             std::tuple{"cps+ce_after_ps", Technique::Cps,
                                        GuardConfig::cyclic(GuardMode::CeAfterPs, 6, small.M)}}) {
        ModemConfig c = small;
        c.technique = t;
        c.guard = g;
        modes.push_back({tag, c});
    }
    for (const auto& [tag, c] : modes) {
        const EffectiveChannelBuilder b(c);
        double err = 0.0;
        for (int i = 0; i < 3; ++i) {
            const ChannelRealization ch = generate_channel(cfg.channel, c.frame_len(), rng());
            const DelayDopplerGrid D = random_grid(rng, 4, c.M, c.N);
            const SampleStream rx = apply_channel(ch, modulate_unified(D, c).frame);
            const CMatrix y = demodulate_unified(rx, c).symbols;
            const CVector d = Eigen::Map<const CVector>(D.symbols.data(), D.symbols.size());
            const CVector pred = b.detection_matrix(b.heff(ch)) * d;
            err = std::max(err, (Eigen::Map<const CVector>(y.data(), y.size()) - pred).cwiseAbs().maxCoeff());
        }
        report("matrix_vs_chain/" + tag, err <= 1e-9, "max error " + sci(err) + " over 3 channels");
    }

    // untruncated circular and ODDM shaping reconstruct exactly
    for (Technique t : {Technique::Cps, Technique::Oddm}) {
        ModemConfig c = small;
        c.technique = t;
        c.guard = GuardConfig::none();
        c.Q.reset();
        const DelayDopplerGrid D = random_grid(rng, 4, c.M, c.N);
        const double err =
            (demodulate_unified(modulate_unified(D, c).frame, c).symbols - D.symbols).cwiseAbs().maxCoeff();
        report("reconstruction/" + to_string(t), err <= 1e-9, "max error " + sci(err));
    }

    CsvFile csv(cfg, "verify.csv", {}, "check,status,detail");
    bool ok = true;
    for (const Check& c : checks) {
        csv.out() << c.name << ',' << c.status << ",\"" << c.detail << "\"\n";
        ok = ok && c.status != "FAIL";
    }
    log << (ok ? "all checks passed" : "verification FAILED") << "\n-> " << csv.path().string() << '\n';
    return ok ? 0 : 1;
}

int run_experiment(const ExperimentConfig& cfg, std::ostream& log)
{
    switch (cfg.run) {
    case RunKind::Psd: return run_psd(cfg, log);
    case RunKind::Ber: return run_ber(cfg, log);
    case RunKind::Papr: return run_papr(cfg, log);
    case RunKind::Complexity: return run_complexity(cfg, log);
    case RunKind::Verify: return run_verify(cfg, log);
    }
    return 2;
}

} // namespace ddps::tool
