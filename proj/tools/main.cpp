#include <iostream>

#include <CLI11.hpp>

#include "config.hpp"
#include "runs.hpp"
#include "version.hpp"

int main(int argc, char** argv)
{
    using namespace ddps::tool;

    CLI::App app{"Delay-Doppler pulse-shaping experiments"};
    app.set_version_flag("--version", std::string("ddps ") + DDPS_VERSION + " (" + DDPS_GIT_DESCRIBE + ")");

    std::string config_path, run, out;
    std::uint64_t seed = 0;
    int threads = 0;
    app.add_option("--config", config_path, "JSON experiment file (defaults apply when omitted)");
    app.add_option("--run", run, "psd | ber | papr | complexity | verify")
        ->check(CLI::IsMember({"psd", "ber", "papr", "complexity", "verify"}));
    auto* seed_opt = app.add_option("--seed", seed, "master seed");
    app.add_option("--out", out, "output directory");
    app.add_option("--threads", threads, "worker threads for Monte-Carlo runs")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    ExperimentConfig cfg;
    try {
        cfg = config_path.empty() ? parse_config("") : load_config(config_path);
        if (!run.empty())
            cfg = [&] {
                ExperimentConfig c = cfg;
                c.run = run == "psd"          ? RunKind::Psd
                        : run == "ber"        ? RunKind::Ber
                        : run == "papr"       ? RunKind::Papr
                        : run == "complexity" ? RunKind::Complexity
                                              : RunKind::Verify;
                return c;
            }();
        if (*seed_opt)
            cfg.seed = seed;
        if (!out.empty())
            cfg.out = out;
        if (threads > 0)
            cfg.threads = threads;
        validate(cfg);
    } catch (const ddps::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }

    try {
        return run_experiment(cfg, std::cout);
    } catch (const ddps::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
