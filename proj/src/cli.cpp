#include <functional>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "wfqpsk/cli.hpp"
#include "wfqpsk/error.hpp"

namespace wfqpsk {

int run_cli(int argc, char** argv)
{
    CLI::App app{"Weak-field homodyne PSK receiver toolkit: MI and key-rate sweeps, lock and detector simulation"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> format;
    app.add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
    app.add_option("--set", overrides, "override one key, e.g. --set receiver.visibility=0.845,1");
    app.add_option("--seed", seed, "base random seed (run.seed)");
    app.add_option("--out", out_dir, "output directory (output.dir)");
    app.add_option("--format", format, "csv or json (output.format)")->check(CLI::IsMember({"csv", "json"}));

    using Command = std::function<CommandOutput(const RunConfig&, int)>;
    const std::vector<std::tuple<std::string, std::string, Command>> commands = {
        {"sweep-mi", "mutual information vs loss, WF and homodyne receivers", cmd_sweep_mi},
        {"sweep-kgr", "key generation rate vs loss", cmd_sweep_kgr},
        {"lock", "simulate the phase lock in its operating conditions", cmd_lock},
        {"allan", "overlapping Allan deviation of a phase trace", cmd_allan},
        {"asd", "Welch amplitude spectral density of a phase trace", cmd_asd},
        {"montecarlo", "shot-by-shot detector simulation, histograms and plug-in MI", cmd_montecarlo},
        {"skellam", "photon-number difference law for two Poisson means", cmd_skellam},
    };
    std::map<CLI::App*, std::pair<std::string, Command>> dispatch;
    std::string input;
    for (const auto& [name, help, fn] : commands) {
        auto* sub = app.add_subcommand(name, help);
        if (name == "allan" || name == "asd") {
            sub->add_option("--input", input, "trace file (.csv as t_s,value; otherwise binary)");
        }
        dispatch[sub] = {name, fn};
    }
    auto* print_config = app.add_subcommand("config", "print the resolved configuration and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        RunConfig cfg;
        if (!config_path.empty()) {
            apply_config_file(cfg, config_path);
        }
        for (const auto& o : overrides) {
            apply_override(cfg, o);
        }
        if (seed) {
            cfg.seed = *seed;
        }
        if (out_dir) {
            cfg.out_dir = *out_dir;
        }
        if (format) {
            cfg.format = *format;
        }
        if (!input.empty()) {
            cfg.input = input;
        }
        cfg.validate();

        if (print_config->parsed()) {
            std::cout << render_config(cfg);
            return 0;
        }
        for (const auto& [sub, entry] : dispatch) {
            if (!sub->parsed()) {
                continue;
            }
            const auto result = entry.second(cfg, default_workers());
            write_outputs(cfg, entry.first, result);
            for (const auto& w : result.warnings) {
                std::cerr << "warning: " << w << '\n';
            }
            std::cout << "wrote " << result.files.size() + 1 << " files to " << cfg.out_dir << '\n';
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace wfqpsk
