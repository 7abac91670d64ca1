#include <cstdlib>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "zrpm/error.hpp"
#include "zrpm/experiment.hpp"

namespace {

constexpr int kChecksFailed = 1;
constexpr int kConfigInvalid = 2;
constexpr int kModuleError = 3;

std::string default_root() {
    const char* env = std::getenv("ZRPM_OUT_ROOT");
    return env && *env ? env : "zrpm-out";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact and Monte Carlo experiments for condensing zero-range processes"};
    app.require_subcommand(1);

    std::string command, config_path, out_root = default_root();
    int threads = 1;
    std::optional<std::uint64_t> seed;
    bool quiet = false;

    auto* run = app.add_subcommand("run", "run one command on a JSON config");
    run->add_option("command", command, "exact, principles, collapse, asymptotics, approx, rates or simulate")
        ->required()
        ->check(CLI::IsMember(zrpm::experiment_commands()));
    run->add_option("--config", config_path, "JSON config")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_root, "output root (default $ZRPM_OUT_ROOT or ./zrpm-out)");
    run->add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 256));
    run->add_option("--seed", seed, "overrides the config seed");
    run->add_flag("--quiet", quiet, "print only the output directory");

    auto* list = app.add_subcommand("list", "list commands");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kConfigInvalid;
    }

    if (list->parsed()) {
        for (const auto& c : zrpm::experiment_commands()) std::cout << c << "\n";
        return 0;
    }

    try {
        zrpm::ExperimentConfig cfg = zrpm::load_config(config_path);
        if (seed) cfg = zrpm::with_seed(cfg, *seed);
        zrpm::RunOutput out = zrpm::run_experiment(command, cfg, threads);
        const std::string dir = zrpm::write_artifacts(out_root, command, cfg, out);
        if (quiet) {
            std::cout << dir << "\n";
        } else {
            std::cout << command << " config " << cfg.hash << " seed " << cfg.seed << " -> " << dir << "\n";
            for (const auto& f : out.files)
                if (f.name != "summary.json") std::cout << "--- " << f.name << "\n" << f.content;
            std::cout << "checks " << (out.passed ? "passed" : "FAILED") << "\n";
        }
        return out.passed ? 0 : kChecksFailed;
    } catch (const zrpm::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == zrpm::ErrorKind::ConfigInvalid ? kConfigInvalid : kModuleError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kModuleError;
    }
}
