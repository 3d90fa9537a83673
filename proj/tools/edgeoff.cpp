// edgeoff: train, simulate, evaluate, sweep and gradcheck from the command line.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "edgeoff/common/error.hpp"
#include "edgeoff/common/text.hpp"
#include "edgeoff/harness/config.hpp"
#include "edgeoff/harness/experiment.hpp"
#include "edgeoff/harness/gradcheck_suite.hpp"

namespace {

using namespace edgeoff;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;
constexpr int kExitOther = 1;

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<std::size_t> episodes;
    std::string policy;
    bool resume = false;
    bool quiet = false;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "Configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--seed", f.seed, "Seed for environment, policies and learner");
    cmd->add_option("--out", f.out, "Output directory (relative paths go under $EDGEOFF_OUTPUT_ROOT)");
    cmd->add_option("--episodes", f.episodes, "Override the episode count");
    cmd->add_option("--policy", f.policy, "amarl, independent-critic-ablation, local-only, random, greedy, round-robin");
    cmd->add_flag("--quiet", f.quiet, "No progress lines");
}

harness::ExperimentConfig load(const Flags& f, const std::string& command) {
    auto cfg = f.config.empty() ? harness::ExperimentConfig{} : harness::parse_config(f.config);
    if (f.seed) harness::apply_seed(cfg, *f.seed);
    if (!f.policy.empty()) cfg.policy = baselines::parse_policy_kind(f.policy);
    if (!f.out.empty()) cfg.output_dir = f.out;
    if (f.episodes) {
        if (command == "train") {
            cfg.train.episodes = *f.episodes;
        } else if (command == "sweep") {
            cfg.train.episodes = *f.episodes;
            cfg.eval_episodes = *f.episodes;
        } else {
            cfg.eval_episodes = *f.episodes;
        }
    }
    cfg.validate();
    return cfg;
}

void print_summary(const harness::RunSummary& s) {
    std::cout << s.command << " " << s.policy << " seed " << s.seed << ": reward " << format_double(s.mean_reward)
              << "  completion " << format_double(s.completion_rate) << "  latency "
              << format_double(s.avg_latency_s) << " s  (" << s.directory.string() << ")\n";
}

int run(const std::string& command, const Flags& f) {
    if (command == "gradcheck") {
        const auto report = harness::run_gradcheck_suite();
        harness::print_report(std::cout, report);
        return report.passed() ? kExitOk : kExitNumerical;
    }
    const auto cfg = load(f, command);
    const auto out = harness::resolve_output_dir(cfg.output_dir);
    harness::RunOptions opts;
    opts.resume = f.resume;
    if (!f.quiet) opts.log = &std::cerr;
    if (command == "train") {
        print_summary(harness::run_train(cfg, out, opts));
    } else if (command == "simulate") {
        print_summary(harness::run_simulate(cfg, out, opts));
    } else if (command == "evaluate") {
        print_summary(harness::run_evaluate(cfg, out, opts));
    } else {
        for (const auto& s : harness::run_sweep(cfg, out, opts)) print_summary(s);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-agent task offloading simulator and learner"};
    app.require_subcommand(1);
    Flags flags;
    auto* train = app.add_subcommand("train", "Train AMARL or the independent-critic ablation");
    add_common(train, flags);
    train->add_flag("--resume", flags.resume, "Continue from <out>/checkpoint");
    add_common(app.add_subcommand("simulate", "Run a fixed policy"), flags);
    add_common(app.add_subcommand("evaluate", "Greedy execution of the actors in <out>/checkpoint"), flags);
    add_common(app.add_subcommand("sweep", "Runs over one axis and a list of seeds"), flags);
    app.add_subcommand("gradcheck", "Finite-difference check of every layer and both losses");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return run(command, flags);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const CompatibilityError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOther;
    }
}
