#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "edgeoff/amarl/learner.hpp"
#include "edgeoff/common/error.hpp"
#include "edgeoff/common/rng.hpp"
#include "edgeoff/harness/config.hpp"
#include "edgeoff/harness/experiment.hpp"
#include "edgeoff/harness/gradcheck_suite.hpp"
#include "edgeoff/sim/trace.hpp"
#include "support.hpp"

using namespace edgeoff;
using namespace edgeoff::harness;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t count_lines(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) ++n;
    return n;
}

std::string config_error(const std::string& text) {
    try {
        parse_config_text(text, "t.ini");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

ExperimentConfig tiny(baselines::PolicyKind policy) {
    ExperimentConfig c;
    c.policy = policy;
    c.system = sim::desk_system_config();
    c.system.num_ieds = 4;
    c.system.episode_intervals = 20;
    c.eval_episodes = 3;
    c.final_window = 2;
    c.train.episodes = 4;
    c.train.hidden = 8;
    c.train.heads = 2;
    c.train.batch = 8;
    c.train.warmup = 40;
    c.train.updates_per_episode = 2;
    return c;
}

int cli(const std::string& args) {
    const std::string cmd = std::string(EDGEOFF_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("a file with only a seed gets every default") {
    const auto c = parse_config_text("seed = 9\n");
    ExperimentConfig expected;
    apply_seed(expected, 9);
    CHECK(c == expected);
    CHECK(c.system.num_ieds == 50);
    CHECK(c.system.num_ess == 5);
    CHECK(c.system.deadline_s.low == 0.5);
    CHECK(c.system.deadline_s.high == 2.5);
    CHECK(c.train.episodes == 5000);
    CHECK(c.system.seed == 9);
    CHECK(c.train.seed == 9);
}

TEST_CASE("comments, sections and lists parse") {
    const auto c = parse_config_text(
        "# desk\nseed = 4  # trailing\npolicy = greedy\n\n[system]\nnum_ieds = 8\nsize_range = [1, 2]\n"
        "fading = false\n[train]\nattention = false\n[sweep]\naxis = task_prob\nvalues = [0.3, 0.5]\nseeds = [1, 2]\n");
    CHECK(c.policy == baselines::PolicyKind::greedy);
    CHECK(c.system.num_ieds == 8);
    CHECK(c.system.size_mb.low == 1.0);
    CHECK(c.system.size_mb.high == 2.0);
    CHECK_FALSE(c.system.fading);
    CHECK_FALSE(c.train.attention);
    CHECK(c.sweep.axis == SweepAxis::task_prob);
    CHECK(c.sweep.values == std::vector<double>{0.3, 0.5});
    CHECK(c.sweep.seeds == std::vector<std::uint64_t>{1, 2});
}

TEST_CASE("errors name the line and the field") {
    auto msg = config_error("seed = 1\n[system]\ndeadline_range = [2.5, 0.5]\n");
    CHECK(msg.find("t.ini:3") != std::string::npos);
    CHECK(msg.find("deadline_range") != std::string::npos);

    msg = config_error("seed = 1\n\n[train]\nlearning_rate = 3\n");
    CHECK(msg.find("t.ini:4") != std::string::npos);
    CHECK(msg.find("learning_rate") != std::string::npos);

    msg = config_error("[system]\nnum_ieds = eight\n");
    CHECK(msg.find("t.ini:2") != std::string::npos);
    CHECK(msg.find("num_ieds") != std::string::npos);

    msg = config_error("seed = 1\nseed = 2\n");
    CHECK(msg.find("t.ini:2") != std::string::npos);
    CHECK(msg.find("duplicate") != std::string::npos);

    CHECK(config_error("[model]\n").find("t.ini:1") != std::string::npos);
    CHECK(config_error("seed\n").find("t.ini:1") != std::string::npos);
    CHECK(config_error("policy = ppo\n").find("policy") != std::string::npos);
    CHECK(config_error("[system]\ntask_prob = 1.5\n").find("t.ini:2") != std::string::npos);
    CHECK(config_error("[sweep]\naxis = task_prob\nvalues = [0.5, 1.5]\n").find("sweep.values") != std::string::npos);
    CHECK(config_error("[sweep]\naxis = num_ieds\nvalues = [10, 2.5]\n").find("sweep.values") != std::string::npos);
    CHECK(config_error("[sweep]\naxis = deadline\nvalues = [0, 1]\n").find("sweep.values") != std::string::npos);
    CHECK(config_error("final_window = 0\n").find("final_window") != std::string::npos);
    CHECK_THROWS_AS(parse_config("/nonexistent/edgeoff.ini"), IoError);
}

TEST_CASE("emit then parse gives the same configuration") {
    CHECK(parse_config_text(emit_config(ExperimentConfig{})) == ExperimentConfig{});
    Rng rng(17);
    for (int k = 0; k < 50; ++k) {
        ExperimentConfig c;
        apply_seed(c, rng.next_u64());
        c.policy = static_cast<baselines::PolicyKind>(rng.below(6));
        c.output_dir = "runs/x" + std::to_string(k);
        c.eval_episodes = 1 + rng.below(500);
        c.system.num_ieds = 1 + rng.below(60);
        c.system.task_prob = rng.uniform();
        c.system.bandwidth_hz = rng.uniform(1e6, 3e7);
        c.system.size_mb.low = rng.uniform(0.1, 1.0);
        c.system.size_mb.high = c.system.size_mb.low + rng.uniform(0.0, 5.0);
        c.system.fading = rng.uniform() < 0.5;
        c.train.lr_actor = rng.uniform(1e-5, 1e-2);
        c.train.polyak = rng.uniform(1e-4, 1.0);
        c.train.attention = rng.uniform() < 0.5;
        c.train.observation.queue_cap_mb = rng.uniform(1.0, 100.0);
        c.sweep.axis = SweepAxis::deadline;
        c.sweep.values = {rng.uniform(0.5, 1.0), rng.uniform(1.0, 3.0)};
        c.sweep.seeds = {rng.next_u64(), 3};
        CHECK(parse_config_text(emit_config(c)) == c);
    }
}

TEST_CASE("sweep points move one axis") {
    ExperimentConfig base;
    CHECK(sweep_point(base, SweepAxis::task_prob, 0.7).system.task_prob == 0.7);
    const auto d = sweep_point(base, SweepAxis::deadline, 1.0);
    CHECK(d.system.deadline_s.low == 0.5);
    CHECK(d.system.deadline_s.high == 1.0);
    const auto tight = sweep_point(base, SweepAxis::deadline, 0.3);
    CHECK(tight.system.deadline_s.low == 0.3);
    CHECK(sweep_point(base, SweepAxis::num_ieds, 30).system.num_ieds == 30);
    CHECK_THROWS_AS(sweep_point(base, SweepAxis::num_ieds, 0), ConfigError);
    CHECK(parse_sweep_axis("num_ieds") == SweepAxis::num_ieds);
    CHECK_THROWS_AS(parse_sweep_axis("bandwidth"), ConfigError);
}

TEST_CASE("episode rows round-trip through the CSV format") {
    EpisodeRow r{12, 3.25, 0.5, 1.125, 40.0, 7, 0.1, std::numeric_limits<double>::quiet_NaN()};
    const auto line = format_row(r);
    const auto back = parse_row(line);
    CHECK(back.episode == 12);
    CHECK(back.mean_reward == 3.25);
    CHECK(back.drops == 7);
    CHECK(back.critic_loss == 0.1);
    CHECK(std::isnan(back.actor_loss));
    CHECK(format_row(back) == line);
    CHECK_THROWS_AS(parse_row("1,2,3"), IoError);
    CHECK_THROWS_AS(parse_row("1,x,3,4,5,6,7,8"), IoError);

    const auto s = summarize_rows({r, EpisodeRow{13, 1.25, 1.0, 0.875, 20.0, 1, 0, 0}}, 5);
    CHECK(s.window == 2);
    CHECK(s.mean_reward == doctest::Approx(2.25));
    CHECK(s.completion_rate == doctest::Approx(0.75));
}

TEST_CASE("simulate with no arrivals reports full completion and flags it") {
    testing::TempDir dir("h_p0");
    auto c = tiny(baselines::PolicyKind::local_only);
    c.system.task_prob = 0.0;
    const auto s = run_simulate(c, dir.path());
    CHECK(s.completion_rate == 1.0);
    CHECK(s.no_task_episodes == 3);
    CHECK(slurp(dir.path() / "summary.txt").find("no_task_episodes = 3") != std::string::npos);
    CHECK(count_lines(dir.path() / "trace.csv") == 1);
}

TEST_CASE("simulate writes the documented files") {
    testing::TempDir dir("h_sim");
    const auto c = tiny(baselines::PolicyKind::greedy);
    const auto s = run_simulate(c, dir.path());
    CHECK(s.episodes == 3);
    CHECK(s.completion_rate >= 0.0);
    CHECK(s.completion_rate <= 1.0);
    CHECK(s.avg_latency_s >= 0.0);
    for (const char* f : {"config.ini", "episodes.csv", "summary.txt", "timing.txt", "trace.csv"}) {
        CHECK(fs::exists(dir.path() / f));
    }
    std::ifstream in(dir.path() / "episodes.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == kEpisodesHeader);
    CHECK(count_lines(dir.path() / "episodes.csv") == 4);
    CHECK(parse_config(dir.path() / "config.ini") == c);

    // one trace row per event of the first episode
    auto policies = baselines::make_heuristic_policies(c.policy, c.system.num_ieds, c.system.num_ess, c.seed);
    auto env = sim::new_system(c.system, c.seed);
    sim::reset_episode(env, 0);
    std::vector<sim::TaskEvent> events;
    agent::RolloutOptions ro;
    ro.record_experience = false;
    ro.events = &events;
    agent::rollout(env, policies, c.system.episode_intervals, ro);
    CHECK(!events.empty());
    CHECK(count_lines(dir.path() / "trace.csv") == events.size() + 1);

    CHECK_THROWS_AS(run_simulate(tiny(baselines::PolicyKind::amarl), dir.path()), ConfigError);
    CHECK_THROWS_AS(run_train(c, dir.path()), ConfigError);
}

TEST_CASE("re-running a command reproduces the metric files byte for byte") {
    testing::TempDir a("h_det_a");
    testing::TempDir b("h_det_b");
    const auto c = tiny(baselines::PolicyKind::amarl);
    run_train(c, a.path());
    run_train(c, b.path());
    for (const char* f : {"config.ini", "episodes.csv", "summary.txt", "checkpoint/model.meta"}) {
        CHECK(slurp(a.path() / f) == slurp(b.path() / f));
    }
    run_evaluate(c, a.path());
    run_evaluate(c, b.path());
    CHECK(slurp(a.path() / "eval_episodes.csv") == slurp(b.path() / "eval_episodes.csv"));
    CHECK(slurp(a.path() / "eval_summary.txt") == slurp(b.path() / "eval_summary.txt"));
    CHECK(count_lines(a.path() / "eval_episodes.csv") == 4);

    testing::TempDir s1("h_sim_a");
    testing::TempDir s2("h_sim_b");
    auto g = tiny(baselines::PolicyKind::random);
    run_simulate(g, s1.path());
    run_simulate(g, s2.path());
    for (const char* f : {"config.ini", "episodes.csv", "summary.txt", "trace.csv"}) {
        CHECK(slurp(s1.path() / f) == slurp(s2.path() / f));
    }
}

TEST_CASE("evaluate rejects a checkpoint that does not fit") {
    testing::TempDir dir("h_eval");
    const auto c = tiny(baselines::PolicyKind::amarl);
    run_train(c, dir.path());
    auto other = c;
    other.system.num_ieds = 5;
    CHECK_THROWS_AS(run_evaluate(other, dir.path()), CompatibilityError);
    testing::TempDir empty("h_eval_empty");
    CHECK_THROWS_AS(run_evaluate(c, empty.path()), IoError);
}

TEST_CASE("a resumed run continues exactly like an uninterrupted one") {
    testing::TempDir whole("h_whole");
    testing::TempDir split("h_split");
    auto c = tiny(baselines::PolicyKind::amarl);
    c.train.episodes = 6;
    run_train(c, whole.path());
    // the state a run killed after its episode-3 checkpoint leaves behind
    {
        amarl::Trainer first(c.system, c.train);
        for (int k = 0; k < 3; ++k) first.run_episode();
        first.save(split.path() / "checkpoint");
        std::ifstream in(whole.path() / "episodes.csv");
        std::ofstream out(split.path() / "episodes.csv");
        std::string line;
        for (int k = 0; k < 5 && std::getline(in, line); ++k) out << line << '\n';
    }
    RunOptions resume;
    resume.resume = true;
    run_train(c, split.path(), resume);
    CHECK(slurp(whole.path() / "episodes.csv") == slurp(split.path() / "episodes.csv"));
    CHECK(slurp(whole.path() / "summary.txt") == slurp(split.path() / "summary.txt"));
}

TEST_CASE("the ablation trains through the same command") {
    testing::TempDir dir("h_abl");
    const auto s = run_train(tiny(baselines::PolicyKind::independent_critic_ablation), dir.path());
    CHECK(s.policy == "independent-critic-ablation");
    CHECK(count_lines(dir.path() / "episodes.csv") == 5);
}

TEST_CASE("a sweep runs every value and seed and aggregates per value") {
    testing::TempDir dir("h_sweep");
    auto c = tiny(baselines::PolicyKind::local_only);
    c.sweep.axis = SweepAxis::task_prob;
    c.sweep.values = {0.3, 0.9};
    c.sweep.seeds = {1, 2, 3};
    const auto runs = run_sweep(c, dir.path());
    REQUIRE(runs.size() == 6);
    CHECK(runs[0].seed == 1);
    CHECK(runs[3].seed == 1);
    CHECK(count_lines(dir.path() / "sweep.csv") == 3);
    CHECK(count_lines(dir.path() / "runs.csv") == 7);
    CHECK(fs::exists(dir.path() / "task_prob_0p3" / "seed_2" / "episodes.csv"));
    CHECK(fs::exists(dir.path() / "task_prob_0p9" / "seed_3" / "summary.txt"));
    std::ifstream in(dir.path() / "sweep.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == kSweepHeader);

    auto none = c;
    none.sweep.axis = SweepAxis::none;
    CHECK_THROWS_AS(run_sweep(none, dir.path()), ConfigError);
}

TEST_CASE("relative output paths go under the output root variable") {
    ::unsetenv(kOutputRootEnv);
    CHECK(resolve_output_dir("runs/a") == fs::path("runs/a"));
    ::setenv(kOutputRootEnv, "/tmp/root", 1);
    CHECK(resolve_output_dir("runs/a") == fs::path("/tmp/root/runs/a"));
    CHECK(resolve_output_dir("/abs/b") == fs::path("/abs/b"));
    ::unsetenv(kOutputRootEnv);
}

TEST_CASE("the gradient suite passes and catches a broken dense backward") {
    const auto report = run_gradcheck_suite(3);
    CHECK(report.passed());
    CHECK(report.entries.size() >= 12);
    std::ostringstream text;
    print_report(text, report);
    CHECK(text.str().find("actor_loss") != std::string::npos);
    CHECK(text.str().find("worst") != std::string::npos);

    const auto broken = check_dense(3, 1e-4, [](const nn::Dense& d, nn::ParamStore& s, const nn::Tensor2& x,
                                                const nn::Tensor2& dy) {
        auto dx = d.backward(s, x, dy);
        for (auto& p : s.params()) {
            if (p.name == "d.w") p.grad.values()[0] *= 1.01;
        }
        return dx;
    });
    CHECK_FALSE(broken.passed);
    CHECK(broken.worst_param.find("d.w") != std::string::npos);
}

TEST_CASE("command line exit codes") {
    testing::TempDir dir("h_cli");
    const auto root = dir.path().string();
    const auto bad = dir.path() / "bad.ini";
    std::ofstream(bad) << "[system]\ndeadline_range = [2.5, 0.5]\n";
    const auto good = dir.path() / "good.ini";
    std::ofstream(good) << "[system]\nnum_ieds = 3\nnum_ess = 2\nepisode_intervals = 10\n";

    CHECK(cli("") == 2);
    CHECK(cli("simulate --bogus") == 2);
    CHECK(cli("simulate --config " + bad.string()) == 2);
    CHECK(cli("simulate --config " + good.string() + " --policy ppo") == 2);
    CHECK(cli("simulate --config " + good.string() + " --policy greedy --episodes 2 --out " + root + "/sim") == 0);
    CHECK(fs::exists(dir.path() / "sim" / "summary.txt"));
    CHECK(cli("evaluate --config " + good.string() + " --out " + root + "/nothing") == 4);

    const auto diverge = dir.path() / "diverge.ini";
    std::ofstream(diverge) << "[system]\nnum_ieds = 3\nnum_ess = 2\nepisode_intervals = 10\n"
                              "[train]\nepisodes = 20\nbatch = 4\nwarmup = 4\nloss_ceiling = 1e-12\n"
                              "divergence_patience = 1\nhidden = 8\nheads = 2\n";
    CHECK(cli("train --config " + diverge.string() + " --out " + root + "/div") == 3);

    const std::string env = "EDGEOFF_OUTPUT_ROOT=" + root + " ";
    const std::string cmd = env + EDGEOFF_CLI + " simulate --config " + good.string() +
                            " --policy random --episodes 1 --out rel > /dev/null 2>&1";
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(fs::exists(dir.path() / "rel" / "episodes.csv"));
}
