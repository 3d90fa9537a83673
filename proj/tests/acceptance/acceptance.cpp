// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--only 1,5,9] [--work DIR]
//
// Learning criteria train from scratch at the budgets below; a full run takes
// a couple of hours on one core.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "edgeoff/agent/evaluation.hpp"
#include "edgeoff/baselines/policies.hpp"
#include "edgeoff/common/rng.hpp"
#include "edgeoff/harness/config.hpp"
#include "edgeoff/harness/experiment.hpp"
#include "edgeoff/harness/gradcheck_suite.hpp"
#include "edgeoff/sim/system.hpp"
#include "oracles/queue_oracles.hpp"

namespace fs = std::filesystem;
using namespace edgeoff;
using harness::ExperimentConfig;
using baselines::PolicyKind;

namespace {

// Desk scale learning runs.
constexpr std::size_t kDeskEpisodes = 800;
constexpr std::size_t kFinalWindow = 100;
const std::vector<std::uint64_t> kDeskSeeds{1, 2, 3, 4, 5};
constexpr double kRunLimitS = 30.0 * 60.0;

// Trend sweeps train shorter runs; see README.
constexpr std::size_t kSweepEpisodes = 150;
constexpr std::size_t kSweepWindow = 50;
const std::vector<double> kTaskProbs{0.3, 0.5, 0.7, 0.9};
const std::vector<double> kDeadlines{0.5, 1.0, 1.5, 2.0, 2.5};
const std::vector<double> kIedCounts{10, 20, 30, 40, 50};
const std::vector<std::uint64_t> kIedSeeds{1, 2, 3};
// Adjacent points may move the wrong way by this much (completion, absolute).
constexpr double kTrendTolerance = 0.01;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int digits = 4) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

std::string join(const std::vector<double>& v, int digits = 4) {
    std::string out;
    for (std::size_t k = 0; k < v.size(); ++k) out += (k ? " " : "") + fmt(v[k], digits);
    return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

ExperimentConfig desk(std::uint64_t seed, PolicyKind policy, std::size_t episodes, std::size_t window) {
    ExperimentConfig c;
    c.policy = policy;
    c.system = sim::desk_system_config();
    c.train.episodes = episodes;
    c.final_window = window;
    c.eval_episodes = window;
    harness::apply_seed(c, seed);
    return c;
}

/// Fixed policy over the same episode indices as the final training window.
agent::EvalReport baseline_window(const ExperimentConfig& c, PolicyKind kind) {
    auto policies = baselines::make_heuristic_policies(kind, c.system.num_ieds, c.system.num_ess, c.seed);
    agent::RolloutOptions ro;
    ro.observation = c.train.observation;
    ro.reward_constant = c.train.reward_constant;
    ro.record_experience = false;
    return agent::evaluate_policies(c.system, c.seed, policies, c.final_window, ro,
                                    c.train.episodes - c.final_window);
}

class Suite {
public:
    explicit Suite(fs::path work) : work_(std::move(work)) {}

    Outcome gradients() {
        const auto start = std::chrono::steady_clock::now();
        const auto report = harness::run_gradcheck_suite(20, 1e-4);
        const double took = seconds_since(start);
        double worst = 0.0;
        std::string where;
        for (const auto& e : report.entries) {
            if (e.worst_error >= worst) {
                worst = e.worst_error;
                where = e.name + ":" + e.worst_param;
            }
        }
        return {report.passed() && took < 60.0,
                std::to_string(report.entries.size()) + " checks x 20 seeds, worst " + fmt(worst * 1e6, 2) +
                    "e-6 at " + where + ", " + fmt(took, 1) + " s"};
    }

    Outcome queue_oracles() {
        std::size_t local_bad = 0, edge_bad = 0;
        Rng rng(derive_seed(77, 1));
        const double dt = 0.1;
        for (int seq = 0; seq < 1000; ++seq) {
            const double gpu = rng.uniform(0.5e9, 2e9);
            const std::size_t n = 1 + rng.below(30);
            std::vector<oracle::FifoJob> jobs;
            std::vector<sim::Task> tasks;
            std::int64_t t = 0;
            for (std::size_t k = 0; k < n; ++k) {
                t += static_cast<std::int64_t>(rng.below(4));
                if (k > 0 && t == jobs.back().arrival) t += 1;
                sim::Task task;
                task.born_interval = t;
                task.size_mb = rng.uniform(0.5, 5.0);
                task.density = rng.uniform(0.1, 0.5);
                task.deadline_s = rng.uniform(0.5, 2.5);
                task.deadline_intervals = sim::deadline_intervals(task.deadline_s, dt);
                tasks.push_back(task);
                jobs.push_back({t, task.size_mb * task.density * 1e9, task.deadline_intervals});
            }
            const auto expected = oracle::simulate_fifo(jobs, dt * gpu);
            sim::LocalQueue q;
            bool ok = true;
            for (std::size_t k = 0; k < n; ++k) {
                const auto s = sim::local_completion_interval(q, tasks[k], tasks[k].born_interval, dt, gpu);
                ok = ok && s.completes == expected[k].completed;
                if (ok && s.completes) ok = s.completion_boundary == expected[k].boundary;
                if (ok && !s.completes) ok = s.event_interval == expected[k].drop_interval;
            }
            if (!ok) ++local_bad;
        }

        for (int inst_no = 0; inst_no < 500; ++inst_no) {
            oracle::EdgeInstance inst;
            inst.ieds = 1 + rng.below(5);
            inst.ess = 1 + rng.below(3);
            inst.interval_s = 0.1;
            const std::size_t horizon = 5 + rng.below(26);
            for (std::size_t m = 0; m < inst.ess; ++m) inst.es_hz.push_back(rng.uniform(10e9, 20e9));
            for (std::size_t k = 0; k < inst.ieds * inst.ess; ++k) inst.density.push_back(rng.uniform(0.1, 0.5));
            const double rate = rng.uniform(0.05, 0.6);
            inst.arrivals.resize(horizon);
            for (auto& step : inst.arrivals) {
                step.resize(inst.ieds * inst.ess);
                for (auto& sizes : step) {
                    if (rng.uniform() < rate) sizes.push_back(rng.uniform(0.5, 5.0));
                    if (rng.uniform() < rate * 0.2) sizes.push_back(rng.uniform(0.5, 5.0));
                }
            }
            const auto expected = oracle::edge_recurrence(inst);
            sim::SystemConfig cfg;
            cfg.num_ieds = inst.ieds;
            cfg.num_ess = inst.ess;
            cfg.num_channels = inst.ess;
            cfg.interval_s = inst.interval_s;
            auto s = sim::new_system(cfg, 99);
            s.es_gpu_hz = inst.es_hz;
            bool ok = true;
            for (std::size_t t = 0; t < horizon; ++t) {
                const auto ti = static_cast<std::int64_t>(t);
                for (std::size_t i = 0; i < inst.ieds; ++i) {
                    for (std::size_t m = 0; m < inst.ess; ++m) {
                        for (double size : inst.arrivals[t][i * inst.ess + m]) {
                            sim::Task task;
                            task.id = s.tasks.size();
                            task.owner = i;
                            task.born_interval = ti;
                            task.size_mb = size;
                            task.density = inst.density[i * inst.ess + m];
                            task.deadline_s = 1e6;
                            task.deadline_intervals = sim::deadline_intervals(task.deadline_s, cfg.interval_s);
                            task.assigned_es = m;
                            task.offloaded = true;
                            task.tx_done_interval = ti;
                            s.tasks.push_back(task);
                            sim::enqueue_edge(s, task.id, ti);
                        }
                    }
                }
                sim::step_edge_queues(s, ti);
                for (std::size_t k = 0; k < inst.ieds * inst.ess; ++k) ok = ok && s.edge[k].backlog_mb == expected[t][k];
            }
            if (!ok) ++edge_bad;
        }
        return {local_bad == 0 && edge_bad == 0, "local FIFO mismatches " + std::to_string(local_bad) +
                                                     "/1000, edge recurrence mismatches " +
                                                     std::to_string(edge_bad) + "/500"};
    }

    /// Random routing episodes over desk, full-scale and random layouts.
    template <typename Check>
    void random_episodes(std::size_t count, std::uint64_t stream, Check&& check) {
        Rng rng(derive_seed(77, stream));
        for (std::size_t e = 0; e < count; ++e) {
            sim::SystemConfig cfg;
            if (e % 3 == 0) {
                cfg = sim::desk_system_config();
            } else if (e % 3 == 2) {
                cfg.num_ieds = 1 + rng.below(20);
                cfg.num_ess = 1 + rng.below(4);
                cfg.num_channels = cfg.num_ess;
                cfg.task_prob = rng.uniform(0.1, 1.0);
            }
            auto s = sim::new_system(cfg, 1000 + e);
            sim::reset_episode(s, e);
            Rng policy(derive_seed(stream, e));
            const double bias = e % 4 == 0 ? 1.0 : rng.uniform();
            const auto M = static_cast<int>(s.num_ess());
            for (std::int64_t t = 0; t < static_cast<std::int64_t>(cfg.episode_intervals); ++t) {
                sim::begin_interval(s);
                std::vector<int> actions(s.num_ieds(), sim::kNoOp);
                for (std::size_t i = 0; i < s.num_ieds(); ++i) {
                    if (s.fresh[i]) actions[i] = policy.uniform() < bias ? 1 + static_cast<int>(policy.below(M)) : 0;
                }
                sim::apply_actions(s, actions);
                const auto m = sim::finish_interval(s);
                check(s, m);
            }
        }
    }

    Outcome hard_constraints() {
        std::size_t intervals = 0, band = 0, late = 0, done = 0;
        double peak = 0.0;
        random_episodes(100, 3, [&](const sim::SystemState& s, const sim::IntervalMetrics& m) {
            ++intervals;
            const double B = s.config.bandwidth_hz;
            const double shares =
                static_cast<double>(m.valid_comm_queues) * sim::equal_bandwidth_share(B, m.valid_comm_queues);
            if (m.bandwidth_allocated_hz > B || shares > B) ++band;
            peak = std::max(peak, m.bandwidth_allocated_hz / B);
            for (const auto& e : s.events) {
                if (e.kind != sim::EventKind::done) continue;
                ++done;
                if (e.latency_s > e.deadline_s + 1e-9) ++late;
            }
        });
        return {band == 0 && late == 0 && done > 0,
                std::to_string(intervals) + " intervals: bandwidth violations " + std::to_string(band) +
                    " (peak use " + fmt(peak, 6) + " B), late completions " + std::to_string(late) + " of " +
                    std::to_string(done)};
    }

    Outcome conservation() {
        std::size_t bad = 0, intervals = 0, generated_total = 0;
        std::size_t generated = 0, completed = 0, dropped = 0;
        std::int64_t last_t = -1;
        random_episodes(100, 4, [&](const sim::SystemState& s, const sim::IntervalMetrics& m) {
            if (m.t <= last_t) generated = completed = dropped = 0;
            last_t = m.t;
            ++intervals;
            generated += m.tasks_generated;
            completed += m.tasks_completed;
            dropped += m.tasks_dropped;
            generated_total += m.tasks_generated;
            std::size_t live = 0;
            for (const auto& task : s.tasks) {
                if (!task.finish_interval) ++live;
            }
            if (generated != completed + dropped + m.tasks_in_flight || live != m.tasks_in_flight) ++bad;
        });
        return {bad == 0, std::to_string(intervals) + " intervals, " + std::to_string(generated_total) +
                              " tasks, imbalances " + std::to_string(bad)};
    }

    struct DeskRun {
        harness::RunSummary summary;
        double random_reward = 0.0;
        double local_reward = 0.0;
    };

    const std::vector<DeskRun>& desk_runs(PolicyKind kind) {
        auto& runs = desk_cache_[kind];
        if (!runs.empty()) return runs;
        for (auto seed : kDeskSeeds) {
            const auto c = desk(seed, kind, kDeskEpisodes, kFinalWindow);
            DeskRun r;
            r.summary = harness::run_train(c, fresh(std::string(baselines::to_string(kind)) + "/seed_" +
                                                    std::to_string(seed)));
            if (kind == PolicyKind::amarl) {
                r.random_reward = baseline_window(c, PolicyKind::random).reward.mean;
                r.local_reward = baseline_window(c, PolicyKind::local_only).reward.mean;
            }
            std::cerr << "  " << baselines::to_string(kind) << " seed " << seed << ": reward "
                      << fmt(r.summary.mean_reward) << " completion " << fmt(r.summary.completion_rate) << " ("
                      << fmt(r.summary.wall_clock_s, 0) << " s)\n";
            runs.push_back(r);
        }
        return runs;
    }

    Outcome learning_signal() {
        const auto& runs = desk_runs(PolicyKind::amarl);
        std::size_t wins_random = 0, wins_local = 0;
        double slowest = 0.0;
        std::string per_seed;
        for (std::size_t k = 0; k < runs.size(); ++k) {
            const auto& r = runs[k];
            if (r.summary.mean_reward > r.random_reward) ++wins_random;
            if (r.summary.mean_reward > r.local_reward) ++wins_local;
            slowest = std::max(slowest, r.summary.wall_clock_s);
            per_seed += " s" + std::to_string(kDeskSeeds[k]) + "=" + fmt(r.summary.mean_reward, 2) + "/" +
                        fmt(r.random_reward, 2) + "/" + fmt(r.local_reward, 2);
        }
        return {wins_random >= 4 && wins_local >= 4 && slowest < kRunLimitS,
                "beats random " + std::to_string(wins_random) + "/5, local-only " + std::to_string(wins_local) +
                    "/5, slowest run " + fmt(slowest, 0) + " s; amarl/random/local:" + per_seed};
    }

    /// Mean over seeds per sweep value.
    struct SweepMeans {
        std::vector<double> completion;
        std::vector<double> latency;
    };

    SweepMeans sweep(const std::string& name, harness::SweepAxis axis, const std::vector<double>& values,
                     const std::vector<std::uint64_t>& seeds) {
        auto c = desk(1, PolicyKind::amarl, kSweepEpisodes, kSweepWindow);
        c.sweep.axis = axis;
        c.sweep.values = values;
        c.sweep.seeds = seeds;
        harness::RunOptions opts;
        const auto runs = harness::run_sweep(c, fresh(name), opts);
        SweepMeans out;
        for (std::size_t v = 0; v < values.size(); ++v) {
            double comp = 0.0, lat = 0.0;
            for (std::size_t s = 0; s < seeds.size(); ++s) {
                comp += runs[v * seeds.size() + s].completion_rate;
                lat += runs[v * seeds.size() + s].avg_latency_s;
            }
            out.completion.push_back(comp / static_cast<double>(seeds.size()));
            out.latency.push_back(lat / static_cast<double>(seeds.size()));
        }
        return out;
    }

    /// Largest step against the expected direction (+1 rising, -1 falling).
    static double worst_reversal(const std::vector<double>& v, int direction) {
        double worst = 0.0;
        for (std::size_t k = 1; k < v.size(); ++k) worst = std::max(worst, -direction * (v[k] - v[k - 1]));
        return worst;
    }

    Outcome task_prob_trend() {
        const auto m = sweep("sweep_task_prob", harness::SweepAxis::task_prob, kTaskProbs, kDeskSeeds);
        const double rev = worst_reversal(m.completion, -1);
        return {rev <= kTrendTolerance, "completion at p=0.3..0.9: " + join(m.completion) + " (largest rise " +
                                            fmt(std::max(rev, 0.0)) + ")"};
    }

    Outcome deadline_trend() {
        const auto m = sweep("sweep_deadline", harness::SweepAxis::deadline, kDeadlines, kDeskSeeds);
        const double rev = worst_reversal(m.completion, +1);

        std::size_t wins = 0;
        std::string per_seed;
        for (auto seed : kDeskSeeds) {
            const auto c = harness::sweep_point(desk(seed, PolicyKind::amarl, kDeskEpisodes, kFinalWindow),
                                                harness::SweepAxis::deadline, 1.0);
            const auto s = harness::run_train(c, fresh("deadline_1/seed_" + std::to_string(seed)));
            const double greedy = baseline_window(c, PolicyKind::greedy).completion_rate.mean;
            if (s.completion_rate >= greedy) ++wins;
            per_seed += " s" + std::to_string(seed) + "=" + fmt(s.completion_rate, 3) + "/" + fmt(greedy, 3);
            std::cerr << "  deadline 1.0 seed " << seed << ": amarl " << fmt(s.completion_rate) << " greedy "
                      << fmt(greedy) << "\n";
        }
        return {rev <= kTrendTolerance && wins >= 3,
                "completion at d=0.5..2.5: " + join(m.completion) + " (largest drop " + fmt(std::max(rev, 0.0)) +
                    "); amarl >= greedy at 1.0 s in " + std::to_string(wins) + "/5:" + per_seed};
    }

    Outcome ied_trend() {
        const auto m = sweep("sweep_num_ieds", harness::SweepAxis::num_ieds, kIedCounts, kIedSeeds);
        const double comp_rev = worst_reversal(m.completion, -1);
        // latency uses the same tolerance relative to its level
        double lat_rev = 0.0;
        for (std::size_t k = 1; k < m.latency.size(); ++k) {
            lat_rev = std::max(lat_rev, (m.latency[k - 1] - m.latency[k]) / m.latency[k - 1]);
        }
        return {comp_rev <= kTrendTolerance && lat_rev <= kTrendTolerance,
                "I=10..50 completion " + join(m.completion) + ", latency " + join(m.latency, 3) +
                    " s (largest completion rise " + fmt(std::max(comp_rev, 0.0)) + ", latency drop " +
                    fmt(std::max(lat_rev, 0.0) * 100.0, 2) + "%)"};
    }

    Outcome ablation() {
        const auto& full = desk_runs(PolicyKind::amarl);
        const auto& abl = desk_runs(PolicyKind::independent_critic_ablation);
        std::size_t wins = 0;
        std::string per_seed;
        for (std::size_t k = 0; k < full.size(); ++k) {
            if (full[k].summary.completion_rate >= abl[k].summary.completion_rate) ++wins;
            per_seed += " s" + std::to_string(kDeskSeeds[k]) + "=" + fmt(full[k].summary.completion_rate, 3) + "/" +
                        fmt(abl[k].summary.completion_rate, 3);
        }
        return {wins >= 3, "attention >= independent critic in " + std::to_string(wins) + "/5:" + per_seed};
    }

    Outcome determinism() {
        const auto dir = fresh("determinism");
        const auto cfg = dir / "small.ini";
        std::ofstream(cfg) << "seed = 4\neval_episodes = 5\nfinal_window = 10\n"
                              "[system]\nnum_ieds = 6\nnum_ess = 2\nnum_channels = 2\nbandwidth_hz = 10e6\n"
                              "[train]\nepisodes = 20\nwarmup = 600\nhidden = 16\n"
                              "[sweep]\naxis = task_prob\nvalues = [0.3, 0.7]\nseeds = [1, 2]\n";
        const std::vector<std::string> commands{"train", "evaluate", "simulate --policy greedy",
                                                "sweep --policy random", "sweep --episodes 12"};
        std::size_t compared = 0;
        std::vector<std::string> differing;
        // same outputs directory both times; the first pass is copied aside
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t k = 0; k < commands.size(); ++k) {
                const auto out = dir / "run" / ("cmd" + std::to_string(k == 1 ? 0 : k));
                if (k != 1) fs::remove_all(out);
                const std::string line = std::string(EDGEOFF_CLI) + " " + commands[k] + " --quiet --config " +
                                         cfg.string() + " --out " + out.string() + " > /dev/null 2>&1";
                if (std::system(line.c_str()) != 0) return {false, "command failed: " + commands[k]};
            }
            if (pass == 0) fs::copy(dir / "run", dir / "first", fs::copy_options::recursive);
        }
        for (const auto& entry : fs::recursive_directory_iterator(dir / "first")) {
            if (!entry.is_regular_file() || entry.path().filename() == "timing.txt") continue;
            const auto rel = fs::relative(entry.path(), dir / "first");
            ++compared;
            if (slurp(entry.path()) != slurp(dir / "run" / rel)) differing.push_back(rel.string());
        }
        std::string detail = std::to_string(compared) + " files from train, evaluate, simulate and sweep compared";
        if (!differing.empty()) detail += "; differing: " + differing.front();
        return {differing.empty() && compared > 0, detail};
    }

private:
    static std::string slurp(const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    }

    fs::path fresh(const std::string& name) {
        const auto p = work_ / name;
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }

    fs::path work_;
    std::map<PolicyKind, std::vector<DeskRun>> desk_cache_;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance suite"};
    std::vector<int> only;
    std::string work = "acceptance_runs";
    app.add_option("--only", only, "Criteria to run (default all)")->delimiter(',');
    app.add_option("--work", work, "Directory for run outputs");
    CLI11_PARSE(app, argc, argv);

    Suite suite{fs::absolute(work)};
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"gradient suite", [&] { return suite.gradients(); }},
        {"queue oracles", [&] { return suite.queue_oracles(); }},
        {"hard constraints", [&] { return suite.hard_constraints(); }},
        {"conservation", [&] { return suite.conservation(); }},
        {"learning signal", [&] { return suite.learning_signal(); }},
        {"task probability trend", [&] { return suite.task_prob_trend(); }},
        {"deadline trend", [&] { return suite.deadline_trend(); }},
        {"IED count trend", [&] { return suite.ied_trend(); }},
        {"attention ablation", [&] { return suite.ablation(); }},
        {"determinism", [&] { return suite.determinism(); }},
    };
    const std::set<int> wanted(only.begin(), only.end());
    bool all = true;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k + 1);
        if (!wanted.empty() && !wanted.count(id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        all = all && o.pass;
        std::cout << "criterion " << std::setw(2) << id << " " << (o.pass ? "PASS" : "FAIL") << "  "
                  << criteria[k].first << ": " << o.detail << "  [" << fmt(seconds_since(start), 0) << " s]"
                  << std::endl;
    }
    return all ? 0 : 1;
}
