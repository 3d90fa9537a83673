#include "edgeoff/harness/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "edgeoff/agent/evaluation.hpp"
#include "edgeoff/amarl/evaluate.hpp"
#include "edgeoff/amarl/learner.hpp"
#include "edgeoff/baselines/policies.hpp"
#include "edgeoff/common/error.hpp"
#include "edgeoff/common/text.hpp"
#include "edgeoff/sim/trace.hpp"

namespace edgeoff::harness {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void make_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& file) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + file.string());
    return out;
}

void write_text(const fs::path& file, const std::string& text) {
    auto out = open_out(file);
    out << text;
    if (!out) throw IoError("write failed: " + file.string());
}

void write_timing(const fs::path& dir, double seconds) {
    write_text(dir / "timing.txt", "wall_clock_s = " + format_double(seconds) + "\n");
}

std::vector<EpisodeRow> read_rows(const fs::path& file) {
    std::vector<EpisodeRow> rows;
    std::ifstream in(file);
    if (!in) return rows;
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (!trim(line).empty()) rows.push_back(parse_row(line));
    }
    return rows;
}

class EpisodeLog {
public:
    explicit EpisodeLog(const fs::path& file) : out_(open_out(file)) { out_ << kEpisodesHeader << '\n'; }

    void add(const EpisodeRow& row) {
        out_ << format_row(row) << '\n';
        out_.flush();
        if (!out_) throw IoError("write failed: episodes.csv");
        rows_.push_back(row);
    }
    const std::vector<EpisodeRow>& rows() const { return rows_; }

private:
    std::ofstream out_;
    std::vector<EpisodeRow> rows_;
};

void log_progress(const RunOptions& options, const std::string& what, const EpisodeRow& row, std::size_t total) {
    if (!options.log) return;
    if (row.episode % 50 != 0 && row.episode + 1 != total) return;
    *options.log << what << " episode " << row.episode + 1 << "/" << total << " reward " << format_double(row.mean_reward)
                 << " completion " << format_double(row.completion_rate) << "\n";
    options.log->flush();
}

RunSummary finish(RunSummary s, const std::vector<EpisodeRow>& rows, std::size_t window, const fs::path& dir,
                  const std::string& stem) {
    const auto means = summarize_rows(rows, window);
    s.window = means.window;
    s.mean_reward = means.mean_reward;
    s.completion_rate = means.completion_rate;
    s.avg_latency_s = means.avg_latency_s;
    s.objective_s = means.objective_s;
    s.no_task_episodes = means.no_task_episodes;
    s.episodes = rows.size();
    s.directory = dir;
    write_summary(dir / (stem + ".txt"), s);
    return s;
}

agent::RolloutOptions rollout_options(const ExperimentConfig& config) {
    agent::RolloutOptions o;
    o.observation = config.train.observation;
    o.reward_constant = config.train.reward_constant;
    o.critic_memory_decay = config.train.critic_memory_decay;
    o.record_experience = false;
    return o;
}

std::string point_label(SweepAxis axis, double value) {
    std::string v = format_double(value);
    for (auto& ch : v) {
        if (ch == '.') ch = 'p';
        if (ch == '-') ch = 'm';
    }
    return std::string(to_string(axis)) + "_" + v;
}

}  // namespace

EpisodeRow make_row(std::size_t episode, const agent::EpisodeMetrics& m, double critic_loss, double actor_loss) {
    return {episode, m.mean_reward, m.completion_rate, m.avg_latency_s, m.objective_s, m.dropped, critic_loss, actor_loss};
}

std::string format_row(const EpisodeRow& r) {
    std::ostringstream out;
    out << r.episode << ',' << format_double(r.mean_reward) << ',' << format_double(r.completion_rate) << ','
        << format_double(r.avg_latency_s) << ',' << format_double(r.objective_s) << ',' << r.drops << ','
        << format_double(r.critic_loss) << ',' << format_double(r.actor_loss);
    return out.str();
}

EpisodeRow parse_row(const std::string& line) {
    const auto cells = split(line, ',');
    EpisodeRow r;
    std::uint64_t ep = 0;
    std::uint64_t drops = 0;
    const bool ok = cells.size() == 8 && parse_u64(cells[0], ep) && parse_double(cells[1], r.mean_reward) &&
                    parse_double(cells[2], r.completion_rate) && parse_double(cells[3], r.avg_latency_s) &&
                    parse_double(cells[4], r.objective_s) && parse_u64(cells[5], drops) &&
                    parse_double(cells[6], r.critic_loss) && parse_double(cells[7], r.actor_loss);
    if (!ok) throw IoError("malformed episodes.csv row: " + line);
    r.episode = static_cast<std::size_t>(ep);
    r.drops = static_cast<std::size_t>(drops);
    return r;
}

RunSummary summarize_rows(const std::vector<EpisodeRow>& rows, std::size_t window) {
    RunSummary s;
    const std::size_t n = std::min(window, rows.size());
    s.window = n;
    if (n == 0) return s;
    for (std::size_t k = rows.size() - n; k < rows.size(); ++k) {
        s.mean_reward += rows[k].mean_reward;
        s.completion_rate += rows[k].completion_rate;
        s.avg_latency_s += rows[k].avg_latency_s;
        s.objective_s += rows[k].objective_s;
        if (rows[k].no_tasks()) ++s.no_task_episodes;
    }
    const double inv = 1.0 / static_cast<double>(n);
    s.mean_reward *= inv;
    s.completion_rate *= inv;
    s.avg_latency_s *= inv;
    s.objective_s *= inv;
    return s;
}

fs::path resolve_output_dir(const fs::path& dir) {
    if (dir.is_absolute()) return dir;
    if (const char* root = std::getenv(kOutputRootEnv); root && *root) return fs::path(root) / dir;
    return dir;
}

void write_summary(const fs::path& file, const RunSummary& s) {
    std::ostringstream out;
    out << "command = " << s.command << "\n"
        << "policy = " << s.policy << "\n"
        << "seed = " << s.seed << "\n"
        << "episodes = " << s.episodes << "\n"
        << "final_window = " << s.window << "\n"
        << "mean_reward = " << format_double(s.mean_reward) << "\n"
        << "completion_rate = " << format_double(s.completion_rate) << "\n"
        << "avg_latency_s = " << format_double(s.avg_latency_s) << "\n"
        << "objective_s = " << format_double(s.objective_s) << "\n"
        << "no_task_episodes = " << s.no_task_episodes << "\n"
        << "checkpoint = " << (s.checkpoint.empty() ? "none" : s.checkpoint) << "\n";
    write_text(file, out.str());
}

RunSummary run_train(const ExperimentConfig& config, const fs::path& out, const RunOptions& options) {
    config.validate();
    if (baselines::is_heuristic(config.policy)) {
        throw ConfigError("policy", "'" + std::string(baselines::to_string(config.policy)) +
                                        "' is a fixed policy; use simulate");
    }
    const auto start = Clock::now();
    make_dir(out);
    write_text(out / "config.ini", emit_config(config));
    auto train_cfg = config.train;
    if (config.policy == baselines::PolicyKind::independent_critic_ablation) {
        train_cfg = baselines::ablation_config(train_cfg);
    }

    std::vector<EpisodeRow> earlier;
    if (options.resume) earlier = read_rows(out / "episodes.csv");
    EpisodeLog log(out / "episodes.csv");
    bool started = false;
    const auto replay_earlier = [&](std::size_t upto) {
        if (started) return;
        started = true;
        for (const auto& r : earlier) {
            if (r.episode < upto) log.add(r);
        }
    };

    amarl::TrainOptions to;
    to.checkpoint_dir = out / "checkpoint";
    to.resume = options.resume;
    const std::string tag(baselines::to_string(config.policy));
    to.on_episode = [&](const amarl::EpisodeRecord& rec) {
        replay_earlier(rec.episode);
        const auto row = make_row(rec.episode, rec.metrics, rec.critic_loss, rec.actor_loss);
        log.add(row);
        log_progress(options, tag, row, train_cfg.episodes);
    };
    amarl::train(config.system, train_cfg, to);
    replay_earlier(std::numeric_limits<std::size_t>::max());

    RunSummary s;
    s.command = "train";
    s.policy = tag;
    s.seed = config.seed;
    s.checkpoint = "checkpoint";
    s = finish(s, log.rows(), config.final_window, out, "summary");
    s.wall_clock_s = seconds_since(start);
    write_timing(out, s.wall_clock_s);
    return s;
}

RunSummary run_simulate(const ExperimentConfig& config, const fs::path& out, const RunOptions& options) {
    config.validate();
    if (!baselines::is_heuristic(config.policy)) {
        throw ConfigError("policy", "'" + std::string(baselines::to_string(config.policy)) +
                                        "' must be trained first; use train and evaluate");
    }
    const auto start = Clock::now();
    make_dir(out);
    write_text(out / "config.ini", emit_config(config));
    auto policies =
        baselines::make_heuristic_policies(config.policy, config.system.num_ieds, config.system.num_ess, config.seed);
    auto env = sim::new_system(config.system, config.seed);
    EpisodeLog log(out / "episodes.csv");
    auto trace_file = open_out(out / "trace.csv");
    sim::TraceWriter trace(trace_file);
    const std::string tag(baselines::to_string(config.policy));
    for (std::uint64_t ep = 0; ep < config.eval_episodes; ++ep) {
        sim::reset_episode(env, ep);
        std::vector<sim::TaskEvent> events;
        auto ro = rollout_options(config);
        if (ep == 0) ro.events = &events;
        const auto run = agent::rollout(env, policies, config.system.episode_intervals, ro);
        if (ep == 0) trace.write(events);
        const auto row = make_row(ep, run.metrics, kNaN, kNaN);
        log.add(row);
        log_progress(options, tag, row, config.eval_episodes);
    }
    if (!trace_file) throw IoError("write failed: trace.csv");

    RunSummary s;
    s.command = "simulate";
    s.policy = tag;
    s.seed = config.seed;
    s = finish(s, log.rows(), log.rows().size(), out, "summary");
    s.wall_clock_s = seconds_since(start);
    write_timing(out, s.wall_clock_s);
    return s;
}

RunSummary run_evaluate(const ExperimentConfig& config, const fs::path& out, const RunOptions& options) {
    config.validate();
    if (baselines::is_heuristic(config.policy)) {
        throw ConfigError("policy", "evaluate runs trained actors; use simulate for fixed policies");
    }
    const auto start = Clock::now();
    amarl::EvalOptions eo;
    eo.observation = config.train.observation;
    eo.reward_constant = config.train.reward_constant;
    const auto report = amarl::evaluate(out / "checkpoint", config.system, config.eval_episodes, config.seed, eo);
    EpisodeLog log(out / "eval_episodes.csv");
    const std::string tag(baselines::to_string(config.policy));
    for (std::size_t k = 0; k < report.per_episode.size(); ++k) {
        const auto row = make_row(k, report.per_episode[k], kNaN, kNaN);
        log.add(row);
        log_progress(options, tag + " eval", row, report.per_episode.size());
    }
    RunSummary s;
    s.command = "evaluate";
    s.policy = tag;
    s.seed = config.seed;
    s.checkpoint = "checkpoint";
    s = finish(s, log.rows(), log.rows().size(), out, "eval_summary");
    s.wall_clock_s = seconds_since(start);
    return s;
}

std::vector<RunSummary> run_sweep(const ExperimentConfig& config, const fs::path& out, const RunOptions& options) {
    config.validate();
    if (config.sweep.axis == SweepAxis::none) throw ConfigError("sweep.axis", "no sweep axis set");
    make_dir(out);
    write_text(out / "config.ini", emit_config(config));
    auto table = open_out(out / "sweep.csv");
    auto runs = open_out(out / "runs.csv");
    table << kSweepHeader << '\n';
    runs << kSweepRunsHeader << '\n';
    const auto seeds = config.sweep.seeds.empty() ? std::vector<std::uint64_t>{config.seed} : config.sweep.seeds;
    const std::string axis(to_string(config.sweep.axis));

    std::vector<RunSummary> all;
    for (double value : config.sweep.values) {
        std::vector<double> reward, completion, latency, objective;
        for (std::uint64_t seed : seeds) {
            auto point = sweep_point(config, config.sweep.axis, value);
            apply_seed(point, seed);
            const auto dir = out / point_label(config.sweep.axis, value) / ("seed_" + std::to_string(seed));
            if (options.log) *options.log << "sweep " << axis << "=" << format_double(value) << " seed " << seed << "\n";
            RunOptions sub;
            sub.log = options.log;
            const auto s = baselines::is_heuristic(point.policy) ? run_simulate(point, dir, sub) : run_train(point, dir, sub);
            runs << axis << ',' << format_double(value) << ',' << seed << ',' << format_double(s.mean_reward) << ','
                 << format_double(s.completion_rate) << ',' << format_double(s.avg_latency_s) << ','
                 << format_double(s.objective_s) << '\n';
            runs.flush();
            reward.push_back(s.mean_reward);
            completion.push_back(s.completion_rate);
            latency.push_back(s.avg_latency_s);
            objective.push_back(s.objective_s);
            all.push_back(s);
        }
        const auto r = agent::mean_std(reward);
        const auto c = agent::mean_std(completion);
        const auto l = agent::mean_std(latency);
        const auto o = agent::mean_std(objective);
        table << axis << ',' << format_double(value) << ',' << seeds.size() << ',' << format_double(r.mean) << ','
              << format_double(r.std) << ',' << format_double(c.mean) << ',' << format_double(c.std) << ','
              << format_double(l.mean) << ',' << format_double(l.std) << ',' << format_double(o.mean) << ','
              << format_double(o.std) << '\n';
        table.flush();
        if (!table || !runs) throw IoError("write failed: sweep tables");
    }
    return all;
}

}  // namespace edgeoff::harness
