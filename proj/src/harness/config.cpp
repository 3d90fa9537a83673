#include "edgeoff/harness/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "edgeoff/common/error.hpp"
#include "edgeoff/common/text.hpp"

namespace edgeoff::harness {

namespace {

using Setter = std::function<void(ExperimentConfig&, std::string_view, const std::string&)>;
using Getter = std::function<std::string(const ExperimentConfig&)>;

struct Field {
    std::string section;
    std::string key;
    Setter set;
    Getter get;
};

[[noreturn]] void bad_value(const std::string& field, std::string_view text, const char* expected) {
    throw ConfigError(field, "expected " + std::string(expected) + ", got '" + std::string(text) + "'");
}

double to_double(std::string_view text, const std::string& field) {
    double v = 0.0;
    if (!parse_double(trim(text), v)) bad_value(field, text, "a number");
    return v;
}

std::uint64_t to_u64(std::string_view text, const std::string& field) {
    std::uint64_t v = 0;
    if (!parse_u64(trim(text), v)) bad_value(field, text, "a non-negative integer");
    return v;
}

bool to_bool(std::string_view text, const std::string& field) {
    const auto t = trim(text);
    if (t == "true") return true;
    if (t == "false") return false;
    bad_value(field, text, "true or false");
}

std::vector<std::string> to_list(std::string_view text, const std::string& field) {
    const auto t = trim(text);
    if (t.size() < 2 || t.front() != '[' || t.back() != ']') bad_value(field, text, "a bracketed list");
    const auto inner = trim(std::string_view(t).substr(1, t.size() - 2));
    std::vector<std::string> out;
    if (inner.empty()) return out;
    for (const auto& item : split(inner, ',')) out.push_back(trim(item));
    return out;
}

sim::Range to_range(std::string_view text, const std::string& field) {
    const auto items = to_list(text, field);
    if (items.size() != 2) bad_value(field, text, "a two-element list [low, high]");
    return {to_double(items[0], field), to_double(items[1], field)};
}

std::string from_bool(bool v) { return v ? "true" : "false"; }
std::string from_range(const sim::Range& r) { return "[" + format_double(r.low) + ", " + format_double(r.high) + "]"; }

template <typename T>
std::string join(const std::vector<T>& values, const std::function<std::string(const T&)>& fmt) {
    std::string out = "[";
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (k) out += ", ";
        out += fmt(values[k]);
    }
    return out + "]";
}

std::vector<Field> build_fields() {
    std::vector<Field> f;
    const auto dbl = [&f](std::string section, std::string key, auto access) {
        f.push_back({section, key,
                     [access](ExperimentConfig& c, std::string_view v, const std::string& name) {
                         access(c) = to_double(v, name);
                     },
                     [access](const ExperimentConfig& c) {
                         return format_double(access(const_cast<ExperimentConfig&>(c)));
                     }});
    };
    const auto count = [&f](std::string section, std::string key, auto access) {
        f.push_back({section, key,
                     [access](ExperimentConfig& c, std::string_view v, const std::string& name) {
                         access(c) = static_cast<std::remove_reference_t<decltype(access(c))>>(to_u64(v, name));
                     },
                     [access](const ExperimentConfig& c) {
                         return std::to_string(access(const_cast<ExperimentConfig&>(c)));
                     }});
    };
    const auto flag = [&f](std::string section, std::string key, auto access) {
        f.push_back({section, key,
                     [access](ExperimentConfig& c, std::string_view v, const std::string& name) {
                         access(c) = to_bool(v, name);
                     },
                     [access](const ExperimentConfig& c) { return from_bool(access(const_cast<ExperimentConfig&>(c))); }});
    };
    const auto range = [&f](std::string section, std::string key, auto access) {
        f.push_back({section, key,
                     [access](ExperimentConfig& c, std::string_view v, const std::string& name) {
                         access(c) = to_range(v, name);
                     },
                     [access](const ExperimentConfig& c) { return from_range(access(const_cast<ExperimentConfig&>(c))); }});
    };

    count("", "seed", [](ExperimentConfig& c) -> std::uint64_t& { return c.seed; });
    f.push_back({"", "policy",
                 [](ExperimentConfig& c, std::string_view v, const std::string&) {
                     c.policy = baselines::parse_policy_kind(trim(v));
                 },
                 [](const ExperimentConfig& c) { return std::string(baselines::to_string(c.policy)); }});
    f.push_back({"", "output_dir",
                 [](ExperimentConfig& c, std::string_view v, const std::string& name) {
                     c.output_dir = trim(v);
                     if (c.output_dir.empty()) bad_value(name, v, "a directory");
                 },
                 [](const ExperimentConfig& c) { return c.output_dir; }});
    count("", "eval_episodes", [](ExperimentConfig& c) -> std::size_t& { return c.eval_episodes; });
    count("", "final_window", [](ExperimentConfig& c) -> std::size_t& { return c.final_window; });

    const std::string s = "system";
    count(s, "num_ieds", [](ExperimentConfig& c) -> std::size_t& { return c.system.num_ieds; });
    count(s, "num_ess", [](ExperimentConfig& c) -> std::size_t& { return c.system.num_ess; });
    count(s, "num_channels", [](ExperimentConfig& c) -> std::size_t& { return c.system.num_channels; });
    dbl(s, "bandwidth_hz", [](ExperimentConfig& c) -> double& { return c.system.bandwidth_hz; });
    dbl(s, "interval_s", [](ExperimentConfig& c) -> double& { return c.system.interval_s; });
    count(s, "episode_intervals", [](ExperimentConfig& c) -> std::size_t& { return c.system.episode_intervals; });
    dbl(s, "area_m", [](ExperimentConfig& c) -> double& { return c.system.area_m; });
    dbl(s, "task_prob", [](ExperimentConfig& c) -> double& { return c.system.task_prob; });
    range(s, "size_range", [](ExperimentConfig& c) -> sim::Range& { return c.system.size_mb; });
    range(s, "density_range", [](ExperimentConfig& c) -> sim::Range& { return c.system.density_gcycles_per_mb; });
    range(s, "deadline_range", [](ExperimentConfig& c) -> sim::Range& { return c.system.deadline_s; });
    range(s, "ied_gpu_hz", [](ExperimentConfig& c) -> sim::Range& { return c.system.ied_gpu_hz; });
    range(s, "es_gpu_hz", [](ExperimentConfig& c) -> sim::Range& { return c.system.es_gpu_hz; });
    dbl(s, "tx_power_w", [](ExperimentConfig& c) -> double& { return c.system.tx_power_w; });
    dbl(s, "noise_power", [](ExperimentConfig& c) -> double& { return c.system.noise_power; });
    dbl(s, "pathloss_exp", [](ExperimentConfig& c) -> double& { return c.system.pathloss_exp; });
    flag(s, "fading", [](ExperimentConfig& c) -> bool& { return c.system.fading; });
    dbl(s, "drop_penalty_s", [](ExperimentConfig& c) -> double& { return c.system.drop_penalty_s; });

    const std::string t = "train";
    count(t, "episodes", [](ExperimentConfig& c) -> std::size_t& { return c.train.episodes; });
    count(t, "hidden", [](ExperimentConfig& c) -> std::size_t& { return c.train.hidden; });
    count(t, "heads", [](ExperimentConfig& c) -> std::size_t& { return c.train.heads; });
    dbl(t, "lr_actor", [](ExperimentConfig& c) -> double& { return c.train.lr_actor; });
    dbl(t, "lr_critic", [](ExperimentConfig& c) -> double& { return c.train.lr_critic; });
    dbl(t, "gamma", [](ExperimentConfig& c) -> double& { return c.train.gamma; });
    count(t, "batch", [](ExperimentConfig& c) -> std::size_t& { return c.train.batch; });
    dbl(t, "dropout", [](ExperimentConfig& c) -> double& { return c.train.dropout; });
    dbl(t, "entropy_weight", [](ExperimentConfig& c) -> double& { return c.train.entropy_weight; });
    dbl(t, "smoothing_sigma", [](ExperimentConfig& c) -> double& { return c.train.smoothing_sigma; });
    dbl(t, "smoothing_clip", [](ExperimentConfig& c) -> double& { return c.train.smoothing_clip; });
    dbl(t, "polyak", [](ExperimentConfig& c) -> double& { return c.train.polyak; });
    dbl(t, "temperature_start", [](ExperimentConfig& c) -> double& { return c.train.temperature_start; });
    dbl(t, "temperature_end", [](ExperimentConfig& c) -> double& { return c.train.temperature_end; });
    count(t, "replay_capacity", [](ExperimentConfig& c) -> std::size_t& { return c.train.replay_capacity; });
    count(t, "warmup", [](ExperimentConfig& c) -> std::size_t& { return c.train.warmup; });
    count(t, "updates_per_episode", [](ExperimentConfig& c) -> std::size_t& { return c.train.updates_per_episode; });
    dbl(t, "grad_clip", [](ExperimentConfig& c) -> double& { return c.train.grad_clip; });
    dbl(t, "loss_ceiling", [](ExperimentConfig& c) -> double& { return c.train.loss_ceiling; });
    count(t, "divergence_patience", [](ExperimentConfig& c) -> std::size_t& { return c.train.divergence_patience; });
    dbl(t, "reward_constant", [](ExperimentConfig& c) -> double& { return c.train.reward_constant; });
    dbl(t, "critic_memory_decay", [](ExperimentConfig& c) -> double& { return c.train.critic_memory_decay; });
    dbl(t, "queue_cap_mb", [](ExperimentConfig& c) -> double& { return c.train.observation.queue_cap_mb; });
    dbl(t, "gain_cap", [](ExperimentConfig& c) -> double& { return c.train.observation.gain_cap; });
    dbl(t, "pathloss_cap", [](ExperimentConfig& c) -> double& { return c.train.observation.pathloss_cap; });
    flag(t, "attention", [](ExperimentConfig& c) -> bool& { return c.train.attention; });
    count(t, "checkpoint_every", [](ExperimentConfig& c) -> std::size_t& { return c.train.checkpoint_every; });

    const std::string w = "sweep";
    f.push_back({w, "axis",
                 [](ExperimentConfig& c, std::string_view v, const std::string&) {
                     c.sweep.axis = parse_sweep_axis(trim(v));
                 },
                 [](const ExperimentConfig& c) { return std::string(to_string(c.sweep.axis)); }});
    f.push_back({w, "values",
                 [](ExperimentConfig& c, std::string_view v, const std::string& name) {
                     c.sweep.values.clear();
                     for (const auto& item : to_list(v, name)) c.sweep.values.push_back(to_double(item, name));
                 },
                 [](const ExperimentConfig& c) {
                     return join<double>(c.sweep.values, [](const double& x) { return format_double(x); });
                 }});
    f.push_back({w, "seeds",
                 [](ExperimentConfig& c, std::string_view v, const std::string& name) {
                     c.sweep.seeds.clear();
                     for (const auto& item : to_list(v, name)) c.sweep.seeds.push_back(to_u64(item, name));
                 },
                 [](const ExperimentConfig& c) {
                     return join<std::uint64_t>(c.sweep.seeds, [](const std::uint64_t& x) { return std::to_string(x); });
                 }});
    return f;
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = build_fields();
    return table;
}

/// The message of a ConfigError without its "field: " prefix.
std::string message_of(const ConfigError& e) {
    const std::string what = e.what();
    const std::string prefix = e.field() + ": ";
    return what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
}

std::string qualified(const std::string& section, const std::string& key) {
    return section.empty() ? key : section + "." + key;
}

}  // namespace

SweepAxis parse_sweep_axis(std::string_view tag) {
    if (tag == "none") return SweepAxis::none;
    if (tag == "task_prob") return SweepAxis::task_prob;
    if (tag == "deadline") return SweepAxis::deadline;
    if (tag == "num_ieds") return SweepAxis::num_ieds;
    throw ConfigError("sweep.axis", "unknown axis '" + std::string(tag) + "' (expected none, task_prob, deadline or num_ieds)");
}

std::string_view to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::none: return "none";
        case SweepAxis::task_prob: return "task_prob";
        case SweepAxis::deadline: return "deadline";
        case SweepAxis::num_ieds: return "num_ieds";
    }
    return "none";
}

void ExperimentConfig::validate() const {
    try {
        system.validate();
    } catch (const ConfigError& e) {
        throw ConfigError("system." + e.field(), message_of(e));
    }
    try {
        train.validate();
    } catch (const ConfigError& e) {
        throw ConfigError("train." + e.field(), message_of(e));
    }
    if (eval_episodes == 0) throw ConfigError("eval_episodes", "must be at least 1");
    if (final_window == 0) throw ConfigError("final_window", "must be at least 1");
    if (sweep.axis == SweepAxis::none) return;
    if (sweep.values.empty()) throw ConfigError("sweep.values", "a sweep needs at least one value");
    for (double v : sweep.values) {
        try {
            sweep_point(*this, sweep.axis, v).system.validate();
        } catch (const ConfigError& e) {
            throw ConfigError("sweep.values", "value " + format_double(v) + " is out of range (" + e.field() + ": " + message_of(e) + ")");
        }
    }
}

void apply_seed(ExperimentConfig& config, std::uint64_t seed) {
    config.seed = seed;
    config.system.seed = seed;
    config.train.seed = seed;
}

ExperimentConfig sweep_point(const ExperimentConfig& base, SweepAxis axis, double value) {
    ExperimentConfig c = base;
    switch (axis) {
        case SweepAxis::none: break;
        case SweepAxis::task_prob: c.system.task_prob = value; break;
        case SweepAxis::deadline:
            // The axis moves the upper end; the lower end follows only if it would overtake it.
            c.system.deadline_s.high = value;
            c.system.deadline_s.low = std::min(c.system.deadline_s.low, value);
            break;
        case SweepAxis::num_ieds: {
            if (!(value >= 1.0) || value != std::floor(value)) {
                throw ConfigError("sweep.values", "IED count " + format_double(value) + " is not a positive integer");
            }
            c.system.num_ieds = static_cast<std::size_t>(value);
            break;
        }
    }
    return c;
}

ExperimentConfig parse_config_text(std::string_view text, const std::string& source) {
    static const std::set<std::string> sections{"", "system", "train", "sweep"};
    ExperimentConfig config;
    std::string section;
    std::map<std::string, std::size_t> seen;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    const auto where = [&](std::size_t n) { return source + ":" + std::to_string(n) + ": "; };

    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("section", where(line_no) + "unterminated section header");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (!sections.count(section) || section.empty()) {
                throw ConfigError(section, where(line_no) + "unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("syntax", where(line_no) + "expected key = value");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        const std::string name = qualified(section, key);
        const Field* field = nullptr;
        for (const auto& f : fields()) {
            if (f.section == section && f.key == key) field = &f;
        }
        if (!field) throw ConfigError(name, where(line_no) + "unknown key '" + key + "'");
        if (seen.count(name)) {
            throw ConfigError(name, where(line_no) + "duplicate key (first set on line " + std::to_string(seen[name]) + ")");
        }
        seen[name] = line_no;
        try {
            field->set(config, value, name);
        } catch (const ConfigError& e) {
            throw ConfigError(name, where(line_no) + message_of(e));
        }
    }
    apply_seed(config, config.seed);
    try {
        config.validate();
    } catch (const ConfigError& e) {
        const auto it = seen.find(e.field());
        const std::string at = it == seen.end() ? source + ": " : where(it->second);
        throw ConfigError(e.field(), at + message_of(e));
    }
    return config;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str(), path.string());
}

std::string emit_config(const ExperimentConfig& config) {
    std::ostringstream out;
    std::string section;
    for (const auto& f : fields()) {
        if (f.section != section) {
            section = f.section;
            out << "\n[" << section << "]\n";
        }
        out << f.key << " = " << f.get(config) << "\n";
    }
    return out.str();
}

}  // namespace edgeoff::harness
