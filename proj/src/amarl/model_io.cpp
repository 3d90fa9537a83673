#include "edgeoff/amarl/model_io.hpp"

#include <fstream>
#include <map>

#include "edgeoff/common/error.hpp"
#include "edgeoff/common/text.hpp"
#include "edgeoff/nn/checkpoint.hpp"

namespace edgeoff::amarl {

std::string actor_stem(std::size_t agent) { return "actor_" + std::to_string(agent); }

void save_model_meta(const std::filesystem::path& dir, const ModelMeta& meta) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "model.meta");
    if (!out) throw IoError("cannot write " + (dir / "model.meta").string());
    out << "agents " << meta.agents << "\nobs_dim " << meta.obs_dim << "\nactions " << meta.actions << "\nhidden "
        << meta.hidden << "\n";
}

ModelMeta load_model_meta(const std::filesystem::path& dir) {
    const auto path = dir / "model.meta";
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::map<std::string, std::uint64_t> fields;
    std::string line;
    while (std::getline(in, line)) {
        const auto parts = split(line, ' ');
        std::uint64_t v = 0;
        if (parts.size() != 2 || !parse_u64(parts[1], v)) throw IoError(path.string() + ": malformed line '" + line + "'");
        fields[parts[0]] = v;
    }
    ModelMeta meta;
    for (const char* key : {"agents", "obs_dim", "actions", "hidden"}) {
        if (!fields.count(key)) throw IoError(path.string() + ": missing '" + key + "'");
    }
    meta.agents = fields["agents"];
    meta.obs_dim = fields["obs_dim"];
    meta.actions = fields["actions"];
    meta.hidden = fields["hidden"];
    return meta;
}

void save_actors(const std::filesystem::path& dir, const std::vector<nn::ParamStore>& actors, bool with_optimizer) {
    for (std::size_t i = 0; i < actors.size(); ++i) nn::save_checkpoint(dir, actor_stem(i), actors[i], with_optimizer);
}

LoadedActors load_actors(const std::filesystem::path& dir, const ModelMeta& expected) {
    LoadedActors out;
    out.meta = load_model_meta(dir);
    const auto& m = out.meta;
    if (m.agents != expected.agents || m.obs_dim != expected.obs_dim || m.actions != expected.actions) {
        throw CompatibilityError("checkpoint was trained for " + std::to_string(m.agents) + " IEDs, observation " +
                                 std::to_string(m.obs_dim) + ", " + std::to_string(m.actions) +
                                 " actions; the configuration needs " + std::to_string(expected.agents) + ", " +
                                 std::to_string(expected.obs_dim) + ", " + std::to_string(expected.actions));
    }
    if (expected.hidden != 0 && m.hidden != expected.hidden) {
        throw CompatibilityError("checkpoint hidden size " + std::to_string(m.hidden) + " differs from " +
                                 std::to_string(expected.hidden));
    }
    for (std::size_t i = 0; i < m.agents; ++i) {
        if (!nn::checkpoint_exists(dir, actor_stem(i))) {
            throw CompatibilityError("checkpoint is missing " + actor_stem(i));
        }
        nn::ParamStore store = make_actor_store(out.actor, m.obs_dim, m.hidden, m.actions, 0);
        nn::load_checkpoint(dir, actor_stem(i), store, false);
        out.stores.push_back(std::move(store));
    }
    return out;
}

}  // namespace edgeoff::amarl
