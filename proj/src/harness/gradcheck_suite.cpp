#include "edgeoff/harness/gradcheck_suite.hpp"

#include <algorithm>
#include <functional>
#include <ostream>

#include "edgeoff/amarl/learner.hpp"
#include "edgeoff/amarl/replay.hpp"
#include "edgeoff/common/rng.hpp"
#include "edgeoff/common/text.hpp"
#include "edgeoff/nn/attention.hpp"
#include "edgeoff/nn/gradcheck.hpp"
#include "edgeoff/nn/layers.hpp"

namespace edgeoff::harness {

namespace {

using nn::ParamStore;
using nn::Tensor2;

constexpr std::uint64_t kSuiteStream = 0x6763;

void fill(Tensor2& t, Rng& rng, double scale) {
    for (auto& v : t.values()) v = rng.uniform(-scale, scale);
}

void randomize(ParamStore& store, Rng& rng, double scale) {
    for (auto& p : store.params()) fill(p.value, rng, scale);
}

Tensor2 random_tensor(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
    Tensor2 t(rows, cols);
    fill(t, rng, scale);
    return t;
}

// L = <c, y> + |y|^2 / 2
double quad(const Tensor2& y, const Tensor2& c) {
    double s = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) s += c.data()[k] * y.data()[k] + 0.5 * y.data()[k] * y.data()[k];
    return s;
}

Tensor2 quad_grad(const Tensor2& y, const Tensor2& c) {
    Tensor2 g = c;
    nn::add_inplace(g, y);
    return g;
}

/// One scalar-valued case: a store, its loss and its backward.
struct Case {
    ParamStore store;
    std::function<double()> loss;
    std::function<void()> backward;
};

using CaseFactory = std::function<void(Case&, std::uint64_t seed)>;

// Unary map of a single input tensor.
CaseFactory unary(std::function<Tensor2(const Tensor2&)> f,
                  std::function<Tensor2(const Tensor2& x, const Tensor2& y, const Tensor2& dy)> b, double scale) {
    return [f, b, scale](Case& k, std::uint64_t seed) {
        Rng rng(derive_seed(seed, kSuiteStream, 1));
        const auto xi = k.store.add("x", 4, 5);
        randomize(k.store, rng, scale);
        const auto c = random_tensor(4, 5, rng);
        auto* store = &k.store;
        k.loss = [f, store, xi, c] { return quad(f((*store)[xi].value), c); };
        k.backward = [f, b, store, xi, c] {
            const auto& x = (*store)[xi].value;
            const auto y = f(x);
            nn::add_inplace((*store)[xi].grad, b(x, y, quad_grad(y, c)));
        };
    };
}

amarl::Batch rollout_batch(const amarl::Networks& net, const amarl::TrainConfig& cfg, std::size_t ieds,
                           std::size_t ess, std::size_t size, std::uint64_t seed) {
    auto sys = sim::desk_system_config();
    sys.num_ieds = ieds;
    sys.num_ess = ess;
    sys.num_channels = ess;
    sys.episode_intervals = 30;
    auto env = sim::new_system(sys, seed);
    amarl::ReplayBuffer replay(100, ieds, agent::observation_size(ess), ess + 1, cfg.hidden);
    auto policies = amarl::make_actor_policies(net.actor, net.actors, seed);
    for (std::uint64_t ep = 0; ep < 2; ++ep) {
        sim::reset_episode(env, ep);
        agent::RolloutOptions ro;
        ro.explore = true;
        replay.push_episode(agent::rollout(env, policies, sys.episode_intervals, ro).steps);
    }
    Rng rng(seed);
    return replay.sample(size, rng);
}

amarl::TrainConfig small_learner() {
    amarl::TrainConfig t;
    t.hidden = 8;
    t.heads = 2;
    return t;
}

CaseFactory dense_case(DenseBackward custom) {
    return [custom](Case& k, std::uint64_t seed) {
        Rng rng(derive_seed(seed, kSuiteStream, 2));
        const auto d = nn::Dense::create(k.store, "d", 4, 3);
        const auto xi = k.store.add("x", 5, 4);
        randomize(k.store, rng, 1.0);
        const auto c = random_tensor(5, 3, rng);
        auto* s = &k.store;
        k.loss = [d, s, xi, c] { return quad(d.forward(*s, (*s)[xi].value), c); };
        k.backward = [d, s, xi, c, custom] {
            const auto& x = (*s)[xi].value;
            const auto dy = quad_grad(d.forward(*s, x), c);
            nn::add_inplace((*s)[xi].grad, custom ? custom(d, *s, x, dy) : d.backward(*s, x, dy));
        };
    };
}

struct Named {
    std::string name;
    CaseFactory make;
};

std::vector<Named> catalogue() {
    std::vector<Named> out;
    out.push_back({"dense", dense_case({})});
    out.push_back({"relu", unary(nn::relu, [](const Tensor2&, const Tensor2& y, const Tensor2& dy) {
                                 return nn::relu_backward(y, dy);
                             }, 1.0)});
    out.push_back({"sigmoid", unary(nn::sigmoid, [](const Tensor2&, const Tensor2& y, const Tensor2& dy) {
                                    return nn::sigmoid_backward(y, dy);
                                }, 3.0)});
    out.push_back({"softmax", unary(nn::softmax_rows, [](const Tensor2&, const Tensor2& y, const Tensor2& dy) {
                                    return nn::softmax_backward(y, dy);
                                }, 3.0)});
    out.push_back({"log_softmax", unary(nn::log_softmax_rows, [](const Tensor2&, const Tensor2& y, const Tensor2& dy) {
                                        return nn::log_softmax_backward(y, dy);
                                    }, 3.0)});
    out.push_back({"relaxed_one_hot", [](Case& k, std::uint64_t seed) {
                       Rng rng(derive_seed(seed, kSuiteStream, 3));
                       const auto xi = k.store.add("logits", 4, 3);
                       randomize(k.store, rng, 2.0);
                       const auto noise = random_tensor(4, 3, rng);
                       const auto c = random_tensor(4, 3, rng);
                       const double tau = 0.5 + rng.uniform();
                       auto* s = &k.store;
                       k.loss = [s, xi, noise, c, tau] { return quad(nn::relaxed_one_hot((*s)[xi].value, noise, tau), c); };
                       k.backward = [s, xi, noise, c, tau] {
                           const auto y = nn::relaxed_one_hot((*s)[xi].value, noise, tau);
                           nn::add_inplace((*s)[xi].grad, nn::relaxed_one_hot_backward(y, quad_grad(y, c), tau));
                       };
                   }});
    for (bool shared : {true, false}) {
        out.push_back({shared ? "attention_self" : "attention_cross", [shared](Case& k, std::uint64_t seed) {
                           Rng rng(derive_seed(seed, kSuiteStream, 4));
                           const auto mha = nn::MultiHeadAttention::create(k.store, "att", 6, 2);
                           const auto qi = k.store.add("xq", 6, 6);
                           const auto ki = k.store.add("xkv", 6, 6);
                           randomize(k.store, rng, 0.8);
                           const auto c = random_tensor(6, 6, rng);
                           auto* s = &k.store;
                           const auto keys = [s, shared, qi, ki]() -> const Tensor2& {
                               return shared ? (*s)[qi].value : (*s)[ki].value;
                           };
                           k.loss = [mha, s, qi, keys, c] { return quad(mha.forward(*s, (*s)[qi].value, keys(), 3, true), c); };
                           k.backward = [mha, s, qi, ki, keys, c, shared] {
                               nn::AttentionCache cache;
                               const auto y = mha.forward(*s, (*s)[qi].value, keys(), 3, true, &cache);
                               auto [dq, dkv] = mha.backward(*s, cache, quad_grad(y, c));
                               nn::add_inplace((*s)[qi].grad, dq);
                               nn::add_inplace(shared ? (*s)[qi].grad : (*s)[ki].grad, dkv);
                           };
                       }});
    }
    out.push_back({"actor", [](Case& k, std::uint64_t seed) {
                       Rng rng(derive_seed(seed, kSuiteStream, 5));
                       const auto actor = amarl::Actor::create(k.store, 8, 6, 3);
                       randomize(k.store, rng, 0.7);
                       const auto obs = random_tensor(4, 8, rng);
                       const auto h = random_tensor(4, 6, rng);
                       const auto mask = nn::dropout_mask(4, 6, 0.1, rng);
                       const auto c = random_tensor(4, 3, rng);
                       auto* s = &k.store;
                       k.loss = [actor, s, obs, h, mask, c] {
                           amarl::ActorCache cache;
                           return quad(actor.forward(*s, obs, h, cache, &mask), c);
                       };
                       k.backward = [actor, s, obs, h, mask, c] {
                           amarl::ActorCache cache;
                           const auto y = actor.forward(*s, obs, h, cache, &mask);
                           actor.backward(*s, cache, quad_grad(y, c));
                       };
                   }});
    out.push_back({"critic", [](Case& k, std::uint64_t seed) {
                       Rng rng(derive_seed(seed, kSuiteStream, 6));
                       const auto critic = amarl::Critic::create(k.store, 4, 3, 8, 2, true);
                       const auto ai = k.store.add("actions", 6, 3);
                       randomize(k.store, rng, 0.6);
                       const auto obs = random_tensor(6, 4, rng);
                       const auto ctx = random_tensor(6, 4, rng);
                       const auto mask = nn::dropout_mask(6, 8, 0.1, rng);
                       const auto c = random_tensor(6, 1, rng);
                       auto* s = &k.store;
                       k.loss = [critic, s, ai, obs, ctx, mask, c] {
                           amarl::CriticCache cache;
                           return quad(critic.forward(*s, amarl::CriticInput{obs, (*s)[ai].value, ctx}, 3, cache, &mask), c);
                       };
                       k.backward = [critic, s, ai, obs, ctx, mask, c] {
                           amarl::CriticCache cache;
                           const auto q = critic.forward(*s, amarl::CriticInput{obs, (*s)[ai].value, ctx}, 3, cache, &mask);
                           nn::add_inplace((*s)[ai].grad, critic.backward(*s, cache, quad_grad(q, c)));
                       };
                   }});
    return out;
}

GradcheckEntry run_case(const std::string& name, const CaseFactory& make, std::size_t seeds, double tol) {
    GradcheckEntry e;
    e.name = name;
    e.seeds = seeds;
    for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
        Case k;
        make(k, seed);
        const auto r = nn::gradcheck(k.store, k.loss, k.backward);
        if (r.max_rel_error >= e.worst_error) {
            e.worst_error = r.max_rel_error;
            e.worst_param = r.worst_param + "[" + std::to_string(r.worst_index) + "]";
            e.worst_seed = seed;
        }
    }
    e.passed = e.worst_error < tol;
    return e;
}

void track(GradcheckEntry& e, const nn::GradcheckResult& r, std::uint64_t seed, const std::string& where) {
    if (r.max_rel_error < e.worst_error) return;
    e.worst_error = r.max_rel_error;
    e.worst_param = where + r.worst_param + "[" + std::to_string(r.worst_index) + "]";
    e.worst_seed = seed;
}

GradcheckEntry critic_loss_check(std::size_t seeds, double tol) {
    GradcheckEntry e;
    e.name = "critic_loss";
    e.seeds = seeds;
    for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
        for (bool attention : {true, false}) {
            auto cfg = small_learner();
            cfg.attention = attention;
            auto net = amarl::make_networks(2, 2, cfg, seed);
            const auto batch = rollout_batch(net, cfg, 2, 2, 2, seed);
            Rng rng(derive_seed(seed, kSuiteStream, 7));
            randomize(net.critic_store, rng, 0.6);
            std::vector<double> y(batch.size * batch.agents);
            for (auto& v : y) v = rng.uniform(-2.0, 3.0);
            const auto mask = nn::dropout_mask(batch.size * batch.agents, cfg.hidden, 0.1, rng);
            const auto r = nn::gradcheck(
                net.critic_store,
                [&] { return amarl::critic_loss(net.critic, net.critic_store, batch, y, &mask, false); },
                [&] { amarl::critic_loss(net.critic, net.critic_store, batch, y, &mask, true); });
            track(e, r, seed, attention ? "" : "ablation:");
        }
    }
    e.passed = e.worst_error < tol;
    return e;
}

GradcheckEntry actor_loss_check(std::size_t seeds, double tol) {
    GradcheckEntry e;
    e.name = "actor_loss";
    e.seeds = seeds;
    for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
        const auto cfg = small_learner();
        auto net = amarl::make_networks(2, 2, cfg, seed);
        const auto batch = rollout_batch(net, cfg, 2, 2, 3, seed);
        Rng rng(derive_seed(seed, kSuiteStream, 8));
        randomize(net.critic_store, rng, 0.6);
        for (auto& s : net.actors) randomize(s, rng, 0.6);
        amarl::ActorLossInputs inputs;
        inputs.temperature = 0.7;
        inputs.entropy_weight = 0.05;
        for (std::size_t i = 0; i < 2; ++i) {
            inputs.noise.push_back(random_tensor(batch.size, 3, rng));
            inputs.dropout.push_back(nn::dropout_mask(batch.size, cfg.hidden, 0.1, rng));
        }
        for (std::size_t i = 0; i < 2; ++i) {
            const auto r = nn::gradcheck(
                net.actors[i],
                [&] {
                    const auto l = amarl::actor_losses(net.actor, net.actors, net.critic, net.critic_store, batch, inputs, false);
                    return l[0] + l[1];
                },
                [&] { amarl::actor_losses(net.actor, net.actors, net.critic, net.critic_store, batch, inputs, true); });
            track(e, r, seed, "agent" + std::to_string(i) + ":");
        }
    }
    e.passed = e.worst_error < tol;
    return e;
}

}  // namespace

GradcheckEntry check_dense(std::size_t seeds, double tolerance, const DenseBackward& backward) {
    return run_case("dense", dense_case(backward), seeds, tolerance);
}

bool GradcheckReport::passed() const {
    return std::all_of(entries.begin(), entries.end(), [](const GradcheckEntry& e) { return e.passed; });
}

GradcheckReport run_gradcheck_suite(std::size_t seeds, double tolerance) {
    GradcheckReport report;
    report.tolerance = tolerance;
    for (const auto& c : catalogue()) report.entries.push_back(run_case(c.name, c.make, seeds, tolerance));
    report.entries.push_back(critic_loss_check(seeds, tolerance));
    report.entries.push_back(actor_loss_check(seeds, tolerance));
    return report;
}

void print_report(std::ostream& out, const GradcheckReport& report) {
    for (const auto& e : report.entries) {
        out << (e.passed ? "ok   " : "FAIL ") << e.name << "  seeds " << e.seeds << "  worst "
            << format_double(e.worst_error) << "  at " << e.worst_param << " (seed " << e.worst_seed << ")\n";
    }
    out << (report.passed() ? "all checks below " : "some checks at or above ") << format_double(report.tolerance)
        << "\n";
}

}  // namespace edgeoff::harness
