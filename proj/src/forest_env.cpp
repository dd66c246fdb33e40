#include "forest_env.hpp"

#include <algorithm>
#include <cstdio>

#include "error.hpp"
#include "metrics.hpp"
#include "rng.hpp"

namespace rlf {

ScoreMetric auto_score_metric(const Dataset& d) {
    return imbalance_ratio(d) < 1.5 ? ScoreMetric::accuracy : ScoreMetric::g_mean;
}

std::size_t observation_size(const EnvConfig& c) {
    return std::size_t(c.attribute_count) + 5 + std::size_t(c.max_timestep());
}

std::size_t state_size(const EnvConfig& c) {
    return std::size_t(c.n_agents) * (std::size_t(c.attribute_count) + 3) + 2 +
           std::size_t(c.max_timestep());
}

ForestEnv::ForestEnv(const EnvConfig& cfg, const Dataset& train) : cfg_(cfg), data_(train) {
    if (cfg.n_agents < 1 || cfg.depth < 1)
        throw InputError("forest env: n_agents and depth must be at least 1");
    if (std::size_t(cfg.attribute_count) != train.attribute_count())
        throw SchemaError("forest env: config expects " + std::to_string(cfg.attribute_count) +
                          " attributes but the dataset has " +
                          std::to_string(train.attribute_count()));
    if (train.instance_count() == 0) throw InputError("forest env: empty training set");
}

std::pair<GlobalState, std::vector<Observation>> ForestEnv::reset(std::uint64_t seed) {
    Rng rng(seed);
    agents_.assign(std::size_t(cfg_.n_agents), {});
    std::size_t slots = tree_slots(cfg_.depth);
    for (AgentTree& at : agents_) {
        at.attr.assign(slots, -1);
        at.threshold.assign(slots, 0.0);
        at.frozen.assign(slots, 0);
        if (cfg_.bootstrap) {
            at.bag.resize(data_.instance_count());
            for (std::size_t& i : at.bag) i = std::size_t(rng.integer(data_.instance_count()));
        } else {
            at.bag.resize(data_.instance_count());
            for (std::size_t i = 0; i < at.bag.size(); ++i) at.bag[i] = i;
        }
    }
    t_ = 0;
    started_ = true;
    done_ = false;
    sc_ = cfg_.sc0;
    trace_.clear();
    last_forest_ = ForestModel{};

    std::vector<Observation> obs;
    for (int i = 0; i < cfg_.n_agents; ++i) obs.push_back(observe(i, 0));
    return {global_state(0), obs};
}

// Level-order path from the root down to pos.
static std::vector<std::size_t> path_to(std::size_t pos) {
    std::vector<std::size_t> path{pos};
    while (pos > 0) {
        pos = (pos - 1) / 2;
        path.push_back(pos);
    }
    std::reverse(path.begin(), path.end());
    return path;
}

StepResult ForestEnv::step(const JointAction& a) {
    if (!started_) throw InputError("forest env: step before reset");
    if (done_) throw InputError("forest env: step after episode end");
    if (a.size() != std::size_t(cfg_.n_agents))
        throw SchemaError("forest env: joint action has " + std::to_string(a.size()) +
                          " entries for " + std::to_string(cfg_.n_agents) + " agents");

    std::size_t pos = std::size_t(t_);
    std::vector<std::size_t> path = path_to(pos);
    for (int i = 0; i < cfg_.n_agents; ++i) {
        const AgentAction& act = a[std::size_t(i)];
        if (act.attribute < 0 || act.attribute >= cfg_.attribute_count)
            throw SchemaError("forest env: attribute " + std::to_string(act.attribute) +
                              " out of range for agent " + std::to_string(i));
        if (act.raw.size() != std::size_t(cfg_.attribute_count))
            throw SchemaError("forest env: continuous action length " +
                              std::to_string(act.raw.size()) + " for agent " + std::to_string(i));
        AgentTree& at = agents_[std::size_t(i)];
        at.attr[pos] = act.attribute;
        at.threshold[pos] = (act.raw[std::size_t(act.attribute)] + 1.0) / 2.0;

        // Frozen test: the subset routed to pos by the already-placed
        // ancestors is empty or single-class.
        std::int64_t pos_n = 0, neg_n = 0;
        for (std::size_t row : at.bag) {
            std::size_t cur = 0;
            bool reaches = true;
            for (std::size_t d = 0; d + 1 < path.size(); ++d) {
                if (at.frozen[path[d]]) {
                    reaches = false;
                    break;
                }
                std::size_t next =
                    data_.features[row][std::size_t(at.attr[path[d]])] <= at.threshold[path[d]]
                        ? 2 * cur + 1
                        : 2 * cur + 2;
                if (next != path[d + 1]) {
                    reaches = false;
                    break;
                }
                cur = next;
            }
            if (!reaches) continue;
            (data_.labels[row] == 1 ? pos_n : neg_n)++;
        }
        if (pos_n == 0 || neg_n == 0) at.frozen[pos] = 1;
    }

    ForestModel forest;
    double sc = evaluate(t_, forest);
    double r = sc - sc_;
    sc_ = sc;
    last_forest_ = forest;

    char buf[128];
    for (int i = 0; i < cfg_.n_agents; ++i) {
        std::snprintf(buf, sizeof buf, "%d,%d,%d,%.17g,%.17g,%.17g\n", t_, i,
                      agents_[std::size_t(i)].attr[pos], agents_[std::size_t(i)].threshold[pos],
                      sc, r);
        trace_ += buf;
    }

    StepResult out;
    out.reward = r;
    out.score = sc;
    out.done = (t_ + 1 == cfg_.max_timestep());
    if (out.done) {
        done_ = true;
        out.next_state.assign(state_size(cfg_), 0.0);
        out.next_observations.assign(std::size_t(cfg_.n_agents),
                                     Observation(observation_size(cfg_), 0.0));
    } else {
        ++t_;
        out.next_state = global_state(t_);
        for (int i = 0; i < cfg_.n_agents; ++i) out.next_observations.push_back(observe(i, t_));
    }
    return out;
}

TreeModel ForestEnv::eval_tree(const AgentTree& at, int placed_through) const {
    TreeModel t;
    t.depth = cfg_.depth;
    t.nodes.assign(tree_slots(cfg_.depth), NodeSpec{});
    int T = cfg_.max_timestep();
    // Walk top-down so descendants of a leaf stay inactive.
    std::vector<std::size_t> stack{0};
    while (!stack.empty()) {
        std::size_t j = stack.back();
        stack.pop_back();
        bool internal = j < std::size_t(T) && int(j) <= placed_through && !at.frozen[j];
        if (internal) {
            t.nodes[j] = NodeSpec{NodeKind::internal, at.attr[j], at.threshold[j], -1};
            stack.push_back(2 * j + 1);
            stack.push_back(2 * j + 2);
        } else {
            t.nodes[j] = NodeSpec{NodeKind::leaf, -1, 0.0, -1};
        }
    }
    return t;
}

Dataset ForestEnv::bag_dataset(const AgentTree& at) const {
    Dataset d;
    d.name = data_.name;
    for (std::size_t row : at.bag) {
        d.features.push_back(data_.features[row]);
        d.labels.push_back(data_.labels[row]);
    }
    return d;
}

double ForestEnv::evaluate(int placed_through, ForestModel& out) const {
    out.trees.clear();
    for (const AgentTree& at : agents_) {
        TreeModel shape = eval_tree(at, placed_through);
        if (cfg_.bootstrap) {
            Dataset bag = bag_dataset(at);
            out.trees.push_back(label_leaves(shape, bag));
        } else {
            out.trees.push_back(label_leaves(shape, data_));
        }
    }
    std::vector<int> pred;
    pred.reserve(data_.instance_count());
    for (const auto& x : data_.features) pred.push_back(forest_predict(out, x));
    Confusion c = confusion(pred, data_.labels);
    return cfg_.score_metric == ScoreMetric::accuracy ? accuracy(c) : g_mean(c);
}

Observation ForestEnv::observe(int agent, int pos) const {
    std::size_t M = std::size_t(cfg_.attribute_count);
    Observation o(observation_size(cfg_), 0.0);
    if (pos == 0) {
        o[M + 1] = 1.0; // root sentinel
    } else {
        const AgentTree& at = agents_[std::size_t(agent)];
        std::size_t parent = (std::size_t(pos) - 1) / 2;
        o[std::size_t(at.attr[parent])] = 1.0;
        o[M] = at.threshold[parent];
        o[M + 2] = 1.0; // internal parent
        o[M + 3 + (pos % 2 == 1 ? 0 : 1)] = 1.0;
    }
    o[M + 5 + std::size_t(pos)] = 1.0;
    return o;
}

GlobalState ForestEnv::global_state(int pos) const {
    std::size_t M = std::size_t(cfg_.attribute_count);
    GlobalState s(state_size(cfg_), 0.0);
    for (int i = 0; i < cfg_.n_agents; ++i) {
        std::size_t base = std::size_t(i) * (M + 3);
        if (pos == 0) {
            s[base + M + 1] = 1.0;
        } else {
            const AgentTree& at = agents_[std::size_t(i)];
            std::size_t parent = (std::size_t(pos) - 1) / 2;
            s[base + std::size_t(at.attr[parent])] = 1.0;
            s[base + M] = at.threshold[parent];
            s[base + M + 2] = 1.0;
        }
    }
    std::size_t shared = std::size_t(cfg_.n_agents) * (M + 3);
    if (pos > 0) s[shared + (pos % 2 == 1 ? 0 : 1)] = 1.0;
    s[shared + 2 + std::size_t(pos)] = 1.0;
    return s;
}

ForestModel ForestEnv::extract_forest() const {
    if (!done_) throw InputError("forest env: episode not finished");
    return last_forest_;
}

} // namespace rlf
