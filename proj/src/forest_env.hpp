#pragma once
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dataset.hpp"
#include "tree.hpp"

namespace rlf {

enum class ScoreMetric { accuracy, g_mean };

// accuracy for roughly balanced data (imbalance ratio < 1.5), g_mean otherwise
ScoreMetric auto_score_metric(const Dataset& d);

struct EnvConfig {
    int n_agents = 2;
    int depth = 2;
    int attribute_count = 0;
    ScoreMetric score_metric = ScoreMetric::accuracy;
    double sc0 = 0.0;
    bool bootstrap = false; // per-agent bootstrap bags drawn at reset

    int max_timestep() const { return (1 << depth) - 1; } // internal positions
};

using Observation = std::vector<double>;
using GlobalState = std::vector<double>;

// Observation layout: [parent attribute one-hot M | parent threshold |
// parent type one-hot 2 (root sentinel, internal) | local position one-hot 2
// (left, right; zero at the root) | global position one-hot T].
std::size_t observation_size(const EnvConfig& c); // M + 5 + T

// State layout: n per-agent blocks [attr one-hot M | threshold | type 2]
// followed by one shared position block [local 2 | global T]; the position
// block is identical across agents at every step.
std::size_t state_size(const EnvConfig& c); // n*(M+3) + 2 + T

struct AgentAction {
    int attribute = 0;           // discrete choice k
    std::vector<double> raw;     // tanh outputs in [-1,1], length M; only
                                 // coordinate k shapes the tree
};
using JointAction = std::vector<AgentAction>;

struct StepResult {
    double reward = 0.0;
    GlobalState next_state;                    // all-zero when done
    std::vector<Observation> next_observations; // all-zero when done
    bool done = false;
    double score = 0.0;
};

// Joint node placement: at step t every agent fixes level-order position t of
// its own tree with (attribute, (raw+1)/2). A position whose routed training
// subset is empty or pure is frozen to a leaf; the action is still recorded
// (children observe it as parent information) but never routes an instance.
// Unplaced positions evaluate as temporary leaves, labeled by routed majority.
class ForestEnv {
  public:
    ForestEnv(const EnvConfig& cfg, const Dataset& train);

    std::pair<GlobalState, std::vector<Observation>> reset(std::uint64_t seed);
    StepResult step(const JointAction& a);
    ForestModel extract_forest() const; // requires a finished episode

    int timestep() const { return t_; }
    bool done() const { return done_; }
    double score() const { return sc_; }

    // One line per agent per step: t,agent,attribute,threshold,sc,r
    const std::string& trace() const { return trace_; }

  private:
    struct AgentTree {
        std::vector<int> attr;        // recorded action, -1 while unplaced
        std::vector<double> threshold;
        std::vector<char> frozen;
        std::vector<std::size_t> bag; // indices into the training set
    };

    TreeModel eval_tree(const AgentTree& at, int placed_through) const;
    Observation observe(int agent, int pos) const;
    GlobalState global_state(int pos) const;
    double evaluate(int placed_through, ForestModel& out) const;
    Dataset bag_dataset(const AgentTree& at) const;

    EnvConfig cfg_;
    Dataset data_;
    std::vector<AgentTree> agents_;
    ForestModel last_forest_;
    int t_ = 0;
    bool started_ = false;
    bool done_ = false;
    double sc_ = 0.0;
    std::string trace_;
};

} // namespace rlf
