#pragma once
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dataset.hpp"
#include "forest_env.hpp"
#include "neuralnet.hpp"
#include "rng.hpp"
#include "tree.hpp"

namespace rlf {

struct TrainConfig {
    int episodes = 300;
    double gamma = 0.99;
    double tau = 0.005;
    double alpha_d = 0.2;       // discrete entropy temperature
    double alpha_c = 0.2;       // continuous entropy temperature
    double actor_lr = 3e-4;
    double critic_lr = 3e-4;
    int batch_size = 256;
    int actor_delay = 2;        // critic updates per actor update
    int warmup = 1000;          // random-policy transitions before learning
    std::size_t buffer_capacity = 100000;
    double q_coefficient = 2.0; // weight on the q-value inside the actor loss
    std::vector<int> hidden = {64, 64};
    std::uint64_t seed = 0;
};

// Actor maps an observation to 3K head outputs (logits | mean | log_std);
// critics map (global state ‖ continuous action vector) to K q-values, one
// per discrete choice. Targets start as exact copies of the online critics.
struct AgentNets {
    Mlp actor;
    Mlp critic1, critic2;
    Mlp target1, target2;
    AdamState actor_opt, critic1_opt, critic2_opt;

    static AgentNets make(std::size_t obs_dim, std::size_t state_dim, int k,
                          const std::vector<int>& hidden, double actor_lr, double critic_lr,
                          Rng& rng);
};

struct Transition {
    GlobalState s;
    std::vector<Observation> o;
    JointAction a;
    double r = 0.0;
    GlobalState s2;
    std::vector<Observation> o2;
    bool done = false;
};

// Fixed-capacity FIFO ring; at(0) is the oldest retained transition.
class ReplayBuffer {
  public:
    explicit ReplayBuffer(std::size_t capacity);
    void push(Transition t);
    std::size_t size() const { return full_ ? ring_.size() : next_; }
    std::size_t capacity() const { return ring_.size(); }
    const Transition& at(std::size_t i) const;

  private:
    std::vector<Transition> ring_;
    std::size_t next_ = 0;
    bool full_ = false;
};

// Per-sample target: y = r + gamma*(1-done)*sum_k pi'(k)*[min_j q'_j(k)
// - alpha_d*log pi'(k) - alpha_c*log p'(x_k)], with the continuous vector
// freshly reparameterized from the online actor at o'. Draws K normals per
// non-terminal sample, coordinate order 0..K-1.
std::vector<double> critic_target(const std::vector<const Transition*>& batch, AgentNets& nets,
                                  int agent, const TrainConfig& cfg, Rng& rng);

// One Adam step per critic on the mean squared Bellman error against the
// shared target; returns the two pre-step losses.
std::pair<double, double> update_critics(AgentNets& nets,
                                         const std::vector<const Transition*>& batch, int agent,
                                         const TrainConfig& cfg, Rng& rng);

// Actor loss per sample with externally supplied reparameterization noise:
// sum_k pi(k)*[alpha_d*log pi(k) + alpha_c*log p(x_k) - q_coefficient*
// min_j q_j(k)]. Gradients flow through the probabilities, the squashed
// actions, and the critic inputs.
double actor_sample_loss(const AgentNets& nets, const GlobalState& s, const Observation& o,
                         const std::vector<double>& eps, const TrainConfig& cfg);
void actor_sample_gradients(const AgentNets& nets, const GlobalState& s, const Observation& o,
                            const std::vector<double>& eps, const TrainConfig& cfg,
                            Gradients& out);

// Mean actor loss over the batch and one Adam step on the actor.
double update_actor(AgentNets& nets, const std::vector<const Transition*>& batch, int agent,
                    const TrainConfig& cfg, Rng& rng);

struct EpisodeRecord {
    int episode = 0;
    double score = 0.0;
    double total_reward = 0.0;
    double actor_loss_mean = 0.0;
    double critic_loss_mean = 0.0;
};

class Trainer {
  public:
    Trainer(const EnvConfig& env_cfg, const Dataset& train, const TrainConfig& cfg);

    // Decentralized: each agent acts from its own observation only; during
    // warmup the policy is uniform random and touches no network.
    JointAction act(const std::vector<Observation>& obs);

    ForestModel train();
    const std::vector<EpisodeRecord>& curve() const { return curve_; }
    std::string curve_text() const; // episode,score,total_reward,actor_loss_mean,critic_loss_mean
    double best_score() const { return best_score_; }

    std::vector<AgentNets>& nets() { return nets_; }
    const ReplayBuffer& buffer() const { return buffer_; }

    // One checkpoint file per network plus a manifest of roles and config.
    std::vector<std::pair<std::string, std::string>> checkpoint_files() const;

  private:
    EnvConfig env_cfg_;
    ForestEnv env_;
    TrainConfig cfg_;
    std::vector<AgentNets> nets_;
    ReplayBuffer buffer_;
    Rng rng_;
    std::vector<EpisodeRecord> curve_;
    std::vector<int> critic_update_counts_;
    ForestModel best_forest_;
    double best_score_ = -1.0;
};

std::string train_config_text(const TrainConfig& cfg);

} // namespace rlf
