#include "mahsac.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "error.hpp"
#include "metrics.hpp"

namespace rlf {

static void check_config(const TrainConfig& c) {
    if (c.gamma < 0.0 || c.gamma >= 1.0) throw InputError("train config: gamma must be in [0,1)");
    if (c.tau <= 0.0 || c.tau > 1.0) throw InputError("train config: tau must be in (0,1]");
    if (c.alpha_d < 0.0 || c.alpha_c < 0.0)
        throw InputError("train config: temperatures must be nonnegative");
    if (c.actor_delay < 1) throw InputError("train config: actor_delay must be at least 1");
    if (c.batch_size < 1) throw InputError("train config: batch_size must be at least 1");
    if (c.episodes < 1) throw InputError("train config: episodes must be at least 1");
    if (c.buffer_capacity < std::size_t(c.batch_size))
        throw InputError("train config: buffer smaller than one batch");
}

AgentNets AgentNets::make(std::size_t obs_dim, std::size_t state_dim, int k,
                          const std::vector<int>& hidden, double actor_lr, double critic_lr,
                          Rng& rng) {
    std::vector<std::size_t> actor_sizes{obs_dim};
    for (int h : hidden) actor_sizes.push_back(std::size_t(h));
    actor_sizes.push_back(3 * std::size_t(k));
    std::vector<std::size_t> critic_sizes{state_dim + std::size_t(k)};
    for (int h : hidden) critic_sizes.push_back(std::size_t(h));
    critic_sizes.push_back(std::size_t(k));

    AgentNets n{Mlp::make(actor_sizes, rng), Mlp::make(critic_sizes, rng),
                Mlp::make(critic_sizes, rng), {}, {}, {}, {}, {}};
    n.target1 = n.critic1;
    n.target2 = n.critic2;
    n.actor_opt = AdamState::make(n.actor, actor_lr);
    n.critic1_opt = AdamState::make(n.critic1, critic_lr);
    n.critic2_opt = AdamState::make(n.critic2, critic_lr);
    return n;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) {
    if (capacity == 0) throw InputError("replay buffer: zero capacity");
    ring_.reserve(capacity);
    ring_.resize(capacity);
}

void ReplayBuffer::push(Transition t) {
    ring_[next_] = std::move(t);
    ++next_;
    if (next_ == ring_.size()) {
        next_ = 0;
        full_ = true;
    }
}

const Transition& ReplayBuffer::at(std::size_t i) const {
    if (i >= size()) throw InputError("replay buffer: index past size");
    return full_ ? ring_[(next_ + i) % ring_.size()] : ring_[i];
}

static std::vector<double> log_softmax(const std::vector<double>& logits) {
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - mx);
    double lse = mx + std::log(sum);
    std::vector<double> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
    return out;
}

std::vector<double> critic_target(const std::vector<const Transition*>& batch, AgentNets& nets,
                                  int agent, const TrainConfig& cfg, Rng& rng) {
    if (batch.empty()) throw InputError("critic target: empty batch");
    std::vector<double> y(batch.size());
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const Transition& tr = *batch[b];
        if (tr.done) {
            y[b] = tr.r;
            continue;
        }
        PolicyHeadOutput head =
            split_policy_head(nets.actor.forward(tr.o2[std::size_t(agent)]),
                              nets.actor.sizes.back() / 3);
        std::size_t k = head.logits.size();
        std::vector<double> logpi = log_softmax(head.logits);
        std::vector<double> a(k), logp(k);
        for (std::size_t j = 0; j < k; ++j) {
            double eps = rng.normal();
            double u = head.mean[j] + std::exp(head.log_std[j]) * eps;
            a[j] = std::tanh(u);
            logp[j] = squashed_log_density(a[j], u, head.mean[j], head.log_std[j]);
        }
        std::vector<double> input = tr.s2;
        input.insert(input.end(), a.begin(), a.end());
        std::vector<double> q1 = nets.target1.forward(input);
        std::vector<double> q2 = nets.target2.forward(input);
        double expectation = 0.0;
        for (std::size_t j = 0; j < k; ++j)
            expectation += std::exp(logpi[j]) * (std::min(q1[j], q2[j]) -
                                                 cfg.alpha_d * logpi[j] - cfg.alpha_c * logp[j]);
        y[b] = tr.r + cfg.gamma * expectation;
    }
    return y;
}

std::pair<double, double> update_critics(AgentNets& nets,
                                         const std::vector<const Transition*>& batch, int agent,
                                         const TrainConfig& cfg, Rng& rng) {
    if (batch.empty()) throw InputError("critic update: empty batch");
    std::vector<double> y = critic_target(batch, nets, agent, cfg, rng);
    double inv = 1.0 / double(batch.size());
    double losses[2];
    Mlp* critics[2] = {&nets.critic1, &nets.critic2};
    AdamState* opts[2] = {&nets.critic1_opt, &nets.critic2_opt};
    for (int c = 0; c < 2; ++c) {
        Gradients g = zero_gradients(*critics[c]);
        ForwardTrace trace;
        double loss = 0.0;
        for (std::size_t b = 0; b < batch.size(); ++b) {
            const Transition& tr = *batch[b];
            const AgentAction& act = tr.a[std::size_t(agent)];
            std::vector<double> input = tr.s;
            input.insert(input.end(), act.raw.begin(), act.raw.end());
            forward_trace(*critics[c], input, trace);
            const std::vector<double>& q = trace.act.back();
            double diff = q[std::size_t(act.attribute)] - y[b];
            loss += 0.5 * diff * diff;
            std::vector<double> upstream(q.size(), 0.0);
            upstream[std::size_t(act.attribute)] = diff * inv;
            backward(*critics[c], trace, upstream, g);
        }
        losses[c] = loss * inv;
        if (!std::isfinite(losses[c])) throw std::logic_error("critic update: loss not finite");
        adam_step(*opts[c], *critics[c], g);
    }
    return {losses[0], losses[1]};
}

namespace {

struct ActorEval {
    PolicyHeadOutput head;
    ForwardTrace actor_trace;
    ForwardTrace critic1_trace, critic2_trace;
    std::vector<double> logpi, pi, a, logp, g, qmin;
    std::vector<int> which_min;
    double loss = 0.0;
};

void eval_actor_sample(const AgentNets& nets, const GlobalState& s, const Observation& o,
                       const std::vector<double>& eps, const TrainConfig& cfg, ActorEval& ev) {
    std::size_t k = nets.actor.sizes.back() / 3;
    if (eps.size() != k) throw SchemaError("actor loss: noise vector length mismatch");
    forward_trace(nets.actor, o, ev.actor_trace);
    ev.head = split_policy_head(ev.actor_trace.act.back(), k);
    ev.logpi = log_softmax(ev.head.logits);
    ev.pi.resize(k);
    ev.a.resize(k);
    ev.logp.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        ev.pi[j] = std::exp(ev.logpi[j]);
        double u = ev.head.mean[j] + std::exp(ev.head.log_std[j]) * eps[j];
        ev.a[j] = std::tanh(u);
        ev.logp[j] = squashed_log_density(ev.a[j], u, ev.head.mean[j], ev.head.log_std[j]);
    }
    std::vector<double> input = s;
    input.insert(input.end(), ev.a.begin(), ev.a.end());
    forward_trace(nets.critic1, input, ev.critic1_trace);
    forward_trace(nets.critic2, input, ev.critic2_trace);
    const std::vector<double>& q1 = ev.critic1_trace.act.back();
    const std::vector<double>& q2 = ev.critic2_trace.act.back();
    ev.qmin.resize(k);
    ev.which_min.resize(k);
    ev.g.resize(k);
    ev.loss = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        ev.qmin[j] = std::min(q1[j], q2[j]);
        ev.which_min[j] = q1[j] <= q2[j] ? 0 : 1;
        ev.g[j] = cfg.alpha_d * ev.logpi[j] + cfg.alpha_c * ev.logp[j] -
                  cfg.q_coefficient * ev.qmin[j];
        ev.loss += ev.pi[j] * ev.g[j];
    }
}

} // namespace

double actor_sample_loss(const AgentNets& nets, const GlobalState& s, const Observation& o,
                         const std::vector<double>& eps, const TrainConfig& cfg) {
    ActorEval ev;
    eval_actor_sample(nets, s, o, eps, cfg, ev);
    return ev.loss;
}

void actor_sample_gradients(const AgentNets& nets, const GlobalState& s, const Observation& o,
                            const std::vector<double>& eps, const TrainConfig& cfg,
                            Gradients& out) {
    ActorEval ev;
    eval_actor_sample(nets, s, o, eps, cfg, ev);
    std::size_t k = ev.pi.size();

    // d loss / d action, through the critics (min picks one per coordinate).
    std::vector<double> up1(k, 0.0), up2(k, 0.0);
    for (std::size_t j = 0; j < k; ++j)
        (ev.which_min[j] == 0 ? up1 : up2)[j] = -cfg.q_coefficient * ev.pi[j];
    Gradients scratch1 = zero_gradients(nets.critic1);
    Gradients scratch2 = zero_gradients(nets.critic2);
    std::vector<double> in1 = backward(nets.critic1, ev.critic1_trace, up1, scratch1);
    std::vector<double> in2 = backward(nets.critic2, ev.critic2_trace, up2, scratch2);
    std::size_t state_dim = in1.size() - k;

    std::vector<double> upstream(3 * k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        double one_m_a2 = 1.0 - ev.a[j] * ev.a[j];
        double da = cfg.alpha_c * ev.pi[j] * 2.0 * ev.a[j] / (one_m_a2 + kSquashEps) +
                    in1[state_dim + j] + in2[state_dim + j];
        double sigma = std::exp(ev.head.log_std[j]);
        upstream[j] = ev.pi[j] * (ev.g[j] - ev.loss);
        upstream[k + j] = da * one_m_a2;
        double raw_log_std = ev.actor_trace.act.back()[2 * k + j];
        double dls = da * one_m_a2 * sigma * eps[j] - cfg.alpha_c * ev.pi[j];
        upstream[2 * k + j] =
            (raw_log_std > kLogStdMin && raw_log_std < kLogStdMax) ? dls : 0.0;
    }
    backward(nets.actor, ev.actor_trace, upstream, out);
}

double update_actor(AgentNets& nets, const std::vector<const Transition*>& batch, int agent,
                    const TrainConfig& cfg, Rng& rng) {
    if (batch.empty()) throw InputError("actor update: empty batch");
    std::size_t k = nets.actor.sizes.back() / 3;
    Gradients g = zero_gradients(nets.actor);
    double loss = 0.0;
    std::vector<double> eps(k);
    for (const Transition* tr : batch) {
        for (double& e : eps) e = rng.normal();
        loss += actor_sample_loss(nets, tr->s, tr->o[std::size_t(agent)], eps, cfg);
        actor_sample_gradients(nets, tr->s, tr->o[std::size_t(agent)], eps, cfg, g);
    }
    double inv = 1.0 / double(batch.size());
    loss *= inv;
    if (!std::isfinite(loss)) throw std::logic_error("actor update: loss not finite");
    for (auto& layer : g.weights)
        for (double& v : layer) v *= inv;
    for (auto& layer : g.biases)
        for (double& v : layer) v *= inv;
    adam_step(nets.actor_opt, nets.actor, g);
    return loss;
}

Trainer::Trainer(const EnvConfig& env_cfg, const Dataset& train, const TrainConfig& cfg)
    : env_cfg_(env_cfg), env_(env_cfg, train), cfg_(cfg), buffer_(cfg.buffer_capacity),
      rng_(cfg.seed) {
    check_config(cfg);
    for (int i = 0; i < env_cfg.n_agents; ++i)
        nets_.push_back(AgentNets::make(observation_size(env_cfg), state_size(env_cfg),
                                        env_cfg.attribute_count, cfg.hidden, cfg.actor_lr,
                                        cfg.critic_lr, rng_));
    critic_update_counts_.assign(std::size_t(env_cfg.n_agents), 0);
}

JointAction Trainer::act(const std::vector<Observation>& obs) {
    JointAction joint;
    std::size_t k = std::size_t(env_cfg_.attribute_count);
    bool warm = buffer_.size() < std::size_t(cfg_.warmup);
    for (int i = 0; i < env_cfg_.n_agents; ++i) {
        AgentAction a;
        if (warm) {
            a.attribute = int(rng_.integer(k));
            for (std::size_t j = 0; j < k; ++j) a.raw.push_back(rng_.uniform(-1.0, 1.0));
        } else {
            PolicyHeadOutput head =
                split_policy_head(nets_[std::size_t(i)].actor.forward(obs[std::size_t(i)]), k);
            std::vector<double> probs;
            a.attribute = sample_discrete(head.logits, rng_, probs);
            double logp, eps;
            for (std::size_t j = 0; j < k; ++j)
                a.raw.push_back(
                    sample_squashed_gaussian(head.mean[j], head.log_std[j], rng_, logp, eps));
        }
        joint.push_back(std::move(a));
    }
    return joint;
}

ForestModel Trainer::train() {
    int T = env_cfg_.max_timestep();
    for (int ep = 0; ep < cfg_.episodes; ++ep) {
        auto [s, obs] = env_.reset(cfg_.seed);
        double total_reward = 0.0;
        double actor_loss_sum = 0.0, critic_loss_sum = 0.0;
        int actor_updates = 0, critic_updates = 0;
        for (int t = 0; t < T; ++t) {
            JointAction a = act(obs);
            StepResult r = env_.step(a);
            total_reward += r.reward;
            buffer_.push(Transition{std::move(s), std::move(obs), std::move(a), r.reward,
                                    r.next_state, r.next_observations, r.done});
            s = std::move(r.next_state);
            obs = std::move(r.next_observations);

            if (buffer_.size() >= std::size_t(std::max(cfg_.warmup, cfg_.batch_size))) {
                for (int i = 0; i < env_cfg_.n_agents; ++i) {
                    std::vector<const Transition*> batch;
                    batch.reserve(std::size_t(cfg_.batch_size));
                    for (int b = 0; b < cfg_.batch_size; ++b)
                        batch.push_back(&buffer_.at(rng_.integer(buffer_.size())));
                    auto [l1, l2] = update_critics(nets_[std::size_t(i)], batch, i, cfg_, rng_);
                    critic_loss_sum += 0.5 * (l1 + l2);
                    ++critic_updates;
                    int& count = critic_update_counts_[std::size_t(i)];
                    ++count;
                    if (count % cfg_.actor_delay == 0) {
                        actor_loss_sum +=
                            update_actor(nets_[std::size_t(i)], batch, i, cfg_, rng_);
                        ++actor_updates;
                    }
                    soft_update(nets_[std::size_t(i)].target1, nets_[std::size_t(i)].critic1,
                                cfg_.tau);
                    soft_update(nets_[std::size_t(i)].target2, nets_[std::size_t(i)].critic2,
                                cfg_.tau);
                }
            }
        }
        EpisodeRecord rec;
        rec.episode = ep;
        rec.score = env_.score();
        rec.total_reward = total_reward;
        rec.actor_loss_mean = actor_updates ? actor_loss_sum / actor_updates : 0.0;
        rec.critic_loss_mean = critic_updates ? critic_loss_sum / critic_updates : 0.0;
        curve_.push_back(rec);
        if (rec.score > best_score_) {
            best_score_ = rec.score;
            best_forest_ = env_.extract_forest();
        }
    }
    return best_forest_;
}

std::string Trainer::curve_text() const {
    std::string out;
    char buf[160];
    for (const EpisodeRecord& r : curve_) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", r.episode, r.score,
                      r.total_reward, r.actor_loss_mean, r.critic_loss_mean);
        out += buf;
    }
    return out;
}

std::string train_config_text(const TrainConfig& cfg) {
    char buf[512];
    std::string hidden;
    for (int h : cfg.hidden) hidden += " " + std::to_string(h);
    std::snprintf(buf, sizeof buf,
                  "episodes %d\ngamma %.17g\ntau %.17g\nalpha_d %.17g\nalpha_c %.17g\n"
                  "actor_lr %.17g\ncritic_lr %.17g\nbatch_size %d\nactor_delay %d\nwarmup %d\n"
                  "buffer_capacity %zu\nq_coefficient %.17g\nseed %llu\n",
                  cfg.episodes, cfg.gamma, cfg.tau, cfg.alpha_d, cfg.alpha_c, cfg.actor_lr,
                  cfg.critic_lr, cfg.batch_size, cfg.actor_delay, cfg.warmup,
                  cfg.buffer_capacity, cfg.q_coefficient,
                  static_cast<unsigned long long>(cfg.seed));
    return std::string(buf) + "hidden" + hidden + "\n";
}

std::vector<std::pair<std::string, std::string>> Trainer::checkpoint_files() const {
    std::vector<std::pair<std::string, std::string>> files;
    std::string manifest = "agents " + std::to_string(env_cfg_.n_agents) + "\nattributes " +
                           std::to_string(env_cfg_.attribute_count) + "\n" +
                           train_config_text(cfg_);
    const char* roles[5] = {"actor", "critic1", "critic2", "target1", "target2"};
    for (std::size_t i = 0; i < nets_.size(); ++i) {
        const Mlp* nets[5] = {&nets_[i].actor, &nets_[i].critic1, &nets_[i].critic2,
                              &nets_[i].target1, &nets_[i].target2};
        for (int r = 0; r < 5; ++r) {
            std::string name =
                "agent" + std::to_string(i) + "_" + roles[r] + ".mlp";
            manifest += "file agent" + std::to_string(i) + " " + roles[r] + " " + name + "\n";
            files.emplace_back(name, mlp_text(*nets[r]));
        }
    }
    files.emplace_back("manifest.txt", manifest);
    return files;
}

} // namespace rlf
