#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "rng.hpp"

namespace rlf {

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;
inline constexpr double kSquashEps = 1e-6;

// Fixed-topology multilayer perceptron: affine layers, ReLU between, identity
// output. weights[l] is (sizes[l+1] x sizes[l]) row-major.
struct Mlp {
    std::vector<std::size_t> sizes;
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    // Forward-call accounting; lets tests assert which nets a code path used.
    mutable std::uint64_t forward_calls = 0;
    mutable std::size_t last_input_size = 0;

    static Mlp make(const std::vector<std::size_t>& sizes, Rng& rng);
    std::vector<double> forward(const std::vector<double>& input) const;
};

// Activations saved by forward_trace; act[0] is the input, act.back() the output.
struct ForwardTrace {
    std::vector<std::vector<double>> pre;
    std::vector<std::vector<double>> act;
};

std::vector<double> forward_trace(const Mlp& net, const std::vector<double>& input,
                                  ForwardTrace& trace);

struct Gradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};

Gradients zero_gradients(const Mlp& net);

// Accumulates parameter gradients into grads and returns the input gradient.
std::vector<double> backward(const Mlp& net, const ForwardTrace& trace,
                             const std::vector<double>& upstream, Gradients& grads);

struct AdamState {
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t step = 0;
    std::vector<std::vector<double>> m_w, v_w, m_b, v_b;

    static AdamState make(const Mlp& net, double lr);
};

void adam_step(AdamState& state, Mlp& net, const Gradients& grads);

// target = tau * online + (1 - tau) * target, elementwise.
void soft_update(Mlp& target, const Mlp& online, double tau);

// Actor head layout: [logits K | mean K | raw log_std K]; log_std is clamped.
struct PolicyHeadOutput {
    std::vector<double> logits;
    std::vector<double> mean;
    std::vector<double> log_std;
};

PolicyHeadOutput split_policy_head(const std::vector<double>& raw, std::size_t k);

std::vector<double> softmax(const std::vector<double>& logits);

std::size_t sample_discrete(const std::vector<double>& logits, Rng& rng,
                            std::vector<double>& probs_out);

// a = tanh(mu + sigma * eps); log density carries the change-of-variables
// correction -log(1 - a^2 + 1e-6). eps_out feeds reparameterized gradients.
double sample_squashed_gaussian(double mu, double log_std, Rng& rng, double& log_density,
                                double& eps_out);

// Log density of a previously squashed value given its pre-squash input u.
double squashed_log_density(double a, double u, double mu, double log_std);

// Versioned checkpoint: "mlp <sizes>" header, then per layer one line of
// weights and one of biases. Round-trips exactly.
std::string mlp_text(const Mlp& net);
Mlp parse_mlp_text(const std::string& text);

} // namespace rlf
