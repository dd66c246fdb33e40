#include "neuralnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "error.hpp"

namespace rlf {

Mlp Mlp::make(const std::vector<std::size_t>& sizes, Rng& rng) {
    if (sizes.size() < 2) throw InputError("Mlp::make: need at least input and output sizes");
    Mlp net;
    net.sizes = sizes;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        std::size_t fan_in = sizes[l], fan_out = sizes[l + 1];
        double bound = std::sqrt(6.0 / double(fan_in + fan_out));
        std::vector<double> w(fan_out * fan_in);
        for (double& v : w) v = rng.uniform(-bound, bound);
        net.weights.push_back(std::move(w));
        net.biases.emplace_back(fan_out, 0.0);
    }
    return net;
}

std::vector<double> Mlp::forward(const std::vector<double>& input) const {
    ForwardTrace scratch;
    return forward_trace(*this, input, scratch);
}

std::vector<double> forward_trace(const Mlp& net, const std::vector<double>& input,
                                  ForwardTrace& trace) {
    if (input.size() != net.sizes.front())
        throw SchemaError("forward: input length " + std::to_string(input.size()) +
                          ", net expects " + std::to_string(net.sizes.front()));
    net.forward_calls++;
    net.last_input_size = input.size();
    std::size_t layers = net.weights.size();
    trace.pre.assign(layers, {});
    trace.act.assign(layers + 1, {});
    trace.act[0] = input;
    for (std::size_t l = 0; l < layers; ++l) {
        std::size_t in = net.sizes[l], out = net.sizes[l + 1];
        std::vector<double> z(out);
        const double* w = net.weights[l].data();
        const std::vector<double>& a = trace.act[l];
        for (std::size_t o = 0; o < out; ++o) {
            double s = net.biases[l][o];
            const double* wr = w + o * in;
            for (std::size_t i = 0; i < in; ++i) s += wr[i] * a[i];
            z[o] = s;
        }
        trace.pre[l] = z;
        if (l + 1 < layers)
            for (double& v : z) v = v > 0.0 ? v : 0.0;
        trace.act[l + 1] = std::move(z);
    }
    return trace.act.back();
}

Gradients zero_gradients(const Mlp& net) {
    Gradients g;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        g.weights.emplace_back(net.weights[l].size(), 0.0);
        g.biases.emplace_back(net.biases[l].size(), 0.0);
    }
    return g;
}

std::vector<double> backward(const Mlp& net, const ForwardTrace& trace,
                             const std::vector<double>& upstream, Gradients& grads) {
    std::size_t layers = net.weights.size();
    std::vector<double> grad_pre = upstream;
    std::vector<double> grad_act;
    for (std::size_t li = layers; li-- > 0;) {
        std::size_t in = net.sizes[li], out = net.sizes[li + 1];
        const std::vector<double>& a = trace.act[li];
        double* gw = grads.weights[li].data();
        for (std::size_t o = 0; o < out; ++o) {
            double g = grad_pre[o];
            grads.biases[li][o] += g;
            double* gwr = gw + o * in;
            for (std::size_t i = 0; i < in; ++i) gwr[i] += g * a[i];
        }
        grad_act.assign(in, 0.0);
        const double* w = net.weights[li].data();
        for (std::size_t o = 0; o < out; ++o) {
            double g = grad_pre[o];
            const double* wr = w + o * in;
            for (std::size_t i = 0; i < in; ++i) grad_act[i] += wr[i] * g;
        }
        if (li > 0) {
            grad_pre.assign(in, 0.0);
            for (std::size_t i = 0; i < in; ++i)
                grad_pre[i] = trace.pre[li - 1][i] > 0.0 ? grad_act[i] : 0.0;
        }
    }
    return grad_act;
}

AdamState AdamState::make(const Mlp& net, double lr) {
    AdamState st;
    st.lr = lr;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        st.m_w.emplace_back(net.weights[l].size(), 0.0);
        st.v_w.emplace_back(net.weights[l].size(), 0.0);
        st.m_b.emplace_back(net.biases[l].size(), 0.0);
        st.v_b.emplace_back(net.biases[l].size(), 0.0);
    }
    return st;
}

static void adam_update(double lr, double b1, double b2, double eps, double bc1, double bc2,
                        std::vector<double>& m, std::vector<double>& v,
                        const std::vector<double>& g, std::vector<double>& p) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
        double mhat = m[i] / bc1;
        double vhat = v[i] / bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

void adam_step(AdamState& state, Mlp& net, const Gradients& grads) {
    state.step++;
    double bc1 = 1.0 - std::pow(state.beta1, double(state.step));
    double bc2 = 1.0 - std::pow(state.beta2, double(state.step));
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        adam_update(state.lr, state.beta1, state.beta2, state.eps, bc1, bc2, state.m_w[l],
                    state.v_w[l], grads.weights[l], net.weights[l]);
        adam_update(state.lr, state.beta1, state.beta2, state.eps, bc1, bc2, state.m_b[l],
                    state.v_b[l], grads.biases[l], net.biases[l]);
    }
}

void soft_update(Mlp& target, const Mlp& online, double tau) {
    for (std::size_t l = 0; l < target.weights.size(); ++l) {
        for (std::size_t i = 0; i < target.weights[l].size(); ++i)
            target.weights[l][i] = tau * online.weights[l][i] + (1.0 - tau) * target.weights[l][i];
        for (std::size_t i = 0; i < target.biases[l].size(); ++i)
            target.biases[l][i] = tau * online.biases[l][i] + (1.0 - tau) * target.biases[l][i];
    }
}

PolicyHeadOutput split_policy_head(const std::vector<double>& raw, std::size_t k) {
    if (raw.size() != 3 * k)
        throw SchemaError("split_policy_head: raw length " + std::to_string(raw.size()) +
                          " is not 3k for k=" + std::to_string(k));
    PolicyHeadOutput out;
    out.logits.assign(raw.begin(), raw.begin() + std::ptrdiff_t(k));
    out.mean.assign(raw.begin() + std::ptrdiff_t(k), raw.begin() + std::ptrdiff_t(2 * k));
    out.log_std.assign(raw.begin() + std::ptrdiff_t(2 * k), raw.end());
    for (double& v : out.log_std) v = std::clamp(v, kLogStdMin, kLogStdMax);
    return out;
}

std::vector<double> softmax(const std::vector<double>& logits) {
    double hi = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - hi);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

std::size_t sample_discrete(const std::vector<double>& logits, Rng& rng,
                            std::vector<double>& probs_out) {
    probs_out = softmax(logits);
    double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < probs_out.size(); ++i) {
        acc += probs_out[i];
        if (u < acc) return i;
    }
    return probs_out.size() - 1;
}

double squashed_log_density(double a, double u, double mu, double log_std) {
    double sigma = std::exp(log_std);
    double z = (u - mu) / sigma;
    double gauss = -0.5 * z * z - log_std - 0.5 * std::log(2.0 * 3.141592653589793238462643);
    return gauss - std::log(1.0 - a * a + kSquashEps);
}

double sample_squashed_gaussian(double mu, double log_std, Rng& rng, double& log_density,
                                double& eps_out) {
    eps_out = rng.normal();
    double sigma = std::exp(log_std);
    double u = mu + sigma * eps_out;
    double a = std::tanh(u);
    log_density = squashed_log_density(a, u, mu, log_std);
    return a;
}

std::string mlp_text(const Mlp& net) {
    std::string out = "mlp";
    for (std::size_t s : net.sizes) out += " " + std::to_string(s);
    out += "\n";
    char buf[40];
    auto line = [&](const std::vector<double>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            std::snprintf(buf, sizeof buf, i ? " %.17g" : "%.17g", v[i]);
            out += buf;
        }
        out += "\n";
    };
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        line(net.weights[l]);
        line(net.biases[l]);
    }
    return out;
}

Mlp parse_mlp_text(const std::string& text) {
    std::istringstream in(text);
    std::string tag;
    in >> tag;
    if (tag != "mlp") throw InputError("parse_mlp_text: missing 'mlp' header");
    std::string rest;
    std::getline(in, rest);
    std::istringstream hdr(rest);
    Mlp net;
    std::size_t s;
    while (hdr >> s) net.sizes.push_back(s);
    if (net.sizes.size() < 2) throw InputError("parse_mlp_text: header lists no sizes");
    auto read_line = [&](std::size_t count) {
        std::string ln;
        if (!std::getline(in, ln)) throw InputError("parse_mlp_text: truncated checkpoint");
        std::istringstream ls(ln);
        std::vector<double> v(count);
        for (std::size_t i = 0; i < count; ++i)
            if (!(ls >> v[i])) throw InputError("parse_mlp_text: short parameter line");
        return v;
    };
    for (std::size_t l = 0; l + 1 < net.sizes.size(); ++l) {
        net.weights.push_back(read_line(net.sizes[l + 1] * net.sizes[l]));
        net.biases.push_back(read_line(net.sizes[l + 1]));
    }
    return net;
}

} // namespace rlf
