#include "doctest.h"

#include <cmath>
#include <vector>

#include "error.hpp"
#include "neuralnet.hpp"
#include "rng.hpp"

using namespace rlf;

static double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

// Scalar loss for difference quotients: dot(upstream, net(x)).
static double loss_of(const Mlp& net, const std::vector<double>& x,
                      const std::vector<double>& upstream) {
    std::vector<double> y = net.forward(x);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += upstream[i] * y[i];
    return s;
}

TEST_CASE("forward basics") {
    Rng rng(1);
    Mlp zero = Mlp::make({2, 3, 2}, rng);
    for (auto& w : zero.weights) std::fill(w.begin(), w.end(), 0.0);
    for (auto& b : zero.biases) std::fill(b.begin(), b.end(), 0.0);
    auto out = zero.forward({0.4, -0.7});
    CHECK(out == std::vector<double>{0.0, 0.0});

    Mlp ident = Mlp::make({3, 3}, rng);
    std::fill(ident.weights[0].begin(), ident.weights[0].end(), 0.0);
    for (int i = 0; i < 3; ++i) ident.weights[0][std::size_t(i) * 3 + std::size_t(i)] = 1.0;
    std::fill(ident.biases[0].begin(), ident.biases[0].end(), 0.0);
    std::vector<double> x{0.3, -1.2, 5.0};
    CHECK(ident.forward(x) == x);

    CHECK_THROWS_AS(ident.forward({1.0}), SchemaError);
}

TEST_CASE("forward matches an independent evaluation") {
    Rng rng(2);
    Mlp net = Mlp::make({4, 6, 5, 3}, rng);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> x{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2),
                              rng.uniform(-2, 2)};
        // Straight-line re-evaluation with its own arithmetic order.
        std::vector<double> a = x;
        for (std::size_t l = 0; l < net.weights.size(); ++l) {
            std::size_t in = net.sizes[l], out_n = net.sizes[l + 1];
            std::vector<double> z(out_n, 0.0);
            for (std::size_t i = 0; i < in; ++i)
                for (std::size_t o = 0; o < out_n; ++o) z[o] += net.weights[l][o * in + i] * a[i];
            for (std::size_t o = 0; o < out_n; ++o) z[o] += net.biases[l][o];
            if (l + 1 < net.weights.size())
                for (double& v : z) v = std::max(v, 0.0);
            a = z;
        }
        std::vector<double> y = net.forward(x);
        for (std::size_t i = 0; i < y.size(); ++i)
            CHECK(y[i] == doctest::Approx(a[i]).epsilon(1e-12));
    }
}

TEST_CASE("backward matches central finite differences") {
    Rng rng(5);
    int done = 0;
    for (int attempt = 0; attempt < 50 && done < 8; ++attempt) {
        Mlp net = Mlp::make({3, 5, 4, 2}, rng);
        std::vector<double> x{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        std::vector<double> up{rng.uniform(-1, 1), rng.uniform(-1, 1)};

        ForwardTrace trace;
        forward_trace(net, x, trace);
        // A pre-activation within the step size of zero would put the
        // difference quotient across the ReLU kink; resample those.
        bool near_kink = false;
        for (std::size_t l = 0; l + 1 < trace.pre.size(); ++l)
            for (double p : trace.pre[l])
                if (std::abs(p) < 1e-3) near_kink = true;
        if (near_kink) continue;
        ++done;
        Gradients g = zero_gradients(net);
        std::vector<double> gx = backward(net, trace, up, g);

        const double h = 1e-5;
        for (std::size_t l = 0; l < net.weights.size(); ++l) {
            for (std::size_t i = 0; i < net.weights[l].size(); i += 7) {
                double saved = net.weights[l][i];
                net.weights[l][i] = saved + h;
                double lp = loss_of(net, x, up);
                net.weights[l][i] = saved - h;
                double lm = loss_of(net, x, up);
                net.weights[l][i] = saved;
                CHECK(rel_err(g.weights[l][i], (lp - lm) / (2 * h)) < 1e-4);
            }
            for (std::size_t i = 0; i < net.biases[l].size(); i += 3) {
                double saved = net.biases[l][i];
                net.biases[l][i] = saved + h;
                double lp = loss_of(net, x, up);
                net.biases[l][i] = saved - h;
                double lm = loss_of(net, x, up);
                net.biases[l][i] = saved;
                CHECK(rel_err(g.biases[l][i], (lp - lm) / (2 * h)) < 1e-4);
            }
        }
        // Input gradient too: the critic's action path depends on it.
        for (std::size_t i = 0; i < x.size(); ++i) {
            std::vector<double> xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            CHECK(rel_err(gx[i], (loss_of(net, xp, up) - loss_of(net, xm, up)) / (2 * h)) < 1e-4);
        }
    }
    CHECK(done == 8);
}

TEST_CASE("backward edge cases") {
    Rng rng(6);
    Mlp net = Mlp::make({3, 4, 2}, rng);
    ForwardTrace trace;
    forward_trace(net, {0.1, 0.2, 0.3}, trace);
    Gradients g = zero_gradients(net);
    backward(net, trace, {0.0, 0.0}, g);
    for (const auto& layer : g.weights)
        for (double v : layer) CHECK(v == 0.0);

    // Single affine layer: d(out_o)/d(w_oi) equals input_i.
    Mlp lin = Mlp::make({3, 2}, rng);
    ForwardTrace lt;
    std::vector<double> x{0.5, -1.5, 2.5};
    forward_trace(lin, x, lt);
    Gradients lg = zero_gradients(lin);
    backward(lin, lt, {1.0, 0.0}, lg);
    CHECK(lg.weights[0][0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(lg.weights[0][1] == doctest::Approx(-1.5).epsilon(1e-12));
    CHECK(lg.weights[0][2] == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(lg.weights[0][3] == 0.0);
}

TEST_CASE("adam") {
    Rng rng(7);
    Mlp net = Mlp::make({2, 2}, rng);
    std::vector<std::vector<double>> before_w = net.weights;
    AdamState st = AdamState::make(net, 0.1);
    Gradients g = zero_gradients(net);
    adam_step(st, net, g);
    CHECK(net.weights == before_w); // zero gradients move nothing

    // First step with g=1 everywhere moves each parameter by about -lr.
    AdamState fresh = AdamState::make(net, 0.1);
    for (auto& layer : g.weights) std::fill(layer.begin(), layer.end(), 1.0);
    for (auto& layer : g.biases) std::fill(layer.begin(), layer.end(), 1.0);
    adam_step(fresh, net, g);
    for (std::size_t i = 0; i < net.weights[0].size(); ++i)
        CHECK(net.weights[0][i] == doctest::Approx(before_w[0][i] - 0.1).epsilon(1e-6));
    // Equal gradients produce identical updates.
    CHECK(net.biases[0][0] == doctest::Approx(net.biases[0][1]).epsilon(1e-12));
}

TEST_CASE("soft_update") {
    Rng rng(8);
    Mlp online = Mlp::make({2, 3}, rng);
    Mlp target = Mlp::make({2, 3}, rng);

    Mlp t1 = target;
    soft_update(t1, online, 1.0);
    CHECK(t1.weights == online.weights);

    Mlp t0 = target;
    soft_update(t0, online, 0.0);
    CHECK(t0.weights == target.weights);

    Mlp half = target;
    half.weights[0][0] = 0.0;
    Mlp src = online;
    src.weights[0][0] = 1.0;
    soft_update(half, src, 0.5);
    CHECK(half.weights[0][0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("sample_discrete") {
    Rng rng(9);
    std::vector<double> probs;
    sample_discrete({0.3, 0.3, 0.3, 0.3}, rng, probs);
    for (double p : probs) CHECK(p == doctest::Approx(0.25).epsilon(1e-12));

    std::vector<int> counts(4, 0);
    for (int i = 0; i < 100000; ++i) counts[sample_discrete({0.3, 0.3, 0.3, 0.3}, rng, probs)]++;
    for (int c : counts) CHECK(std::abs(c / 100000.0 - 0.25) < 0.01);

    sample_discrete({1000.0, 0.0, 0.0}, rng, probs);
    CHECK(probs[0] == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i < 50; ++i) CHECK(sample_discrete({1000.0, 0.0, 0.0}, rng, probs) == 0);

    // Shift invariance.
    std::vector<double> a = softmax({0.1, 0.7, -0.3});
    std::vector<double> b = softmax({100.1, 100.7, 99.7});
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-9));
}

TEST_CASE("squashed gaussian sampling") {
    Rng rng(10);
    double logp, eps;
    // Near-zero sigma collapses to tanh(mu).
    for (double mu : {-1.5, 0.0, 0.7}) {
        double a = sample_squashed_gaussian(mu, kLogStdMin, rng, logp, eps);
        CHECK(std::abs(a - std::tanh(mu)) < 1e-8);
    }
    // Symmetry about zero for mu=0.
    double mean = 0.0;
    for (int i = 0; i < 100000; ++i) mean += sample_squashed_gaussian(0.0, -0.5, rng, logp, eps);
    CHECK(std::abs(mean / 100000.0) < 0.01);
}

TEST_CASE("squashed gaussian density integrates to one") {
    double mu = 0.4, log_std = std::log(0.6);
    const int slices = 400000;
    double sum = 0.0;
    double da = 2.0 / slices;
    for (int i = 0; i < slices; ++i) {
        double a = -1.0 + (i + 0.5) * da;
        double u = std::atanh(a);
        sum += std::exp(squashed_log_density(a, u, mu, log_std)) * da;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("split_policy_head clamps log_std") {
    std::vector<double> raw{1, 2, 3, 4, 5, 6, -50, 0.5, 50};
    PolicyHeadOutput h = split_policy_head(raw, 3);
    CHECK(h.logits == std::vector<double>{1, 2, 3});
    CHECK(h.mean == std::vector<double>{4, 5, 6});
    CHECK(h.log_std[0] == kLogStdMin);
    CHECK(h.log_std[1] == 0.5);
    CHECK(h.log_std[2] == kLogStdMax);
    CHECK_THROWS_AS(split_policy_head(raw, 4), SchemaError);

    double s = 0.0;
    for (double p : softmax(h.logits)) s += p;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("no NaN or Inf under input fuzz") {
    Rng rng(12);
    Mlp net = Mlp::make({4, 16, 16, 6}, rng);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> x(4);
        for (double& v : x) v = rng.uniform(-1e6, 1e6);
        for (double y : net.forward(x)) CHECK(std::isfinite(y));
        PolicyHeadOutput h = split_policy_head(net.forward(x), 2);
        for (double p : softmax(h.logits)) CHECK(std::isfinite(p));
        for (double ls : h.log_std) CHECK(std::exp(ls) > 0.0);
    }
}

TEST_CASE("checkpoint round-trip is exact") {
    Rng rng(13);
    Mlp net = Mlp::make({3, 8, 5}, rng);
    std::string text = mlp_text(net);
    Mlp back = parse_mlp_text(text);
    CHECK(back.sizes == net.sizes);
    CHECK(back.weights == net.weights);
    CHECK(back.biases == net.biases);
    CHECK(mlp_text(back) == text);
    CHECK_THROWS_AS(parse_mlp_text("nonsense"), InputError);
    CHECK_THROWS_AS(parse_mlp_text("mlp 3 4\n1 2 3\n"), InputError);
}

TEST_CASE("forward call accounting records calls and input sizes") {
    Rng rng(14);
    Mlp net = Mlp::make({5, 4, 2}, rng);
    CHECK(net.forward_calls == 0);
    net.forward({1, 2, 3, 4, 5});
    net.forward({0, 0, 0, 0, 0});
    CHECK(net.forward_calls == 2);
    CHECK(net.last_input_size == 5);
}
