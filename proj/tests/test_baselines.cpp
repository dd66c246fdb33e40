#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "baselines.hpp"
#include "error.hpp"
#include "metrics.hpp"
#include "rng.hpp"

using namespace rlf;

static Dataset make_data(std::vector<std::vector<double>> rows, std::vector<int> labels) {
    Dataset d;
    d.name = "t";
    d.features = std::move(rows);
    d.labels = std::move(labels);
    return d;
}

static Dataset random_data(Rng& rng, int n, int m) {
    Dataset d;
    d.name = "r";
    for (int i = 0; i < n; ++i) {
        std::vector<double> row;
        for (int j = 0; j < m; ++j) row.push_back(rng.uniform(0, 1));
        d.features.push_back(row);
        d.labels.push_back(int(rng.integer(2)));
    }
    return d;
}

// Exhaustive weighted-Gini split search over every (attribute, midpoint).
struct BestSplit {
    int attribute = -1;
    double threshold = 0.0;
    double impurity = 1e300;
};
static BestSplit brute_force_split(const Dataset& d, const std::vector<double>& w) {
    auto gini_part = [](double wpos, double wtot) {
        if (wtot <= 0) return 0.0;
        double p = wpos / wtot;
        return 1.0 - p * p - (1 - p) * (1 - p);
    };
    double W = std::accumulate(w.begin(), w.end(), 0.0);
    BestSplit best;
    for (int a = 0; a < int(d.attribute_count()); ++a) {
        std::vector<double> vals;
        for (const auto& row : d.features) vals.push_back(row[std::size_t(a)]);
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        for (std::size_t v = 0; v + 1 < vals.size(); ++v) {
            double thr = (vals[v] + vals[v + 1]) / 2.0;
            double wl = 0, wlpos = 0, wr = 0, wrpos = 0;
            for (std::size_t i = 0; i < d.instance_count(); ++i) {
                if (d.features[i][std::size_t(a)] <= thr) {
                    wl += w[i];
                    if (d.labels[i] == 1) wlpos += w[i];
                } else {
                    wr += w[i];
                    if (d.labels[i] == 1) wrpos += w[i];
                }
            }
            double imp = (wl * gini_part(wlpos, wl) + wr * gini_part(wrpos, wr)) / W;
            if (imp < best.impurity) {
                best.impurity = imp;
                best.attribute = a;
                best.threshold = thr;
            }
        }
    }
    return best;
}

TEST_CASE("pure labels make a single leaf") {
    Dataset d = make_data({{0.1, 0.5}, {0.9, 0.3}, {0.4, 0.8}}, {1, 1, 1});
    Rng rng(1);
    CartTree t = cart_build(d, CartConfig{}, rng);
    REQUIRE(t.nodes.size() == 1);
    CHECK(t.nodes[0].left == -1);
    CHECK(t.nodes[0].label == 1);
}

TEST_CASE("separable line splits at the midpoint") {
    Dataset d = make_data({{0.2}, {0.4}, {0.6}, {0.8}}, {0, 0, 1, 1});
    Rng rng(1);
    CartTree t = cart_build(d, CartConfig{}, rng);
    CHECK(cart_depth(t) == 1);
    CHECK(t.nodes[0].attribute == 0);
    CHECK(t.nodes[0].threshold == 0.5);
    CHECK(t.nodes[0].threshold > 0.4);
    CHECK(t.nodes[0].threshold < 0.6);
    for (std::size_t i = 0; i < 4; ++i) CHECK(cart_predict(t, d.features[i]) == d.labels[i]);
}

TEST_CASE("root split matches the exhaustive search") {
    Rng rng(2);
    for (int trial = 0; trial < 30; ++trial) {
        Dataset d = random_data(rng, 12, 3);
        std::vector<double> w(12, 1.0);
        if (trial % 2 == 1)
            for (double& v : w) v = rng.uniform(0.1, 2.0);

        Rng tree_rng(7);
        CartConfig cfg;
        cfg.max_depth = 1;
        CartTree t = cart_build(d, cfg, tree_rng, &w);
        BestSplit oracle = brute_force_split(d, w);
        if (oracle.attribute < 0) {
            CHECK(t.nodes.size() == 1);
            continue;
        }
        REQUIRE(t.nodes[0].left >= 0);
        // Equal minimal impurity; the chosen split may differ only on ties.
        Dataset left, right;
        std::vector<double> wl, wr;
        for (std::size_t i = 0; i < d.instance_count(); ++i) {
            bool go_left =
                d.features[i][std::size_t(t.nodes[0].attribute)] <= t.nodes[0].threshold;
            (go_left ? left : right).features.push_back(d.features[i]);
            (go_left ? left : right).labels.push_back(d.labels[i]);
            (go_left ? wl : wr).push_back(w[i]);
        }
        auto gini_of = [](const Dataset& s, const std::vector<double>& sw) {
            double wpos = 0, wtot = 0;
            for (std::size_t i = 0; i < s.instance_count(); ++i) {
                wtot += sw[i];
                if (s.labels[i] == 1) wpos += sw[i];
            }
            if (wtot <= 0) return 0.0;
            double p = wpos / wtot;
            return wtot * (1.0 - p * p - (1 - p) * (1 - p));
        };
        double W = std::accumulate(w.begin(), w.end(), 0.0);
        double chosen = (gini_of(left, wl) + gini_of(right, wr)) / W;
        CHECK(chosen == doctest::Approx(oracle.impurity).epsilon(1e-12));
    }
}

TEST_CASE("fully grown trees fit training data exactly") {
    Rng rng(3);
    Dataset d = random_data(rng, 40, 2);
    Rng tree_rng(1);
    CartTree t = cart_build(d, CartConfig{}, tree_rng);
    for (std::size_t i = 0; i < d.instance_count(); ++i)
        CHECK(cart_predict(t, d.features[i]) == d.labels[i]);

    CartConfig capped;
    capped.max_depth = 2;
    Rng rng2(1);
    CHECK(cart_depth(cart_build(d, capped, rng2)) <= 2);

    CartConfig stump;
    stump.max_depth = 0;
    Rng rng3(1);
    CHECK(cart_build(d, stump, rng3).nodes.size() == 1);
}

TEST_CASE("doubling a weight equals duplicating the instance") {
    Dataset twice = make_data({{0.1}, {0.3}, {0.3}, {0.7}, {0.9}}, {0, 1, 1, 0, 1});
    Dataset once = make_data({{0.1}, {0.3}, {0.7}, {0.9}}, {0, 1, 0, 1});
    std::vector<double> w{1.0, 2.0, 1.0, 1.0};
    Rng a(1), b(1);
    CHECK(cart_text(cart_build(twice, CartConfig{}, a)) ==
          cart_text(cart_build(once, CartConfig{}, b, &w)));
}

TEST_CASE("min_samples_split stops splitting") {
    Dataset d = make_data({{0.1}, {0.4}, {0.6}, {0.9}}, {0, 1, 0, 1});
    CartConfig cfg;
    cfg.min_samples_split = 5;
    Rng rng(1);
    CartTree t = cart_build(d, cfg, rng);
    CHECK(t.nodes.size() == 1);
    CHECK(t.nodes[0].label == 1); // 2-2 tie goes positive
}

TEST_CASE("empty dataset errors") {
    Dataset d;
    Rng rng(1);
    CHECK_THROWS_AS(cart_build(d, CartConfig{}, rng), InputError);
    CHECK_THROWS_AS(adaboost(d, 3), InputError);
    Dataset one = make_data({{0.5}}, {1});
    std::vector<double> w{0.5, 0.5};
    CHECK_THROWS_AS(cart_build(one, CartConfig{}, rng, &w), SchemaError);
}

TEST_CASE("degenerate forest equals a single tree") {
    Rng rng(4);
    Dataset d = random_data(rng, 30, 3);
    RandomForestModel f = random_forest(d, 1, CartConfig{}, 99, false);
    Rng tree_rng(99);
    CartTree t = cart_build(d, CartConfig{}, tree_rng);
    for (const auto& x : d.features) CHECK(rf_predict(f, x) == cart_predict(t, x));

    // Without bootstrap or subsetting every member is identical.
    RandomForestModel clones = random_forest(d, 5, CartConfig{}, 99, false);
    for (const auto& x : d.features) CHECK(rf_predict(clones, x) == cart_predict(t, x));
    CHECK(cart_text(clones.trees[0]) == cart_text(clones.trees[4]));
}

TEST_CASE("forest vote equals the member tally") {
    Rng rng(5);
    Dataset d = random_data(rng, 50, 3);
    CartConfig cfg;
    cfg.feature_subset = 1; // floor(sqrt(3))
    RandomForestModel f = random_forest(d, 15, cfg, 7);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> x{rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1)};
        int ones = 0;
        for (const CartTree& t : f.trees) ones += cart_predict(t, x);
        CHECK(rf_predict(f, x) == (2 * ones >= 15 ? 1 : 0));
        CHECK(rf_vote_fraction(f, x) == doctest::Approx(ones / 15.0).epsilon(1e-12));
    }
}

TEST_CASE("forest training is deterministic per seed") {
    Rng rng(6);
    Dataset d = random_data(rng, 40, 2);
    RandomForestModel a = random_forest(d, 5, CartConfig{}, 3);
    RandomForestModel b = random_forest(d, 5, CartConfig{}, 3);
    RandomForestModel c = random_forest(d, 5, CartConfig{}, 4);
    CHECK(rf_text(a) == rf_text(b));
    CHECK(rf_text(a) != rf_text(c));
}

TEST_CASE("boosting stops on a perfect first stump") {
    Dataset d = make_data({{0.2}, {0.4}, {0.6}, {0.8}}, {0, 0, 1, 1});
    AdaBoostModel m = adaboost(d, 10);
    REQUIRE(m.stumps.size() == 1);
    CHECK(m.round_errors[0] == 0.0);
    CHECK(m.alphas[0] == doctest::Approx(0.5 * std::log((1.0 - 1e-10) / 1e-10)).epsilon(1e-9));
    for (std::size_t i = 0; i < 4; ++i) CHECK(ada_predict(m, d.features[i]) == d.labels[i]);
}

TEST_CASE("boosting halts when no stump beats chance") {
    // A constant attribute allows no split; the majority leaf errs exactly 0.5.
    Dataset d = make_data({{0.5}, {0.5}, {0.5}, {0.5}}, {1, 0, 1, 0});
    AdaBoostModel m = adaboost(d, 5);
    CHECK(m.stumps.empty());
    CHECK(ada_predict(m, {0.5}) == 1); // empty margin ties positive
    CHECK(ada_score(m, {0.5}) == 0.5);
}

TEST_CASE("three rounds match an independent trace") {
    Dataset d = make_data(
        {{0.12, 0.71}, {0.25, 0.33}, {0.31, 0.92}, {0.47, 0.18}, {0.52, 0.64},
         {0.58, 0.05}, {0.63, 0.88}, {0.69, 0.27}, {0.74, 0.55}, {0.81, 0.13},
         {0.09, 0.46}, {0.18, 0.59}, {0.36, 0.81}, {0.44, 0.29}, {0.56, 0.73},
         {0.61, 0.37}, {0.78, 0.94}, {0.85, 0.62}, {0.91, 0.08}, {0.97, 0.41}},
        {0, 0, 1, 0, 1, 0, 1, 0, 1, 0, 0, 0, 1, 0, 1, 1, 1, 1, 0, 1});
    std::size_t n = 20;

    // Step-by-step replay with its own stump search and weight recurrences.
    std::vector<double> w(n, 1.0 / 20.0);
    std::vector<int> trace_attr;
    std::vector<double> trace_thr, trace_alpha;
    std::vector<std::vector<double>> trace_weights;
    for (int round = 0; round < 3; ++round) {
        BestSplit s = brute_force_split(d, w);
        REQUIRE(s.attribute >= 0);
        double wl = 0, wlpos = 0, wr = 0, wrpos = 0;
        for (std::size_t i = 0; i < n; ++i) {
            bool left = d.features[i][std::size_t(s.attribute)] <= s.threshold;
            (left ? wl : wr) += w[i];
            if (d.labels[i] == 1) (left ? wlpos : wrpos) += w[i];
        }
        int label_l = wlpos >= wl - wlpos ? 1 : 0;
        int label_r = wrpos >= wr - wrpos ? 1 : 0;
        double err = 0;
        std::vector<int> pred(n);
        for (std::size_t i = 0; i < n; ++i) {
            pred[i] = d.features[i][std::size_t(s.attribute)] <= s.threshold ? label_l : label_r;
            if (pred[i] != d.labels[i]) err += w[i];
        }
        REQUIRE(err < 0.5);
        REQUIRE(err > 0.0);
        double alpha = 0.5 * std::log((1 - err) / err);
        trace_attr.push_back(s.attribute);
        trace_thr.push_back(s.threshold);
        trace_alpha.push_back(alpha);
        double z = 0;
        for (std::size_t i = 0; i < n; ++i) {
            w[i] *= std::exp(pred[i] == d.labels[i] ? -alpha : alpha);
            z += w[i];
        }
        for (double& v : w) v /= z;
        trace_weights.push_back(w);
    }

    AdaBoostModel m = adaboost(d, 3);
    REQUIRE(m.stumps.size() == 3);
    for (int r = 0; r < 3; ++r) {
        CHECK(m.stumps[std::size_t(r)].nodes[0].attribute == trace_attr[std::size_t(r)]);
        CHECK(m.stumps[std::size_t(r)].nodes[0].threshold ==
              doctest::Approx(trace_thr[std::size_t(r)]).epsilon(1e-12));
        CHECK(m.alphas[std::size_t(r)] ==
              doctest::Approx(trace_alpha[std::size_t(r)]).epsilon(1e-9));
    }
    double sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(m.final_weights[i] == doctest::Approx(trace_weights[2][i]).epsilon(1e-9));
        CHECK(m.final_weights[i] > 0.0);
        sum += m.final_weights[i];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gbdt two-point hand case") {
    // p=0.5 makes the base log-odds 0; residuals +-0.5, curvature 0.25,
    // Newton leaves +-2, so one stage scores sigmoid(+-0.2).
    Dataset d = make_data({{0.8}, {0.2}}, {1, 0});
    GbdtModel m = gbdt_fit(d, 1, 0.1, 1);
    CHECK(m.base == 0.0);
    REQUIRE(m.stages.size() == 1);
    CHECK(gbdt_score(m, {0.8}) == doctest::Approx(1.0 / (1.0 + std::exp(-0.2))).epsilon(1e-12));
    CHECK(gbdt_score(m, {0.2}) == doctest::Approx(1.0 / (1.0 + std::exp(0.2))).epsilon(1e-12));
    CHECK(gbdt_predict(m, {0.8}) == 1);
    CHECK(gbdt_predict(m, {0.2}) == 0);

    // Balanced labels at the base score cost log(2) per instance.
    CHECK(m.train_cross_entropy[0] / 2.0 == doctest::Approx(0.6931).epsilon(1e-4));
}

TEST_CASE("gbdt cross-entropy never increases during training") {
    Rng rng(8);
    Dataset d;
    d.name = "b";
    for (int i = 0; i < 50; ++i) {
        d.features.push_back({rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1)});
        d.labels.push_back(i < 25 ? 1 : 0);
    }
    GbdtModel m = gbdt_fit(d, 100, 0.1, 3);
    REQUIRE(m.train_cross_entropy.size() == 101);
    for (std::size_t i = 0; i + 1 < m.train_cross_entropy.size(); ++i)
        CHECK(m.train_cross_entropy[i + 1] <= m.train_cross_entropy[i] + 1e-9);
    CHECK(m.train_cross_entropy[0] == doctest::Approx(50 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("gbdt score equals the stage sum computed independently") {
    Rng rng(9);
    Dataset d = random_data(rng, 60, 3);
    GbdtModel m = gbdt_fit(d, 25, 0.1, 3);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x{rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1)};
        double F = m.base;
        for (const CartTree& t : m.stages) {
            std::size_t idx = 0;
            while (t.nodes[idx].left >= 0)
                idx = std::size_t(x[std::size_t(t.nodes[idx].attribute)] <=
                                          t.nodes[idx].threshold
                                      ? t.nodes[idx].left
                                      : t.nodes[idx].right);
            F += m.learning_rate * t.nodes[idx].value;
        }
        CHECK(gbdt_score(m, x) == doctest::Approx(1.0 / (1.0 + std::exp(-F))).epsilon(1e-12));
    }
}

TEST_CASE("gbdt rejects single-class data and saturates correctly") {
    Dataset d = make_data({{0.1}, {0.9}}, {1, 1});
    CHECK_THROWS_AS(gbdt_fit(d, 5, 0.1, 3), InputError);

    GbdtModel m;
    m.base = 100.0;
    CHECK(gbdt_score(m, {0.5}) > 0.9999);
    m.base = 0.0;
    CHECK(gbdt_score(m, {0.5}) == 0.5);
    CHECK(gbdt_predict(m, {0.5}) == 1);
}

TEST_CASE("model text round-trips") {
    Rng rng(10);
    Dataset d = random_data(rng, 40, 2);

    RandomForestModel f = random_forest(d, 5, CartConfig{}, 11);
    RandomForestModel f2 = parse_rf_text(rf_text(f));
    AdaBoostModel a = adaboost(d, 5);
    AdaBoostModel a2 = parse_ada_text(ada_text(a));
    GbdtModel g = gbdt_fit(d, 10, 0.1, 3);
    GbdtModel g2 = parse_gbdt_text(gbdt_text(g));
    CHECK(rf_text(f2) == rf_text(f));
    CHECK(ada_text(a2) == ada_text(a));
    CHECK(gbdt_text(g2) == gbdt_text(g));
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x{rng.uniform(0, 1), rng.uniform(0, 1)};
        CHECK(rf_predict(f2, x) == rf_predict(f, x));
        CHECK(ada_predict(a2, x) == ada_predict(a, x));
        CHECK(ada_score(a2, x) == ada_score(a, x));
        CHECK(gbdt_score(g2, x) == gbdt_score(g, x));
    }

    // An ensemble that halted empty still round-trips.
    Dataset flat = make_data({{0.5}, {0.5}}, {1, 0});
    AdaBoostModel empty = adaboost(flat, 3);
    AdaBoostModel empty2 = parse_ada_text(ada_text(empty));
    CHECK(empty2.stumps.empty());

    CHECK_THROWS_AS(parse_rf_text("garbage"), InputError);
    CHECK_THROWS_AS(parse_cart_text(""), InputError);
    CHECK_THROWS_AS(parse_gbdt_text("base 1 2\nlearning_rate 0.1\n"), InputError);
    CHECK_THROWS_AS(parse_ada_text("alphas 0.5\nerrors 0.1\n"), InputError);
}
