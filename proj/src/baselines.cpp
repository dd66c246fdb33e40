#include "baselines.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "error.hpp"

namespace rlf {

static std::size_t cart_route(const CartTree& t, const std::vector<double>& x) {
    std::size_t idx = 0;
    while (t.nodes[idx].left >= 0) {
        const CartNode& n = t.nodes[idx];
        if (n.attribute < 0 || std::size_t(n.attribute) >= x.size())
            throw SchemaError("cart: node expects attribute " + std::to_string(n.attribute) +
                              " but instance has " + std::to_string(x.size()) + " attributes");
        idx = std::size_t(x[std::size_t(n.attribute)] <= n.threshold ? n.left : n.right);
    }
    return idx;
}

int cart_predict(const CartTree& t, const std::vector<double>& x) {
    return t.nodes[cart_route(t, x)].label;
}

double cart_value(const CartTree& t, const std::vector<double>& x) {
    return t.nodes[cart_route(t, x)].value;
}

static int depth_below(const CartTree& t, std::size_t idx) {
    const CartNode& n = t.nodes[idx];
    if (n.left < 0) return 0;
    return 1 + std::max(depth_below(t, std::size_t(n.left)), depth_below(t, std::size_t(n.right)));
}

int cart_depth(const CartTree& t) {
    return depth_below(t, 0);
}

static double gini(double wpos, double w) {
    if (w <= 0.0) return 0.0;
    double p = wpos / w;
    return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

static std::vector<int> attribute_subset(int total, int m, Rng& rng) {
    std::vector<int> attrs(static_cast<std::size_t>(total));
    std::iota(attrs.begin(), attrs.end(), 0);
    if (m > 0 && m < total) {
        for (int i = 0; i < m; ++i) {
            std::size_t j = std::size_t(i) + rng.integer(std::size_t(total - i));
            std::swap(attrs[std::size_t(i)], attrs[j]);
        }
        attrs.resize(std::size_t(m));
        std::sort(attrs.begin(), attrs.end());
    }
    return attrs;
}

// Ascending attribute and threshold scan with strict improvement keeps the
// lowest (attribute, threshold) among impurity ties.
static int build_class_node(const Dataset& d, const CartConfig& cfg, Rng& rng,
                            const std::vector<double>& w, const std::vector<std::size_t>& idx,
                            int depth, CartTree& out) {
    double wtot = 0.0, wpos = 0.0;
    for (std::size_t i : idx) {
        wtot += w[i];
        if (d.labels[i] == 1) wpos += w[i];
    }
    int me = int(out.nodes.size());
    out.nodes.push_back(CartNode{});
    auto make_leaf = [&]() {
        out.nodes[std::size_t(me)].label = wpos >= wtot - wpos ? 1 : 0;
        return me;
    };
    bool pure = wpos <= 0.0 || wpos >= wtot;
    if (pure || (cfg.max_depth >= 0 && depth >= cfg.max_depth) ||
        idx.size() < std::size_t(std::max(cfg.min_samples_split, 2)))
        return make_leaf();

    int best_attr = -1;
    double best_thr = 0.0;
    double best_imp = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> order;
    for (int a : attribute_subset(int(d.attribute_count()), cfg.feature_subset, rng)) {
        order.assign(idx.begin(), idx.end());
        std::stable_sort(order.begin(), order.end(), [&](std::size_t p, std::size_t q) {
            return d.features[p][std::size_t(a)] < d.features[q][std::size_t(a)];
        });
        double wl = 0.0, wlpos = 0.0;
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
            wl += w[order[i]];
            if (d.labels[order[i]] == 1) wlpos += w[order[i]];
            double lo = d.features[order[i]][std::size_t(a)];
            double hi = d.features[order[i + 1]][std::size_t(a)];
            if (!(lo < hi)) continue;
            double thr = (lo + hi) / 2.0;
            if (!(lo < thr && thr < hi)) continue; // adjacent doubles
            double imp =
                (wl * gini(wlpos, wl) + (wtot - wl) * gini(wpos - wlpos, wtot - wl)) / wtot;
            if (imp < best_imp) {
                best_imp = imp;
                best_attr = a;
                best_thr = thr;
            }
        }
    }
    if (best_attr < 0) return make_leaf();

    std::vector<std::size_t> left, right;
    for (std::size_t i : idx)
        (d.features[i][std::size_t(best_attr)] <= best_thr ? left : right).push_back(i);
    out.nodes[std::size_t(me)].attribute = best_attr;
    out.nodes[std::size_t(me)].threshold = best_thr;
    int l = build_class_node(d, cfg, rng, w, left, depth + 1, out);
    int r = build_class_node(d, cfg, rng, w, right, depth + 1, out);
    out.nodes[std::size_t(me)].left = l;
    out.nodes[std::size_t(me)].right = r;
    return me;
}

CartTree cart_build(const Dataset& d, const CartConfig& cfg, Rng& rng,
                    const std::vector<double>* weights) {
    if (d.instance_count() == 0) throw InputError("cart: empty dataset");
    std::vector<double> w;
    if (weights) {
        if (weights->size() != d.instance_count())
            throw SchemaError("cart: " + std::to_string(weights->size()) + " weights for " +
                              std::to_string(d.instance_count()) + " instances");
        w = *weights;
    } else {
        w.assign(d.instance_count(), 1.0);
    }
    std::vector<std::size_t> idx(d.instance_count());
    std::iota(idx.begin(), idx.end(), 0);
    CartTree t;
    build_class_node(d, cfg, rng, w, idx, 0, t);
    return t;
}

RandomForestModel random_forest(const Dataset& d, int n_trees, const CartConfig& cfg,
                                std::uint64_t seed, bool bootstrap) {
    if (n_trees < 1) throw InputError("random forest: need at least one tree");
    Rng rng(seed);
    RandomForestModel m;
    for (int t = 0; t < n_trees; ++t) {
        if (bootstrap) {
            Dataset bag;
            bag.name = d.name;
            for (std::size_t i = 0; i < d.instance_count(); ++i) {
                std::size_t j = rng.integer(d.instance_count());
                bag.features.push_back(d.features[j]);
                bag.labels.push_back(d.labels[j]);
            }
            m.trees.push_back(cart_build(bag, cfg, rng));
        } else {
            m.trees.push_back(cart_build(d, cfg, rng));
        }
    }
    return m;
}

int rf_predict(const RandomForestModel& m, const std::vector<double>& x) {
    int ones = 0;
    for (const CartTree& t : m.trees) ones += cart_predict(t, x);
    return 2 * ones >= int(m.trees.size()) ? 1 : 0;
}

double rf_vote_fraction(const RandomForestModel& m, const std::vector<double>& x) {
    int ones = 0;
    for (const CartTree& t : m.trees) ones += cart_predict(t, x);
    return double(ones) / double(m.trees.size());
}

AdaBoostModel adaboost(const Dataset& d, int rounds) {
    std::size_t n = d.instance_count();
    if (n == 0) throw InputError("adaboost: empty dataset");
    AdaBoostModel m;
    std::vector<double> w(n, 1.0 / double(n));
    CartConfig stump_cfg;
    stump_cfg.max_depth = 1;
    Rng rng(0); // stumps search all attributes; no randomness consumed
    for (int round = 0; round < rounds; ++round) {
        CartTree h = cart_build(d, stump_cfg, rng, &w);
        double err = 0.0;
        std::vector<int> pred(n);
        for (std::size_t i = 0; i < n; ++i) {
            pred[i] = cart_predict(h, d.features[i]);
            if (pred[i] != d.labels[i]) err += w[i];
        }
        if (err >= 0.5) break;
        double capped = err == 0.0 ? 1e-10 : err;
        double alpha = 0.5 * std::log((1.0 - capped) / capped);
        m.stumps.push_back(h);
        m.alphas.push_back(alpha);
        m.round_errors.push_back(err);
        if (err == 0.0) break;
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            w[i] *= std::exp(pred[i] == d.labels[i] ? -alpha : alpha);
            total += w[i];
        }
        for (double& v : w) v /= total;
        double check = std::accumulate(w.begin(), w.end(), 0.0);
        if (std::abs(check - 1.0) > 1e-12)
            throw std::logic_error("adaboost: weights drifted from a distribution");
    }
    m.final_weights = w;
    return m;
}

static double ada_margin(const AdaBoostModel& m, const std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.stumps.size(); ++i)
        s += m.alphas[i] * (2 * cart_predict(m.stumps[i], x) - 1);
    return s;
}

int ada_predict(const AdaBoostModel& m, const std::vector<double>& x) {
    return ada_margin(m, x) >= 0.0 ? 1 : 0;
}

double ada_score(const AdaBoostModel& m, const std::vector<double>& x) {
    double total = std::accumulate(m.alphas.begin(), m.alphas.end(), 0.0);
    if (total <= 0.0) return 0.5;
    double ones = 0.0;
    for (std::size_t i = 0; i < m.stumps.size(); ++i)
        ones += m.alphas[i] * cart_predict(m.stumps[i], x);
    return ones / total;
}

static double sigmoid(double z) {
    return 1.0 / (1.0 + std::exp(-z));
}

// Least-squares splits on the residuals; leaf value is the Newton step
// sum(residual) / sum(curvature).
static int build_reg_node(const std::vector<std::vector<double>>& xs,
                          const std::vector<double>& target, const std::vector<double>& curve,
                          int max_depth, const std::vector<std::size_t>& idx, int depth,
                          CartTree& out) {
    int me = int(out.nodes.size());
    out.nodes.push_back(CartNode{});
    auto make_leaf = [&]() {
        double num = 0.0, den = 0.0;
        for (std::size_t i : idx) {
            num += target[i];
            den += curve[i];
        }
        out.nodes[std::size_t(me)].value = den < 1e-12 ? 0.0 : num / den;
        return me;
    };
    bool constant = true;
    for (std::size_t i : idx)
        if (target[i] != target[idx[0]]) constant = false;
    if (constant || depth >= max_depth || idx.size() < 2) return make_leaf();

    std::size_t attrs = xs[0].size();
    int best_attr = -1;
    double best_thr = 0.0, best_score = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> order;
    for (std::size_t a = 0; a < attrs; ++a) {
        order.assign(idx.begin(), idx.end());
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t p, std::size_t q) { return xs[p][a] < xs[q][a]; });
        double sl = 0.0, st = 0.0;
        for (std::size_t i : idx) st += target[i];
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
            sl += target[order[i]];
            double lo = xs[order[i]][a], hi = xs[order[i + 1]][a];
            if (!(lo < hi)) continue;
            double thr = (lo + hi) / 2.0;
            if (!(lo < thr && thr < hi)) continue;
            double nl = double(i + 1), nr = double(order.size() - i - 1);
            double score = sl * sl / nl + (st - sl) * (st - sl) / nr;
            if (score > best_score) {
                best_score = score;
                best_attr = int(a);
                best_thr = thr;
            }
        }
    }
    if (best_attr < 0) return make_leaf();

    std::vector<std::size_t> left, right;
    for (std::size_t i : idx)
        (xs[i][std::size_t(best_attr)] <= best_thr ? left : right).push_back(i);
    out.nodes[std::size_t(me)].attribute = best_attr;
    out.nodes[std::size_t(me)].threshold = best_thr;
    int l = build_reg_node(xs, target, curve, max_depth, left, depth + 1, out);
    int r = build_reg_node(xs, target, curve, max_depth, right, depth + 1, out);
    out.nodes[std::size_t(me)].left = l;
    out.nodes[std::size_t(me)].right = r;
    return me;
}

GbdtModel gbdt_fit(const Dataset& d, int stages, double learning_rate, int depth) {
    std::size_t n = d.instance_count();
    if (n == 0) throw InputError("gbdt: empty dataset");
    std::int64_t pos = std::count(d.labels.begin(), d.labels.end(), 1);
    if (pos == 0 || std::size_t(pos) == n)
        throw InputError("gbdt: training data holds a single class; log-odds undefined");

    GbdtModel m;
    m.learning_rate = learning_rate;
    double p = double(pos) / double(n);
    m.base = std::log(p / (1.0 - p));
    std::vector<double> F(n, m.base);

    auto cross_entropy = [&]() {
        double ce = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double y = sigmoid(F[i]);
            y = std::min(1.0 - 1e-15, std::max(1e-15, y));
            ce += d.labels[i] == 1 ? -std::log(y) : -std::log(1.0 - y);
        }
        return ce;
    };
    m.train_cross_entropy.push_back(cross_entropy());

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<double> target(n), curve(n);
    for (int stage = 0; stage < stages; ++stage) {
        for (std::size_t i = 0; i < n; ++i) {
            double y = sigmoid(F[i]);
            target[i] = double(d.labels[i]) - y;
            curve[i] = y * (1.0 - y);
            // tanh identity cross-checks the fitted target against Eq. 4
            double y2 = 0.5 * (1.0 + std::tanh(F[i] / 2.0));
            if (std::abs(target[i] - (double(d.labels[i]) - y2)) > 1e-12)
                throw std::logic_error("gbdt: stage target is not the loss residual");
        }
        CartTree t;
        build_reg_node(d.features, target, curve, depth, idx, 0, t);
        for (std::size_t i = 0; i < n; ++i) F[i] += learning_rate * cart_value(t, d.features[i]);
        m.stages.push_back(std::move(t));
        m.train_cross_entropy.push_back(cross_entropy());
    }
    return m;
}

double gbdt_score(const GbdtModel& m, const std::vector<double>& x) {
    double F = m.base;
    for (const CartTree& t : m.stages) F += m.learning_rate * cart_value(t, x);
    return sigmoid(F);
}

int gbdt_predict(const GbdtModel& m, const std::vector<double>& x) {
    return gbdt_score(m, x) >= 0.5 ? 1 : 0;
}

std::string cart_text(const CartTree& t) {
    std::string out;
    char buf[160];
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        const CartNode& n = t.nodes[i];
        std::snprintf(buf, sizeof buf, "%zu,%d,%.17g,%d,%d,%d,%.17g\n", i, n.attribute,
                      n.threshold, n.left, n.right, n.label, n.value);
        out += buf;
    }
    return out;
}

CartTree parse_cart_text(const std::string& text) {
    CartTree t;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        CartNode n;
        std::size_t i = 0;
        if (std::sscanf(line.c_str(), "%zu,%d,%lf,%d,%d,%d,%lf", &i, &n.attribute, &n.threshold,
                        &n.left, &n.right, &n.label, &n.value) != 7)
            throw InputError("cart parse: malformed node line: " + line);
        if (i != t.nodes.size()) throw InputError("cart parse: node index out of order: " + line);
        t.nodes.push_back(n);
    }
    if (t.nodes.empty()) throw InputError("cart parse: no nodes");
    return t;
}

static std::string trees_text(const std::vector<CartTree>& trees) {
    std::string out;
    for (std::size_t i = 0; i < trees.size(); ++i) {
        out += "#tree " + std::to_string(i) + "\n";
        out += cart_text(trees[i]);
    }
    return out;
}

static std::vector<CartTree> parse_trees(std::istream& in) {
    std::vector<CartTree> trees;
    std::string line, cur;
    bool open = false;
    auto flush = [&]() {
        if (open) trees.push_back(parse_cart_text(cur));
        cur.clear();
    };
    while (std::getline(in, line)) {
        if (line.rfind("#tree", 0) == 0) {
            flush();
            open = true;
        } else if (!line.empty()) {
            cur += line + "\n";
        }
    }
    flush();
    return trees;
}

std::string rf_text(const RandomForestModel& m) {
    return trees_text(m.trees);
}

RandomForestModel parse_rf_text(const std::string& text) {
    std::istringstream in(text);
    RandomForestModel m;
    m.trees = parse_trees(in);
    if (m.trees.empty()) throw InputError("forest parse: no trees");
    return m;
}

static std::string number_line(const std::string& key, const std::vector<double>& v) {
    std::string out = key;
    char buf[40];
    for (double x : v) {
        std::snprintf(buf, sizeof buf, " %.17g", x);
        out += buf;
    }
    return out + "\n";
}

static std::vector<double> parse_number_line(const std::string& line, const std::string& key) {
    if (line.rfind(key, 0) != 0) throw InputError("model parse: expected '" + key + "' line");
    std::istringstream in(line.substr(key.size()));
    std::vector<double> v;
    double x;
    while (in >> x) v.push_back(x);
    return v;
}

std::string ada_text(const AdaBoostModel& m) {
    return number_line("alphas", m.alphas) + number_line("errors", m.round_errors) +
           trees_text(m.stumps);
}

AdaBoostModel parse_ada_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    AdaBoostModel m;
    if (!std::getline(in, line)) throw InputError("model parse: empty text");
    m.alphas = parse_number_line(line, "alphas");
    if (!std::getline(in, line)) throw InputError("model parse: truncated text");
    m.round_errors = parse_number_line(line, "errors");
    m.stumps = parse_trees(in);
    if (m.stumps.size() != m.alphas.size())
        throw InputError("model parse: " + std::to_string(m.stumps.size()) + " stumps for " +
                         std::to_string(m.alphas.size()) + " coefficients");
    return m;
}

std::string gbdt_text(const GbdtModel& m) {
    return number_line("base", {m.base}) + number_line("learning_rate", {m.learning_rate}) +
           trees_text(m.stages);
}

GbdtModel parse_gbdt_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    GbdtModel m;
    if (!std::getline(in, line)) throw InputError("model parse: empty text");
    std::vector<double> base = parse_number_line(line, "base");
    if (!std::getline(in, line)) throw InputError("model parse: truncated text");
    std::vector<double> lr = parse_number_line(line, "learning_rate");
    if (base.size() != 1 || lr.size() != 1)
        throw InputError("model parse: base and learning_rate must be single numbers");
    m.base = base[0];
    m.learning_rate = lr[0];
    m.stages = parse_trees(in);
    return m;
}

} // namespace rlf
