#include "tree.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "error.hpp"

namespace rlf {

std::size_t tree_slots(int depth) {
    return (std::size_t(1) << (depth + 1)) - 1;
}

std::size_t route(const TreeModel& t, const std::vector<double>& x) {
    std::size_t idx = 0;
    while (true) {
        if (idx >= t.nodes.size())
            throw std::runtime_error("route: walked past the node array (malformed tree)");
        const NodeSpec& n = t.nodes[idx];
        if (n.kind == NodeKind::leaf) return idx;
        if (n.kind == NodeKind::inactive)
            throw std::runtime_error("route: reached inactive node " + std::to_string(idx));
        if (n.attribute < 0 || std::size_t(n.attribute) >= x.size())
            throw SchemaError("route: node expects attribute " + std::to_string(n.attribute) +
                              " but instance has " + std::to_string(x.size()) + " attributes");
        idx = (x[std::size_t(n.attribute)] <= n.threshold) ? 2 * idx + 1 : 2 * idx + 2;
    }
}

int tree_predict(const TreeModel& t, const std::vector<double>& x) {
    return t.nodes[route(t, x)].leaf_label;
}

int forest_predict(const ForestModel& f, const std::vector<double>& x) {
    int ones = 0;
    for (const TreeModel& t : f.trees) ones += tree_predict(t, x);
    return 2 * ones >= int(f.trees.size()) ? 1 : 0;
}

TreeModel label_leaves(const TreeModel& t, const Dataset& d) {
    std::vector<std::int64_t> pos(t.nodes.size(), 0), neg(t.nodes.size(), 0);
    for (std::size_t i = 0; i < d.instance_count(); ++i) {
        std::size_t idx = 0;
        while (true) {
            (d.labels[i] == 1 ? pos : neg)[idx]++;
            const NodeSpec& n = t.nodes[idx];
            if (n.kind != NodeKind::internal) break;
            idx = (d.features[i][std::size_t(n.attribute)] <= n.threshold) ? 2 * idx + 1
                                                                           : 2 * idx + 2;
        }
    }
    TreeModel out = t;
    for (std::size_t idx = 0; idx < out.nodes.size(); ++idx) {
        if (out.nodes[idx].kind != NodeKind::leaf) continue;
        std::size_t a = idx;
        while (pos[a] + neg[a] == 0 && a > 0) a = (a - 1) / 2;
        out.nodes[idx].leaf_label = pos[a] >= neg[a] ? 1 : 0;
    }
    return out;
}

std::string tree_text(const TreeModel& t) {
    std::string out;
    char buf[48];
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        const NodeSpec& n = t.nodes[i];
        out += std::to_string(i) + ",";
        switch (n.kind) {
            case NodeKind::internal:
                std::snprintf(buf, sizeof buf, "internal,%d,%.17g,-", n.attribute, n.threshold);
                break;
            case NodeKind::leaf:
                std::snprintf(buf, sizeof buf, "leaf,-,-,%d", n.leaf_label);
                break;
            case NodeKind::inactive:
                std::snprintf(buf, sizeof buf, "inactive,-,-,-");
                break;
        }
        out += buf;
        out += "\n";
    }
    return out;
}

TreeModel parse_tree_text(const std::string& text) {
    TreeModel t;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string idx_s, kind_s, attr_s, thr_s, label_s;
        if (!std::getline(ls, idx_s, ',') || !std::getline(ls, kind_s, ',') ||
            !std::getline(ls, attr_s, ',') || !std::getline(ls, thr_s, ',') ||
            !std::getline(ls, label_s))
            throw InputError("parse_tree_text: malformed node line: " + line);
        std::size_t idx = std::size_t(std::strtoull(idx_s.c_str(), nullptr, 10));
        if (idx != t.nodes.size())
            throw InputError("parse_tree_text: node index " + idx_s + " out of order");
        NodeSpec n;
        if (kind_s == "internal") {
            n.kind = NodeKind::internal;
            n.attribute = std::atoi(attr_s.c_str());
            n.threshold = std::strtod(thr_s.c_str(), nullptr);
        } else if (kind_s == "leaf") {
            n.kind = NodeKind::leaf;
            n.leaf_label = std::atoi(label_s.c_str());
        } else if (kind_s == "inactive") {
            n.kind = NodeKind::inactive;
        } else {
            throw InputError("parse_tree_text: unknown node kind '" + kind_s + "'");
        }
        t.nodes.push_back(n);
    }
    std::size_t count = t.nodes.size();
    int depth = 0;
    while (tree_slots(depth) < count) ++depth;
    if (tree_slots(depth) != count)
        throw InputError("parse_tree_text: node count " + std::to_string(count) +
                         " is not 2^(D+1)-1 for any depth");
    t.depth = depth;
    return t;
}

std::string forest_text(const ForestModel& f) {
    std::string out;
    for (std::size_t i = 0; i < f.trees.size(); ++i) {
        out += "#tree " + std::to_string(i) + "\n";
        out += tree_text(f.trees[i]);
    }
    return out;
}

ForestModel parse_forest_text(const std::string& text) {
    ForestModel f;
    std::istringstream in(text);
    std::string line, cur;
    bool have_tree = false;
    auto flush = [&]() {
        if (have_tree) f.trees.push_back(parse_tree_text(cur));
        cur.clear();
    };
    while (std::getline(in, line)) {
        if (line.rfind("#tree", 0) == 0) {
            flush();
            have_tree = true;
        } else if (!line.empty()) {
            cur += line + "\n";
        }
    }
    flush();
    if (f.trees.empty()) throw InputError("parse_forest_text: no trees");
    return f;
}

} // namespace rlf
