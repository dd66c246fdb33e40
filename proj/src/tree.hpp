#pragma once
#include <cstddef>
#include <string>
#include <vector>

#include "dataset.hpp"

namespace rlf {

enum class NodeKind { internal, leaf, inactive };

struct NodeSpec {
    NodeKind kind = NodeKind::inactive;
    int attribute = -1;     // internal nodes only
    double threshold = 0.0; // internal nodes only
    int leaf_label = -1;    // leaf nodes only; -1 while unlabeled
};

// Complete binary tree of fixed depth stored level-order: root at 0,
// children of t at 2t+1 and 2t+2. Descendants of a leaf are inactive.
struct TreeModel {
    int depth = 0;
    std::vector<NodeSpec> nodes; // length 2^(depth+1) - 1
};

// Unweighted ensemble; ties vote for the positive class.
struct ForestModel {
    std::vector<TreeModel> trees;
};

std::size_t tree_slots(int depth); // 2^(depth+1) - 1

// Descend from the root, left on x[attribute] <= threshold, to a leaf.
std::size_t route(const TreeModel& t, const std::vector<double>& x);

int tree_predict(const TreeModel& t, const std::vector<double>& x);

int forest_predict(const ForestModel& f, const std::vector<double>& x);

// Label each leaf with the majority class of the training instances routed to
// it; an empty leaf inherits the majority of the nearest ancestor that has
// routed instances. Exact ties label 1.
TreeModel label_leaves(const TreeModel& t, const Dataset& d);

// One line per node: index,kind,attribute,threshold,leaf_label with "-" for
// unset fields. Round-trips exactly.
std::string tree_text(const TreeModel& t);
TreeModel parse_tree_text(const std::string& text);

// Trees concatenated under "#tree i" separator lines.
std::string forest_text(const ForestModel& f);
ForestModel parse_forest_text(const std::string& text);

} // namespace rlf
