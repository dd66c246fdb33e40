#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "rng.hpp"

namespace rlf {

struct CartConfig {
    int max_depth = -1;        // -1 grows to purity
    int feature_subset = 0;    // attributes tried per node; 0 means all
    int min_samples_split = 2;
};

// Sparse binary tree; x[attribute] <= threshold goes left. A node with
// left < 0 is a leaf carrying a class label and a regression value.
struct CartNode {
    int attribute = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = -1;
    double value = 0.0;
};

struct CartTree {
    std::vector<CartNode> nodes; // root at 0
};

int cart_predict(const CartTree& t, const std::vector<double>& x);
double cart_value(const CartTree& t, const std::vector<double>& x);
int cart_depth(const CartTree& t);

// Greedy Gini-minimizing splits over a per-node random attribute subset,
// midpoint thresholds, grown unpruned. Ties keep the lowest (attribute,
// threshold). Optional per-instance weights (uniform when absent).
CartTree cart_build(const Dataset& d, const CartConfig& cfg, Rng& rng,
                    const std::vector<double>* weights = nullptr);

struct RandomForestModel {
    std::vector<CartTree> trees;
};

// Bootstrap-resampled CART ensemble with unweighted majority vote.
RandomForestModel random_forest(const Dataset& d, int n_trees, const CartConfig& cfg,
                                std::uint64_t seed, bool bootstrap = true);
int rf_predict(const RandomForestModel& m, const std::vector<double>& x);
double rf_vote_fraction(const RandomForestModel& m, const std::vector<double>& x);

struct AdaBoostModel {
    std::vector<CartTree> stumps;
    std::vector<double> alphas;
    std::vector<double> round_errors;   // weighted error per kept round
    std::vector<double> final_weights;  // instance weights after the last round
};

// Discrete AdaBoost over depth-1 weighted stumps: alpha = ln((1-err)/err)/2,
// weights scaled by exp(-+alpha) and renormalized. Stops before adding a
// stump with err >= 0.5; a perfect stump is kept with err capped at 1e-10.
AdaBoostModel adaboost(const Dataset& d, int rounds);
int ada_predict(const AdaBoostModel& m, const std::vector<double>& x);
double ada_score(const AdaBoostModel& m, const std::vector<double>& x); // [0,1]

struct GbdtModel {
    double base = 0.0;          // initial log-odds
    double learning_rate = 0.1;
    std::vector<CartTree> stages;
    std::vector<double> train_cross_entropy; // summed loss after each stage
};

// Gradient boosting on the log-odds scale: least-squares regression trees on
// residuals y - sigmoid(F), leaf values by a single Newton step.
GbdtModel gbdt_fit(const Dataset& d, int stages, double learning_rate, int depth);
double gbdt_score(const GbdtModel& m, const std::vector<double>& x); // sigmoid(F)
int gbdt_predict(const GbdtModel& m, const std::vector<double>& x);  // 1 iff score >= 0.5

// Text round-trips: one node line per tree under "#tree i" separators, with
// model-level header lines for the boosting coefficients.
std::string cart_text(const CartTree& t);
CartTree parse_cart_text(const std::string& text);
std::string rf_text(const RandomForestModel& m);
RandomForestModel parse_rf_text(const std::string& text);
std::string ada_text(const AdaBoostModel& m);
AdaBoostModel parse_ada_text(const std::string& text);
std::string gbdt_text(const GbdtModel& m);
GbdtModel parse_gbdt_text(const std::string& text);

} // namespace rlf
