#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "error.hpp"

namespace rlf {

Confusion confusion(const std::vector<int>& pred, const std::vector<int>& truth) {
    if (pred.size() != truth.size())
        throw InputError("confusion: prediction length " + std::to_string(pred.size()) +
                         " does not match truth length " + std::to_string(truth.size()));
    if (truth.empty())
        throw InputError("confusion: empty input");
    Confusion c;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == 1)
            (pred[i] == 1 ? c.tp : c.fn)++;
        else
            (pred[i] == 1 ? c.fp : c.tn)++;
    }
    return c;
}

double accuracy(const Confusion& c) {
    double total = double(c.tp + c.fn + c.tn + c.fp);
    return double(c.tp + c.tn) / total;
}

static void require_both_classes(const Confusion& c, const char* op) {
    if (c.tp + c.fn == 0)
        throw InputError(std::string(op) + ": no positive instances in truth");
    if (c.tn + c.fp == 0)
        throw InputError(std::string(op) + ": no negative instances in truth");
}

double g_mean(const Confusion& c) {
    require_both_classes(c, "g_mean");
    double tpr = double(c.tp) / double(c.tp + c.fn);
    double tnr = double(c.tn) / double(c.tn + c.fp);
    return std::sqrt(tpr * tnr);
}

double auc_from_labels(const Confusion& c) {
    require_both_classes(c, "auc_from_labels");
    double tpr = double(c.tp) / double(c.tp + c.fn);
    double tnr = double(c.tn) / double(c.tn + c.fp);
    return 0.5 * (tpr + tnr);
}

double auc_from_scores(const std::vector<double>& scores, const std::vector<int>& truth) {
    if (scores.size() != truth.size())
        throw InputError("auc_from_scores: scores length " + std::to_string(scores.size()) +
                         " does not match truth length " + std::to_string(truth.size()));
    std::int64_t pos = std::count(truth.begin(), truth.end(), 1);
    std::int64_t neg = std::int64_t(truth.size()) - pos;
    if (pos == 0)
        throw InputError("auc_from_scores: no positive instances in truth");
    if (neg == 0)
        throw InputError("auc_from_scores: no negative instances in truth");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Sum of mean ranks over positives; ties share the mean of their rank run.
    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        double mean_rank = 0.5 * double(i + 1 + j); // ranks i+1 .. j inclusive
        for (std::size_t t = i; t < j; ++t)
            if (truth[order[t]] == 1) pos_rank_sum += mean_rank;
        i = j;
    }
    double u = pos_rank_sum - double(pos) * double(pos + 1) / 2.0;
    return u / (double(pos) * double(neg));
}

} // namespace rlf
