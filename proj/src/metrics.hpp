#pragma once
#include <cstdint>
#include <vector>

namespace rlf {

// Binary confusion counts with 1 as the positive class.
struct Confusion {
    std::int64_t tp = 0;
    std::int64_t fn = 0;
    std::int64_t tn = 0;
    std::int64_t fp = 0;
};

Confusion confusion(const std::vector<int>& pred, const std::vector<int>& truth);

double accuracy(const Confusion& c);

// sqrt(TPR * TNR); 0 when either rate is 0. Errors if a class is absent.
double g_mean(const Confusion& c);

// (TPR + TNR) / 2: area under the single-point ROC of a hard classifier.
double auc_from_labels(const Confusion& c);

// Mann-Whitney statistic: P(score+ > score-) + 0.5 * P(equal).
double auc_from_scores(const std::vector<double>& scores, const std::vector<int>& truth);

} // namespace rlf
