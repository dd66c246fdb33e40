#pragma once
#include <cstddef>
#include <string>
#include <vector>

namespace rlf {

// N datasets (rows) scored under k methods (columns).
struct ScoreTable {
    std::vector<std::string> methods;
    std::vector<std::string> datasets;
    std::vector<std::vector<double>> scores;
};

// Per-row ranks, 1 = best; ties receive the mean of the tied ranks.
struct RankTable {
    std::vector<std::vector<double>> ranks;
    std::vector<double> avg_ranks;
};

struct FriedmanResult {
    double chi2 = 0.0;
    double f = 0.0;
};

struct WinTieLoss {
    std::string method;
    int win = 0, tie = 0, loss = 0;
};

struct SignificanceReport {
    FriedmanResult fr;
    double f_critical = 0.0;
    bool significant = false;
    double cd = 0.0;
    std::vector<std::string> flagged; // methods the base significantly outranks
};

RankTable rank(const ScoreTable& st, bool higher_is_better = true);

FriedmanResult friedman(const RankTable& rt);

// CD = q_alpha * sqrt(k(k+1)/(6N)); q from an embedded table,
// alpha in {0.05, 0.1}, k in [2,10].
double nemenyi_cd(int k, int n, double alpha);

// Upper critical value of the F distribution, embedded table with
// interpolation in 1/dfd; alpha in {0.05, 0.1}, dfn in [1,9], dfd >= 2.
double f_critical(double alpha, int dfn, int dfd);

// Counts per competing method, comparing at 3-decimal printed precision.
std::vector<WinTieLoss> win_tie_loss(const ScoreTable& st, const std::string& base);

SignificanceReport significance_report(const ScoreTable& st, const std::string& base,
                                       double alpha);

std::string score_table_csv(const ScoreTable& st);
ScoreTable parse_score_csv(const std::string& text);

// Aligned text table with Avg, Avg.Rank, Win/Tie/Loss and Fr.T rows.
std::string comparison_report(const ScoreTable& st, const std::string& base, double alpha,
                              const std::string& score_label);

} // namespace rlf
