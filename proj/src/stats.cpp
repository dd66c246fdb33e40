#include "stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "error.hpp"

namespace rlf {

RankTable rank(const ScoreTable& st, bool higher_is_better) {
    std::size_t n = st.scores.size();
    std::size_t k = st.methods.size();
    if (n < 2 || k < 2) throw InputError("rank: need at least 2 datasets and 2 methods");
    RankTable rt;
    rt.ranks.assign(n, std::vector<double>(k, 0.0));
    rt.avg_ranks.assign(k, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        const auto& row = st.scores[r];
        if (row.size() != k) throw InputError("rank: ragged score row");
        std::vector<std::size_t> order(k);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return higher_is_better ? row[a] > row[b] : row[a] < row[b];
        });
        std::size_t i = 0;
        while (i < k) {
            std::size_t j = i;
            while (j < k && row[order[j]] == row[order[i]]) ++j;
            double mean_rank = 0.5 * double(i + 1 + j); // ranks i+1 .. j
            for (std::size_t t = i; t < j; ++t) rt.ranks[r][order[t]] = mean_rank;
            i = j;
        }
        for (std::size_t c = 0; c < k; ++c) rt.avg_ranks[c] += rt.ranks[r][c];
    }
    for (double& v : rt.avg_ranks) v /= double(n);
    return rt;
}

FriedmanResult friedman(const RankTable& rt) {
    double n = double(rt.ranks.size());
    double k = double(rt.avg_ranks.size());
    double sum_sq = 0.0;
    for (double r : rt.avg_ranks) sum_sq += r * r;
    FriedmanResult out;
    out.chi2 = 12.0 * n / (k * (k + 1.0)) * (sum_sq - k * (k + 1.0) * (k + 1.0) / 4.0);
    double denom = n * (k - 1.0) - out.chi2;
    if (denom == 0.0)
        throw InputError("friedman: degenerate, N(k-1) equals chi-square");
    out.f = (n - 1.0) * out.chi2 / denom;
    return out;
}

namespace {

// Demsar-style q constants (studentized range / sqrt 2), k = 2..10.
constexpr double q_table_010[9] = {1.6449, 2.0523, 2.2913, 2.4595, 2.5885,
                                   2.6927, 2.7799, 2.8546, 2.9199};
constexpr double q_table_005[9] = {1.9600, 2.3437, 2.5690, 2.7278, 2.8497,
                                   2.9483, 3.0309, 3.1017, 3.1637};

constexpr int f_dfd_grid[23] = {2,  3,  4,  5,  6,  8,  10, 12, 15, 20, 25, 30,
                                40, 42, 45, 50, 51, 60, 80, 100, 120, 200, 0};
// Last column is the dfd -> infinity limit, chi2_alpha(dfn)/dfn.
constexpr double f_table_010[9][23] = {
    {8.5263, 5.5383, 4.5448, 4.0604, 3.7759, 3.4579, 3.2850, 3.1765, 3.0732, 2.9747, 2.9177,
     2.8807, 2.8354, 2.8290, 2.8205, 2.8087, 2.8066, 2.7911, 2.7693, 2.7564, 2.7478, 2.7308,
     2.7055},
    {9.0000, 5.4624, 4.3246, 3.7797, 3.4633, 3.1131, 2.9245, 2.8068, 2.6952, 2.5893, 2.5283,
     2.4887, 2.4404, 2.4336, 2.4245, 2.4120, 2.4097, 2.3933, 2.3701, 2.3564, 2.3473, 2.3293,
     2.3026},
    {9.1618, 5.3908, 4.1909, 3.6195, 3.2888, 2.9238, 2.7277, 2.6055, 2.4898, 2.3801, 2.3170,
     2.2761, 2.2261, 2.2191, 2.2097, 2.1967, 2.1944, 2.1774, 2.1535, 2.1394, 2.1300, 2.1114,
     2.0838},
    {9.2434, 5.3426, 4.1072, 3.5202, 3.1808, 2.8064, 2.6053, 2.4801, 2.3614, 2.2489, 2.1842,
     2.1422, 2.0909, 2.0837, 2.0742, 2.0608, 2.0585, 2.0410, 2.0165, 2.0019, 1.9923, 1.9732,
     1.9449},
    {9.2926, 5.3092, 4.0506, 3.4530, 3.1075, 2.7264, 2.5216, 2.3940, 2.2730, 2.1582, 2.0922,
     2.0492, 1.9968, 1.9894, 1.9796, 1.9660, 1.9636, 1.9457, 1.9206, 1.9057, 1.8959, 1.8763,
     1.8473},
    {9.3255, 5.2847, 4.0097, 3.4045, 3.0546, 2.6683, 2.4606, 2.3310, 2.2081, 2.0913, 2.0241,
     1.9803, 1.9269, 1.9193, 1.9094, 1.8954, 1.8930, 1.8747, 1.8491, 1.8339, 1.8238, 1.8038,
     1.7741},
    {9.3491, 5.2662, 3.9790, 3.3679, 3.0145, 2.6241, 2.4140, 2.2828, 2.1582, 2.0397, 1.9714,
     1.9269, 1.8725, 1.8649, 1.8547, 1.8405, 1.8380, 1.8194, 1.7933, 1.7778, 1.7675, 1.7470,
     1.7167},
    {9.3668, 5.2517, 3.9549, 3.3393, 2.9830, 2.5893, 2.3772, 2.2446, 2.1185, 1.9985, 1.9292,
     1.8841, 1.8289, 1.8211, 1.8107, 1.7963, 1.7938, 1.7748, 1.7483, 1.7324, 1.7220, 1.7011,
     1.6702},
    {9.3805, 5.2400, 3.9357, 3.3163, 2.9577, 2.5612, 2.3473, 2.2135, 2.0862, 1.9649, 1.8947,
     1.8490, 1.7929, 1.7850, 1.7745, 1.7598, 1.7573, 1.7380, 1.7110, 1.6949, 1.6842, 1.6630,
     1.6315}};
constexpr double f_table_005[9][23] = {
    {18.5128, 10.1280, 7.7086, 6.6079, 5.9874, 5.3177, 4.9646, 4.7472, 4.5431, 4.3512, 4.2417,
     4.1709, 4.0847, 4.0727, 4.0566, 4.0343, 4.0304, 4.0012, 3.9604, 3.9361, 3.9201, 3.8884,
     3.8415},
    {19.0000, 9.5521, 6.9443, 5.7861, 5.1433, 4.4590, 4.1028, 3.8853, 3.6823, 3.4928, 3.3852,
     3.3158, 3.2317, 3.2199, 3.2043, 3.1826, 3.1788, 3.1504, 3.1108, 3.0873, 3.0718, 3.0411,
     2.9957},
    {19.1643, 9.2766, 6.5914, 5.4095, 4.7571, 4.0662, 3.7083, 3.4903, 3.2874, 3.0984, 2.9912,
     2.9223, 2.8387, 2.8270, 2.8115, 2.7900, 2.7862, 2.7581, 2.7188, 2.6955, 2.6802, 2.6498,
     2.6049},
    {19.2468, 9.1172, 6.3882, 5.1922, 4.5337, 3.8379, 3.4780, 3.2592, 3.0556, 2.8661, 2.7587,
     2.6896, 2.6060, 2.5943, 2.5787, 2.5572, 2.5534, 2.5252, 2.4859, 2.4626, 2.4472, 2.4168,
     2.3719},
    {19.2964, 9.0135, 6.2561, 5.0503, 4.3874, 3.6875, 3.3258, 3.1059, 2.9013, 2.7109, 2.6030,
     2.5336, 2.4495, 2.4377, 2.4221, 2.4004, 2.3966, 2.3683, 2.3287, 2.3053, 2.2899, 2.2592,
     2.2141},
    {19.3295, 8.9406, 6.1631, 4.9503, 4.2839, 3.5806, 3.2172, 2.9961, 2.7905, 2.5990, 2.4904,
     2.4205, 2.3359, 2.3240, 2.3083, 2.2864, 2.2826, 2.2541, 2.2142, 2.1906, 2.1750, 2.1441,
     2.0986},
    {19.3532, 8.8867, 6.0942, 4.8759, 4.2067, 3.5005, 3.1355, 2.9134, 2.7066, 2.5140, 2.4047,
     2.3343, 2.2490, 2.2371, 2.2212, 2.1992, 2.1953, 2.1665, 2.1263, 2.1025, 2.0868, 2.0556,
     2.0096},
    {19.3710, 8.8452, 6.0410, 4.8183, 4.1468, 3.4381, 3.0717, 2.8486, 2.6408, 2.4471, 2.3371,
     2.2662, 2.1802, 2.1681, 2.1521, 2.1299, 2.1260, 2.0970, 2.0564, 2.0323, 2.0164, 1.9849,
     1.9384},
    {19.3848, 8.8123, 5.9988, 4.7725, 4.0990, 3.3881, 3.0204, 2.7964, 2.5876, 2.3928, 2.2821,
     2.2107, 2.1240, 2.1119, 2.0958, 2.0734, 2.0694, 2.0401, 1.9991, 1.9748, 1.9588, 1.9269,
     1.8799}};

bool alpha_is(double alpha, double target) { return std::abs(alpha - target) < 1e-9; }

long long milli(double v) { return std::llround(v * 1000.0); }

std::size_t method_index(const ScoreTable& st, const std::string& name) {
    for (std::size_t i = 0; i < st.methods.size(); ++i)
        if (st.methods[i] == name) return i;
    throw InputError("unknown method '" + name + "'");
}

} // namespace

double nemenyi_cd(int k, int n, double alpha) {
    if (k < 2 || k > 10)
        throw InputError("nemenyi_cd: k=" + std::to_string(k) + " outside the table [2,10]");
    const double* q;
    if (alpha_is(alpha, 0.1)) q = q_table_010;
    else if (alpha_is(alpha, 0.05)) q = q_table_005;
    else throw InputError("nemenyi_cd: alpha must be 0.05 or 0.1");
    return q[k - 2] * std::sqrt(double(k) * double(k + 1) / (6.0 * double(n)));
}

double f_critical(double alpha, int dfn, int dfd) {
    if (dfn < 1 || dfn > 9)
        throw InputError("f_critical: dfn=" + std::to_string(dfn) + " outside the table [1,9]");
    if (dfd < 2) throw InputError("f_critical: dfd must be >= 2");
    const double(*table)[23];
    if (alpha_is(alpha, 0.1)) table = f_table_010;
    else if (alpha_is(alpha, 0.05)) table = f_table_005;
    else throw InputError("f_critical: alpha must be 0.05 or 0.1");

    const double* row = table[dfn - 1];
    // Grid search; interpolate linearly in 1/dfd, with the last entry at 1/inf.
    for (int i = 0; i < 22; ++i) {
        if (dfd == f_dfd_grid[i]) return row[i];
        int next = f_dfd_grid[i + 1];
        bool past_end = (next == 0);
        if (!past_end && dfd < next) {
            double x0 = 1.0 / double(f_dfd_grid[i]), x1 = 1.0 / double(next);
            double x = 1.0 / double(dfd);
            return row[i] + (row[i + 1] - row[i]) * (x - x0) / (x1 - x0);
        }
        if (past_end) {
            double x0 = 1.0 / double(f_dfd_grid[i]);
            double x = 1.0 / double(dfd);
            return row[i] + (row[i + 1] - row[i]) * (x - x0) / (0.0 - x0);
        }
    }
    throw std::runtime_error("f_critical: table walk failed");
}

std::vector<WinTieLoss> win_tie_loss(const ScoreTable& st, const std::string& base) {
    std::size_t b = method_index(st, base);
    std::vector<WinTieLoss> out;
    for (std::size_t m = 0; m < st.methods.size(); ++m) {
        if (m == b) continue;
        WinTieLoss wtl;
        wtl.method = st.methods[m];
        for (const auto& row : st.scores) {
            long long bs = milli(row[b]), ms = milli(row[m]);
            if (bs > ms) wtl.win++;
            else if (bs == ms) wtl.tie++;
            else wtl.loss++;
        }
        out.push_back(wtl);
    }
    return out;
}

SignificanceReport significance_report(const ScoreTable& st, const std::string& base,
                                       double alpha) {
    std::size_t b = method_index(st, base);
    int k = int(st.methods.size());
    int n = int(st.scores.size());
    RankTable rt = rank(st);
    SignificanceReport rep;
    rep.fr = friedman(rt);
    rep.f_critical = f_critical(alpha, k - 1, (k - 1) * (n - 1));
    rep.significant = rep.fr.f > rep.f_critical;
    rep.cd = nemenyi_cd(k, n, alpha);
    if (rep.significant) {
        for (std::size_t m = 0; m < st.methods.size(); ++m) {
            if (m == b) continue;
            if (rt.avg_ranks[m] - rt.avg_ranks[b] > rep.cd)
                rep.flagged.push_back(st.methods[m]);
        }
    }
    return rep;
}

std::string score_table_csv(const ScoreTable& st) {
    std::string out = "dataset";
    for (const auto& m : st.methods) out += "," + m;
    out += "\n";
    char buf[40];
    for (std::size_t r = 0; r < st.datasets.size(); ++r) {
        out += st.datasets[r];
        for (double v : st.scores[r]) {
            std::snprintf(buf, sizeof buf, ",%.17g", v);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

ScoreTable parse_score_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw InputError("parse_score_csv: empty input");
    ScoreTable st;
    {
        std::istringstream hs(line);
        std::string cell;
        bool first = true;
        while (std::getline(hs, cell, ',')) {
            if (!first) st.methods.push_back(cell);
            first = false;
        }
    }
    if (st.methods.empty()) throw InputError("parse_score_csv: no method columns");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::getline(ls, cell, ',');
        st.datasets.push_back(cell);
        std::vector<double> row;
        while (std::getline(ls, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
        if (row.size() != st.methods.size())
            throw InputError("parse_score_csv: row '" + st.datasets.back() + "' has " +
                             std::to_string(row.size()) + " scores, expected " +
                             std::to_string(st.methods.size()));
        st.scores.push_back(std::move(row));
    }
    if (st.scores.empty()) throw InputError("parse_score_csv: no data rows");
    return st;
}

std::string comparison_report(const ScoreTable& st, const std::string& base, double alpha,
                              const std::string& score_label) {
    std::size_t b = method_index(st, base);
    std::size_t k = st.methods.size();
    RankTable rt = rank(st);
    SignificanceReport rep = significance_report(st, base, alpha);
    std::vector<WinTieLoss> wtl = win_tie_loss(st, base);

    std::size_t name_w = 12;
    for (const auto& d : st.datasets) name_w = std::max(name_w, d.size());
    std::size_t col_w = 10;
    for (const auto& m : st.methods) col_w = std::max(col_w, m.size() + 2);

    std::ostringstream out;
    auto cell = [&](const std::string& s, std::size_t w) {
        out << s;
        for (std::size_t i = s.size(); i < w + 2; ++i) out << ' ';
    };
    char buf[64];

    cell("dataset", name_w);
    for (const auto& m : st.methods) cell(m, col_w);
    out << "\n";
    for (std::size_t r = 0; r < st.datasets.size(); ++r) {
        cell(st.datasets[r], name_w);
        for (double v : st.scores[r]) {
            std::snprintf(buf, sizeof buf, "%.3f", v);
            cell(buf, col_w);
        }
        out << "\n";
    }

    cell("Avg." + score_label, name_w);
    for (std::size_t c = 0; c < k; ++c) {
        double mean = 0.0;
        for (const auto& row : st.scores) mean += row[c];
        std::snprintf(buf, sizeof buf, "%.3f", mean / double(st.scores.size()));
        cell(buf, col_w);
    }
    out << "\n";

    cell("Avg.Rank", name_w);
    for (std::size_t c = 0; c < k; ++c) {
        std::snprintf(buf, sizeof buf, "%.3f", rt.avg_ranks[c]);
        cell(buf, col_w);
    }
    out << "\n";

    cell("Win/Tie/Loss", name_w);
    {
        std::size_t wi = 0;
        for (std::size_t c = 0; c < k; ++c) {
            if (c == b) {
                cell("Base", col_w);
            } else {
                const WinTieLoss& w = wtl[wi++];
                std::snprintf(buf, sizeof buf, "%d/%d/%d", w.win, w.tie, w.loss);
                cell(buf, col_w);
            }
        }
    }
    out << "\n";

    cell("Fr.T", name_w);
    for (std::size_t c = 0; c < k; ++c) {
        if (c == b) {
            cell("Base", col_w);
        } else {
            bool flagged = std::find(rep.flagged.begin(), rep.flagged.end(), st.methods[c]) !=
                           rep.flagged.end();
            cell(flagged ? "*" : "-", col_w);
        }
    }
    out << "\n";

    std::snprintf(buf, sizeof buf, "chi2_F=%.3f F_F=%.3f ", rep.fr.chi2, rep.fr.f);
    out << buf;
    std::snprintf(buf, sizeof buf, "F_crit(%zu,%zu; alpha=%.2f)=%.3f CD=%.3f\n", k - 1,
                  (k - 1) * (st.scores.size() - 1), alpha, rep.f_critical, rep.cd);
    out << buf;
    return out.str();
}

} // namespace rlf
