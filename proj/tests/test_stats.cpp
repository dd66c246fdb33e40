#include "doctest.h"

#include <cmath>

#include "error.hpp"
#include "reference_tables.hpp"
#include "rng.hpp"
#include "stats.hpp"

using namespace rlf;

static ScoreTable two_by(const std::vector<std::vector<double>>& rows) {
    ScoreTable st;
    st.methods.resize(rows[0].size());
    for (std::size_t i = 0; i < st.methods.size(); ++i) st.methods[i] = "m" + std::to_string(i);
    st.datasets.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) st.datasets[i] = "d" + std::to_string(i);
    st.scores = rows;
    return st;
}

TEST_CASE("rank basic rows") {
    RankTable rt = rank(two_by({{0.9, 0.8, 0.7, 0.6}, {0.94, 0.94, 0.94, 0.92}}));
    CHECK(rt.ranks[0] == std::vector<double>{1, 2, 3, 4});
    CHECK(rt.ranks[1] == std::vector<double>{2, 2, 2, 4});
}

TEST_CASE("rank rows always sum to k(k+1)/2") {
    Rng rng(3);
    for (int trial = 0; trial < 40; ++trial) {
        std::size_t k = 2 + rng.integer(6);
        std::vector<std::vector<double>> rows(3 + rng.integer(8));
        for (auto& row : rows) {
            row.resize(k);
            for (auto& v : row) v = double(rng.integer(5)) / 5.0; // ties likely
        }
        RankTable rt = rank(two_by(rows));
        for (const auto& row : rt.ranks) {
            double sum = 0;
            for (double r : row) sum += r;
            CHECK(sum == doctest::Approx(double(k * (k + 1)) / 2.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("rank with lower scores better") {
    RankTable rt = rank(two_by({{0.1, 0.2, 0.3}, {3, 2, 1}}), false);
    CHECK(rt.ranks[0] == std::vector<double>{1, 2, 3});
    CHECK(rt.ranks[1] == std::vector<double>{3, 2, 1});
}

// Oracle values below were frozen from an independent rank/chi-square
// evaluation of the fixture matrices.
TEST_CASE("average ranks of the accuracy fixture") {
    RankTable v16 = rank(reftab::accuracy_verbatim());
    CHECK(v16.avg_ranks[0] == doctest::Approx(2.65625).epsilon(1e-9));
    CHECK(v16.avg_ranks[1] == doctest::Approx(2.625).epsilon(1e-9));
    CHECK(v16.avg_ranks[2] == doctest::Approx(2.625).epsilon(1e-9));
    CHECK(v16.avg_ranks[3] == doctest::Approx(2.09375).epsilon(1e-9));

    RankTable v15 = rank(reftab::accuracy_dedup());
    CHECK(v15.avg_ranks[0] == doctest::Approx(2.766667).epsilon(1e-5));
    CHECK(v15.avg_ranks[1] == doctest::Approx(2.633333).epsilon(1e-5));
    CHECK(v15.avg_ranks[2] == doctest::Approx(2.533333).epsilon(1e-5));
    CHECK(v15.avg_ranks[3] == doctest::Approx(2.066667).epsilon(1e-5));
}

TEST_CASE("friedman statistics on the fixtures") {
    FriedmanResult f16 = friedman(rank(reftab::accuracy_verbatim()));
    CHECK(f16.chi2 == doctest::Approx(2.11875).epsilon(1e-6));
    CHECK(f16.f == doctest::Approx(0.692726).epsilon(1e-4));

    FriedmanResult f15 = friedman(rank(reftab::accuracy_dedup()));
    CHECK(f15.chi2 == doctest::Approx(2.5).epsilon(1e-9));
    CHECK(f15.f == doctest::Approx(0.8235294).epsilon(1e-6));

    FriedmanResult g = friedman(rank(reftab::gmean_table()));
    CHECK(g.chi2 == doctest::Approx(38.75).epsilon(1e-9));
    CHECK(g.f == doctest::Approx(43.1967).epsilon(1e-4));

    FriedmanResult a = friedman(rank(reftab::auc_table()));
    CHECK(a.chi2 == doctest::Approx(37.95).epsilon(1e-9));
    CHECK(a.f == doctest::Approx(40.1963).epsilon(1e-4));
}

TEST_CASE("friedman degenerate and all-tied cases") {
    // Every method tied on every dataset: chi2 is 0.
    FriedmanResult tied = friedman(rank(two_by({{0.5, 0.5, 0.5}, {0.7, 0.7, 0.7}})));
    CHECK(tied.chi2 == doctest::Approx(0.0).epsilon(1e-12));

    // Two methods, perfectly consistent ordering: chi2 = N(k-1), denominator 0.
    CHECK_THROWS_AS(friedman(rank(two_by({{0.9, 0.8}, {0.7, 0.6}}))), InputError);
}

TEST_CASE("friedman is rank-based, so monotone transforms change nothing") {
    ScoreTable st = reftab::gmean_table();
    ScoreTable cubed = st;
    for (auto& row : cubed.scores)
        for (auto& v : row) v = v * v * v;
    FriedmanResult f1 = friedman(rank(st));
    FriedmanResult f2 = friedman(rank(cubed));
    CHECK(f1.chi2 == doctest::Approx(f2.chi2).epsilon(1e-12));
    CHECK(f1.f == doctest::Approx(f2.f).epsilon(1e-12));
}

TEST_CASE("nemenyi critical difference") {
    CHECK(nemenyi_cd(4, 18, 0.1) == doctest::Approx(0.986).epsilon(0.005));
    // Quadrupling N halves CD exactly.
    CHECK(nemenyi_cd(5, 48, 0.1) == doctest::Approx(nemenyi_cd(5, 12, 0.1) / 2.0).epsilon(1e-12));
    CHECK(nemenyi_cd(2, 10, 0.1) == doctest::Approx(1.6449 * std::sqrt(6.0 / 60.0)).epsilon(1e-9));
    CHECK_THROWS_AS(nemenyi_cd(11, 10, 0.1), InputError);
    CHECK_THROWS_AS(nemenyi_cd(4, 10, 0.2), InputError);
}

TEST_CASE("f_critical table and interpolation") {
    CHECK(f_critical(0.1, 3, 42) == doctest::Approx(2.2191).epsilon(1e-3));
    CHECK(f_critical(0.1, 3, 51) == doctest::Approx(2.1944).epsilon(1e-3));
    CHECK(f_critical(0.05, 1, 2) == doctest::Approx(18.5128).epsilon(1e-4));
    // Between grid points the interpolant stays between the bracketing values.
    double v = f_critical(0.1, 3, 43);
    CHECK(v < f_critical(0.1, 3, 42));
    CHECK(v > f_critical(0.1, 3, 45));
    // Far beyond the grid the value approaches the large-sample limit.
    CHECK(f_critical(0.1, 3, 100000) == doctest::Approx(2.0838).epsilon(1e-3));
    CHECK_THROWS_AS(f_critical(0.1, 10, 30), InputError);
}

TEST_CASE("win_tie_loss") {
    ScoreTable st = two_by({{0.9, 0.5, 0.5}, {0.8, 0.2, 0.8}, {0.7, 0.1, 0.3}});
    auto wtl = win_tie_loss(st, "m0");
    REQUIRE(wtl.size() == 2);
    CHECK(wtl[0].win == 3);
    CHECK(wtl[0].tie == 0);
    CHECK(wtl[0].loss == 0);
    CHECK(wtl[1].win == 2);
    CHECK(wtl[1].tie == 1);
    CHECK(wtl[1].loss == 0);

    ScoreTable ident = two_by({{0.4, 0.4}, {0.6, 0.6}});
    auto same = win_tie_loss(ident, "m0");
    CHECK(same[0].tie == 2);

    auto g = win_tie_loss(reftab::gmean_table(), "rlforest");
    CHECK(g[0].win == 17);
    CHECK(g[0].tie == 0);
    CHECK(g[0].loss == 1);
    CHECK(g[1].win == 17);
    CHECK(g[1].loss == 1);
    CHECK(g[2].win == 18);
    CHECK(g[2].loss == 0);

    auto d15 = win_tie_loss(reftab::accuracy_dedup(), "rlforest");
    CHECK(d15[0].win == 10);
    CHECK(d15[0].tie == 1);
    CHECK(d15[0].loss == 4);
    CHECK(d15[1].win == 9);
    CHECK(d15[1].tie == 2);
    CHECK(d15[1].loss == 4);
    CHECK(d15[2].win == 8);
    CHECK(d15[2].tie == 1);
    CHECK(d15[2].loss == 6);
}

TEST_CASE("significance_report") {
    SignificanceReport balanced = significance_report(reftab::accuracy_verbatim(), "rlforest", 0.1);
    CHECK_FALSE(balanced.significant);
    CHECK(balanced.flagged.empty());

    SignificanceReport g = significance_report(reftab::gmean_table(), "rlforest", 0.1);
    CHECK(g.significant);
    REQUIRE(g.flagged.size() == 3);

    ScoreTable ident = two_by({{0.4, 0.4}, {0.6, 0.6}, {0.5, 0.5}});
    SignificanceReport none = significance_report(ident, "m0", 0.1);
    CHECK_FALSE(none.significant);
    CHECK(none.flagged.empty());
}

TEST_CASE("score table csv round-trip") {
    ScoreTable st = reftab::gmean_table();
    ScoreTable back = parse_score_csv(score_table_csv(st));
    CHECK(back.methods == st.methods);
    CHECK(back.datasets == st.datasets);
    for (std::size_t r = 0; r < st.scores.size(); ++r)
        for (std::size_t c = 0; c < st.scores[r].size(); ++c)
            CHECK(back.scores[r][c] == st.scores[r][c]);
    CHECK_THROWS_AS(parse_score_csv(""), InputError);
    CHECK_THROWS_AS(parse_score_csv("dataset,a\nrow1,0.5,0.7\n"), InputError);
}

TEST_CASE("comparison report carries the summary rows") {
    std::string rep = comparison_report(reftab::gmean_table(), "rlforest", 0.1, "G-Mean");
    CHECK(rep.find("Avg.G-Mean") != std::string::npos);
    CHECK(rep.find("Avg.Rank") != std::string::npos);
    CHECK(rep.find("Win/Tie/Loss") != std::string::npos);
    CHECK(rep.find("17/0/1") != std::string::npos);
    CHECK(rep.find("18/0/0") != std::string::npos);
    CHECK(rep.find("Base") != std::string::npos);
    // Mean of the base column prints as 0.834, its average rank as 1.111.
    CHECK(rep.find("0.834") != std::string::npos);
    CHECK(rep.find("1.111") != std::string::npos);
}

TEST_CASE("column permutation leaves statistics unchanged") {
    ScoreTable st = reftab::auc_table();
    ScoreTable perm = st;
    std::swap(perm.methods[0], perm.methods[2]);
    for (auto& row : perm.scores) std::swap(row[0], row[2]);
    FriedmanResult a = friedman(rank(st));
    FriedmanResult b = friedman(rank(perm));
    CHECK(a.chi2 == doctest::Approx(b.chi2).epsilon(1e-12));
    auto w1 = win_tie_loss(st, "rlforest");
    auto w2 = win_tie_loss(perm, "rlforest");
    for (const auto& w : w1) {
        bool found = false;
        for (const auto& v : w2)
            if (v.method == w.method && v.win == w.win && v.tie == w.tie && v.loss == w.loss)
                found = true;
        CHECK(found);
    }
}
