#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "omot/assign.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace omot;

namespace {

// Exhaustive oracle: recursion over rows, each row either stays unmatched or
// takes a free, non-forbidden column.
double best_total(const ScoreMatrix& m, int row, std::vector<char>& col_used) {
    if (row == m.rows()) return 0.0;
    double best = best_total(m, row + 1, col_used);  // leave this row unmatched
    for (int c = 0; c < m.cols(); ++c) {
        if (col_used[c] || m.forbidden(row, c)) continue;
        col_used[c] = 1;
        best = std::max(best, m.score(row, c) + best_total(m, row + 1, col_used));
        col_used[c] = 0;
    }
    return best;
}

double oracle(const ScoreMatrix& m) {
    std::vector<char> used(m.cols(), 0);
    return best_total(m, 0, used);
}

ScoreMatrix random_matrix(std::mt19937& rng, int rows, int cols, double forbid_prob) {
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::uniform_real_distribution<double> p(0.0, 1.0);
    ScoreMatrix m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (p(rng) < forbid_prob) {
                m.forbid(r, c);
            } else {
                m.set_score(r, c, u(rng));
            }
        }
    }
    return m;
}

}  // namespace

TEST_CASE("1x1 matrix") {
    ScoreMatrix m(1, 1);
    m.set_score(0, 0, 5.0);
    const Assignment a = solve_max_assignment(m);
    REQUIRE(a.matches.size() == 1);
    CHECK(a.matches[0] == std::pair<int, int>{0, 0});
    CHECK(a.total_score == doctest::Approx(5.0));
}

TEST_CASE("diagonal dominance") {
    ScoreMatrix m(2, 2);
    m.set_score(0, 0, 2.0);
    m.set_score(1, 1, 2.0);
    const Assignment a = solve_max_assignment(m);
    REQUIRE(a.matches.size() == 2);
    CHECK(a.matches[0] == std::pair<int, int>{0, 0});
    CHECK(a.matches[1] == std::pair<int, int>{1, 1});
    CHECK(a.total_score == doctest::Approx(4.0));
}

TEST_CASE("anti-diagonal optimum") {
    ScoreMatrix m(2, 2);
    m.set_score(0, 0, 1.0);
    m.set_score(0, 1, 5.0);
    m.set_score(1, 0, 5.0);
    m.set_score(1, 1, 1.0);
    const Assignment a = solve_max_assignment(m);
    CHECK(a.total_score == doctest::Approx(10.0));
}

TEST_CASE("random 7x6 matrices match the exhaustive oracle") {
    std::mt19937 rng(101);
    for (int trial = 0; trial < 200; ++trial) {
        const ScoreMatrix m = random_matrix(rng, 7, 6, 0.0);
        const Assignment a = solve_max_assignment(m);
        CHECK(a.total_score == doctest::Approx(oracle(m)).epsilon(1e-12));
    }
}

TEST_CASE("random rectangular matrices with forbidden pairs match the oracle") {
    std::mt19937 rng(202);
    std::uniform_int_distribution<int> dim(1, 7);
    for (int trial = 0; trial < 300; ++trial) {
        const ScoreMatrix m = random_matrix(rng, dim(rng), dim(rng), 0.3);
        const Assignment a = solve_max_assignment(m);
        CHECK(a.total_score == doctest::Approx(oracle(m)).epsilon(1e-12));
        for (const auto& [r, c] : a.matches) CHECK(!m.forbidden(r, c));
    }
}

TEST_CASE("one-to-one constraints hold") {
    std::mt19937 rng(303);
    const ScoreMatrix m = random_matrix(rng, 6, 6, 0.2);
    const Assignment a = solve_max_assignment(m);
    std::vector<int> row_count(6, 0), col_count(6, 0);
    for (const auto& [r, c] : a.matches) {
        row_count[r] += 1;
        col_count[c] += 1;
    }
    for (int i = 0; i < 6; ++i) {
        CHECK(row_count[i] <= 1);
        CHECK(col_count[i] <= 1);
    }
    CHECK(a.matches.size() + a.unmatched_rows.size() == 6);
    CHECK(a.matches.size() + a.unmatched_cols.size() == 6);
}

TEST_CASE("scale equivariance of the optimum") {
    std::mt19937 rng(404);
    for (int trial = 0; trial < 50; ++trial) {
        const ScoreMatrix m = random_matrix(rng, 5, 5, 0.1);
        ScoreMatrix scaled(5, 5);
        const double c = 3.7;
        for (int r = 0; r < 5; ++r) {
            for (int k = 0; k < 5; ++k) {
                if (m.forbidden(r, k)) {
                    scaled.forbid(r, k);
                } else {
                    scaled.set_score(r, k, c * m.score(r, k));
                }
            }
        }
        const Assignment a = solve_max_assignment(m);
        const Assignment b = solve_max_assignment(scaled);
        CHECK(b.total_score == doctest::Approx(c * a.total_score).epsilon(1e-12));
    }
}

TEST_CASE("rectangular handling leaves the surplus side unmatched") {
    std::mt19937 rng(505);
    const ScoreMatrix wide = random_matrix(rng, 3, 7, 0.0);
    const Assignment a = solve_max_assignment(wide);
    CHECK(a.matches.size() == 3);
    CHECK(a.unmatched_cols.size() == 4);

    const ScoreMatrix tall = random_matrix(rng, 7, 3, 0.0);
    const Assignment b = solve_max_assignment(tall);
    CHECK(b.matches.size() == 3);
    CHECK(b.unmatched_rows.size() == 4);
}

TEST_CASE("fully forbidden rows stay unmatched") {
    ScoreMatrix m(2, 2);
    m.set_score(0, 0, 1.0);
    m.set_score(0, 1, 2.0);
    m.forbid(1, 0);
    m.forbid(1, 1);
    const Assignment a = solve_max_assignment(m);
    REQUIRE(a.matches.size() == 1);
    CHECK(a.matches[0] == std::pair<int, int>{0, 1});
    CHECK(a.unmatched_rows == std::vector<int>{1});
}

TEST_CASE("NaN and negative scores are rejected") {
    ScoreMatrix m(1, 1);
    m.set_score(0, 0, std::numeric_limits<double>::quiet_NaN());
    CHECK_THROWS_AS(solve_max_assignment(m), std::invalid_argument);

    ScoreMatrix neg(1, 1);
    neg.set_score(0, 0, -1.0);
    CHECK_THROWS_AS(solve_max_assignment(neg), std::invalid_argument);

    // A NaN on a forbidden pair is never read.
    ScoreMatrix masked(1, 2);
    masked.set_score(0, 0, 1.0);
    masked.set_score(0, 1, std::numeric_limits<double>::quiet_NaN());
    masked.forbid(0, 1);
    CHECK_NOTHROW(solve_max_assignment(masked));
}

TEST_CASE("deterministic across repeated runs") {
    std::mt19937 rng(606);
    const ScoreMatrix m = random_matrix(rng, 6, 6, 0.0);
    const Assignment a = solve_max_assignment(m);
    const Assignment b = solve_max_assignment(m);
    CHECK(a.matches == b.matches);
    CHECK(a.unmatched_rows == b.unmatched_rows);
    CHECK(a.unmatched_cols == b.unmatched_cols);
}

TEST_CASE("empty dimensions") {
    ScoreMatrix m(0, 3);
    const Assignment a = solve_max_assignment(m);
    CHECK(a.matches.empty());
    CHECK(a.unmatched_cols.size() == 3);
}
