#include "omot/assign.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace omot {

namespace {

// Shortest-augmenting-path Hungarian solver on a square cost matrix.
// Returns row_to_col over the padded square problem.
std::vector<int> solve_min_cost_square(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j) {
        if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
    }
    return row_to_col;
}

}  // namespace

Assignment solve_max_assignment(const ScoreMatrix& m) {
    const int rows = m.rows();
    const int cols = m.cols();

    double max_score = 0.0;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (m.forbidden(r, c)) continue;
            const double s = m.score(r, c);
            if (std::isnan(s)) throw std::invalid_argument("score matrix contains NaN");
            if (!std::isfinite(s) || s < 0.0)
                throw std::invalid_argument("scores must be finite and nonnegative");
            max_score = std::max(max_score, s);
        }
    }

    Assignment out;
    if (rows == 0 || cols == 0) {
        for (int r = 0; r < rows; ++r) out.unmatched_rows.push_back(r);
        for (int c = 0; c < cols; ++c) out.unmatched_cols.push_back(c);
        return out;
    }

    // Maximization via negation with a constant shift. Dummy cells and
    // forbidden pairs both carry the bare shift, so every perfect matching on
    // the padded square costs n*shift minus its matched allowed score: the
    // minimizer maximizes exactly the partial-assignment objective, and
    // forbidden "matches" are equivalent to leaving the row unmatched. They
    // are filtered out below.
    const int n = std::max(rows, cols);
    std::vector<std::vector<double>> cost(n, std::vector<double>(n, max_score));
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (!m.forbidden(r, c)) cost[r][c] = max_score - m.score(r, c);
        }
    }

    const std::vector<int> row_to_col = solve_min_cost_square(cost);

    std::vector<char> col_matched(cols, 0);
    for (int r = 0; r < rows; ++r) {
        const int c = row_to_col[r];
        if (c < 0 || c >= cols || m.forbidden(r, c)) {
            out.unmatched_rows.push_back(r);
            continue;
        }
        out.matches.emplace_back(r, c);
        col_matched[c] = 1;
        out.total_score += m.score(r, c);
    }
    for (int c = 0; c < cols; ++c) {
        if (!col_matched[c]) out.unmatched_cols.push_back(c);
    }
    return out;
}

}  // namespace omot
