#pragma once

#include <utility>
#include <vector>

namespace omot {

// Rectangular score matrix for one-to-one matching. Scores must be finite and
// nonnegative; pairs that may never match are marked forbidden.
class ScoreMatrix {
public:
    ScoreMatrix(int rows, int cols)
        : rows_(rows), cols_(cols), scores_(static_cast<size_t>(rows) * cols, 0.0),
          forbidden_(static_cast<size_t>(rows) * cols, 0) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double score(int r, int c) const { return scores_[idx(r, c)]; }
    void set_score(int r, int c, double s) { scores_[idx(r, c)] = s; }

    bool forbidden(int r, int c) const { return forbidden_[idx(r, c)] != 0; }
    void forbid(int r, int c) { forbidden_[idx(r, c)] = 1; }

private:
    size_t idx(int r, int c) const { return static_cast<size_t>(r) * cols_ + c; }

    int rows_;
    int cols_;
    std::vector<double> scores_;
    std::vector<char> forbidden_;
};

struct Assignment {
    std::vector<std::pair<int, int>> matches;  // (row, col), row-ascending
    std::vector<int> unmatched_rows;
    std::vector<int> unmatched_cols;
    double total_score = 0.0;
};

// Maximum-score assignment under the one-to-one constraints. Solved with the
// Hungarian algorithm (shortest augmenting path) on a negated, shifted cost
// matrix; forbidden pairs never appear in the result. Throws
// std::invalid_argument on NaN, infinite, or negative scores.
Assignment solve_max_assignment(const ScoreMatrix& m);

}  // namespace omot
