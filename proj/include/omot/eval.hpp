#pragma once

#include "omot/trajectory.hpp"

#include <string>
#include <vector>

namespace omot::eval {

struct MotCounts {
    int fp = 0;
    int fn = 0;
    int idsw = 0;
    int gt_count = 0;
    int matches = 0;

    // MOTA = 1 - (FP + FN + IDSW) / GT. Undefined (returns 0) without GT.
    double mota() const {
        if (gt_count == 0) return 0.0;
        return 1.0 - static_cast<double>(fp + fn + idsw) / gt_count;
    }

    MotCounts& operator+=(const MotCounts& other) {
        fp += other.fp;
        fn += other.fn;
        idsw += other.idsw;
        gt_count += other.gt_count;
        matches += other.matches;
        return *this;
    }
};

struct MotReport {
    std::vector<std::pair<std::string, MotCounts>> per_sequence;
    MotCounts aggregate;
    double threshold = 0.5;

    void add(const std::string& name, const MotCounts& counts) {
        per_sequence.emplace_back(name, counts);
        aggregate += counts;
    }

    std::string table() const;  // text table: FP, FN, IDSW, MOTA
    std::string csv() const;
};

// CLEAR-MOT evaluation with NCD matching. Per frame, ground-truth boxes keep
// their previous prediction when it is still above the threshold; the rest
// are matched by maximum total NCD. An identity switch is counted whenever a
// ground truth's matched prediction id differs from its last matched id.
MotCounts evaluate(const TrajectorySet& pred, const TrajectorySet& gt, double threshold);

}  // namespace omot::eval
