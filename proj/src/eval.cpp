#include "omot/eval.hpp"

#include "omot/assign.hpp"
#include "omot/tracker.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <iomanip>

namespace omot::eval {

namespace {

struct FrameEntry {
    int id = 0;
    const Box3D* box = nullptr;
};

std::map<int, std::vector<FrameEntry>> by_frame(const TrajectorySet& set) {
    std::map<int, std::vector<FrameEntry>> out;
    for (const Trajectory& t : set.trajectories) {
        for (const Observation& obs : t.observations) {
            out[obs.frame].push_back({t.id, &obs.box});
        }
    }
    return out;
}

}  // namespace

MotCounts evaluate(const TrajectorySet& pred, const TrajectorySet& gt, double threshold) {
    if (!frame_exclusivity_violations(pred).empty() ||
        !frame_exclusivity_violations(gt).empty())
        throw std::invalid_argument("eval: inputs violate frame exclusivity");

    const auto gt_frames = by_frame(gt);
    const auto pred_frames = by_frame(pred);

    std::map<int, std::vector<FrameEntry>> all_frames = gt_frames;
    for (const auto& [frame, entries] : pred_frames) all_frames.try_emplace(frame);

    MotCounts counts;
    std::unordered_map<int, int> active_match;  // gt id -> pred id from previous frame
    std::unordered_map<int, int> last_match;    // gt id -> last matched pred id (across gaps)

    for (const auto& [frame, unused] : all_frames) {
        const auto git = gt_frames.find(frame);
        const auto pit = pred_frames.find(frame);
        const std::vector<FrameEntry> empty;
        const std::vector<FrameEntry>& gts = git != gt_frames.end() ? git->second : empty;
        const std::vector<FrameEntry>& preds = pit != pred_frames.end() ? pit->second : empty;
        counts.gt_count += static_cast<int>(gts.size());

        std::unordered_map<int, int> pred_slot;
        for (int j = 0; j < static_cast<int>(preds.size()); ++j) pred_slot[preds[j].id] = j;

        std::vector<char> gt_taken(gts.size(), 0);
        std::vector<char> pred_taken(preds.size(), 0);
        std::unordered_map<int, int> matches_now;  // gt id -> pred id

        // Continuity: keep the previous pairing while it stays above threshold.
        for (int i = 0; i < static_cast<int>(gts.size()); ++i) {
            auto prev = active_match.find(gts[i].id);
            if (prev == active_match.end()) continue;
            auto slot = pred_slot.find(prev->second);
            if (slot == pred_slot.end() || pred_taken[slot->second]) continue;
            if (ncd(*gts[i].box, *preds[slot->second].box) < threshold) continue;
            gt_taken[i] = 1;
            pred_taken[slot->second] = 1;
            matches_now[gts[i].id] = prev->second;
        }

        // Remaining pairs: maximize total NCD above the threshold.
        std::vector<int> free_gt, free_pred;
        for (int i = 0; i < static_cast<int>(gts.size()); ++i)
            if (!gt_taken[i]) free_gt.push_back(i);
        for (int j = 0; j < static_cast<int>(preds.size()); ++j)
            if (!pred_taken[j]) free_pred.push_back(j);

        if (!free_gt.empty() && !free_pred.empty()) {
            ScoreMatrix m(static_cast<int>(free_gt.size()), static_cast<int>(free_pred.size()));
            for (int r = 0; r < m.rows(); ++r) {
                for (int c = 0; c < m.cols(); ++c) {
                    const double s = ncd(*gts[free_gt[r]].box, *preds[free_pred[c]].box);
                    if (s < threshold) {
                        m.forbid(r, c);
                    } else {
                        m.set_score(r, c, s);
                    }
                }
            }
            for (const auto& [r, c] : solve_max_assignment(m).matches) {
                gt_taken[free_gt[r]] = 1;
                pred_taken[free_pred[c]] = 1;
                matches_now[gts[free_gt[r]].id] = preds[free_pred[c]].id;
            }
        }

        for (int i = 0; i < static_cast<int>(gts.size()); ++i)
            if (!gt_taken[i]) counts.fn += 1;
        for (int j = 0; j < static_cast<int>(preds.size()); ++j)
            if (!pred_taken[j]) counts.fp += 1;

        for (const auto& [gt_id, pred_id] : matches_now) {
            counts.matches += 1;
            auto last = last_match.find(gt_id);
            if (last != last_match.end() && last->second != pred_id) counts.idsw += 1;
            last_match[gt_id] = pred_id;
        }
        active_match = matches_now;
    }
    return counts;
}

std::string MotReport::table() const {
    std::ostringstream os;
    os << std::left << std::setw(14) << "sequence" << std::right << std::setw(8) << "FP"
       << std::setw(8) << "FN" << std::setw(8) << "IDSW" << std::setw(10) << "MOTA" << "\n";
    auto row = [&os](const std::string& name, const MotCounts& c) {
        os << std::left << std::setw(14) << name << std::right << std::setw(8) << c.fp
           << std::setw(8) << c.fn << std::setw(8) << c.idsw << std::setw(9) << std::fixed
           << std::setprecision(4) << c.mota() << "\n";
    };
    for (const auto& [name, c] : per_sequence) row(name, c);
    row("ALL", aggregate);
    return os.str();
}

std::string MotReport::csv() const {
    std::ostringstream os;
    os << "sequence,fp,fn,idsw,gt,mota\n";
    auto row = [&os](const std::string& name, const MotCounts& c) {
        os << name << "," << c.fp << "," << c.fn << "," << c.idsw << "," << c.gt_count << ","
           << std::fixed << std::setprecision(6) << c.mota() << "\n";
    };
    for (const auto& [name, c] : per_sequence) row(name, c);
    row("ALL", aggregate);
    return os.str();
}

}  // namespace omot::eval
