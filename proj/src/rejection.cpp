#include "ecgunc/rejection.hpp"

#include <string>

#include "ecgunc/errors.hpp"
#include "ecgunc/metrics.hpp"

namespace ecgunc {

RejectionOutcome decide(const UncertaintyEstimate& estimate, double threshold,
                        int predicted_class, ThresholdOn on) {
    if (threshold < 0.0) {
        throw NumericError("decide: threshold must be >= 0, got " + std::to_string(threshold));
    }
    const double u = (on == ThresholdOn::Total) ? estimate.total : estimate.data;
    RejectionOutcome out;
    out.uncertainty = u;
    if (u <= threshold) {
        out.accepted = true;
        out.class_id = predicted_class;
    }
    return out;
}

std::vector<double> grid_thresholds(const SweepGrid& grid) {
    if (grid.step <= 0.0) throw ConfigError("sweep grid: step must be > 0");
    if (grid.stop < grid.start) throw ConfigError("sweep grid: stop < start");
    std::vector<double> ts;
    for (int i = 0;; ++i) {
        const double t = grid.start + grid.step * static_cast<double>(i);
        if (t > grid.stop + 1e-12) break;
        ts.push_back(t);
    }
    return ts;
}

std::vector<SweepPoint> sweep(std::span<const UncertaintyEstimate> estimates,
                              std::span<const int> true_labels,
                              std::span<const int> pred_labels, int k,
                              const SweepGrid& grid, ThresholdOn on) {
    const std::size_t n = estimates.size();
    if (n == 0) throw ConfigError("sweep: empty input");
    if (true_labels.size() != n || pred_labels.size() != n) {
        throw ShapeError("sweep: " + std::to_string(n) + " estimates vs " +
                         std::to_string(true_labels.size()) + " labels and " +
                         std::to_string(pred_labels.size()) + " predictions");
    }

    std::vector<SweepPoint> points;
    for (double t : grid_thresholds(grid)) {
        SweepPoint p;
        p.threshold = t;
        std::vector<int> acc_true, acc_pred;
        for (std::size_t i = 0; i < n; ++i) {
            if (decide(estimates[i], t, pred_labels[i], on).accepted) {
                acc_true.push_back(true_labels[i]);
                acc_pred.push_back(pred_labels[i]);
            }
        }
        p.accepted_count = static_cast<std::int64_t>(acc_true.size());
        p.accept_ratio = static_cast<double>(acc_true.size()) / static_cast<double>(n);
        p.per_class_precision.assign(static_cast<std::size_t>(k), std::nullopt);
        if (!acc_true.empty()) {
            const ConfusionMatrix cm = confusion(acc_true, acc_pred, k);
            p.macro_f1 = macro_f1(cm);
            const auto prec = per_class_precision(cm);
            for (int c = 0; c < k; ++c) {
                if (prec[static_cast<std::size_t>(c)] >= 0.0) {
                    p.per_class_precision[static_cast<std::size_t>(c)] =
                        prec[static_cast<std::size_t>(c)];
                }
            }
        }
        points.push_back(std::move(p));
    }
    return points;
}

} // namespace ecgunc
