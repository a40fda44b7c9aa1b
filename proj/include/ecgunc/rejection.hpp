#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ecgunc/uncertainty.hpp"

namespace ecgunc {

/// Which uncertainty the threshold applies to. Total is the paper's rule
/// (the sum of data and model uncertainty); Data is kept as a comparison knob.
enum class ThresholdOn { Total, Data };

struct RejectionOutcome {
    bool accepted = false;
    int class_id = -1;      // valid only when accepted
    double uncertainty = 0.0;
};

/// Accept iff uncertainty <= threshold; the boundary accepts ("greater than
/// t" rejects).
RejectionOutcome decide(const UncertaintyEstimate& estimate, double threshold,
                        int predicted_class, ThresholdOn on = ThresholdOn::Total);

struct SweepGrid {
    double start = 0.400;
    double stop = 1.500;
    double step = 0.050;
};

/// Inclusive-endpoint threshold list; 23 points for the default grid.
std::vector<double> grid_thresholds(const SweepGrid& grid);

struct SweepPoint {
    double threshold = 0.0;
    double accept_ratio = 0.0;
    std::optional<double> macro_f1;                        // absent when nothing accepted
    std::vector<std::optional<double>> per_class_precision; // absent per class when undefined
    std::int64_t accepted_count = 0;
};

/// Metrics over the accepted subset at each grid threshold. Undefined metrics
/// stay absent rather than being reported as zero.
std::vector<SweepPoint> sweep(std::span<const UncertaintyEstimate> estimates,
                              std::span<const int> true_labels,
                              std::span<const int> pred_labels, int k,
                              const SweepGrid& grid = {},
                              ThresholdOn on = ThresholdOn::Total);

} // namespace ecgunc
