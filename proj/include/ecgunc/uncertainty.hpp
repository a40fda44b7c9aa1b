#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ecgunc {

class Network;
struct Dataset;

/// N stochastic-forward probability rows for one record. Rows off by at most
/// 1e-9 from summing to 1 are renormalized on construction; worse rows, or
/// negative entries, are rejected.
struct McPrediction {
    int n_passes = 0;
    int class_count = 0;
    std::vector<double> probs; // n_passes * class_count, row-major

    static McPrediction from_rows(int n_passes, int class_count, std::vector<double> probs);

    std::span<const double> row(int i) const {
        return {probs.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(class_count),
                static_cast<std::size_t>(class_count)};
    }

    /// Column-wise mean row.
    std::vector<double> mean_row() const;

    /// argmax of the mean row, lowest index on ties.
    int predicted_class() const;
};

/// Natural-log entropy with the 0*ln(0)=0 convention. Validates the input.
double entropy(std::span<const double> p);

/// Entropy of the mean row.
double total_uncertainty(const McPrediction& mc);

/// Mean of per-row entropies.
double data_uncertainty(const McPrediction& mc);

/// total - data; raw values in [-1e-6, 0) clamp to 0, below -1e-6 is an error.
double model_uncertainty(const McPrediction& mc);

struct UncertaintyEstimate {
    double total = 0.0;
    double data = 0.0;
    double model = 0.0;     // clamped at 0
    double model_raw = 0.0; // pre-clamp value
};

UncertaintyEstimate decompose(const McPrediction& mc);

/// Runs n_passes stochastic forwards (dropout active, BN running stats) over
/// the selected records; pass i uses a generator seeded base_seed + i.
/// Deterministic given base_seed regardless of batching or thread count.
std::vector<McPrediction> mc_sample(Network& network, const Dataset& data,
                                    std::span<const std::size_t> record_indices,
                                    int n_passes, std::uint64_t base_seed,
                                    int batch_size = 32);

} // namespace ecgunc
