#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecgunc/data_io.hpp"
#include "ecgunc/network.hpp"

namespace ecgunc {

struct TrainConfig {
    int batch_size = 32;
    double lr_init = 1e-3;
    double plateau_factor = 0.3;
    int plateau_patience_steps = 300;
    double weight_decay = 1e-4;
    int max_steps = 600;
    std::uint64_t seed = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    int eval_every = 50;

    void validate() const;
};

struct SplitSpec {
    double train = 0.8;
    double val = 0.1;
    double test = 0.1;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

/// Deterministic shuffled partition by record; floor sizes for val/test with
/// the remainder assigned to train.
SplitIndices split_dataset(const Dataset& data, const SplitSpec& spec, std::uint64_t seed);

struct AdamState {
    std::int64_t step = 0;
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;

    static AdamState init(std::span<const ParamRef> params);
};

/// One Adam update with bias correction. Decoupled weight decay is applied
/// first (theta -= lr*wd*theta) to parameters flagged for decay.
void adam_step(std::span<ParamRef> params, AdamState& state, const TrainConfig& config,
               double lr);

/// Step-indexed reduce-on-plateau: call observe() once per optimizer step
/// with the latest validation metric; the rate never increases.
class PlateauScheduler {
public:
    PlateauScheduler(double lr_init, double factor, int patience_steps)
        : lr_(lr_init), factor_(factor), patience_(patience_steps) {}

    double observe(double metric);
    double lr() const { return lr_; }

private:
    double lr_;
    double factor_;
    int patience_;
    double best_ = -1e300;
    int steps_since_best_ = 0;
};

struct TrainHistoryRow {
    int step = 0;
    double loss = 0.0;
    double lr = 0.0;
    std::optional<double> val_macro_f1; // present on evaluation steps
};

struct TrainResult {
    double best_val_macro_f1 = 0.0;
    int best_step = 0;
    std::vector<TrainHistoryRow> history;
};

/// Cross-entropy training with Adam; the network is left holding the
/// best-validation checkpoint, not the last step. Throws NumericError naming
/// the step if the loss goes non-finite.
TrainResult train(Network& network, const Dataset& data,
                  std::span<const std::size_t> train_indices,
                  std::span<const std::size_t> val_indices, const TrainConfig& config);

/// Deterministic-mode Macro-F1 of the network on the given records.
double evaluate_macro_f1(Network& network, const Dataset& data,
                         std::span<const std::size_t> indices, int batch_size = 32);

void save_history_csv(const std::vector<TrainHistoryRow>& history, const std::string& path);

} // namespace ecgunc
