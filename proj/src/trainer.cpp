#include "ecgunc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ecgunc/csv.hpp"
#include "ecgunc/errors.hpp"
#include "ecgunc/metrics.hpp"

namespace ecgunc {

void TrainConfig::validate() const {
    if (batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
    if (!(plateau_factor > 0.0 && plateau_factor < 1.0)) {
        throw ConfigError("TrainConfig: plateau_factor must lie in (0,1)");
    }
    if (plateau_patience_steps < 1) throw ConfigError("TrainConfig: patience must be >= 1");
    if (max_steps < 1) throw ConfigError("TrainConfig: max_steps must be >= 1");
    if (eval_every < 1) throw ConfigError("TrainConfig: eval_every must be >= 1");
    if (lr_init < 0.0) throw ConfigError("TrainConfig: negative learning rate");
    if (weight_decay < 0.0) throw ConfigError("TrainConfig: negative weight decay");
}

SplitIndices split_dataset(const Dataset& data, const SplitSpec& spec, std::uint64_t seed) {
    const std::size_t n = data.records.size();
    if (n < 10) {
        throw ConfigError("split_dataset: need at least 10 records, got " + std::to_string(n));
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        std::swap(order[i - 1],
                  order[static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(i)))]);
    }
    // Floor sizes for val and test; the remainder goes to train.
    const auto n_val = static_cast<std::size_t>(spec.val * static_cast<double>(n));
    const auto n_test = static_cast<std::size_t>(spec.test * static_cast<double>(n));
    SplitIndices out;
    out.train.assign(order.begin(), order.end() - static_cast<std::ptrdiff_t>(n_val + n_test));
    out.val.assign(order.end() - static_cast<std::ptrdiff_t>(n_val + n_test),
                   order.end() - static_cast<std::ptrdiff_t>(n_test));
    out.test.assign(order.end() - static_cast<std::ptrdiff_t>(n_test), order.end());
    return out;
}

AdamState AdamState::init(std::span<const ParamRef> params) {
    AdamState s;
    for (const auto& p : params) {
        s.m.emplace_back(static_cast<std::size_t>(p.tensor.numel()), 0.0);
        s.v.emplace_back(static_cast<std::size_t>(p.tensor.numel()), 0.0);
    }
    return s;
}

void adam_step(std::span<ParamRef> params, AdamState& state, const TrainConfig& config,
               double lr) {
    if (state.m.size() != params.size() || state.v.size() != params.size()) {
        throw ShapeError("adam_step: state tracks " + std::to_string(state.m.size()) +
                         " parameters, got " + std::to_string(params.size()));
    }
    state.step += 1;
    const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        ParamRef& p = params[pi];
        auto theta = p.tensor.values();
        auto grad = p.tensor.grad();
        auto& m = state.m[pi];
        auto& v = state.v[pi];
        if (m.size() != theta.size()) {
            throw ShapeError("adam_step: parameter " + p.name + " changed size");
        }
        const double wd = p.decay ? config.weight_decay : 0.0;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            if (wd != 0.0) theta[i] -= lr * wd * theta[i];
            const double g = grad[i];
            m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
            v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            theta[i] -= lr * mhat / (std::sqrt(vhat) + config.adam_epsilon);
        }
    }
}

double PlateauScheduler::observe(double metric) {
    if (metric > best_) {
        best_ = metric;
        steps_since_best_ = 0;
    } else {
        ++steps_since_best_;
        if (steps_since_best_ >= patience_) {
            lr_ *= factor_;
            steps_since_best_ = 0;
        }
    }
    return lr_;
}

namespace {

Tensor assemble_batch(const Dataset& data, std::span<const std::size_t> indices,
                      std::int64_t target_len, CropMode mode, Rng* rng,
                      std::vector<int>* labels) {
    const auto b = static_cast<std::int64_t>(indices.size());
    Tensor batch = Tensor::zeros({b, EcgRecord::kLeads, target_len});
    auto dst = batch.values();
    if (labels) labels->clear();
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const EcgRecord& rec = data.records[indices[i]];
        const auto window = condition_length(rec, target_len, mode, rng);
        std::copy(window.begin(), window.end(),
                  dst.begin() + static_cast<std::ptrdiff_t>(i * window.size()));
        if (labels) labels->push_back(rec.label);
    }
    return batch;
}

} // namespace

double evaluate_macro_f1(Network& network, const Dataset& data,
                         std::span<const std::size_t> indices, int batch_size) {
    std::vector<int> truth, pred;
    Rng unused(0);
    for (std::size_t start = 0; start < indices.size();
         start += static_cast<std::size_t>(batch_size)) {
        const std::size_t b =
            std::min(static_cast<std::size_t>(batch_size), indices.size() - start);
        std::vector<int> labels;
        Tensor batch = assemble_batch(data, indices.subspan(start, b),
                                      network.config.input_length,
                                      CropMode::EvalCenterCrop, nullptr, &labels);
        Tensor logits = network.forward(nullptr, batch, ModelMode::EvalDeterministic, unused);
        for (std::size_t i = 0; i < b; ++i) {
            int best = 0;
            for (int c = 1; c < network.config.num_classes; ++c) {
                if (logits.values()[i * static_cast<std::size_t>(network.config.num_classes) +
                                    static_cast<std::size_t>(c)] >
                    logits.values()[i * static_cast<std::size_t>(network.config.num_classes) +
                                    static_cast<std::size_t>(best)]) {
                    best = c;
                }
            }
            truth.push_back(labels[i]);
            pred.push_back(best);
        }
    }
    return macro_f1(truth, pred, network.config.num_classes);
}

TrainResult train(Network& network, const Dataset& data,
                  std::span<const std::size_t> train_indices,
                  std::span<const std::size_t> val_indices, const TrainConfig& config) {
    config.validate();
    if (train_indices.empty()) throw ConfigError("train: empty training set");

    Rng root(config.seed);
    Rng shuffle_rng = root.fork(1);
    Rng crop_rng = root.fork(2);
    Rng dropout_rng = root.fork(3);

    auto params = network.parameters();
    AdamState adam = AdamState::init(params);
    PlateauScheduler scheduler(config.lr_init, config.plateau_factor,
                               config.plateau_patience_steps);

    std::vector<std::size_t> epoch(train_indices.begin(), train_indices.end());
    auto reshuffle = [&]() {
        for (std::size_t i = epoch.size(); i > 1; --i) {
            std::swap(epoch[i - 1], epoch[static_cast<std::size_t>(shuffle_rng.uniform_int(
                                        static_cast<std::int64_t>(i)))]);
        }
    };
    reshuffle();
    std::size_t cursor = 0;

    TrainResult result;
    result.best_val_macro_f1 = -1.0;
    auto best_snapshot = network.snapshot_state();
    double latest_val = -1e300;
    double lr = config.lr_init;

    for (int step = 1; step <= config.max_steps; ++step) {
        // Next batch from the shuffled epoch stream.
        std::vector<std::size_t> batch_idx;
        batch_idx.reserve(static_cast<std::size_t>(config.batch_size));
        for (int i = 0; i < config.batch_size; ++i) {
            if (cursor == epoch.size()) {
                reshuffle();
                cursor = 0;
            }
            batch_idx.push_back(epoch[cursor++]);
        }
        std::vector<int> labels;
        Tensor batch = assemble_batch(data, batch_idx, network.config.input_length,
                                      CropMode::TrainRandomCrop, &crop_rng, &labels);

        Tape tape;
        Tensor logits = network.forward(&tape, batch, ModelMode::Train, dropout_rng);
        Tensor loss = cross_entropy_loss(&tape, logits, labels);
        const double loss_value = loss.item();
        if (!std::isfinite(loss_value)) {
            throw NumericError("train: non-finite loss at step " + std::to_string(step));
        }
        for (auto& p : params) p.tensor.zero_grad();
        tape.backward(loss);
        adam_step(params, adam, config, lr);

        TrainHistoryRow row;
        row.step = step;
        row.loss = loss_value;
        row.lr = lr;
        if (step % config.eval_every == 0) {
            const double val_f1 = evaluate_macro_f1(network, data, val_indices,
                                                    config.batch_size);
            latest_val = val_f1;
            row.val_macro_f1 = val_f1;
            if (val_f1 > result.best_val_macro_f1) {
                result.best_val_macro_f1 = val_f1;
                result.best_step = step;
                best_snapshot = network.snapshot_state();
            }
        }
        lr = scheduler.observe(latest_val);
        result.history.push_back(row);
    }

    network.restore_state(best_snapshot);
    return result;
}

void save_history_csv(const std::vector<TrainHistoryRow>& history, const std::string& path) {
    CsvWriter csv(path);
    csv.row({"step", "loss", "lr", "val_macro_f1"});
    for (const auto& row : history) {
        csv.row({std::to_string(row.step), fmt_double(row.loss), fmt_double(row.lr),
                 row.val_macro_f1 ? fmt_double(*row.val_macro_f1) : std::string()});
    }
}

} // namespace ecgunc
