#include "ecgunc/uncertainty.hpp"

#include <cmath>
#include <string>

#include "ecgunc/data_io.hpp"
#include "ecgunc/errors.hpp"
#include "ecgunc/network.hpp"

namespace ecgunc {

namespace {
constexpr double kRowSumTol = 1e-9;
constexpr double kModelErrorFloor = -1e-6;
} // namespace

McPrediction McPrediction::from_rows(int n_passes, int class_count,
                                     std::vector<double> probs) {
    if (n_passes < 1 || class_count < 2) {
        throw NumericError("McPrediction: need n_passes >= 1 and class_count >= 2");
    }
    if (probs.size() !=
        static_cast<std::size_t>(n_passes) * static_cast<std::size_t>(class_count)) {
        throw NumericError("McPrediction: expected " +
                           std::to_string(n_passes * class_count) + " entries, got " +
                           std::to_string(probs.size()));
    }
    for (int i = 0; i < n_passes; ++i) {
        double s = 0.0;
        for (int c = 0; c < class_count; ++c) {
            const double v = probs[static_cast<std::size_t>(i * class_count + c)];
            if (v < 0.0 || !std::isfinite(v)) {
                throw NumericError("McPrediction: invalid probability " + std::to_string(v) +
                                   " in row " + std::to_string(i));
            }
            s += v;
        }
        if (std::abs(s - 1.0) > kRowSumTol) {
            throw NumericError("McPrediction: row " + std::to_string(i) + " sums to " +
                               std::to_string(s));
        }
        // Tiny drift is renormalized so downstream entropies see exact rows.
        for (int c = 0; c < class_count; ++c) {
            probs[static_cast<std::size_t>(i * class_count + c)] /= s;
        }
    }
    McPrediction mc;
    mc.n_passes = n_passes;
    mc.class_count = class_count;
    mc.probs = std::move(probs);
    return mc;
}

std::vector<double> McPrediction::mean_row() const {
    std::vector<double> mean(static_cast<std::size_t>(class_count), 0.0);
    for (int i = 0; i < n_passes; ++i) {
        for (int c = 0; c < class_count; ++c) {
            mean[static_cast<std::size_t>(c)] +=
                probs[static_cast<std::size_t>(i * class_count + c)];
        }
    }
    for (double& v : mean) v /= static_cast<double>(n_passes);
    return mean;
}

int McPrediction::predicted_class() const {
    const auto mean = mean_row();
    int best = 0;
    for (int c = 1; c < class_count; ++c) {
        if (mean[static_cast<std::size_t>(c)] > mean[static_cast<std::size_t>(best)]) best = c;
    }
    return best;
}

double entropy(std::span<const double> p) {
    double s = 0.0;
    for (double v : p) {
        if (v < 0.0 || !std::isfinite(v)) {
            throw NumericError("entropy: negative or non-finite entry " + std::to_string(v));
        }
        s += v;
    }
    if (std::abs(s - 1.0) > kRowSumTol) {
        throw NumericError("entropy: probabilities sum to " + std::to_string(s));
    }
    double h = 0.0;
    for (double v : p) {
        if (v > 0.0) h -= v * std::log(v);
    }
    return h;
}

double total_uncertainty(const McPrediction& mc) {
    const auto mean = mc.mean_row();
    return entropy(mean);
}

double data_uncertainty(const McPrediction& mc) {
    double acc = 0.0;
    for (int i = 0; i < mc.n_passes; ++i) acc += entropy(mc.row(i));
    return acc / static_cast<double>(mc.n_passes);
}

double model_uncertainty(const McPrediction& mc) {
    return decompose(mc).model;
}

UncertaintyEstimate decompose(const McPrediction& mc) {
    UncertaintyEstimate e;
    e.total = total_uncertainty(mc);
    e.data = data_uncertainty(mc);
    e.model_raw = e.total - e.data;
    if (e.model_raw < kModelErrorFloor) {
        throw NumericError("decompose: model uncertainty " + std::to_string(e.model_raw) +
                           " below " + std::to_string(kModelErrorFloor) +
                           "; entropy computation is broken");
    }
    e.model = e.model_raw < 0.0 ? 0.0 : e.model_raw;
    return e;
}

std::vector<McPrediction> mc_sample(Network& network, const Dataset& data,
                                    std::span<const std::size_t> record_indices,
                                    int n_passes, std::uint64_t base_seed,
                                    int batch_size) {
    if (n_passes < 1) throw NumericError("mc_sample: n_passes must be >= 1");
    if (batch_size < 1) throw NumericError("mc_sample: batch_size must be >= 1");
    const int k = network.config.num_classes;
    const std::int64_t target_len = network.config.input_length;
    const std::size_t n_records = record_indices.size();

    // Assemble evaluation batches once; every pass reuses them.
    std::vector<Tensor> batches;
    std::vector<std::size_t> batch_offsets;
    for (std::size_t start = 0; start < n_records; start += static_cast<std::size_t>(batch_size)) {
        const std::size_t b = std::min(static_cast<std::size_t>(batch_size), n_records - start);
        Tensor batch = Tensor::zeros({static_cast<std::int64_t>(b), EcgRecord::kLeads, target_len});
        auto dst = batch.values();
        for (std::size_t i = 0; i < b; ++i) {
            const EcgRecord& rec = data.records[record_indices[start + i]];
            const auto window = condition_length(rec, target_len, CropMode::EvalCenterCrop, nullptr);
            std::copy(window.begin(), window.end(),
                      dst.begin() + static_cast<std::ptrdiff_t>(i * window.size()));
        }
        batches.push_back(batch);
        batch_offsets.push_back(start);
    }

    std::vector<std::vector<double>> rows(
        n_records, std::vector<double>(static_cast<std::size_t>(n_passes * k)));
    for (int pass = 0; pass < n_passes; ++pass) {
        Rng rng(base_seed + static_cast<std::uint64_t>(pass));
        for (std::size_t bi = 0; bi < batches.size(); ++bi) {
            Tensor probs = network.predict_proba(nullptr, batches[bi],
                                                 ModelMode::EvalMcDropout, rng);
            if (!probs.all_finite()) {
                throw NumericError("mc_sample: non-finite network output on pass " +
                                   std::to_string(pass) + " (untrained or diverged model)");
            }
            const std::int64_t b = probs.dim(0);
            for (std::int64_t i = 0; i < b; ++i) {
                double* dst = rows[batch_offsets[bi] + static_cast<std::size_t>(i)].data() +
                              static_cast<std::size_t>(pass) * static_cast<std::size_t>(k);
                for (int c = 0; c < k; ++c) {
                    dst[c] = probs.values()[static_cast<std::size_t>(i * k + c)];
                }
            }
        }
    }

    std::vector<McPrediction> out;
    out.reserve(n_records);
    for (std::size_t r = 0; r < n_records; ++r) {
        out.push_back(McPrediction::from_rows(n_passes, k, std::move(rows[r])));
    }
    return out;
}

} // namespace ecgunc
