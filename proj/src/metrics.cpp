#include "ecgunc/metrics.hpp"

#include <numeric>
#include <string>

#include "ecgunc/errors.hpp"

namespace ecgunc {

std::int64_t ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

ConfusionMatrix confusion(std::span<const int> true_labels,
                          std::span<const int> pred_labels, int k) {
    if (true_labels.size() != pred_labels.size()) {
        throw ShapeError("confusion: " + std::to_string(true_labels.size()) +
                         " true labels vs " + std::to_string(pred_labels.size()) +
                         " predictions");
    }
    if (k < 1) throw ShapeError("confusion: k must be >= 1");
    ConfusionMatrix cm;
    cm.k = k;
    cm.counts.assign(static_cast<std::size_t>(k) * static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < true_labels.size(); ++i) {
        const int t = true_labels[i];
        const int p = pred_labels[i];
        if (t < 0 || t >= k || p < 0 || p >= k) {
            throw ShapeError("confusion: label out of range [0," + std::to_string(k) +
                             ") at record " + std::to_string(i) + " (true " +
                             std::to_string(t) + ", pred " + std::to_string(p) + ")");
        }
        ++cm.counts[static_cast<std::size_t>(t * k + p)];
    }
    return cm;
}

NormalizedRows row_normalize(const ConfusionMatrix& cm) {
    NormalizedRows out;
    out.k = cm.k;
    out.fractions.assign(cm.counts.size(), 0.0);
    out.zero_row.assign(static_cast<std::size_t>(cm.k), false);
    for (int t = 0; t < cm.k; ++t) {
        std::int64_t row_sum = 0;
        for (int p = 0; p < cm.k; ++p) row_sum += cm.at(t, p);
        if (row_sum == 0) {
            out.zero_row[static_cast<std::size_t>(t)] = true;
            continue;
        }
        for (int p = 0; p < cm.k; ++p) {
            out.fractions[static_cast<std::size_t>(t * cm.k + p)] =
                static_cast<double>(cm.at(t, p)) / static_cast<double>(row_sum);
        }
    }
    return out;
}

std::vector<double> per_class_f1(const ConfusionMatrix& cm) {
    std::vector<double> f1(static_cast<std::size_t>(cm.k), 0.0);
    for (int c = 0; c < cm.k; ++c) {
        std::int64_t tp = cm.at(c, c);
        std::int64_t fp = 0, fn = 0;
        for (int o = 0; o < cm.k; ++o) {
            if (o == c) continue;
            fp += cm.at(o, c);
            fn += cm.at(c, o);
        }
        // TP=FP=FN=0 scores 0 by convention so macro averages stay comparable
        // across accepted subsets with missing classes.
        const std::int64_t denom = 2 * tp + fp + fn;
        f1[static_cast<std::size_t>(c)] =
            denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
    }
    return f1;
}

double macro_f1(const ConfusionMatrix& cm) {
    const auto f1 = per_class_f1(cm);
    double s = 0.0;
    for (double v : f1) s += v;
    return s / static_cast<double>(cm.k);
}

double macro_f1(std::span<const int> true_labels, std::span<const int> pred_labels, int k) {
    return macro_f1(confusion(true_labels, pred_labels, k));
}

std::vector<double> per_class_precision(const ConfusionMatrix& cm) {
    std::vector<double> prec(static_cast<std::size_t>(cm.k), -1.0);
    for (int c = 0; c < cm.k; ++c) {
        std::int64_t predicted = 0;
        for (int t = 0; t < cm.k; ++t) predicted += cm.at(t, c);
        if (predicted > 0) {
            prec[static_cast<std::size_t>(c)] =
                static_cast<double>(cm.at(c, c)) / static_cast<double>(predicted);
        }
    }
    return prec;
}

} // namespace ecgunc
