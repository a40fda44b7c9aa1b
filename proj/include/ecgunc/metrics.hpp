#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ecgunc {

/// Class labels in dataset order.
inline constexpr std::array<const char*, 9> kClassNames{
    "Normal", "AF", "AVBI", "LBBB", "RBBB", "PAC", "PVC", "STD", "STE"};

/// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
    int k = 0;
    std::vector<std::int64_t> counts; // k*k, row-major

    std::int64_t at(int t, int p) const { return counts[static_cast<std::size_t>(t * k + p)]; }
    std::int64_t total() const;
};

ConfusionMatrix confusion(std::span<const int> true_labels,
                          std::span<const int> pred_labels, int k);

/// Row-normalized fractions; all-zero rows stay zero and are flagged.
struct NormalizedRows {
    int k = 0;
    std::vector<double> fractions;
    std::vector<bool> zero_row;
};

NormalizedRows row_normalize(const ConfusionMatrix& cm);

/// Unweighted mean of one-vs-rest F1 over all k classes. A class with
/// TP=FP=FN=0 contributes F1=0 and still divides by k.
double macro_f1(const ConfusionMatrix& cm);
double macro_f1(std::span<const int> true_labels, std::span<const int> pred_labels, int k);

/// One-vs-rest F1 per class under the same convention as macro_f1.
std::vector<double> per_class_f1(const ConfusionMatrix& cm);

/// Per-class precision TP/(TP+FP); -1 marks classes never predicted.
std::vector<double> per_class_precision(const ConfusionMatrix& cm);

} // namespace ecgunc
