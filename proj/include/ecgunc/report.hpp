#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ecgunc {

/// One scored record of an evaluation run.
struct EvalRow {
    std::string id;
    int true_label = 0;
    int pred_label = 0;
    double total_u = 0.0;
    double data_u = 0.0;
    double model_u = 0.0;
};

/// Per-class summary: mean uncertainties, one-vs-rest F1, one-sided Welch
/// p-values testing wrong-class uncertainty > correct-class uncertainty, and
/// the data-vs-model Pearson correlation within the class. Fields are absent
/// when the class lacks the samples to compute them.
struct ClassStatsRow {
    std::string label;
    std::int64_t n = 0;
    std::optional<double> mean_data_u;
    std::optional<double> mean_model_u;
    std::optional<double> performance; // per-class F1; macro F1 on the Overall row
    std::optional<double> p_data;
    std::optional<double> p_model;
    std::optional<double> pearson_r;
    std::optional<double> pearson_p;
};

/// Nine class rows plus an Overall row.
std::vector<ClassStatsRow> class_stats_report(std::span<const EvalRow> rows, int k);

void save_report_csv(const std::vector<ClassStatsRow>& report, const std::string& path);
void save_report_text(const std::vector<ClassStatsRow>& report, const std::string& path);

void save_eval_rows_csv(std::span<const EvalRow> rows, const std::string& path);
std::vector<EvalRow> load_eval_rows_csv(const std::string& path);

} // namespace ecgunc
