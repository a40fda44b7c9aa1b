#include "ecgunc/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ecgunc/csv.hpp"
#include "ecgunc/errors.hpp"
#include "ecgunc/metrics.hpp"
#include "ecgunc/stats.hpp"

namespace ecgunc {

namespace {

std::optional<double> mean_of(const std::vector<double>& v) {
    if (v.empty()) return std::nullopt;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

bool has_variance(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] != v[0]) return true;
    }
    return false;
}

// One-sided Welch p for wrong-class values exceeding correct-class values.
std::optional<double> welch_wrong_greater(const std::vector<double>& wrong,
                                          const std::vector<double>& correct) {
    if (wrong.size() < 2 || correct.size() < 2) return std::nullopt;
    if (!has_variance(wrong) && !has_variance(correct)) return std::nullopt;
    return welch_t(wrong, correct, Alternative::AGreater).p;
}

std::optional<PearsonResult> pearson_or_null(const std::vector<double>& x,
                                             const std::vector<double>& y) {
    if (x.size() < 3) return std::nullopt;
    if (!has_variance(x) || !has_variance(y)) return std::nullopt;
    return pearson(x, y);
}

ClassStatsRow make_row(const std::string& label, std::span<const EvalRow> rows,
                       const std::vector<std::size_t>& members,
                       std::optional<double> performance) {
    ClassStatsRow out;
    out.label = label;
    out.n = static_cast<std::int64_t>(members.size());
    std::vector<double> data_all, model_all;
    std::vector<double> total_correct, total_wrong;
    std::vector<double> data_correct, data_wrong;
    std::vector<double> model_correct, model_wrong;
    for (std::size_t i : members) {
        const EvalRow& r = rows[i];
        data_all.push_back(r.data_u);
        model_all.push_back(r.model_u);
        const bool correct = (r.true_label == r.pred_label);
        (correct ? total_correct : total_wrong).push_back(r.total_u);
        (correct ? data_correct : data_wrong).push_back(r.data_u);
        (correct ? model_correct : model_wrong).push_back(r.model_u);
    }
    out.mean_data_u = mean_of(data_all);
    out.mean_model_u = mean_of(model_all);
    out.performance = performance;
    out.p_data = welch_wrong_greater(data_wrong, data_correct);
    out.p_model = welch_wrong_greater(model_wrong, model_correct);
    if (auto pr = pearson_or_null(model_all, data_all)) {
        out.pearson_r = pr->r;
        out.pearson_p = pr->p;
    }
    return out;
}

} // namespace

std::vector<ClassStatsRow> class_stats_report(std::span<const EvalRow> rows, int k) {
    if (rows.empty()) throw ConfigError("class_stats_report: no rows");
    std::vector<int> truth, pred;
    for (const auto& r : rows) {
        truth.push_back(r.true_label);
        pred.push_back(r.pred_label);
    }
    const ConfusionMatrix cm = confusion(truth, pred, k);
    const auto f1 = per_class_f1(cm);

    std::vector<ClassStatsRow> report;
    for (int c = 0; c < k; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].true_label == c) members.push_back(i);
        }
        const std::string label =
            (k == 9) ? kClassNames[static_cast<std::size_t>(c)] : "class" + std::to_string(c);
        std::optional<double> perf;
        if (!members.empty()) perf = f1[static_cast<std::size_t>(c)];
        report.push_back(make_row(label, rows, members, perf));
    }
    std::vector<std::size_t> all(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) all[i] = i;
    report.push_back(make_row("Overall", rows, all, macro_f1(cm)));
    return report;
}

namespace {
std::string opt_str(const std::optional<double>& v) {
    return v ? fmt_double(*v) : std::string();
}
} // namespace

void save_report_csv(const std::vector<ClassStatsRow>& report, const std::string& path) {
    CsvWriter csv(path);
    csv.row({"label", "n", "mean_data_uncertainty", "mean_model_uncertainty", "performance",
             "welch_p_data", "welch_p_model", "pearson_r", "pearson_p"});
    for (const auto& r : report) {
        csv.row({r.label, std::to_string(r.n), opt_str(r.mean_data_u), opt_str(r.mean_model_u),
                 opt_str(r.performance), opt_str(r.p_data), opt_str(r.p_model),
                 opt_str(r.pearson_r), opt_str(r.pearson_p)});
    }
}

void save_report_text(const std::vector<ClassStatsRow>& report, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << "Per-class uncertainty summary\n";
    os << "Data/model uncertainty columns are labeled by computation (mean per-pass\n";
    os << "entropy vs total-minus-data). Welch p-values test the one-sided alternative\n";
    os << "that wrongly classified records carry higher uncertainty.\n\n";
    os << std::left << std::setw(9) << "label" << std::right << std::setw(6) << "n"
       << std::setw(12) << "data_u" << std::setw(12) << "model_u" << std::setw(12) << "perf"
       << std::setw(12) << "p(data)" << std::setw(12) << "p(model)" << std::setw(10) << "r"
       << std::setw(12) << "p(r)" << "\n";
    auto cell = [](const std::optional<double>& v) {
        if (!v) return std::string("-");
        std::ostringstream ss;
        ss << std::setprecision(4) << std::scientific << *v;
        return ss.str();
    };
    auto fixed_cell = [](const std::optional<double>& v) {
        if (!v) return std::string("-");
        std::ostringstream ss;
        ss << std::setprecision(4) << std::fixed << *v;
        return ss.str();
    };
    for (const auto& r : report) {
        os << std::left << std::setw(9) << r.label << std::right << std::setw(6) << r.n
           << std::setw(12) << fixed_cell(r.mean_data_u) << std::setw(12)
           << fixed_cell(r.mean_model_u) << std::setw(12) << fixed_cell(r.performance)
           << std::setw(12) << cell(r.p_data) << std::setw(12) << cell(r.p_model)
           << std::setw(10) << fixed_cell(r.pearson_r) << std::setw(12) << cell(r.pearson_p)
           << "\n";
    }
    if (!os) throw IoError("write failed: " + path);
}

void save_eval_rows_csv(std::span<const EvalRow> rows, const std::string& path) {
    CsvWriter csv(path);
    csv.row({"record_id", "true_label", "pred_label", "total_u", "data_u", "model_u"});
    for (const auto& r : rows) {
        csv.row({r.id, std::to_string(r.true_label), std::to_string(r.pred_label),
                 fmt_double(r.total_u), fmt_double(r.data_u), fmt_double(r.model_u)});
    }
}

std::vector<EvalRow> load_eval_rows_csv(const std::string& path) {
    const CsvTable table = read_csv(path);
    const int cid = table.column("record_id");
    const int ct = table.column("true_label");
    const int cp = table.column("pred_label");
    const int ctu = table.column("total_u");
    const int cdu = table.column("data_u");
    const int cmu = table.column("model_u");
    if (cid < 0 || ct < 0 || cp < 0 || ctu < 0 || cdu < 0 || cmu < 0) {
        throw IoError(path + ": missing uncertainty CSV columns");
    }
    std::vector<EvalRow> rows;
    for (const auto& r : table.rows) {
        EvalRow row;
        row.id = r[static_cast<std::size_t>(cid)];
        row.true_label = std::stoi(r[static_cast<std::size_t>(ct)]);
        row.pred_label = std::stoi(r[static_cast<std::size_t>(cp)]);
        row.total_u = std::stod(r[static_cast<std::size_t>(ctu)]);
        row.data_u = std::stod(r[static_cast<std::size_t>(cdu)]);
        row.model_u = std::stod(r[static_cast<std::size_t>(cmu)]);
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace ecgunc
