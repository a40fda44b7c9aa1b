#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ecgunc {

struct LabeledPoint {
    double x = 0.0;
    double y = 0.0;
    std::string label; // drawn next to the marker when non-empty
};

/// Connected line chart with axis ticks and per-point annotations.
std::string svg_line_chart(std::span<const LabeledPoint> points, const std::string& title,
                           const std::string& x_title, const std::string& y_title);

/// K x K heatmap of fractions (0..1) annotated with values, axes in class order.
std::string svg_heatmap(std::span<const double> fractions, int k,
                        std::span<const char* const> class_names, const std::string& title);

/// Scatter with an optional y=x reference line.
std::string svg_scatter(std::span<const double> xs, std::span<const double> ys,
                        const std::string& title, const std::string& x_title,
                        const std::string& y_title, bool identity_line);

struct HistogramSeries {
    std::string name;
    std::string color;
    std::vector<double> values;
};

/// Overlaid per-series histograms on a shared binning.
std::string svg_histogram(std::span<const HistogramSeries> series, int bins,
                          const std::string& title, const std::string& x_title);

void write_text_file(const std::string& path, const std::string& content);

} // namespace ecgunc
