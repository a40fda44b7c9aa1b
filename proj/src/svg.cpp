#include "ecgunc/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ecgunc/errors.hpp"

namespace ecgunc {

namespace {

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

struct Frame {
    double width = 640, height = 440;
    double left = 70, right = 25, top = 40, bottom = 55;
    double x_min = 0, x_max = 1, y_min = 0, y_max = 1;

    double px(double x) const {
        return left + (x - x_min) / (x_max - x_min) * (width - left - right);
    }
    double py(double y) const {
        return height - bottom - (y - y_min) / (y_max - y_min) * (height - top - bottom);
    }
};

void expand_range(double& lo, double& hi) {
    if (hi <= lo) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
}

std::string header(double w, double h) {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\""
       << num(h) << "\" viewBox=\"0 0 " << num(w) << " " << num(h) << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    return os.str();
}

void axes(std::ostringstream& os, const Frame& f, const std::string& title,
          const std::string& x_title, const std::string& y_title) {
    os << "<text x=\"" << num(f.width / 2) << "\" y=\"22\" text-anchor=\"middle\" "
       << "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";
    os << "<line x1=\"" << num(f.left) << "\" y1=\"" << num(f.height - f.bottom)
       << "\" x2=\"" << num(f.width - f.right) << "\" y2=\"" << num(f.height - f.bottom)
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << num(f.left) << "\" y1=\"" << num(f.top) << "\" x2=\""
       << num(f.left) << "\" y2=\"" << num(f.height - f.bottom) << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double fx = f.x_min + (f.x_max - f.x_min) * i / 5.0;
        const double fy = f.y_min + (f.y_max - f.y_min) * i / 5.0;
        os << "<line x1=\"" << num(f.px(fx)) << "\" y1=\"" << num(f.height - f.bottom)
           << "\" x2=\"" << num(f.px(fx)) << "\" y2=\"" << num(f.height - f.bottom + 5)
           << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << num(f.px(fx)) << "\" y=\"" << num(f.height - f.bottom + 18)
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
           << num(fx) << "</text>\n";
        os << "<line x1=\"" << num(f.left - 5) << "\" y1=\"" << num(f.py(fy)) << "\" x2=\""
           << num(f.left) << "\" y2=\"" << num(f.py(fy)) << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << num(f.left - 9) << "\" y=\"" << num(f.py(fy) + 4)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(fy)
           << "</text>\n";
    }
    os << "<text x=\"" << num((f.left + f.width - f.right) / 2) << "\" y=\""
       << num(f.height - 12) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       << "font-size=\"13\">" << x_title << "</text>\n";
    os << "<text x=\"16\" y=\"" << num((f.top + f.height - f.bottom) / 2)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
       << "transform=\"rotate(-90 16 " << num((f.top + f.height - f.bottom) / 2) << ")\">"
       << y_title << "</text>\n";
}

} // namespace

std::string svg_line_chart(std::span<const LabeledPoint> points, const std::string& title,
                           const std::string& x_title, const std::string& y_title) {
    Frame f;
    if (!points.empty()) {
        f.x_min = f.x_max = points[0].x;
        f.y_min = f.y_max = points[0].y;
        for (const auto& p : points) {
            f.x_min = std::min(f.x_min, p.x);
            f.x_max = std::max(f.x_max, p.x);
            f.y_min = std::min(f.y_min, p.y);
            f.y_max = std::max(f.y_max, p.y);
        }
    }
    expand_range(f.x_min, f.x_max);
    expand_range(f.y_min, f.y_max);

    std::ostringstream os;
    os << header(f.width, f.height);
    axes(os, f, title, x_title, y_title);
    os << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    for (const auto& p : points) os << num(f.px(p.x)) << "," << num(f.py(p.y)) << " ";
    os << "\"/>\n";
    for (const auto& p : points) {
        os << "<circle cx=\"" << num(f.px(p.x)) << "\" cy=\"" << num(f.py(p.y))
           << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
        if (!p.label.empty()) {
            os << "<text x=\"" << num(f.px(p.x) + 5) << "\" y=\"" << num(f.py(p.y) - 6)
               << "\" font-family=\"sans-serif\" font-size=\"9\">" << p.label << "</text>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

std::string svg_heatmap(std::span<const double> fractions, int k,
                        std::span<const char* const> class_names, const std::string& title) {
    if (static_cast<int>(fractions.size()) != k * k) {
        throw ShapeError("svg_heatmap: expected k*k fractions");
    }
    const double cell = 44;
    const double left = 90, top = 70;
    const double width = left + k * cell + 30;
    const double height = top + k * cell + 60;

    std::ostringstream os;
    os << header(width, height);
    os << "<text x=\"" << num(width / 2) << "\" y=\"24\" text-anchor=\"middle\" "
       << "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";
    for (int t = 0; t < k; ++t) {
        for (int p = 0; p < k; ++p) {
            const double v = fractions[static_cast<std::size_t>(t * k + p)];
            const int shade = static_cast<int>(255.0 - 205.0 * std::clamp(v, 0.0, 1.0));
            os << "<rect x=\"" << num(left + p * cell) << "\" y=\"" << num(top + t * cell)
               << "\" width=\"" << num(cell) << "\" height=\"" << num(cell)
               << "\" fill=\"rgb(" << shade << "," << shade << ",255)\" stroke=\"#ccc\"/>\n";
            char buf[16];
            std::snprintf(buf, sizeof(buf), "%.2f", v);
            os << "<text x=\"" << num(left + p * cell + cell / 2) << "\" y=\""
               << num(top + t * cell + cell / 2 + 4)
               << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\""
               << (v > 0.55 ? " fill=\"white\"" : "") << ">" << buf << "</text>\n";
        }
    }
    for (int i = 0; i < k; ++i) {
        const char* name =
            i < static_cast<int>(class_names.size()) ? class_names[static_cast<std::size_t>(i)] : "?";
        os << "<text x=\"" << num(left - 8) << "\" y=\"" << num(top + i * cell + cell / 2 + 4)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << name
           << "</text>\n";
        os << "<text x=\"" << num(left + i * cell + cell / 2) << "\" y=\"" << num(top - 10)
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << name
           << "</text>\n";
    }
    os << "<text x=\"" << num(left + k * cell / 2) << "\" y=\"" << num(height - 18)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
       << "predicted class (rows: true class, row-normalized = per-class recall)"
       << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

std::string svg_scatter(std::span<const double> xs, std::span<const double> ys,
                        const std::string& title, const std::string& x_title,
                        const std::string& y_title, bool identity_line) {
    if (xs.size() != ys.size()) throw ShapeError("svg_scatter: size mismatch");
    Frame f;
    if (!xs.empty()) {
        f.x_min = f.x_max = xs[0];
        f.y_min = f.y_max = ys[0];
        for (std::size_t i = 0; i < xs.size(); ++i) {
            f.x_min = std::min(f.x_min, xs[i]);
            f.x_max = std::max(f.x_max, xs[i]);
            f.y_min = std::min(f.y_min, ys[i]);
            f.y_max = std::max(f.y_max, ys[i]);
        }
    }
    if (identity_line) {
        // Shared range so y=x is the visual diagonal.
        f.x_min = f.y_min = std::min(f.x_min, f.y_min);
        f.x_max = f.y_max = std::max(f.x_max, f.y_max);
    }
    expand_range(f.x_min, f.x_max);
    expand_range(f.y_min, f.y_max);

    std::ostringstream os;
    os << header(f.width, f.height);
    axes(os, f, title, x_title, y_title);
    if (identity_line) {
        const double lo = std::max(f.x_min, f.y_min);
        const double hi = std::min(f.x_max, f.y_max);
        os << "<line x1=\"" << num(f.px(lo)) << "\" y1=\"" << num(f.py(lo)) << "\" x2=\""
           << num(f.px(hi)) << "\" y2=\"" << num(f.py(hi))
           << "\" stroke=\"#888\" stroke-dasharray=\"5,4\"/>\n";
        os << "<text x=\"" << num(f.px(hi) - 30) << "\" y=\"" << num(f.py(hi) + 14)
           << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#666\">y=x</text>\n";
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
        os << "<circle cx=\"" << num(f.px(xs[i])) << "\" cy=\"" << num(f.py(ys[i]))
           << "\" r=\"2.2\" fill=\"#d62728\" fill-opacity=\"0.55\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string svg_histogram(std::span<const HistogramSeries> series, int bins,
                          const std::string& title, const std::string& x_title) {
    if (bins < 1) throw ShapeError("svg_histogram: bins must be >= 1");
    double lo = 0.0, hi = 1.0;
    bool any = false;
    for (const auto& s : series) {
        for (double v : s.values) {
            if (!any) {
                lo = hi = v;
                any = true;
            }
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (!any) hi = lo + 1.0;
    if (hi <= lo) hi = lo + 1.0;

    std::vector<std::vector<double>> counts;
    double max_count = 1.0;
    for (const auto& s : series) {
        std::vector<double> c(static_cast<std::size_t>(bins), 0.0);
        for (double v : s.values) {
            int b = static_cast<int>((v - lo) / (hi - lo) * bins);
            b = std::clamp(b, 0, bins - 1);
            c[static_cast<std::size_t>(b)] += 1.0;
        }
        for (double v : c) max_count = std::max(max_count, v);
        counts.push_back(std::move(c));
    }

    Frame f;
    f.x_min = lo;
    f.x_max = hi;
    f.y_min = 0.0;
    f.y_max = max_count * 1.05;

    std::ostringstream os;
    os << header(f.width, f.height);
    axes(os, f, title, x_title, "count");
    const double bin_w = (hi - lo) / bins;
    for (std::size_t si = 0; si < series.size(); ++si) {
        for (int b = 0; b < bins; ++b) {
            const double c = counts[si][static_cast<std::size_t>(b)];
            if (c <= 0.0) continue;
            const double x0 = f.px(lo + b * bin_w);
            const double x1 = f.px(lo + (b + 1) * bin_w);
            os << "<rect x=\"" << num(x0) << "\" y=\"" << num(f.py(c)) << "\" width=\""
               << num(x1 - x0) << "\" height=\"" << num(f.py(0.0) - f.py(c)) << "\" fill=\""
               << series[si].color << "\" fill-opacity=\"0.45\"/>\n";
        }
        os << "<rect x=\"" << num(f.width - 170) << "\" y=\"" << num(f.top + 18.0 * si)
           << "\" width=\"12\" height=\"12\" fill=\"" << series[si].color
           << "\" fill-opacity=\"0.45\"/>\n";
        os << "<text x=\"" << num(f.width - 152) << "\" y=\"" << num(f.top + 18.0 * si + 10)
           << "\" font-family=\"sans-serif\" font-size=\"11\">" << series[si].name
           << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << content;
    if (!os) throw IoError("write failed: " + path);
}

} // namespace ecgunc
