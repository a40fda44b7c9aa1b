#pragma once

#include <algorithm>

#include "ecgunc/kernels.hpp"

// Per-output-element loop bodies shared by the serial and OpenMP kernel
// variants. Each cell is one self-contained accumulation chain, so the two
// variants differ only in how cells are scheduled and their results match
// bit for bit.

namespace ecgunc::kern::detail {

inline void conv1d_forward_cell(const double* x, const double* w, const double* b,
                                double* y, const Conv1dDims& d,
                                std::int64_t batch, std::int64_t co) {
    const std::int64_t cpg_in = d.c_in / d.groups;
    const std::int64_t cpg_out = d.c_out / d.groups;
    const std::int64_t group = co / cpg_out;
    const double* wbase = w + co * cpg_in * d.kernel;
    const double bias = b ? b[co] : 0.0;
    double* yrow = y + (batch * d.c_out + co) * d.l_out;
    for (std::int64_t lo = 0; lo < d.l_out; ++lo) {
        const std::int64_t li0 = lo * d.stride - d.pad_left;
        const std::int64_t k_lo = std::max<std::int64_t>(0, -li0);
        const std::int64_t k_hi = std::min(d.kernel, d.l_in - li0);
        double acc = bias;
        for (std::int64_t cil = 0; cil < cpg_in; ++cil) {
            const double* xrow = x + (batch * d.c_in + group * cpg_in + cil) * d.l_in + li0;
            const double* wrow = wbase + cil * d.kernel;
            for (std::int64_t k = k_lo; k < k_hi; ++k) {
                acc += xrow[k] * wrow[k];
            }
        }
        yrow[lo] = acc;
    }
}

// One cell covers one (batch, input-channel) row of gx, so scatter writes
// stay thread-private and the accumulation order is fixed.
inline void conv1d_backward_input_cell(const double* gy, const double* w, double* gx,
                                       const Conv1dDims& d,
                                       std::int64_t batch, std::int64_t ci) {
    const std::int64_t cpg_in = d.c_in / d.groups;
    const std::int64_t cpg_out = d.c_out / d.groups;
    const std::int64_t group = ci / cpg_in;
    const std::int64_t cil = ci % cpg_in;
    double* gxrow = gx + (batch * d.c_in + ci) * d.l_in;
    for (std::int64_t co = group * cpg_out; co < (group + 1) * cpg_out; ++co) {
        const double* wrow = w + (co * cpg_in + cil) * d.kernel;
        const double* gyrow = gy + (batch * d.c_out + co) * d.l_out;
        for (std::int64_t k = 0; k < d.kernel; ++k) {
            // valid output positions: 0 <= lo*stride + k - pad_left < l_in
            const std::int64_t shift = k - d.pad_left;
            std::int64_t lo_min = 0;
            if (shift < 0) lo_min = (-shift + d.stride - 1) / d.stride;
            const std::int64_t span = d.l_in - 1 - shift; // < 0: no valid position
            if (span < 0) continue;
            std::int64_t lo_max = span / d.stride;
            if (lo_max > d.l_out - 1) lo_max = d.l_out - 1;
            const double wk = wrow[k];
            double* dst = gxrow + shift;
            for (std::int64_t lo = lo_min; lo <= lo_max; ++lo) {
                dst[lo * d.stride] += wk * gyrow[lo];
            }
        }
    }
}

inline void conv1d_backward_weight_cell(const double* gy, const double* x, double* gw,
                                        const Conv1dDims& d,
                                        std::int64_t co, std::int64_t cil) {
    const std::int64_t cpg_in = d.c_in / d.groups;
    const std::int64_t cpg_out = d.c_out / d.groups;
    const std::int64_t ci = (co / cpg_out) * cpg_in + cil;
    double* gwrow = gw + (co * cpg_in + cil) * d.kernel;
    for (std::int64_t k = 0; k < d.kernel; ++k) {
        // valid output positions: 0 <= lo*stride + k - pad_left < l_in
        const std::int64_t shift = k - d.pad_left;
        std::int64_t lo_min = 0;
        if (shift < 0) lo_min = (-shift + d.stride - 1) / d.stride;
        const std::int64_t span = d.l_in - 1 - shift; // < 0: no valid position
        if (span < 0) continue;
        std::int64_t lo_max = span / d.stride;
        if (lo_max > d.l_out - 1) lo_max = d.l_out - 1;
        double acc = 0.0;
        for (std::int64_t b = 0; b < d.batch; ++b) {
            const double* gyrow = gy + (b * d.c_out + co) * d.l_out;
            const double* xrow = x + (b * d.c_in + ci) * d.l_in + shift;
            for (std::int64_t lo = lo_min; lo <= lo_max; ++lo) {
                acc += gyrow[lo] * xrow[lo * d.stride];
            }
        }
        gwrow[k] += acc;
    }
}

inline void bn_stats_cell(const double* x, std::int64_t batch, std::int64_t channels,
                          std::int64_t length, std::int64_t c, double* mean, double* var) {
    const std::int64_t m = batch * length;
    double sum = 0.0;
    for (std::int64_t b = 0; b < batch; ++b) {
        const double* row = x + (b * channels + c) * length;
        for (std::int64_t l = 0; l < length; ++l) sum += row[l];
    }
    const double mu = sum / static_cast<double>(m);
    double sq = 0.0;
    for (std::int64_t b = 0; b < batch; ++b) {
        const double* row = x + (b * channels + c) * length;
        for (std::int64_t l = 0; l < length; ++l) {
            const double dlt = row[l] - mu;
            sq += dlt * dlt;
        }
    }
    mean[c] = mu;
    var[c] = sq / static_cast<double>(m);
}

inline void dense_forward_row(const double* x, const double* w, const double* b,
                              double* y, std::int64_t bt, std::int64_t features,
                              std::int64_t out) {
    const double* xrow = x + bt * features;
    double* yrow = y + bt * out;
    for (std::int64_t o = 0; o < out; ++o) {
        const double* wrow = w + o * features;
        double acc = b ? b[o] : 0.0;
        for (std::int64_t f = 0; f < features; ++f) acc += xrow[f] * wrow[f];
        yrow[o] = acc;
    }
}

inline void dense_backward_input_row(const double* gy, const double* w, double* gx,
                                     std::int64_t b, std::int64_t features,
                                     std::int64_t out) {
    double* gxrow = gx + b * features;
    const double* gyrow = gy + b * out;
    for (std::int64_t o = 0; o < out; ++o) {
        const double g = gyrow[o];
        const double* wrow = w + o * features;
        for (std::int64_t f = 0; f < features; ++f) gxrow[f] += g * wrow[f];
    }
}

inline void dense_backward_wb_row(const double* gy, const double* x, double* gw,
                                  double* gb, std::int64_t o, std::int64_t batch,
                                  std::int64_t features, std::int64_t out) {
    double* gwrow = gw ? gw + o * features : nullptr;
    double bias_acc = 0.0;
    for (std::int64_t b = 0; b < batch; ++b) {
        const double g = gy[b * out + o];
        bias_acc += g;
        if (gwrow) {
            const double* xrow = x + b * features;
            for (std::int64_t f = 0; f < features; ++f) gwrow[f] += g * xrow[f];
        }
    }
    if (gb) gb[o] += bias_acc;
}

} // namespace ecgunc::kern::detail
