#include "ecgunc/kernels.hpp"

#include "kernels_cells.hpp"

// Reference implementations: plain loops over the shared cells.

namespace ecgunc::kern {

void conv1d_forward_serial(const double* x, const double* w, const double* b,
                           double* y, const Conv1dDims& d) {
    for (std::int64_t bt = 0; bt < d.batch; ++bt)
        for (std::int64_t co = 0; co < d.c_out; ++co)
            detail::conv1d_forward_cell(x, w, b, y, d, bt, co);
}

void conv1d_backward_input_serial(const double* gy, const double* w, double* gx,
                                  const Conv1dDims& d) {
    for (std::int64_t bt = 0; bt < d.batch; ++bt)
        for (std::int64_t ci = 0; ci < d.c_in; ++ci)
            detail::conv1d_backward_input_cell(gy, w, gx, d, bt, ci);
}

void conv1d_backward_weight_serial(const double* gy, const double* x, double* gw,
                                   const Conv1dDims& d) {
    const std::int64_t cpg_in = d.c_in / d.groups;
    for (std::int64_t co = 0; co < d.c_out; ++co)
        for (std::int64_t cil = 0; cil < cpg_in; ++cil)
            detail::conv1d_backward_weight_cell(gy, x, gw, d, co, cil);
}

void conv1d_backward_bias(const double* gy, double* gb, const Conv1dDims& d) {
    for (std::int64_t co = 0; co < d.c_out; ++co) {
        double acc = 0.0;
        for (std::int64_t b = 0; b < d.batch; ++b) {
            const double* gyrow = gy + (b * d.c_out + co) * d.l_out;
            for (std::int64_t lo = 0; lo < d.l_out; ++lo) acc += gyrow[lo];
        }
        gb[co] += acc;
    }
}

void dense_forward_serial(const double* x, const double* w, const double* b,
                          double* y, std::int64_t batch, std::int64_t features,
                          std::int64_t out) {
    for (std::int64_t bt = 0; bt < batch; ++bt)
        detail::dense_forward_row(x, w, b, y, bt, features, out);
}

void dense_backward_serial(const double* gy, const double* x, const double* w,
                           double* gx, double* gw, double* gb,
                           std::int64_t batch, std::int64_t features, std::int64_t out) {
    if (gx) {
        for (std::int64_t b = 0; b < batch; ++b)
            detail::dense_backward_input_row(gy, w, gx, b, features, out);
    }
    if (gw || gb) {
        for (std::int64_t o = 0; o < out; ++o)
            detail::dense_backward_wb_row(gy, x, gw, gb, o, batch, features, out);
    }
}

void bn_batch_stats_serial(const double* x, std::int64_t batch, std::int64_t channels,
                           std::int64_t length, double* mean, double* var) {
    for (std::int64_t c = 0; c < channels; ++c)
        detail::bn_stats_cell(x, batch, channels, length, c, mean, var);
}

} // namespace ecgunc::kern
