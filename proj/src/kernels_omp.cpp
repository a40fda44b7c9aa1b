#include "ecgunc/kernels.hpp"

#include "ecgunc/threading.hpp"
#include "kernels_cells.hpp"

// OpenMP variants. Work is split across independent cells only, so results
// are bit-identical to the serial reference for any thread count.

namespace ecgunc::kern {

void conv1d_forward_omp(const double* x, const double* w, const double* b,
                        double* y, const Conv1dDims& d) {
    const std::int64_t n = d.batch * d.c_out;
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        detail::conv1d_forward_cell(x, w, b, y, d, i / d.c_out, i % d.c_out);
    }
}

void conv1d_backward_input_omp(const double* gy, const double* w, double* gx,
                               const Conv1dDims& d) {
    const std::int64_t n = d.batch * d.c_in;
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        detail::conv1d_backward_input_cell(gy, w, gx, d, i / d.c_in, i % d.c_in);
    }
}

void conv1d_backward_weight_omp(const double* gy, const double* x, double* gw,
                                const Conv1dDims& d) {
    const std::int64_t cpg_in = d.c_in / d.groups;
    const std::int64_t n = d.c_out * cpg_in;
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        detail::conv1d_backward_weight_cell(gy, x, gw, d, i / cpg_in, i % cpg_in);
    }
}

void dense_forward_omp(const double* x, const double* w, const double* b,
                       double* y, std::int64_t batch, std::int64_t features,
                       std::int64_t out) {
#pragma omp parallel for schedule(static)
    for (std::int64_t bt = 0; bt < batch; ++bt)
        detail::dense_forward_row(x, w, b, y, bt, features, out);
}

void dense_backward_omp(const double* gy, const double* x, const double* w,
                        double* gx, double* gw, double* gb,
                        std::int64_t batch, std::int64_t features, std::int64_t out) {
    if (gx) {
#pragma omp parallel for schedule(static)
        for (std::int64_t b = 0; b < batch; ++b)
            detail::dense_backward_input_row(gy, w, gx, b, features, out);
    }
    if (gw || gb) {
#pragma omp parallel for schedule(static)
        for (std::int64_t o = 0; o < out; ++o)
            detail::dense_backward_wb_row(gy, x, gw, gb, o, batch, features, out);
    }
}

void bn_batch_stats_omp(const double* x, std::int64_t batch, std::int64_t channels,
                        std::int64_t length, double* mean, double* var) {
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < channels; ++c)
        detail::bn_stats_cell(x, batch, channels, length, c, mean, var);
}

// Dispatchers. Fork-join overhead swamps small ops, so the parallel variant
// only runs above a work threshold.

namespace {
constexpr std::int64_t kWorkCutoff = 1 << 15;

std::int64_t conv_work(const Conv1dDims& d) {
    return d.batch * d.c_out * d.l_out * (d.c_in / d.groups) * d.kernel;
}
} // namespace

void conv1d_forward(const double* x, const double* w, const double* b,
                    double* y, const Conv1dDims& d) {
    if (parallel_enabled() && conv_work(d) > kWorkCutoff) conv1d_forward_omp(x, w, b, y, d);
    else conv1d_forward_serial(x, w, b, y, d);
}

void conv1d_backward_input(const double* gy, const double* w, double* gx,
                           const Conv1dDims& d) {
    if (parallel_enabled() && conv_work(d) > kWorkCutoff) conv1d_backward_input_omp(gy, w, gx, d);
    else conv1d_backward_input_serial(gy, w, gx, d);
}

void conv1d_backward_weight(const double* gy, const double* x, double* gw,
                            const Conv1dDims& d) {
    if (parallel_enabled() && conv_work(d) > kWorkCutoff) conv1d_backward_weight_omp(gy, x, gw, d);
    else conv1d_backward_weight_serial(gy, x, gw, d);
}

void dense_forward(const double* x, const double* w, const double* b,
                   double* y, std::int64_t batch, std::int64_t features,
                   std::int64_t out) {
    if (parallel_enabled() && batch * features * out > kWorkCutoff) {
        dense_forward_omp(x, w, b, y, batch, features, out);
    } else {
        dense_forward_serial(x, w, b, y, batch, features, out);
    }
}

void dense_backward(const double* gy, const double* x, const double* w,
                    double* gx, double* gw, double* gb,
                    std::int64_t batch, std::int64_t features, std::int64_t out) {
    if (parallel_enabled() && batch * features * out > kWorkCutoff) {
        dense_backward_omp(gy, x, w, gx, gw, gb, batch, features, out);
    } else {
        dense_backward_serial(gy, x, w, gx, gw, gb, batch, features, out);
    }
}

void bn_batch_stats(const double* x, std::int64_t batch, std::int64_t channels,
                    std::int64_t length, double* mean, double* var) {
    if (parallel_enabled() && batch * channels * length > kWorkCutoff) {
        bn_batch_stats_omp(x, batch, channels, length, mean, var);
    } else {
        bn_batch_stats_serial(x, batch, channels, length, mean, var);
    }
}

} // namespace ecgunc::kern
