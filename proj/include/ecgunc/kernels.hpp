#pragma once

#include <cstdint>

// Hot inner loops, written twice: a plain serial reference and an OpenMP
// variant. Both produce bit-identical results because the parallel loops only
// split across independent output elements; no accumulation chain is ever
// divided between threads. The dispatch wrappers pick the OpenMP path when
// more than one thread is configured. tools/bench_kernels.cpp times the pair.

namespace ecgunc::kern {

struct Conv1dDims {
    std::int64_t batch;
    std::int64_t c_in;
    std::int64_t l_in;
    std::int64_t c_out;
    std::int64_t kernel;
    std::int64_t stride;
    std::int64_t pad_left;
    std::int64_t pad_right;
    std::int64_t groups;
    std::int64_t l_out;
};

// y[B,Cout,Lout]; x[B,Cin,Lin]; w[Cout,Cin/g,K]; b[Cout] (may be null)
void conv1d_forward_serial(const double* x, const double* w, const double* b,
                           double* y, const Conv1dDims& d);
void conv1d_forward_omp(const double* x, const double* w, const double* b,
                        double* y, const Conv1dDims& d);
void conv1d_forward(const double* x, const double* w, const double* b,
                    double* y, const Conv1dDims& d);

// gx += dL/dx computed from gy and w (gather formulation).
void conv1d_backward_input_serial(const double* gy, const double* w, double* gx,
                                  const Conv1dDims& d);
void conv1d_backward_input_omp(const double* gy, const double* w, double* gx,
                               const Conv1dDims& d);
void conv1d_backward_input(const double* gy, const double* w, double* gx,
                           const Conv1dDims& d);

// gw += dL/dw; gb += dL/db (gb may be null).
void conv1d_backward_weight_serial(const double* gy, const double* x, double* gw,
                                   const Conv1dDims& d);
void conv1d_backward_weight_omp(const double* gy, const double* x, double* gw,
                                const Conv1dDims& d);
void conv1d_backward_weight(const double* gy, const double* x, double* gw,
                            const Conv1dDims& d);
void conv1d_backward_bias(const double* gy, double* gb, const Conv1dDims& d);

// y[B,O] = x[B,F] * w[O,F]^T + b[O]
void dense_forward_serial(const double* x, const double* w, const double* b,
                          double* y, std::int64_t batch, std::int64_t features,
                          std::int64_t out);
void dense_forward_omp(const double* x, const double* w, const double* b,
                       double* y, std::int64_t batch, std::int64_t features,
                       std::int64_t out);
void dense_forward(const double* x, const double* w, const double* b,
                   double* y, std::int64_t batch, std::int64_t features,
                   std::int64_t out);

void dense_backward_serial(const double* gy, const double* x, const double* w,
                           double* gx, double* gw, double* gb,
                           std::int64_t batch, std::int64_t features, std::int64_t out);
void dense_backward_omp(const double* gy, const double* x, const double* w,
                        double* gx, double* gw, double* gb,
                        std::int64_t batch, std::int64_t features, std::int64_t out);
void dense_backward(const double* gy, const double* x, const double* w,
                    double* gx, double* gw, double* gb,
                    std::int64_t batch, std::int64_t features, std::int64_t out);

// Per-channel mean and biased variance over the (batch, length) slab.
void bn_batch_stats_serial(const double* x, std::int64_t batch, std::int64_t channels,
                           std::int64_t length, double* mean, double* var);
void bn_batch_stats_omp(const double* x, std::int64_t batch, std::int64_t channels,
                        std::int64_t length, double* mean, double* var);
void bn_batch_stats(const double* x, std::int64_t batch, std::int64_t channels,
                    std::int64_t length, double* mean, double* var);

} // namespace ecgunc::kern
