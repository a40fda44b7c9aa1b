#pragma once

#include <functional>
#include <vector>

#include "ecgunc/rng.hpp"
#include "ecgunc/tensor.hpp"

namespace ecgunc {

struct Padding {
    std::int64_t left = 0;
    std::int64_t right = 0;
};

enum class BnMode { Train, Eval };
enum class DropoutMode { Active, Inactive };

/// Per-channel running statistics owned by a batch-norm layer. Updated during
/// Train-mode forwards, read during Eval-mode forwards; lives outside the tape.
struct BnRunningStats {
    Tensor mean;
    Tensor var;

    BnRunningStats() = default;
    explicit BnRunningStats(std::int64_t channels)
        : mean(Tensor::zeros({channels})), var(Tensor::full({channels}, 1.0)) {}

    std::int64_t channels() const { return mean.defined() ? mean.numel() : 0; }
};

// Grouped cross-correlation over [B, Cin, L] -> [B, Cout, Lout].
Tensor conv1d(Tape* tape, const Tensor& input, const Tensor& weight, const Tensor& bias,
              std::int64_t stride, Padding pad, std::int64_t groups);

Tensor batchnorm1d(Tape* tape, const Tensor& input, const Tensor& gamma,
                   const Tensor& beta, BnRunningStats& stats, BnMode mode,
                   double momentum, double epsilon);

Tensor swish(Tape* tape, const Tensor& input);
Tensor sigmoid(Tape* tape, const Tensor& input);

// Inverted-scaling dropout: survivors are scaled by 1/(1-p) so Inactive
// inference needs no rescale. The mask is a pure function of one draw from
// rng plus the element index, and is reused exactly in backward.
Tensor dropout(Tape* tape, const Tensor& input, double p, DropoutMode mode, Rng& rng);

Tensor maxpool1d(Tape* tape, const Tensor& input, std::int64_t window, std::int64_t stride);

// [B, C, L] -> [B, C], mean over the last dimension.
Tensor global_avg_pool(Tape* tape, const Tensor& input);

// [B, F] with weight [O, F], bias [O] -> [B, O].
Tensor dense(Tape* tape, const Tensor& input, const Tensor& weight, const Tensor& bias);

// Row-wise softmax with max subtraction; rows sum to 1 within 1e-12.
Tensor softmax(Tape* tape, const Tensor& logits);

// Mean over the batch of -log softmax(logits)[label]; fused log-sum-exp.
Tensor cross_entropy_loss(Tape* tape, const Tensor& logits, const std::vector<int>& labels);

Tensor add(Tape* tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape* tape, const Tensor& a, const Tensor& b);

// Per-channel rescale: [B, C, L] * scale[B, C].
Tensor channel_scale(Tape* tape, const Tensor& input, const Tensor& scale);

Tensor sum(Tape* tape, const Tensor& input);

/// Max over coordinates of |analytic - numeric| / max(1, |analytic|, |numeric|),
/// comparing the analytic gradient of f at x against central differences.
/// f must be deterministic and must populate x.grad() via its own tape.
double finite_diff_check(const std::function<double(Tensor&)>& f, Tensor& x, double h);

/// Same check restricted to a random sample of coordinates (for large tensors).
double finite_diff_check_sampled(const std::function<double(Tensor&)>& f, Tensor& x,
                                 double h, std::int64_t max_coords, Rng& rng);

} // namespace ecgunc
