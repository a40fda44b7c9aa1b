#include "ecgunc/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ecgunc/errors.hpp"
#include "ecgunc/kernels.hpp"
#include "ecgunc/threading.hpp"

namespace ecgunc {

namespace {

constexpr std::int64_t kParallelCutoff = 4096;

bool big(std::int64_t n) { return parallel_enabled() && n > kParallelCutoff; }

double stable_sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

void require(bool cond, const std::string& msg) {
    if (!cond) throw ShapeError(msg);
}

void require_rank(const Tensor& t, std::int64_t rank, const char* op, const char* name) {
    if (!t.defined() || t.rank() != rank) {
        throw ShapeError(std::string(op) + ": " + name + " must have rank " +
                         std::to_string(rank) + ", got " +
                         (t.defined() ? shape_str(t.shape()) : std::string("undefined")));
    }
}

} // namespace

Tensor conv1d(Tape* tape, const Tensor& input, const Tensor& weight, const Tensor& bias,
              std::int64_t stride, Padding pad, std::int64_t groups) {
    require_rank(input, 3, "conv1d", "input");
    require_rank(weight, 3, "conv1d", "weight");
    require_rank(bias, 1, "conv1d", "bias");
    const std::int64_t batch = input.dim(0);
    const std::int64_t c_in = input.dim(1);
    const std::int64_t l_in = input.dim(2);
    const std::int64_t c_out = weight.dim(0);
    const std::int64_t kernel = weight.dim(2);
    require(groups >= 1, "conv1d: groups must be >= 1");
    require(stride >= 1, "conv1d: stride must be >= 1");
    require(pad.left >= 0 && pad.right >= 0, "conv1d: negative padding");
    if (c_in % groups != 0) {
        throw ShapeError("conv1d: input channels " + std::to_string(c_in) +
                         " not divisible by groups " + std::to_string(groups));
    }
    if (c_out % groups != 0) {
        throw ShapeError("conv1d: output channels " + std::to_string(c_out) +
                         " not divisible by groups " + std::to_string(groups));
    }
    if (weight.dim(1) != c_in / groups) {
        throw ShapeError("conv1d: weight expects " + std::to_string(weight.dim(1)) +
                         " channels per group, input provides " +
                         std::to_string(c_in / groups));
    }
    if (bias.dim(0) != c_out) {
        throw ShapeError("conv1d: bias length " + std::to_string(bias.dim(0)) +
                         " != output channels " + std::to_string(c_out));
    }
    const std::int64_t l_out = (l_in + pad.left + pad.right - kernel) / stride + 1;
    if (l_in + pad.left + pad.right < kernel || l_out < 1) {
        throw ShapeError("conv1d: kernel exceeds padded length (kernel " +
                         std::to_string(kernel) + ", padded length " +
                         std::to_string(l_in + pad.left + pad.right) + ")");
    }

    kern::Conv1dDims d{batch, c_in, l_in, c_out, kernel, stride,
                       pad.left, pad.right, groups, l_out};
    Tensor out = Tensor::uninitialized({batch, c_out, l_out});
    kern::conv1d_forward(input.values().data(), weight.values().data(),
                         bias.values().data(), out.values().data(), d);

    if (tracing(tape, input, weight, bias)) {
        out.set_requires_grad(true);
        Tensor x = input, w = weight, b = bias, y = out;
        tape->record([x, w, b, y, d]() mutable {
            const double* gy = y.grad().data();
            if (x.requires_grad()) {
                kern::conv1d_backward_input(gy, w.values().data(), x.grad().data(), d);
            }
            if (w.requires_grad()) {
                kern::conv1d_backward_weight(gy, x.values().data(), w.grad().data(), d);
            }
            if (b.requires_grad()) {
                kern::conv1d_backward_bias(gy, b.grad().data(), d);
            }
        });
    }
    return out;
}

Tensor batchnorm1d(Tape* tape, const Tensor& input, const Tensor& gamma,
                   const Tensor& beta, BnRunningStats& stats, BnMode mode,
                   double momentum, double epsilon) {
    require_rank(input, 3, "batchnorm1d", "input");
    require_rank(gamma, 1, "batchnorm1d", "gamma");
    require_rank(beta, 1, "batchnorm1d", "beta");
    const std::int64_t batch = input.dim(0);
    const std::int64_t channels = input.dim(1);
    const std::int64_t length = input.dim(2);
    if (epsilon <= 0.0) throw ShapeError("batchnorm1d: epsilon must be > 0");
    if (gamma.dim(0) != channels || beta.dim(0) != channels ||
        stats.channels() != channels) {
        throw ShapeError("batchnorm1d: channel mismatch (input " + std::to_string(channels) +
                         ", gamma " + std::to_string(gamma.dim(0)) + ", beta " +
                         std::to_string(beta.dim(0)) + ", running stats " +
                         std::to_string(stats.channels()) + ")");
    }
    const std::int64_t m = batch * length;
    if (mode == BnMode::Train && m < 2) {
        throw ShapeError("batchnorm1d: Train mode needs batch*length >= 2 per channel, got " +
                         std::to_string(m));
    }

    std::vector<double> mu(static_cast<std::size_t>(channels));
    std::vector<double> var(static_cast<std::size_t>(channels));
    if (mode == BnMode::Train) {
        kern::bn_batch_stats(input.values().data(), batch, channels, length,
                             mu.data(), var.data());
        // Running var uses the unbiased estimate, normalization the biased one.
        const double corr = static_cast<double>(m) / static_cast<double>(m - 1);
        auto rmean = stats.mean.values();
        auto rvar = stats.var.values();
        for (std::int64_t c = 0; c < channels; ++c) {
            const auto ci = static_cast<std::size_t>(c);
            rmean[ci] = (1.0 - momentum) * rmean[ci] + momentum * mu[ci];
            rvar[ci] = (1.0 - momentum) * rvar[ci] + momentum * var[ci] * corr;
        }
    } else {
        std::copy(stats.mean.values().begin(), stats.mean.values().end(), mu.begin());
        std::copy(stats.var.values().begin(), stats.var.values().end(), var.begin());
    }

    Tensor out = Tensor::uninitialized({batch, channels, length});
    // Normalized values are kept for the backward rule.
    auto xhat = std::make_shared<std::vector<double>>(input.values().size());
    auto inv_std = std::make_shared<std::vector<double>>(static_cast<std::size_t>(channels));
    {
        const double* xv = input.values().data();
        const double* gv = gamma.values().data();
        const double* bv = beta.values().data();
        double* ov = out.values().data();
        double* xh = xhat->data();
#pragma omp parallel for schedule(static) if (big(channels * m))
        for (std::int64_t c = 0; c < channels; ++c) {
            const double is = 1.0 / std::sqrt(var[static_cast<std::size_t>(c)] + epsilon);
            (*inv_std)[static_cast<std::size_t>(c)] = is;
            for (std::int64_t b = 0; b < batch; ++b) {
                const std::int64_t base = (b * channels + c) * length;
                for (std::int64_t l = 0; l < length; ++l) {
                    const double h = (xv[base + l] - mu[static_cast<std::size_t>(c)]) * is;
                    xh[base + l] = h;
                    ov[base + l] = gv[c] * h + bv[c];
                }
            }
        }
    }

    if (tracing(tape, input, gamma, beta)) {
        out.set_requires_grad(true);
        Tensor x = input, g = gamma, bt = beta, y = out;
        const bool train = (mode == BnMode::Train);
        tape->record([x, g, bt, y, xhat, inv_std, batch, channels, length, train]() mutable {
            const double* gy = y.grad().data();
            const double* xh = xhat->data();
            const double* gv = g.values().data();
            const std::int64_t m = batch * length;
            double* gx = x.requires_grad() ? x.grad().data() : nullptr;
            double* gg = g.requires_grad() ? g.grad().data() : nullptr;
            double* gb = bt.requires_grad() ? bt.grad().data() : nullptr;
#pragma omp parallel for schedule(static) if (big(channels * m))
            for (std::int64_t c = 0; c < channels; ++c) {
                double sum_g = 0.0, sum_g_xhat = 0.0;
                for (std::int64_t b = 0; b < batch; ++b) {
                    const std::int64_t base = (b * channels + c) * length;
                    for (std::int64_t l = 0; l < length; ++l) {
                        sum_g += gy[base + l];
                        sum_g_xhat += gy[base + l] * xh[base + l];
                    }
                }
                if (gg) gg[c] += sum_g_xhat;
                if (gb) gb[c] += sum_g;
                if (gx) {
                    const double is = (*inv_std)[static_cast<std::size_t>(c)];
                    const double scale = gv[c] * is;
                    if (train) {
                        const double mean_g = sum_g / static_cast<double>(m);
                        const double mean_g_xhat = sum_g_xhat / static_cast<double>(m);
                        for (std::int64_t b = 0; b < batch; ++b) {
                            const std::int64_t base = (b * channels + c) * length;
                            for (std::int64_t l = 0; l < length; ++l) {
                                gx[base + l] += scale * (gy[base + l] - mean_g -
                                                         xh[base + l] * mean_g_xhat);
                            }
                        }
                    } else {
                        // Eval mode is a fixed affine map per channel.
                        for (std::int64_t b = 0; b < batch; ++b) {
                            const std::int64_t base = (b * channels + c) * length;
                            for (std::int64_t l = 0; l < length; ++l) {
                                gx[base + l] += scale * gy[base + l];
                            }
                        }
                    }
                }
            }
        });
    }
    return out;
}

Tensor swish(Tape* tape, const Tensor& input) {
    Tensor out = Tensor::uninitialized(input.shape());
    const std::int64_t n = input.numel();
    const bool trace = tracing(tape, input);
    // Sigmoid values are cached for backward; exp() dominates this op.
    std::shared_ptr<std::vector<double>> sig;
    if (trace) sig = std::make_shared<std::vector<double>>(static_cast<std::size_t>(n));
    const double* xv = input.values().data();
    double* ov = out.values().data();
    double* sv = trace ? sig->data() : nullptr;
#pragma omp parallel for schedule(static) if (big(n))
    for (std::int64_t i = 0; i < n; ++i) {
        const double s = stable_sigmoid(xv[i]);
        if (sv) sv[i] = s;
        ov[i] = xv[i] * s;
    }

    if (trace) {
        out.set_requires_grad(true);
        Tensor x = input, y = out;
        tape->record([x, y, sig, n]() mutable {
            const double* gy = y.grad().data();
            const double* xv2 = x.values().data();
            const double* sv2 = sig->data();
            double* gx = x.grad().data();
#pragma omp parallel for schedule(static) if (big(n))
            for (std::int64_t i = 0; i < n; ++i) {
                const double s = sv2[i];
                gx[i] += gy[i] * (s + xv2[i] * s * (1.0 - s));
            }
        });
    }
    return out;
}

Tensor sigmoid(Tape* tape, const Tensor& input) {
    Tensor out = Tensor::uninitialized(input.shape());
    const double* xv = input.values().data();
    double* ov = out.values().data();
    const std::int64_t n = input.numel();
#pragma omp parallel for schedule(static) if (big(n))
    for (std::int64_t i = 0; i < n; ++i) ov[i] = stable_sigmoid(xv[i]);

    if (tracing(tape, input)) {
        out.set_requires_grad(true);
        Tensor x = input, y = out;
        tape->record([x, y, n]() mutable {
            const double* gy = y.grad().data();
            const double* yv = y.values().data();
            double* gx = x.grad().data();
#pragma omp parallel for schedule(static) if (big(n))
            for (std::int64_t i = 0; i < n; ++i) gx[i] += gy[i] * yv[i] * (1.0 - yv[i]);
        });
    }
    return out;
}

Tensor dropout(Tape* tape, const Tensor& input, double p, DropoutMode mode, Rng& rng) {
    if (!(p >= 0.0 && p < 1.0)) {
        throw ShapeError("dropout: p outside [0,1): " + std::to_string(p));
    }
    if (mode == DropoutMode::Inactive) return input;

    const std::uint64_t mask_seed = rng.next_u64();
    const double scale = 1.0 / (1.0 - p);
    const std::int64_t n = input.numel();
    Tensor out = Tensor::uninitialized(input.shape());
    const double* xv = input.values().data();
    double* ov = out.values().data();
#pragma omp parallel for schedule(static) if (big(n))
    for (std::int64_t i = 0; i < n; ++i) {
        const bool keep = hash_uniform(mask_seed, static_cast<std::uint64_t>(i)) >= p;
        ov[i] = keep ? xv[i] * scale : 0.0;
    }

    if (tracing(tape, input)) {
        out.set_requires_grad(true);
        Tensor x = input, y = out;
        tape->record([x, y, mask_seed, p, scale, n]() mutable {
            const double* gy = y.grad().data();
            double* gx = x.grad().data();
#pragma omp parallel for schedule(static) if (big(n))
            for (std::int64_t i = 0; i < n; ++i) {
                const bool keep = hash_uniform(mask_seed, static_cast<std::uint64_t>(i)) >= p;
                if (keep) gx[i] += gy[i] * scale;
            }
        });
    }
    return out;
}

Tensor maxpool1d(Tape* tape, const Tensor& input, std::int64_t window, std::int64_t stride) {
    require_rank(input, 3, "maxpool1d", "input");
    require(window >= 1, "maxpool1d: window must be >= 1");
    require(stride >= 1, "maxpool1d: stride must be >= 1");
    const std::int64_t batch = input.dim(0);
    const std::int64_t channels = input.dim(1);
    const std::int64_t l_in = input.dim(2);
    if (window > l_in) {
        throw ShapeError("maxpool1d: window " + std::to_string(window) +
                         " exceeds input length " + std::to_string(l_in));
    }
    const std::int64_t l_out = (l_in - window) / stride + 1;

    Tensor out = Tensor::uninitialized({batch, channels, l_out});
    auto argmax = std::make_shared<std::vector<std::int64_t>>(out.values().size());
    const double* xv = input.values().data();
    double* ov = out.values().data();
    std::int64_t* am = argmax->data();
    const std::int64_t rows = batch * channels;
#pragma omp parallel for schedule(static) if (big(rows * l_out))
    for (std::int64_t r = 0; r < rows; ++r) {
        const double* xrow = xv + r * l_in;
        double* orow = ov + r * l_out;
        std::int64_t* arow = am + r * l_out;
        for (std::int64_t lo = 0; lo < l_out; ++lo) {
            std::int64_t best = lo * stride;
            double bestv = xrow[best];
            for (std::int64_t k = 1; k < window; ++k) {
                const std::int64_t li = lo * stride + k;
                if (xrow[li] > bestv) { // strict: ties keep the first index
                    bestv = xrow[li];
                    best = li;
                }
            }
            orow[lo] = bestv;
            arow[lo] = best;
        }
    }

    if (tracing(tape, input)) {
        out.set_requires_grad(true);
        Tensor x = input, y = out;
        tape->record([x, y, argmax, rows, l_in, l_out]() mutable {
            const double* gy = y.grad().data();
            double* gx = x.grad().data();
            const std::int64_t* am2 = argmax->data();
#pragma omp parallel for schedule(static) if (big(rows * l_out))
            for (std::int64_t r = 0; r < rows; ++r) {
                for (std::int64_t lo = 0; lo < l_out; ++lo) {
                    gx[r * l_in + am2[r * l_out + lo]] += gy[r * l_out + lo];
                }
            }
        });
    }
    return out;
}

Tensor global_avg_pool(Tape* tape, const Tensor& input) {
    require_rank(input, 3, "global_avg_pool", "input");
    const std::int64_t batch = input.dim(0);
    const std::int64_t channels = input.dim(1);
    const std::int64_t length = input.dim(2);

    Tensor out = Tensor::uninitialized({batch, channels});
    const double* xv = input.values().data();
    double* ov = out.values().data();
    const std::int64_t rows = batch * channels;
#pragma omp parallel for schedule(static) if (big(rows * length))
    for (std::int64_t r = 0; r < rows; ++r) {
        double acc = 0.0;
        for (std::int64_t l = 0; l < length; ++l) acc += xv[r * length + l];
        ov[r] = acc / static_cast<double>(length);
    }

    if (tracing(tape, input)) {
        out.set_requires_grad(true);
        Tensor x = input, y = out;
        tape->record([x, y, rows, length]() mutable {
            const double* gy = y.grad().data();
            double* gx = x.grad().data();
#pragma omp parallel for schedule(static) if (big(rows * length))
            for (std::int64_t r = 0; r < rows; ++r) {
                const double g = gy[r] / static_cast<double>(length);
                for (std::int64_t l = 0; l < length; ++l) gx[r * length + l] += g;
            }
        });
    }
    return out;
}

Tensor dense(Tape* tape, const Tensor& input, const Tensor& weight, const Tensor& bias) {
    require_rank(input, 2, "dense", "input");
    require_rank(weight, 2, "dense", "weight");
    require_rank(bias, 1, "dense", "bias");
    const std::int64_t batch = input.dim(0);
    const std::int64_t features = input.dim(1);
    const std::int64_t out_dim = weight.dim(0);
    if (weight.dim(1) != features) {
        throw ShapeError("dense: weight expects " + std::to_string(weight.dim(1)) +
                         " features, input provides " + std::to_string(features));
    }
    if (bias.dim(0) != out_dim) {
        throw ShapeError("dense: bias length " + std::to_string(bias.dim(0)) +
                         " != output dim " + std::to_string(out_dim));
    }

    Tensor out = Tensor::uninitialized({batch, out_dim});
    kern::dense_forward(input.values().data(), weight.values().data(),
                        bias.values().data(), out.values().data(),
                        batch, features, out_dim);

    if (tracing(tape, input, weight, bias)) {
        out.set_requires_grad(true);
        Tensor x = input, w = weight, b = bias, y = out;
        tape->record([x, w, b, y, batch, features, out_dim]() mutable {
            kern::dense_backward(y.grad().data(), x.values().data(), w.values().data(),
                                 x.requires_grad() ? x.grad().data() : nullptr,
                                 w.requires_grad() ? w.grad().data() : nullptr,
                                 b.requires_grad() ? b.grad().data() : nullptr,
                                 batch, features, out_dim);
        });
    }
    return out;
}

Tensor softmax(Tape* tape, const Tensor& logits) {
    require_rank(logits, 2, "softmax", "logits");
    const std::int64_t batch = logits.dim(0);
    const std::int64_t k = logits.dim(1);

    Tensor out = Tensor::uninitialized({batch, k});
    const double* xv = logits.values().data();
    double* ov = out.values().data();
#pragma omp parallel for schedule(static) if (big(batch * k))
    for (std::int64_t b = 0; b < batch; ++b) {
        const double* row = xv + b * k;
        double* orow = ov + b * k;
        double mx = row[0];
        for (std::int64_t j = 1; j < k; ++j) mx = std::max(mx, row[j]);
        double s = 0.0;
        for (std::int64_t j = 0; j < k; ++j) {
            orow[j] = std::exp(row[j] - mx);
            s += orow[j];
        }
        for (std::int64_t j = 0; j < k; ++j) orow[j] /= s;
    }

    if (tracing(tape, logits)) {
        out.set_requires_grad(true);
        Tensor x = logits, y = out;
        tape->record([x, y, batch, k]() mutable {
            const double* gy = y.grad().data();
            const double* yv = y.values().data();
            double* gx = x.grad().data();
#pragma omp parallel for schedule(static) if (big(batch * k))
            for (std::int64_t b = 0; b < batch; ++b) {
                const double* grow = gy + b * k;
                const double* yrow = yv + b * k;
                double dot = 0.0;
                for (std::int64_t j = 0; j < k; ++j) dot += grow[j] * yrow[j];
                for (std::int64_t j = 0; j < k; ++j) {
                    gx[b * k + j] += yrow[j] * (grow[j] - dot);
                }
            }
        });
    }
    return out;
}

Tensor cross_entropy_loss(Tape* tape, const Tensor& logits, const std::vector<int>& labels) {
    require_rank(logits, 2, "cross_entropy_loss", "logits");
    const std::int64_t batch = logits.dim(0);
    const std::int64_t k = logits.dim(1);
    if (static_cast<std::int64_t>(labels.size()) != batch) {
        throw ShapeError("cross_entropy_loss: " + std::to_string(labels.size()) +
                         " labels for batch of " + std::to_string(batch));
    }
    for (std::int64_t b = 0; b < batch; ++b) {
        if (labels[static_cast<std::size_t>(b)] < 0 ||
            labels[static_cast<std::size_t>(b)] >= k) {
            throw ShapeError("cross_entropy_loss: label " +
                             std::to_string(labels[static_cast<std::size_t>(b)]) +
                             " out of range [0," + std::to_string(k) + ") at row " +
                             std::to_string(b));
        }
    }

    // Softmax rows are kept for the backward rule.
    auto probs = std::make_shared<std::vector<double>>(logits.values().size());
    const double* xv = logits.values().data();
    double* pv = probs->data();
    double total = 0.0;
    for (std::int64_t b = 0; b < batch; ++b) {
        const double* row = xv + b * k;
        double mx = row[0];
        for (std::int64_t j = 1; j < k; ++j) mx = std::max(mx, row[j]);
        double s = 0.0;
        for (std::int64_t j = 0; j < k; ++j) s += std::exp(row[j] - mx);
        const double lse = mx + std::log(s);
        total += lse - row[labels[static_cast<std::size_t>(b)]];
        for (std::int64_t j = 0; j < k; ++j) pv[b * k + j] = std::exp(row[j] - lse);
    }
    Tensor out = Tensor::scalar(total / static_cast<double>(batch));

    if (tracing(tape, logits)) {
        out.set_requires_grad(true);
        Tensor x = logits, y = out;
        auto lbl = std::make_shared<std::vector<int>>(labels);
        tape->record([x, y, probs, lbl, batch, k]() mutable {
            const double g = y.grad()[0] / static_cast<double>(batch);
            double* gx = x.grad().data();
            const double* pv2 = probs->data();
            for (std::int64_t b = 0; b < batch; ++b) {
                for (std::int64_t j = 0; j < k; ++j) {
                    const double onehot =
                        (j == (*lbl)[static_cast<std::size_t>(b)]) ? 1.0 : 0.0;
                    gx[b * k + j] += g * (pv2[b * k + j] - onehot);
                }
            }
        });
    }
    return out;
}

Tensor add(Tape* tape, const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw ShapeError("add: shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
    }
    Tensor out = Tensor::uninitialized(a.shape());
    const double* av = a.values().data();
    const double* bv = b.values().data();
    double* ov = out.values().data();
    const std::int64_t n = a.numel();
#pragma omp parallel for schedule(static) if (big(n))
    for (std::int64_t i = 0; i < n; ++i) ov[i] = av[i] + bv[i];

    if (tracing(tape, a, b)) {
        out.set_requires_grad(true);
        Tensor ta = a, tb = b, y = out;
        tape->record([ta, tb, y, n]() mutable {
            const double* gy = y.grad().data();
            if (ta.requires_grad()) {
                double* ga = ta.grad().data();
                for (std::int64_t i = 0; i < n; ++i) ga[i] += gy[i];
            }
            if (tb.requires_grad()) {
                double* gb = tb.grad().data();
                for (std::int64_t i = 0; i < n; ++i) gb[i] += gy[i];
            }
        });
    }
    return out;
}

Tensor mul(Tape* tape, const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw ShapeError("mul: shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
    }
    Tensor out = Tensor::uninitialized(a.shape());
    const double* av = a.values().data();
    const double* bv = b.values().data();
    double* ov = out.values().data();
    const std::int64_t n = a.numel();
    for (std::int64_t i = 0; i < n; ++i) ov[i] = av[i] * bv[i];

    if (tracing(tape, a, b)) {
        out.set_requires_grad(true);
        Tensor ta = a, tb = b, y = out;
        tape->record([ta, tb, y, n]() mutable {
            const double* gy = y.grad().data();
            if (ta.requires_grad()) {
                double* ga = ta.grad().data();
                const double* bv2 = tb.values().data();
                for (std::int64_t i = 0; i < n; ++i) ga[i] += gy[i] * bv2[i];
            }
            if (tb.requires_grad()) {
                double* gb = tb.grad().data();
                const double* av2 = ta.values().data();
                for (std::int64_t i = 0; i < n; ++i) gb[i] += gy[i] * av2[i];
            }
        });
    }
    return out;
}

Tensor channel_scale(Tape* tape, const Tensor& input, const Tensor& scale) {
    require_rank(input, 3, "channel_scale", "input");
    require_rank(scale, 2, "channel_scale", "scale");
    const std::int64_t batch = input.dim(0);
    const std::int64_t channels = input.dim(1);
    const std::int64_t length = input.dim(2);
    if (scale.dim(0) != batch || scale.dim(1) != channels) {
        throw ShapeError("channel_scale: scale " + shape_str(scale.shape()) +
                         " does not match input " + shape_str(input.shape()));
    }

    Tensor out = Tensor::uninitialized(input.shape());
    const double* xv = input.values().data();
    const double* sv = scale.values().data();
    double* ov = out.values().data();
    const std::int64_t rows = batch * channels;
#pragma omp parallel for schedule(static) if (big(rows * length))
    for (std::int64_t r = 0; r < rows; ++r) {
        const double s = sv[r];
        for (std::int64_t l = 0; l < length; ++l) ov[r * length + l] = xv[r * length + l] * s;
    }

    if (tracing(tape, input, scale)) {
        out.set_requires_grad(true);
        Tensor x = input, sc = scale, y = out;
        tape->record([x, sc, y, rows, length]() mutable {
            const double* gy = y.grad().data();
            if (x.requires_grad()) {
                double* gx = x.grad().data();
                const double* sv2 = sc.values().data();
#pragma omp parallel for schedule(static) if (big(rows * length))
                for (std::int64_t r = 0; r < rows; ++r) {
                    const double s = sv2[r];
                    for (std::int64_t l = 0; l < length; ++l) {
                        gx[r * length + l] += gy[r * length + l] * s;
                    }
                }
            }
            if (sc.requires_grad()) {
                double* gs = sc.grad().data();
                const double* xv2 = x.values().data();
#pragma omp parallel for schedule(static) if (big(rows * length))
                for (std::int64_t r = 0; r < rows; ++r) {
                    double acc = 0.0;
                    for (std::int64_t l = 0; l < length; ++l) {
                        acc += gy[r * length + l] * xv2[r * length + l];
                    }
                    gs[r] += acc;
                }
            }
        });
    }
    return out;
}

Tensor sum(Tape* tape, const Tensor& input) {
    double acc = 0.0;
    for (double v : input.values()) acc += v;
    Tensor out = Tensor::scalar(acc);

    if (tracing(tape, input)) {
        out.set_requires_grad(true);
        Tensor x = input, y = out;
        tape->record([x, y]() mutable {
            const double g = y.grad()[0];
            double* gx = x.grad().data();
            const std::int64_t n = x.numel();
            for (std::int64_t i = 0; i < n; ++i) gx[i] += g;
        });
    }
    return out;
}

double finite_diff_check(const std::function<double(Tensor&)>& f, Tensor& x, double h) {
    if (h <= 0.0) throw ShapeError("finite_diff_check: h must be > 0");
    x.zero_grad();
    f(x);
    std::vector<double> analytic(x.grad().begin(), x.grad().end());

    double max_err = 0.0;
    auto vals = x.values();
    for (std::int64_t i = 0; i < x.numel(); ++i) {
        const double v = vals[static_cast<std::size_t>(i)];
        vals[static_cast<std::size_t>(i)] = v + h;
        const double fp = f(x);
        vals[static_cast<std::size_t>(i)] = v - h;
        const double fm = f(x);
        vals[static_cast<std::size_t>(i)] = v;
        const double numeric = (fp - fm) / (2.0 * h);
        const double a = analytic[static_cast<std::size_t>(i)];
        const double err = std::abs(a - numeric) /
                           std::max({1.0, std::abs(a), std::abs(numeric)});
        max_err = std::max(max_err, err);
    }
    return max_err;
}

double finite_diff_check_sampled(const std::function<double(Tensor&)>& f, Tensor& x,
                                 double h, std::int64_t max_coords, Rng& rng) {
    if (h <= 0.0) throw ShapeError("finite_diff_check: h must be > 0");
    x.zero_grad();
    f(x);
    std::vector<double> analytic(x.grad().begin(), x.grad().end());

    std::vector<std::int64_t> coords;
    if (x.numel() <= max_coords) {
        for (std::int64_t i = 0; i < x.numel(); ++i) coords.push_back(i);
    } else {
        for (std::int64_t i = 0; i < max_coords; ++i) coords.push_back(rng.uniform_int(x.numel()));
    }

    double max_err = 0.0;
    auto vals = x.values();
    for (std::int64_t i : coords) {
        const double v = vals[static_cast<std::size_t>(i)];
        vals[static_cast<std::size_t>(i)] = v + h;
        const double fp = f(x);
        vals[static_cast<std::size_t>(i)] = v - h;
        const double fm = f(x);
        vals[static_cast<std::size_t>(i)] = v;
        const double numeric = (fp - fm) / (2.0 * h);
        const double a = analytic[static_cast<std::size_t>(i)];
        const double err = std::abs(a - numeric) /
                           std::max({1.0, std::abs(a), std::abs(numeric)});
        max_err = std::max(max_err, err);
    }
    return max_err;
}

} // namespace ecgunc
