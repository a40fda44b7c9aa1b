#include "ecgunc/network.hpp"

#include <cmath>
#include <string>

#include "ecgunc/errors.hpp"

namespace ecgunc {

std::int64_t bottleneck_mid_width(std::int64_t channels, std::int64_t groups) {
    const std::int64_t half = (channels + 1) / 2;
    return ((half + groups - 1) / groups) * groups;
}

std::array<int, 7> NetworkConfig::scaled_channels() const {
    std::array<int, 7> out{};
    for (int s = 0; s < 7; ++s) {
        const std::int64_t scaled_num =
            static_cast<std::int64_t>(stage_channels[static_cast<std::size_t>(s)]) * width_scale.num;
        if (width_scale.den == 0 || scaled_num % width_scale.den != 0) {
            throw ConfigError("NetworkConfig: stage " + std::to_string(s + 1) + " channels " +
                              std::to_string(stage_channels[static_cast<std::size_t>(s)]) +
                              " * " + std::to_string(width_scale.num) + "/" +
                              std::to_string(width_scale.den) + " is not an integer");
        }
        const std::int64_t c = scaled_num / width_scale.den;
        if (c < 1) {
            throw ConfigError("NetworkConfig: stage " + std::to_string(s + 1) +
                              " scales to zero channels");
        }
        if (c % groups != 0) {
            throw ConfigError("NetworkConfig: stage " + std::to_string(s + 1) + " width " +
                              std::to_string(c) + " not divisible by groups " +
                              std::to_string(groups));
        }
        if (c % se_reduction != 0) {
            throw ConfigError("NetworkConfig: stage " + std::to_string(s + 1) + " width " +
                              std::to_string(c) + " not divisible by se_reduction " +
                              std::to_string(se_reduction));
        }
        out[static_cast<std::size_t>(s)] = static_cast<int>(c);
    }
    return out;
}

void NetworkConfig::validate() const {
    if (kernel_size < 1 || groups < 1 || se_reduction < 1) {
        throw ConfigError("NetworkConfig: kernel_size, groups, se_reduction must be >= 1");
    }
    if (!(dropout_p >= 0.0 && dropout_p < 1.0)) {
        throw ConfigError("NetworkConfig: dropout_p outside [0,1)");
    }
    if (num_classes < 2) throw ConfigError("NetworkConfig: num_classes must be >= 2");
    if (input_leads < 1) throw ConfigError("NetworkConfig: input_leads must be >= 1");
    if (input_length < (1 << 7)) {
        throw ConfigError("NetworkConfig: input_length " + std::to_string(input_length) +
                          " too short for 7 halving stages");
    }
    for (int b : blocks_per_stage) {
        if (b < 1) throw ConfigError("NetworkConfig: every stage needs >= 1 block");
    }
    (void)scaled_channels();
}

NetworkConfig NetworkConfig::desk() {
    NetworkConfig c;
    c.blocks_per_stage = {1, 1, 1, 1, 1, 1, 1};
    c.width_scale = {1, 4}; // 16,40,40,100,100,256,256
    c.groups = 4;
    c.se_reduction = 4;
    c.input_length = 512;
    return c;
}

namespace {

Padding same_padding(std::int64_t kernel, std::int64_t stride) {
    // left = ceil((K-s)/2), right = floor((K-s)/2); gives Lout = L for s=1
    // and Lout = floor(L/2) for s=2, matching the architecture table.
    const std::int64_t total = kernel - stride;
    if (total <= 0) return {0, 0};
    return {(total + 1) / 2, total / 2};
}

// with_bias=false for convs feeding straight into a train-mode BN: the batch
// mean subtraction makes such a bias gradient exactly zero, so the parameter
// would be dead by construction.
ConvLayer make_conv(std::int64_t c_in, std::int64_t c_out, std::int64_t kernel,
                    std::int64_t stride, std::int64_t groups, Rng& rng, bool with_bias) {
    ConvLayer l;
    l.weight = Tensor::zeros({c_out, c_in / groups, kernel}, true);
    l.bias = Tensor::zeros({c_out}, with_bias);
    l.stride = stride;
    l.pad = same_padding(kernel, stride);
    l.groups = groups;
    const double fan_in = static_cast<double>((c_in / groups) * kernel);
    l.weight.fill_normal(rng, 0.0, std::sqrt(2.0 / fan_in));
    return l;
}

BnLayer make_bn(std::int64_t channels) {
    BnLayer l;
    l.gamma = Tensor::full({channels}, 1.0, true);
    l.beta = Tensor::zeros({channels}, true);
    l.stats = BnRunningStats(channels);
    return l;
}

DenseLayer make_dense(std::int64_t in, std::int64_t out, Rng& rng, bool zero_init) {
    DenseLayer l;
    l.weight = Tensor::zeros({out, in}, true);
    l.bias = Tensor::zeros({out}, true);
    if (!zero_init) {
        l.weight.fill_normal(rng, 0.0, std::sqrt(2.0 / static_cast<double>(in)));
    }
    return l;
}

} // namespace

Network build_network(const NetworkConfig& config, Rng& rng) {
    config.validate();
    const auto channels = config.scaled_channels();

    Network net;
    net.config = config;
    net.stem = make_conv(config.input_leads, channels[0], 1, 1, 1, rng, true);

    std::int64_t in_ch = channels[0];
    for (int s = 0; s < 7; ++s) {
        const std::int64_t out_ch = channels[static_cast<std::size_t>(s)];
        const std::int64_t mid = bottleneck_mid_width(out_ch, config.groups);
        std::vector<BottleneckBlock> stage;
        for (int b = 0; b < config.blocks_per_stage[static_cast<std::size_t>(s)]; ++b) {
            const bool first = (b == 0);
            BottleneckBlock blk;
            blk.conv1.bn = make_bn(in_ch);
            blk.conv1.conv = make_conv(in_ch, mid, 1, 1, 1, rng, false);
            blk.convk.bn = make_bn(mid);
            blk.convk.conv = make_conv(mid, mid, config.kernel_size, first ? 2 : 1,
                                       config.groups, rng, false);
            blk.conv2.bn = make_bn(mid);
            blk.conv2.conv = make_conv(mid, out_ch, 1, 1, 1, rng, true);
            blk.se.reduce = make_dense(out_ch, out_ch / config.se_reduction, rng, false);
            blk.se.expand = make_dense(out_ch / config.se_reduction, out_ch, rng, false);
            blk.downsample = first;
            if (first && in_ch != out_ch) {
                blk.shortcut_proj = make_conv(in_ch, out_ch, 1, 1, 1, rng, true);
            }
            stage.push_back(std::move(blk));
            in_ch = out_ch;
        }
        net.stages.push_back(std::move(stage));
    }
    // Zero-initialized prediction layer: a fresh network emits uniform rows.
    net.head = make_dense(in_ch, config.num_classes, rng, true);
    return net;
}

namespace {

Tensor pre_conv(Tape* tape, PreConv& pc, const Tensor& x, BnMode bn_mode,
                DropoutMode drop_mode, double p, Rng& rng) {
    Tensor h = batchnorm1d(tape, x, pc.bn.gamma, pc.bn.beta, pc.bn.stats, bn_mode,
                           pc.bn.momentum, pc.bn.epsilon);
    h = swish(tape, h);
    h = dropout(tape, h, p, drop_mode, rng);
    return conv1d(tape, h, pc.conv.weight, pc.conv.bias, pc.conv.stride, pc.conv.pad,
                  pc.conv.groups);
}

Tensor block_forward(Tape* tape, BottleneckBlock& blk, const Tensor& x, BnMode bn_mode,
                     DropoutMode drop_mode, double p, Rng& rng) {
    Tensor branch = pre_conv(tape, blk.conv1, x, bn_mode, drop_mode, p, rng);
    branch = pre_conv(tape, blk.convk, branch, bn_mode, drop_mode, p, rng);
    branch = pre_conv(tape, blk.conv2, branch, bn_mode, drop_mode, p, rng);

    // Squeeze-excitation: pooled gate rescales the branch channels.
    Tensor squeezed = global_avg_pool(tape, branch);
    Tensor gate = dense(tape, squeezed, blk.se.reduce.weight, blk.se.reduce.bias);
    gate = swish(tape, gate);
    gate = dense(tape, gate, blk.se.expand.weight, blk.se.expand.bias);
    gate = sigmoid(tape, gate);
    branch = channel_scale(tape, branch, gate);

    Tensor shortcut = x;
    if (blk.downsample) shortcut = maxpool1d(tape, shortcut, 2, 2);
    if (blk.shortcut_proj) {
        shortcut = conv1d(tape, shortcut, blk.shortcut_proj->weight, blk.shortcut_proj->bias,
                          blk.shortcut_proj->stride, blk.shortcut_proj->pad,
                          blk.shortcut_proj->groups);
    }
    return add(tape, branch, shortcut);
}

} // namespace

Tensor Network::forward(Tape* tape, const Tensor& batch, ModelMode mode, Rng& rng,
                        StageProbe* probe) {
    if (!batch.defined() || batch.rank() != 3) {
        throw ShapeError("forward: batch must be [B, leads, length]");
    }
    if (batch.dim(1) != config.input_leads) {
        throw ShapeError("forward: expected " + std::to_string(config.input_leads) +
                         " leads, got " + std::to_string(batch.dim(1)));
    }
    if (batch.dim(2) != config.input_length) {
        throw ShapeError("forward: expected length " + std::to_string(config.input_length) +
                         ", got " + std::to_string(batch.dim(2)));
    }
    const BnMode bn_mode = (mode == ModelMode::Train) ? BnMode::Train : BnMode::Eval;
    const DropoutMode drop_mode =
        (mode == ModelMode::EvalDeterministic) ? DropoutMode::Inactive : DropoutMode::Active;

    Tensor x = conv1d(tape, batch, stem.weight, stem.bias, stem.stride, stem.pad, stem.groups);
    for (auto& stage : stages) {
        for (auto& blk : stage) {
            x = block_forward(tape, blk, x, bn_mode, drop_mode, config.dropout_p, rng);
        }
        if (probe) probe->stage_outputs.push_back(x.shape());
    }
    Tensor pooled = global_avg_pool(tape, x);
    return dense(tape, pooled, head.weight, head.bias);
}

Tensor Network::predict_proba(Tape* tape, const Tensor& batch, ModelMode mode, Rng& rng) {
    Tensor logits = forward(tape, batch, mode, rng);
    return softmax(tape, logits);
}

std::vector<ParamRef> Network::parameters() {
    std::vector<ParamRef> out;
    auto push = [&out](std::string name, const Tensor& t, bool decay) {
        out.push_back({std::move(name), t, decay});
    };
    push("stem.weight", stem.weight, true);
    push("stem.bias", stem.bias, true);
    for (std::size_t s = 0; s < stages.size(); ++s) {
        for (std::size_t b = 0; b < stages[s].size(); ++b) {
            BottleneckBlock& blk = stages[s][b];
            const std::string prefix =
                "stage" + std::to_string(s + 1) + ".block" + std::to_string(b + 1) + ".";
            const char* names[3] = {"conv1", "convk", "conv2"};
            PreConv* pcs[3] = {&blk.conv1, &blk.convk, &blk.conv2};
            for (int i = 0; i < 3; ++i) {
                push(prefix + names[i] + ".bn.gamma", pcs[i]->bn.gamma, false);
                push(prefix + names[i] + ".bn.beta", pcs[i]->bn.beta, false);
                push(prefix + names[i] + ".weight", pcs[i]->conv.weight, true);
                if (pcs[i]->conv.bias.requires_grad()) {
                    push(prefix + names[i] + ".bias", pcs[i]->conv.bias, true);
                }
            }
            push(prefix + "se.reduce.weight", blk.se.reduce.weight, true);
            push(prefix + "se.reduce.bias", blk.se.reduce.bias, true);
            push(prefix + "se.expand.weight", blk.se.expand.weight, true);
            push(prefix + "se.expand.bias", blk.se.expand.bias, true);
            if (blk.shortcut_proj) {
                push(prefix + "shortcut.weight", blk.shortcut_proj->weight, true);
                push(prefix + "shortcut.bias", blk.shortcut_proj->bias, true);
            }
        }
    }
    push("head.weight", head.weight, true);
    push("head.bias", head.bias, true);
    return out;
}

std::vector<ParamRef> Network::state_buffers() {
    std::vector<ParamRef> out = parameters();
    for (std::size_t s = 0; s < stages.size(); ++s) {
        for (std::size_t b = 0; b < stages[s].size(); ++b) {
            BottleneckBlock& blk = stages[s][b];
            const std::string prefix =
                "stage" + std::to_string(s + 1) + ".block" + std::to_string(b + 1) + ".";
            const char* names[3] = {"conv1", "convk", "conv2"};
            PreConv* pcs[3] = {&blk.conv1, &blk.convk, &blk.conv2};
            for (int i = 0; i < 3; ++i) {
                out.push_back({prefix + names[i] + ".bn.running_mean", pcs[i]->bn.stats.mean, false});
                out.push_back({prefix + names[i] + ".bn.running_var", pcs[i]->bn.stats.var, false});
            }
        }
    }
    return out;
}

std::int64_t Network::parameter_count() {
    std::int64_t n = 0;
    for (const auto& p : parameters()) n += p.tensor.numel();
    return n;
}

int Network::conv_layer_count() const {
    int n = 1; // stem
    for (const auto& stage : stages) {
        for (const auto& blk : stage) {
            n += 3;
            if (blk.shortcut_proj) ++n;
        }
    }
    return n;
}

std::vector<Shape> Network::stage_output_shapes(std::int64_t batch) const {
    const auto channels = config.scaled_channels();
    std::vector<Shape> out;
    std::int64_t len = config.input_length;
    for (int s = 0; s < 7; ++s) {
        len = len / 2; // first block of each stage halves (floor)
        out.push_back({batch, channels[static_cast<std::size_t>(s)], len});
    }
    return out;
}

std::vector<std::vector<double>> Network::snapshot_state() {
    std::vector<std::vector<double>> snap;
    for (const auto& b : state_buffers()) {
        snap.emplace_back(b.tensor.values().begin(), b.tensor.values().end());
    }
    return snap;
}

void Network::restore_state(const std::vector<std::vector<double>>& snap) {
    auto buffers = state_buffers();
    if (snap.size() != buffers.size()) {
        throw ShapeError("restore_state: snapshot has " + std::to_string(snap.size()) +
                         " buffers, network has " + std::to_string(buffers.size()));
    }
    for (std::size_t i = 0; i < buffers.size(); ++i) {
        if (snap[i].size() != buffers[i].tensor.values().size()) {
            throw ShapeError("restore_state: buffer " + buffers[i].name + " size mismatch");
        }
        std::copy(snap[i].begin(), snap[i].end(), buffers[i].tensor.values().begin());
    }
}

} // namespace ecgunc
