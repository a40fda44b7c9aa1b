#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ecgunc/ops.hpp"
#include "ecgunc/tensor.hpp"

namespace ecgunc {

struct Rational {
    std::uint32_t num = 1;
    std::uint32_t den = 1;
};

struct NetworkConfig {
    std::array<int, 7> blocks_per_stage{2, 2, 2, 3, 3, 4, 4};
    std::array<int, 7> stage_channels{64, 160, 160, 400, 400, 1024, 1024};
    int kernel_size = 16;
    int groups = 16;
    double dropout_p = 0.1;
    int se_reduction = 4;
    int num_classes = 9;
    int input_leads = 12;
    int input_length = 5000;
    Rational width_scale{1, 1};

    /// stage_channels * width_scale; throws unless every result is an integer
    /// divisible by both groups and se_reduction.
    std::array<int, 7> scaled_channels() const;
    void validate() const;

    /// Full-size configuration from the architecture table.
    static NetworkConfig paper() { return {}; }

    /// Laptop-sized preset: one block per stage, quarter width, short input.
    static NetworkConfig desk();
};

enum class ModelMode { Train, EvalDeterministic, EvalMcDropout };

/// Named view of a network buffer. Trainable parameters carry decay=true
/// unless they belong to batch norm; running stats are state-only.
struct ParamRef {
    std::string name;
    Tensor tensor;
    bool decay = true;
};

struct ConvLayer {
    Tensor weight; // [Cout, Cin/groups, K]
    Tensor bias;   // [Cout]
    std::int64_t stride = 1;
    Padding pad;
    std::int64_t groups = 1;
};

struct BnLayer {
    Tensor gamma;
    Tensor beta;
    BnRunningStats stats;
    double momentum = 0.1;
    double epsilon = 1e-5;
};

struct DenseLayer {
    Tensor weight; // [O, F]
    Tensor bias;   // [O]
};

/// BN -> Swish -> Dropout -> conv, the pre-activation unit used three times
/// per block.
struct PreConv {
    BnLayer bn;
    ConvLayer conv;
};

struct SeAttention {
    DenseLayer reduce; // C -> C/r
    DenseLayer expand; // C/r -> C
};

struct BottleneckBlock {
    PreConv conv1; // 1x1, width reduction
    PreConv convk; // grouped, wide kernel, stride 1 or 2
    PreConv conv2; // 1x1, width expansion
    SeAttention se;
    bool downsample = false;                 // first block of each stage
    std::optional<ConvLayer> shortcut_proj;  // 1x1 when channel counts change
};

/// Per-stage output shapes recorded during a forward pass.
struct StageProbe {
    std::vector<Shape> stage_outputs;
};

class Network {
public:
    NetworkConfig config;
    ConvLayer stem; // 1x1, leads -> first stage width
    std::vector<std::vector<BottleneckBlock>> stages;
    DenseLayer head; // zero-initialized prediction layer

    Tensor forward(Tape* tape, const Tensor& batch, ModelMode mode, Rng& rng,
                   StageProbe* probe = nullptr);
    Tensor predict_proba(Tape* tape, const Tensor& batch, ModelMode mode, Rng& rng);

    /// Trainable parameters in a stable order.
    std::vector<ParamRef> parameters();
    /// Parameters plus BN running stats; the checkpoint payload.
    std::vector<ParamRef> state_buffers();

    std::int64_t parameter_count();
    int conv_layer_count() const; // block convs + shortcut projections + stem

    /// Analytic per-stage output shapes for a given batch size.
    std::vector<Shape> stage_output_shapes(std::int64_t batch) const;

    /// Deep copy / restore of every state buffer (best-checkpoint snapshots).
    std::vector<std::vector<double>> snapshot_state();
    void restore_state(const std::vector<std::vector<double>>& snap);
};

Network build_network(const NetworkConfig& config, Rng& rng);

/// Mid (bottleneck) width for a stage: the smallest multiple of `groups`
/// that is >= channels/2.
std::int64_t bottleneck_mid_width(std::int64_t channels, std::int64_t groups);

} // namespace ecgunc
