#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "ecgunc/checkpoint.hpp"
#include "ecgunc/errors.hpp"
#include "ecgunc/manifest.hpp"
#include "ecgunc/network.hpp"

using namespace ecgunc;

namespace {

// Small 7-stage configuration that keeps unit tests fast.
NetworkConfig tiny_config() {
    NetworkConfig c;
    c.blocks_per_stage = {1, 1, 1, 1, 1, 1, 1};
    c.width_scale = {1, 8}; // 8,20,20,50,50,128,128
    c.groups = 2;
    c.se_reduction = 2;
    c.input_length = 128;
    return c;
}

Tensor random_batch(const NetworkConfig& c, std::int64_t b, std::uint64_t seed) {
    Rng rng(seed);
    Tensor t = Tensor::zeros({b, c.input_leads, c.input_length});
    t.fill_normal(rng, 0.0, 0.5);
    return t;
}

std::vector<double> run_det(Network& net, const Tensor& batch) {
    Rng rng(0);
    Tensor y = net.forward(nullptr, batch, ModelMode::EvalDeterministic, rng);
    return {y.values().begin(), y.values().end()};
}

} // namespace

TEST_CASE("scaled channels and divisibility diagnostics") {
    NetworkConfig c; // paper defaults
    const auto ch = c.scaled_channels();
    CHECK(ch == std::array<int, 7>{64, 160, 160, 400, 400, 1024, 1024});

    NetworkConfig bad = c;
    bad.width_scale = {1, 4};
    // 160/4 = 40 is not divisible by groups 16
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("stage 2"), ConfigError);

    NetworkConfig odd = c;
    odd.width_scale = {1, 3};
    CHECK_THROWS_AS(odd.validate(), ConfigError);
}

TEST_CASE("bottleneck mid width rounds up to the group size") {
    CHECK(bottleneck_mid_width(64, 16) == 32);
    CHECK(bottleneck_mid_width(160, 16) == 80);
    CHECK(bottleneck_mid_width(400, 16) == 208); // 200 is not a multiple of 16
    CHECK(bottleneck_mid_width(1024, 16) == 512);
    CHECK(bottleneck_mid_width(100, 4) == 52);
}

TEST_CASE("quarter-width all-ones build: final length 7, final channels 256") {
    NetworkConfig c;
    c.blocks_per_stage = {1, 1, 1, 1, 1, 1, 1};
    c.width_scale = {1, 4};
    c.groups = 4;
    c.se_reduction = 4;
    c.input_length = 1000;
    Rng rng(1);
    Network net = build_network(c, rng);
    const auto shapes = net.stage_output_shapes(1);
    REQUIRE(shapes.size() == 7);
    CHECK(shapes.back() == Shape{1, 256, 7});

    // the analytic shapes agree with an actual forward pass
    Tensor batch = random_batch(c, 1, 5);
    StageProbe probe;
    Rng fw(0);
    Tensor logits = net.forward(nullptr, batch, ModelMode::EvalDeterministic, fw, &probe);
    REQUIRE(probe.stage_outputs.size() == 7);
    for (int s = 0; s < 7; ++s) {
        CHECK(probe.stage_outputs[static_cast<std::size_t>(s)] ==
              shapes[static_cast<std::size_t>(s)]);
    }
    CHECK(logits.shape() == Shape{1, 9});
}

TEST_CASE("build determinism and parameter-count stability") {
    const NetworkConfig c = tiny_config();
    Rng r1(42), r2(42), r3(43);
    Network a = build_network(c, r1);
    Network b = build_network(c, r2);
    Network d = build_network(c, r3);
    const auto pa = a.snapshot_state();
    const auto pb = b.snapshot_state();
    CHECK(pa == pb);
    CHECK(pa != d.snapshot_state());
    CHECK(a.parameter_count() == b.parameter_count());
    CHECK(a.parameter_count() == d.parameter_count()); // pure function of config
    CHECK(a.parameter_count() > 0);

    // 7 blocks * 3 convs + 3 projections (channel changes at stages 2, 4, 6) + stem
    CHECK(a.conv_layer_count() == 25);
}

TEST_CASE("fresh network emits exactly uniform probability rows") {
    const NetworkConfig c = tiny_config();
    Rng rng(11);
    Network net = build_network(c, rng);
    Tensor batch = random_batch(c, 3, 77);
    Rng fw(0);
    Tensor probs = net.predict_proba(nullptr, batch, ModelMode::EvalDeterministic, fw);
    for (double v : probs.values()) CHECK(v == 1.0 / 9.0);
}

TEST_CASE("probability rows sum to one and argmax matches logits") {
    const NetworkConfig c = tiny_config();
    Rng rng(13);
    Network net = build_network(c, rng);
    // randomize the head so rows are not uniform
    net.head.weight.fill_normal(rng, 0.0, 0.2);
    Tensor batch = random_batch(c, 4, 5);
    Rng f1(0), f2(0);
    Tensor logits = net.forward(nullptr, batch, ModelMode::EvalDeterministic, f1);
    Tensor probs = net.predict_proba(nullptr, batch, ModelMode::EvalDeterministic, f2);
    for (std::int64_t b = 0; b < 4; ++b) {
        double s = 0.0;
        int arg_l = 0, arg_p = 0;
        for (int k = 0; k < 9; ++k) {
            const auto idx = static_cast<std::size_t>(b * 9 + k);
            s += probs.values()[idx];
            if (logits.values()[idx] > logits.values()[static_cast<std::size_t>(b * 9 + arg_l)])
                arg_l = k;
            if (probs.values()[idx] > probs.values()[static_cast<std::size_t>(b * 9 + arg_p)])
                arg_p = k;
        }
        CHECK(std::abs(s - 1.0) <= 1e-12);
        CHECK(arg_l == arg_p);
    }
}

TEST_CASE("mode semantics: determinism and stochasticity") {
    const NetworkConfig c = tiny_config();
    Rng rng(21);
    Network net = build_network(c, rng);
    net.head.weight.fill_normal(rng, 0.0, 0.2);
    Tensor batch = random_batch(c, 2, 3);

    CHECK(run_det(net, batch) == run_det(net, batch)); // bit-identical

    // MC dropout with p=0 collapses to the deterministic path
    Network p0 = build_network(c, rng);
    {
        Rng r1(42), r2(42);
        Network n1 = build_network(tiny_config(), r1);
        NetworkConfig c0 = tiny_config();
        c0.dropout_p = 0.0;
        Rng r3(42);
        Network n0 = build_network(c0, r3);
        Rng fa(9), fb(10);
        Tensor ya = n0.forward(nullptr, batch, ModelMode::EvalMcDropout, fa);
        Rng fz(0);
        Tensor yd = n0.forward(nullptr, batch, ModelMode::EvalDeterministic, fz);
        CHECK(std::vector<double>(ya.values().begin(), ya.values().end()) ==
              std::vector<double>(yd.values().begin(), yd.values().end()));
    }

    // distinct sub-seeds give different MC outputs
    Rng fa(100), fb(101);
    Tensor ya = net.forward(nullptr, batch, ModelMode::EvalMcDropout, fa);
    Tensor yb = net.forward(nullptr, batch, ModelMode::EvalMcDropout, fb);
    CHECK(std::vector<double>(ya.values().begin(), ya.values().end()) !=
          std::vector<double>(yb.values().begin(), yb.values().end()));
}

TEST_CASE("forward validates lead count and length") {
    const NetworkConfig c = tiny_config();
    Rng rng(31);
    Network net = build_network(c, rng);
    Rng fw(0);
    Tensor bad_leads = Tensor::zeros({1, 11, c.input_length});
    CHECK_THROWS_WITH_AS(net.forward(nullptr, bad_leads, ModelMode::EvalDeterministic, fw),
                         doctest::Contains("leads"), ShapeError);
    Tensor bad_len = Tensor::zeros({1, 12, 64});
    CHECK_THROWS_AS(net.forward(nullptr, bad_len, ModelMode::EvalDeterministic, fw),
                    ShapeError);
}

TEST_CASE("zeroed residual branches leave only the shortcut path") {
    const NetworkConfig c = tiny_config();
    Rng rng(51);
    Network net = build_network(c, rng);
    net.head.weight.fill_normal(rng, 0.0, 0.3); // a zero head would mask everything
    for (auto& stage : net.stages) {
        for (auto& blk : stage) {
            std::fill(blk.conv2.conv.weight.values().begin(),
                      blk.conv2.conv.weight.values().end(), 0.0);
            std::fill(blk.conv2.conv.bias.values().begin(),
                      blk.conv2.conv.bias.values().end(), 0.0);
        }
    }
    Tensor batch = random_batch(c, 2, 8);
    const auto base = run_det(net, batch);

    // perturbing an upstream residual-branch weight changes nothing
    net.stages[2][0].conv1.conv.weight.values()[0] += 3.5;
    net.stages[4][0].convk.conv.weight.values()[1] -= 2.0;
    net.stages[1][0].se.expand.weight.values()[0] += 1.0;
    CHECK(run_det(net, batch) == base);

    // ...while perturbing the shortcut projection does
    net.stages[1][0].shortcut_proj->weight.values()[0] += 0.5;
    CHECK(run_det(net, batch) != base);
}

TEST_CASE("SE excitation saturated to 1 is a bit-exact no-op") {
    const NetworkConfig c = tiny_config();
    Rng r1(61), r2(61);
    Network a = build_network(c, r1);
    Network b = build_network(c, r2);
    auto saturate = [](Network& net, double bias) {
        for (auto& stage : net.stages) {
            for (auto& blk : stage) {
                std::fill(blk.se.expand.weight.values().begin(),
                          blk.se.expand.weight.values().end(), 0.0);
                std::fill(blk.se.expand.bias.values().begin(),
                          blk.se.expand.bias.values().end(), bias);
            }
        }
    };
    // sigmoid(39) and sigmoid(40) both round to exactly 1.0 in f64, so the two
    // networks differ only in a gate that multiplies by exactly 1.
    saturate(a, 40.0);
    saturate(b, 39.0);
    Tensor batch = random_batch(c, 2, 17);
    CHECK(run_det(a, batch) == run_det(b, batch));
}

TEST_CASE("gradient reaches every trainable parameter once the head is nonzero") {
    const NetworkConfig c = tiny_config();
    Rng rng(71);
    Network net = build_network(c, rng);
    net.head.weight.fill_normal(rng, 0.0, 0.3);
    net.head.bias.fill_normal(rng, 0.0, 0.1);

    Tensor batch = random_batch(c, 4, 23);
    Rng fw(5);
    Tape tape;
    Tensor logits = net.forward(&tape, batch, ModelMode::Train, fw);
    Tensor loss = cross_entropy_loss(&tape, logits, {0, 3, 5, 8});
    for (auto& p : net.parameters()) p.tensor.zero_grad();
    tape.backward(loss);

    for (auto& p : net.parameters()) {
        bool any_nonzero = false;
        for (double g : p.tensor.grad()) {
            if (g != 0.0) {
                any_nonzero = true;
                break;
            }
        }
        CAPTURE(p.name);
        CHECK(any_nonzero);
    }
}

TEST_CASE("ECGM checkpoint round-trips bit-exactly") {
    const NetworkConfig c = tiny_config();
    Rng rng(81);
    Network net = build_network(c, rng);
    net.head.weight.fill_normal(rng, 0.0, 0.2);
    // make running stats non-trivial
    Tensor batch = random_batch(c, 4, 9);
    Rng fw(2);
    Tape tape;
    (void)net.forward(&tape, batch, ModelMode::Train, fw);

    const std::string path = "/tmp/ecgunc_test_ckpt.ecgm";
    save_checkpoint(net, path);
    Network back = load_checkpoint(path);
    CHECK(back.snapshot_state() == net.snapshot_state());
    CHECK(back.config.input_length == c.input_length);
    CHECK(back.config.width_scale.den == 8);

    // identical outputs after reload
    Tensor probe = random_batch(c, 2, 33);
    CHECK(run_det(net, probe) == run_det(back, probe));

    // save the loaded model again: identical bytes
    const std::string path2 = "/tmp/ecgunc_test_ckpt2.ecgm";
    save_checkpoint(back, path2);
    CHECK(fnv1a64_file(path) == fnv1a64_file(path2));

    std::remove(path.c_str());
    std::remove(path2.c_str());
}

TEST_CASE("checkpoint loader rejects garbage") {
    const std::string path = "/tmp/ecgunc_test_badckpt.ecgm";
    {
        std::ofstream os(path, std::ios::binary);
        os << "WRONG";
    }
    CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("bad magic"), IoError);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_checkpoint("/tmp/ecgunc_no_such_ckpt.ecgm"), IoError);
}
