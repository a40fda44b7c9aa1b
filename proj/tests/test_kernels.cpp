#include "doctest.h"

#include <vector>

#include "ecgunc/kernels.hpp"
#include "ecgunc/rng.hpp"
#include "ecgunc/threading.hpp"

using namespace ecgunc;
using namespace ecgunc::kern;

// The OpenMP kernels must match the serial reference bit for bit: parallel
// loops only split across independent accumulation chains.

namespace {

std::vector<double> randv(std::size_t n, Rng& rng) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal();
    return v;
}

} // namespace

TEST_CASE("conv1d kernels: omp variant is bit-identical to serial") {
    set_threads(2);
    Rng rng(808);
    struct Cfg {
        std::int64_t batch, c_in, l_in, c_out, kernel, stride, pad_l, pad_r, groups;
    };
    const Cfg cfgs[] = {
        {3, 8, 40, 12, 5, 1, 2, 2, 4},
        {2, 16, 64, 16, 16, 2, 7, 7, 16},
        {1, 6, 17, 18, 3, 3, 1, 0, 3},
        {4, 4, 25, 8, 1, 1, 0, 0, 1},
        // input shorter than the kernel (deep downsampled stages)
        {2, 8, 4, 8, 16, 2, 7, 7, 2},
        {2, 6, 2, 6, 16, 1, 8, 7, 3},
    };
    for (const auto& c : cfgs) {
        const std::int64_t l_out = (c.l_in + c.pad_l + c.pad_r - c.kernel) / c.stride + 1;
        Conv1dDims d{c.batch, c.c_in, c.l_in, c.c_out, c.kernel,
                     c.stride, c.pad_l, c.pad_r, c.groups, l_out};
        auto x = randv(static_cast<std::size_t>(c.batch * c.c_in * c.l_in), rng);
        auto w = randv(static_cast<std::size_t>(c.c_out * (c.c_in / c.groups) * c.kernel), rng);
        auto b = randv(static_cast<std::size_t>(c.c_out), rng);

        std::vector<double> y1(static_cast<std::size_t>(c.batch * c.c_out * l_out));
        std::vector<double> y2(y1.size());
        conv1d_forward_serial(x.data(), w.data(), b.data(), y1.data(), d);
        conv1d_forward_omp(x.data(), w.data(), b.data(), y2.data(), d);
        CHECK(y1 == y2);

        auto gy = randv(y1.size(), rng);
        std::vector<double> gx1(x.size(), 0.0), gx2(x.size(), 0.0);
        conv1d_backward_input_serial(gy.data(), w.data(), gx1.data(), d);
        conv1d_backward_input_omp(gy.data(), w.data(), gx2.data(), d);
        CHECK(gx1 == gx2);

        std::vector<double> gw1(w.size(), 0.0), gw2(w.size(), 0.0);
        conv1d_backward_weight_serial(gy.data(), x.data(), gw1.data(), d);
        conv1d_backward_weight_omp(gy.data(), x.data(), gw2.data(), d);
        CHECK(gw1 == gw2);
    }
}

TEST_CASE("dense kernels: omp variant is bit-identical to serial") {
    set_threads(2);
    Rng rng(909);
    const std::int64_t batch = 7, features = 33, out = 11;
    auto x = randv(static_cast<std::size_t>(batch * features), rng);
    auto w = randv(static_cast<std::size_t>(out * features), rng);
    auto b = randv(static_cast<std::size_t>(out), rng);

    std::vector<double> y1(static_cast<std::size_t>(batch * out)), y2(y1.size());
    dense_forward_serial(x.data(), w.data(), b.data(), y1.data(), batch, features, out);
    dense_forward_omp(x.data(), w.data(), b.data(), y2.data(), batch, features, out);
    CHECK(y1 == y2);

    auto gy = randv(y1.size(), rng);
    std::vector<double> gx1(x.size(), 0.0), gx2(x.size(), 0.0);
    std::vector<double> gw1(w.size(), 0.0), gw2(w.size(), 0.0);
    std::vector<double> gb1(b.size(), 0.0), gb2(b.size(), 0.0);
    dense_backward_serial(gy.data(), x.data(), w.data(), gx1.data(), gw1.data(), gb1.data(),
                          batch, features, out);
    dense_backward_omp(gy.data(), x.data(), w.data(), gx2.data(), gw2.data(), gb2.data(),
                       batch, features, out);
    CHECK(gx1 == gx2);
    CHECK(gw1 == gw2);
    CHECK(gb1 == gb2);
}

TEST_CASE("bn batch stats: omp variant is bit-identical to serial") {
    set_threads(2);
    Rng rng(1010);
    const std::int64_t batch = 5, channels = 9, length = 31;
    auto x = randv(static_cast<std::size_t>(batch * channels * length), rng);
    std::vector<double> m1(static_cast<std::size_t>(channels)), v1(m1.size());
    std::vector<double> m2(m1.size()), v2(m1.size());
    bn_batch_stats_serial(x.data(), batch, channels, length, m1.data(), v1.data());
    bn_batch_stats_omp(x.data(), batch, channels, length, m2.data(), v2.data());
    CHECK(m1 == m2);
    CHECK(v1 == v2);
}
