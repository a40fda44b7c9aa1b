// Times the serial reference kernels against their OpenMP variants on
// network-shaped workloads and checks that the results stay bit-identical.
//
//   ./ecgunc_bench [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "ecgunc/kernels.hpp"
#include "ecgunc/rng.hpp"
#include "ecgunc/threading.hpp"

using namespace ecgunc;
using namespace ecgunc::kern;
using Clock = std::chrono::steady_clock;

namespace {

std::vector<double> randv(std::size_t n, Rng& rng) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal();
    return v;
}

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct Row {
    std::string name;
    double serial_ms;
    double omp_ms;
    bool identical;
};

void print_row(const Row& r) {
    std::printf("%-28s %10.2f ms %10.2f ms %8.2fx   %s\n", r.name.c_str(), r.serial_ms,
                r.omp_ms, r.serial_ms / r.omp_ms, r.identical ? "bit-identical" : "MISMATCH");
}

} // namespace

int main(int argc, char** argv) {
    set_threads(0);
    const int repeats = argc > 1 ? std::atoi(argv[1]) : 5;
    std::printf("threads: %d, repeats: %d\n\n", threads(), repeats);
    std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "openmp", "speedup");

    Rng rng(1);
    bool all_ok = true;

    // conv shapes drawn from the desk-scale network's hottest layers
    struct ConvCase {
        const char* name;
        Conv1dDims d;
    };
    const ConvCase conv_cases[] = {
        {"conv1d fwd 1x1 16->8 L512", {32, 16, 512, 8, 1, 1, 0, 0, 1, 512}},
        {"conv1d fwd K16 g4 mid52", {32, 52, 126, 52, 16, 1, 8, 7, 4, 126}},
        {"conv1d fwd K16 g4 mid128", {32, 128, 32, 128, 16, 2, 7, 7, 4, 16}},
    };
    for (const auto& c : conv_cases) {
        const auto& d = c.d;
        auto x = randv(static_cast<std::size_t>(d.batch * d.c_in * d.l_in), rng);
        auto w = randv(static_cast<std::size_t>(d.c_out * (d.c_in / d.groups) * d.kernel), rng);
        auto b = randv(static_cast<std::size_t>(d.c_out), rng);
        std::vector<double> y1(static_cast<std::size_t>(d.batch * d.c_out * d.l_out));
        std::vector<double> y2(y1.size());

        auto t0 = Clock::now();
        for (int r = 0; r < repeats; ++r) {
            conv1d_forward_serial(x.data(), w.data(), b.data(), y1.data(), d);
        }
        const double ts = ms_since(t0);
        t0 = Clock::now();
        for (int r = 0; r < repeats; ++r) {
            conv1d_forward_omp(x.data(), w.data(), b.data(), y2.data(), d);
        }
        const double tp = ms_since(t0);
        Row row{c.name, ts, tp, y1 == y2};
        all_ok = all_ok && row.identical;
        print_row(row);

        // matching backward pass
        auto gy = randv(y1.size(), rng);
        std::vector<double> gx1(x.size(), 0.0), gx2(x.size(), 0.0);
        std::vector<double> gw1(w.size(), 0.0), gw2(w.size(), 0.0);
        t0 = Clock::now();
        for (int r = 0; r < repeats; ++r) {
            conv1d_backward_input_serial(gy.data(), w.data(), gx1.data(), d);
            conv1d_backward_weight_serial(gy.data(), x.data(), gw1.data(), d);
        }
        const double bs = ms_since(t0);
        t0 = Clock::now();
        for (int r = 0; r < repeats; ++r) {
            conv1d_backward_input_omp(gy.data(), w.data(), gx2.data(), d);
            conv1d_backward_weight_omp(gy.data(), x.data(), gw2.data(), d);
        }
        const double bp = ms_since(t0);
        Row brow{std::string(c.name) + " bwd", bs, bp, gx1 == gx2 && gw1 == gw2};
        all_ok = all_ok && brow.identical;
        print_row(brow);
    }

    {
        const std::int64_t batch = 64, features = 1024, out = 256;
        auto x = randv(static_cast<std::size_t>(batch * features), rng);
        auto w = randv(static_cast<std::size_t>(out * features), rng);
        auto b = randv(static_cast<std::size_t>(out), rng);
        std::vector<double> y1(static_cast<std::size_t>(batch * out)), y2(y1.size());
        auto t0 = Clock::now();
        for (int r = 0; r < repeats; ++r) {
            dense_forward_serial(x.data(), w.data(), b.data(), y1.data(), batch, features, out);
        }
        const double ts = ms_since(t0);
        t0 = Clock::now();
        for (int r = 0; r < repeats; ++r) {
            dense_forward_omp(x.data(), w.data(), b.data(), y2.data(), batch, features, out);
        }
        Row row{"dense fwd 64x1024->256", ts, ms_since(t0), y1 == y2};
        all_ok = all_ok && row.identical;
        print_row(row);
    }

    {
        const std::int64_t batch = 32, channels = 128, length = 512;
        auto x = randv(static_cast<std::size_t>(batch * channels * length), rng);
        std::vector<double> m1(static_cast<std::size_t>(channels)), v1(m1.size());
        std::vector<double> m2(m1.size()), v2(m1.size());
        auto t0 = Clock::now();
        for (int r = 0; r < repeats; ++r) {
            bn_batch_stats_serial(x.data(), batch, channels, length, m1.data(), v1.data());
        }
        const double ts = ms_since(t0);
        t0 = Clock::now();
        for (int r = 0; r < repeats; ++r) {
            bn_batch_stats_omp(x.data(), batch, channels, length, m2.data(), v2.data());
        }
        Row row{"bn stats 32x128x512", ts, ms_since(t0), m1 == m2 && v1 == v2};
        all_ok = all_ok && row.identical;
        print_row(row);
    }

    std::printf("\n%s\n", all_ok ? "all kernels bit-identical across variants"
                                 : "kernel mismatch detected");
    return all_ok ? 0 : 1;
}
