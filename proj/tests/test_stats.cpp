#include "doctest.h"

#include <cmath>
#include <vector>

#include "ecgunc/errors.hpp"
#include "ecgunc/rng.hpp"
#include "ecgunc/stats.hpp"
#include "stats_reference.hpp"

using namespace ecgunc;

TEST_CASE("t_tail anchor values") {
    CHECK(t_tail(0.0, 1.0) == 0.5);
    CHECK(t_tail(0.0, 123.4) == 0.5);
    // Cauchy closed form: P(T>t) = 1/2 - atan(t)/pi
    CHECK(t_tail(1.0, 1.0) == doctest::Approx(0.25).epsilon(1e-10));
    for (double t : {0.3, 0.7, 2.0, 5.5}) {
        const double want = 0.5 - std::atan(t) / 3.14159265358979323846;
        CHECK(t_tail(t, 1.0) == doctest::Approx(want).epsilon(1e-10));
    }
    // Normal limit
    CHECK(t_tail(1.959964, 1e6) == doctest::Approx(0.025).epsilon(1e-4));
}

TEST_CASE("t_tail is monotone decreasing in t and matches quadrature") {
    for (double dof : {1.0, 2.5, 4.0, 17.0, 250.0}) {
        double prev = 1.0;
        for (double t = -6.0; t <= 6.0; t += 0.37) {
            const double p = t_tail(t, dof);
            CHECK(p < prev);
            prev = p;
            CHECK(p == doctest::Approx(reference::t_tail(t, dof)).epsilon(1e-10));
        }
    }
}

TEST_CASE("welch spec examples") {
    const std::vector<double> a{1, 2, 3, 4};
    const std::vector<double> b{2, 3, 4, 5};
    WelchResult r = welch_t(a, b, Alternative::AGreater);
    CHECK(r.t == doctest::Approx(-1.095445).epsilon(1e-6));
    CHECK(r.dof == doctest::Approx(6.0).epsilon(1e-12));

    // identical samples: t = 0, one-sided p = 0.5
    const std::vector<double> s{1.5, 2.5, 3.5};
    WelchResult rs = welch_t(s, s, Alternative::AGreater);
    CHECK(rs.t == 0.0);
    CHECK(rs.p == 0.5);

    // far-separated samples: one-sided p -> 0
    const std::vector<double> high{100.0, 101.0, 99.5, 100.5};
    const std::vector<double> low{0.0, 1.0, -0.5, 0.5};
    CHECK(welch_t(high, low, Alternative::AGreater).p < 1e-8);

    CHECK_THROWS_AS(welch_t(std::vector<double>{1.0}, b, Alternative::AGreater), NumericError);
    const std::vector<double> flat{2.0, 2.0, 2.0};
    CHECK_THROWS_AS(welch_t(flat, flat, Alternative::AGreater), NumericError);
}

TEST_CASE("welch antisymmetry and complementary one-sided p-values") {
    Rng rng(900);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a, b;
        const int na = 2 + static_cast<int>(rng.uniform_int(8));
        const int nb = 2 + static_cast<int>(rng.uniform_int(8));
        for (int i = 0; i < na; ++i) a.push_back(rng.normal(0.0, 2.0));
        for (int i = 0; i < nb; ++i) b.push_back(rng.normal(0.4, 1.0));
        WelchResult ab = welch_t(a, b, Alternative::AGreater);
        WelchResult ba = welch_t(b, a, Alternative::AGreater);
        CHECK(ab.t == -ba.t);
        WelchResult ab2 = welch_t(a, b, Alternative::BGreater);
        CHECK(std::abs(ab.p + ab2.p - 1.0) <= 1e-12);
    }
}

TEST_CASE("pearson spec examples") {
    const std::vector<double> x{1, 2, 3};
    {
        std::vector<double> y{3, 5, 7}; // y = 2x+1
        PearsonResult r = pearson(x, y);
        CHECK(r.r == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.p <= 1e-12); // numerical floor
    }
    {
        std::vector<double> y{-1, -2, -3};
        CHECK(pearson(x, y).r == doctest::Approx(-1.0).epsilon(1e-12));
    }
    {
        std::vector<double> y{1, 2, 4};
        CHECK(pearson(x, y).r == doctest::Approx(0.981981).epsilon(1e-6));
    }
    CHECK_THROWS_AS(pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2}),
                    NumericError);
    CHECK_THROWS_AS(pearson(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}),
                    NumericError);
}

TEST_CASE("pearson invariant under positive affine rescaling") {
    Rng rng(901);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> x, y;
        for (int i = 0; i < 20; ++i) {
            x.push_back(rng.normal());
            y.push_back(0.5 * x.back() + rng.normal());
        }
        const double r0 = pearson(x, y).r;
        std::vector<double> xs;
        const double scale = rng.uniform(0.1, 10.0);
        const double shift = rng.uniform(-5.0, 5.0);
        for (double v : x) xs.push_back(scale * v + shift);
        CHECK(std::abs(pearson(xs, y).r - r0) <= 1e-12);
    }
}

TEST_CASE("welch and pearson match the frozen reference on 200 random inputs") {
    Rng rng(424242);
    for (int trial = 0; trial < 200; ++trial) {
        const int na = 3 + static_cast<int>(rng.uniform_int(10));
        const int nb = 3 + static_cast<int>(rng.uniform_int(10));
        std::vector<double> a, b;
        for (int i = 0; i < na; ++i) a.push_back(rng.normal(0.0, 1.5));
        for (int i = 0; i < nb; ++i) b.push_back(rng.normal(0.3, 0.7));

        const WelchResult got = welch_t(a, b, Alternative::AGreater);
        const reference::Welch want = reference::welch(a, b);
        CHECK(got.t == doctest::Approx(want.t).epsilon(1e-12));
        CHECK(got.dof == doctest::Approx(want.dof).epsilon(1e-12));
        CHECK(std::abs(got.p - want.p_a_greater) <= 1e-8);

        const int n = 4 + static_cast<int>(rng.uniform_int(12));
        std::vector<double> x, y;
        for (int i = 0; i < n; ++i) {
            x.push_back(rng.normal());
            y.push_back(0.6 * x.back() + rng.normal(0.0, 0.8));
        }
        const PearsonResult pg = pearson(x, y);
        const reference::Pearson pw = reference::pearson(x, y);
        CHECK(pg.r == doctest::Approx(pw.r).epsilon(1e-12));
        CHECK(std::abs(pg.p - pw.p) <= 1e-8);
    }
}
