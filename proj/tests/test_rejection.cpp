#include "doctest.h"

#include <cmath>
#include <vector>

#include "ecgunc/errors.hpp"
#include "ecgunc/metrics.hpp"
#include "ecgunc/rejection.hpp"
#include "ecgunc/rng.hpp"

using namespace ecgunc;

namespace {

UncertaintyEstimate est(double total, double data = 0.0) {
    UncertaintyEstimate e;
    e.total = total;
    e.data = data;
    e.model = total - data;
    e.model_raw = e.model;
    return e;
}

} // namespace

TEST_CASE("decide boundary rule: equality accepts") {
    CHECK(decide(est(0.3), 0.4, 5).accepted);
    CHECK(decide(est(0.3), 0.4, 5).class_id == 5);
    CHECK_FALSE(decide(est(0.5), 0.4, 5).accepted);
    CHECK(decide(est(0.4), 0.4, 5).accepted);
    CHECK_THROWS_AS(decide(est(0.4), -0.1, 5), NumericError);

    // data-only thresholding knob
    CHECK(decide(est(2.0, 0.1), 0.4, 1, ThresholdOn::Data).accepted);
    CHECK_FALSE(decide(est(2.0, 0.1), 0.4, 1, ThresholdOn::Total).accepted);
}

TEST_CASE("decide is pure: same inputs, same outcome") {
    const UncertaintyEstimate e = est(0.37);
    for (int i = 0; i < 5; ++i) {
        const RejectionOutcome a = decide(e, 0.4, 3);
        const RejectionOutcome b = decide(e, 0.4, 3);
        CHECK(a.accepted == b.accepted);
        CHECK(a.class_id == b.class_id);
        CHECK(a.uncertainty == b.uncertainty);
    }
}

TEST_CASE("default grid has 23 inclusive points") {
    const auto ts = grid_thresholds(SweepGrid{});
    REQUIRE(ts.size() == 23);
    CHECK(ts.front() == doctest::Approx(0.400).epsilon(1e-12));
    CHECK(ts.back() == doctest::Approx(1.500).epsilon(1e-12));
    CHECK_THROWS_AS(grid_thresholds(SweepGrid{0.4, 1.5, 0.0}), ConfigError);
    CHECK(grid_thresholds(SweepGrid{2.3, 2.3, 0.1}).size() == 1);
}

TEST_CASE("constructed three-record case at t=0.4") {
    std::vector<UncertaintyEstimate> es{est(0.3), est(0.5), est(1.0)};
    std::vector<int> truth{0, 0, 1};
    std::vector<int> pred{0, 1, 0}; // only the low-uncertainty record is right
    auto points = sweep(es, truth, pred, 2, SweepGrid{0.4, 0.4, 0.1});
    REQUIRE(points.size() == 1);
    CHECK(points[0].accept_ratio == doctest::Approx(1.0 / 3.0));
    REQUIRE(points[0].macro_f1.has_value());
    // the single accepted record is correct: class-0 F1 = 1, class-1 absent -> 0
    CHECK(*points[0].macro_f1 == doctest::Approx(0.5));
    REQUIRE(points[0].per_class_precision[0].has_value());
    CHECK(*points[0].per_class_precision[0] == doctest::Approx(1.0));
    CHECK_FALSE(points[0].per_class_precision[1].has_value());
}

TEST_CASE("monotone coverage and nested accepted sets") {
    Rng rng(2025);
    const int n = 300, k = 4;
    std::vector<UncertaintyEstimate> es;
    std::vector<int> truth, pred;
    for (int i = 0; i < n; ++i) {
        es.push_back(est(rng.uniform(0.0, std::log(4.0))));
        truth.push_back(static_cast<int>(rng.uniform_int(k)));
        pred.push_back(static_cast<int>(rng.uniform_int(k)));
    }
    const auto points = sweep(es, truth, pred, k, SweepGrid{0.0, 1.4, 0.05});
    for (std::size_t i = 1; i < points.size(); ++i) {
        CHECK(points[i].accept_ratio >= points[i - 1].accept_ratio);
        CHECK(points[i].accepted_count >= points[i - 1].accepted_count);
    }
    // union property on the underlying decide() outcomes
    for (int i = 0; i < n; ++i) {
        bool prev = false;
        for (double t : grid_thresholds(SweepGrid{0.0, 1.4, 0.05})) {
            const bool now = decide(es[static_cast<std::size_t>(i)], t, 0).accepted;
            if (prev) CHECK(now); // once accepted, stays accepted
            prev = now;
        }
    }
}

TEST_CASE("threshold above ln K accepts everything, F1 equals no-rejection exactly") {
    Rng rng(88);
    const int n = 120, k = 9;
    std::vector<UncertaintyEstimate> es;
    std::vector<int> truth, pred;
    for (int i = 0; i < n; ++i) {
        es.push_back(est(rng.uniform(0.0, std::log(9.0)))); // entropy bound
        truth.push_back(static_cast<int>(rng.uniform_int(k)));
        pred.push_back(static_cast<int>(rng.uniform_int(k)));
    }
    const double t = std::log(9.0) + 1e-9;
    const auto points = sweep(es, truth, pred, k, SweepGrid{t, t, 1.0});
    REQUIRE(points.size() == 1);
    CHECK(points[0].accept_ratio == 1.0);
    REQUIRE(points[0].macro_f1.has_value());
    CHECK(*points[0].macro_f1 == macro_f1(truth, pred, k)); // bit-exact
}

TEST_CASE("oracle: wrong predictions above the grid make accepted F1 non-increasing") {
    Rng rng(4096);
    const int k = 9;
    std::vector<UncertaintyEstimate> es;
    std::vector<int> truth, pred;
    // Correct records sit below the grid start, wrong ones inside the grid.
    for (int c = 0; c < k; ++c) {
        for (int i = 0; i < 10; ++i) {
            es.push_back(est(rng.uniform(0.0, 0.35)));
            truth.push_back(c);
            pred.push_back(c);
        }
        for (int i = 0; i < 6; ++i) {
            es.push_back(est(rng.uniform(0.45, 2.0)));
            truth.push_back(c);
            pred.push_back((c + 1 + static_cast<int>(rng.uniform_int(k - 1))) % k);
        }
    }
    const auto points = sweep(es, truth, pred, k);
    REQUIRE(points.size() == 23);
    for (std::size_t i = 1; i < points.size(); ++i) {
        REQUIRE(points[i].macro_f1.has_value());
        CHECK(*points[i].macro_f1 <= *points[i - 1].macro_f1 + 1e-12);
    }
    CHECK(*points[0].macro_f1 == doctest::Approx(1.0)); // all-correct accepted set
}

TEST_CASE("empty input and empty accepted set") {
    std::vector<UncertaintyEstimate> none;
    std::vector<int> empty;
    CHECK_THROWS_AS(sweep(none, empty, empty, 2), ConfigError);

    std::vector<UncertaintyEstimate> es{est(2.0)};
    std::vector<int> t{0}, p{0};
    const auto points = sweep(es, t, p, 2, SweepGrid{0.1, 0.1, 1.0});
    REQUIRE(points.size() == 1);
    CHECK(points[0].accept_ratio == 0.0);
    CHECK_FALSE(points[0].macro_f1.has_value()); // absent, never zero
}
