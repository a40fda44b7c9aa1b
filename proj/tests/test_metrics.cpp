#include "doctest.h"

#include <vector>

#include "ecgunc/errors.hpp"
#include "ecgunc/metrics.hpp"
#include "ecgunc/rng.hpp"

using namespace ecgunc;

namespace {

// First-principles reference: count TP/FP/FN per class straight from the
// label lists, never touching the ConfusionMatrix code path.
double brute_macro_f1(const std::vector<int>& truth, const std::vector<int>& pred, int k) {
    double total = 0.0;
    for (int c = 0; c < k; ++c) {
        int tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            const bool is_pos = truth[i] == c;
            const bool said_pos = pred[i] == c;
            if (is_pos && said_pos) ++tp;
            if (!is_pos && said_pos) ++fp;
            if (is_pos && !said_pos) ++fn;
        }
        if (tp + fp + fn > 0) {
            const double p = (tp + fp) ? static_cast<double>(tp) / (tp + fp) : 0.0;
            const double r = (tp + fn) ? static_cast<double>(tp) / (tp + fn) : 0.0;
            if (p + r > 0.0) total += 2.0 * p * r / (p + r);
        }
    }
    return total / k;
}

} // namespace

TEST_CASE("confusion matrix basics") {
    const std::vector<int> truth{0, 1, 2, 1};
    const std::vector<int> pred{0, 1, 2, 1};
    ConfusionMatrix cm = confusion(truth, pred, 3);
    CHECK(cm.total() == 4);
    CHECK(cm.at(0, 0) == 1);
    CHECK(cm.at(1, 1) == 2);
    CHECK(cm.at(2, 2) == 1);
    CHECK(cm.at(0, 1) == 0);

    ConfusionMatrix single = confusion(std::vector<int>{0}, std::vector<int>{1}, 2);
    CHECK(single.at(0, 1) == 1);
    CHECK(single.total() == 1);

    // order invariance
    const std::vector<int> t2{1, 0, 1, 2};
    const std::vector<int> p2{1, 0, 2, 2};
    const std::vector<int> t2s{2, 1, 1, 0};
    const std::vector<int> p2s{2, 2, 1, 0};
    CHECK(confusion(t2, p2, 3).counts == confusion(t2s, p2s, 3).counts);

    CHECK_THROWS_AS(confusion(std::vector<int>{0}, std::vector<int>{3}, 3), ShapeError);
    CHECK_THROWS_AS(confusion(std::vector<int>{0, 1}, std::vector<int>{0}, 3), ShapeError);
}

TEST_CASE("row normalization") {
    ConfusionMatrix cm;
    cm.k = 2;
    cm.counts = {2, 2, 0, 0};
    NormalizedRows nr = row_normalize(cm);
    CHECK(nr.fractions[0] == doctest::Approx(0.5));
    CHECK(nr.fractions[1] == doctest::Approx(0.5));
    CHECK(nr.zero_row[0] == false);
    CHECK(nr.zero_row[1] == true);
    CHECK(nr.fractions[2] == 0.0);
    CHECK(nr.fractions[3] == 0.0);

    // diagonal -> identity fractions, and diagonal equals per-class recall
    ConfusionMatrix diag;
    diag.k = 3;
    diag.counts = {4, 0, 0, 0, 2, 0, 0, 0, 7};
    NormalizedRows nd = row_normalize(diag);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            CHECK(nd.fractions[static_cast<std::size_t>(i * 3 + j)] ==
                  doctest::Approx(i == j ? 1.0 : 0.0));
        }
    }
}

TEST_CASE("row-normalized diagonal equals per-class recall") {
    Rng rng(4);
    std::vector<int> truth, pred;
    for (int i = 0; i < 200; ++i) {
        truth.push_back(static_cast<int>(rng.uniform_int(4)));
        pred.push_back(static_cast<int>(rng.uniform_int(4)));
    }
    ConfusionMatrix cm = confusion(truth, pred, 4);
    NormalizedRows nr = row_normalize(cm);
    for (int c = 0; c < 4; ++c) {
        std::int64_t pos = 0;
        for (int j = 0; j < 4; ++j) pos += cm.at(c, j);
        if (pos == 0) continue;
        const double recall = static_cast<double>(cm.at(c, c)) / static_cast<double>(pos);
        CHECK(nr.fractions[static_cast<std::size_t>(c * 4 + c)] == doctest::Approx(recall));
    }
}

TEST_CASE("macro F1 spec case [[2,1],[0,3]]") {
    // true class 0: 2 correct, 1 predicted as 1; true class 1: 3 correct
    const std::vector<int> truth{0, 0, 0, 1, 1, 1};
    const std::vector<int> pred{0, 0, 1, 1, 1, 1};
    const double f1 = macro_f1(truth, pred, 2);
    CHECK(f1 == doctest::Approx(0.828571).epsilon(1e-6));
    const auto per = per_class_f1(confusion(truth, pred, 2));
    CHECK(per[0] == doctest::Approx(0.8));
    CHECK(per[1] == doctest::Approx(6.0 / 7.0));
}

TEST_CASE("macro F1 is 1 on perfect predictions and 0.5 on label-independent ones") {
    std::vector<int> truth, pred;
    for (int i = 0; i < 50; ++i) {
        truth.push_back(i % 3);
        pred.push_back(i % 3);
    }
    CHECK(macro_f1(truth, pred, 3) == doctest::Approx(1.0));

    // balanced 2-class labels, predictions alternating independently of them
    truth.clear();
    pred.clear();
    for (int i = 0; i < 400; ++i) {
        truth.push_back((i / 2) % 2); // 0,0,1,1,...
        pred.push_back(i % 2);        // 0,1,0,1,...
    }
    CHECK(macro_f1(truth, pred, 2) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("macro F1 matches brute force on exhaustive small 2-class sets") {
    // every (true, pred) multiset with <= 6 records: 4 cell counts summing to <= 6
    int cases = 0;
    for (int n00 = 0; n00 <= 6; ++n00)
        for (int n01 = 0; n01 + n00 <= 6; ++n01)
            for (int n10 = 0; n10 + n01 + n00 <= 6; ++n10)
                for (int n11 = 0; n11 + n10 + n01 + n00 <= 6; ++n11) {
                    if (n00 + n01 + n10 + n11 == 0) continue;
                    std::vector<int> truth, pred;
                    auto emit = [&](int t, int p, int count) {
                        for (int i = 0; i < count; ++i) {
                            truth.push_back(t);
                            pred.push_back(p);
                        }
                    };
                    emit(0, 0, n00);
                    emit(0, 1, n01);
                    emit(1, 0, n10);
                    emit(1, 1, n11);
                    const double got = macro_f1(truth, pred, 2);
                    const double want = brute_macro_f1(truth, pred, 2);
                    CHECK(got == doctest::Approx(want).epsilon(1e-12));
                    ++cases;
                }
    CHECK(cases == 209); // C(10,4)-1 nonempty cell assignments
}

TEST_CASE("macro F1 invariant under simultaneous class permutation") {
    Rng rng(77);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<int> truth, pred;
        for (int i = 0; i < 60; ++i) {
            truth.push_back(static_cast<int>(rng.uniform_int(5)));
            pred.push_back(static_cast<int>(rng.uniform_int(5)));
        }
        std::vector<int> perm{0, 1, 2, 3, 4};
        for (std::size_t i = perm.size(); i > 1; --i) {
            std::swap(perm[i - 1], perm[static_cast<std::size_t>(rng.uniform_int(
                                       static_cast<std::int64_t>(i)))]);
        }
        std::vector<int> pt, pp;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            pt.push_back(perm[static_cast<std::size_t>(truth[i])]);
            pp.push_back(perm[static_cast<std::size_t>(pred[i])]);
        }
        CHECK(macro_f1(truth, pred, 5) == doctest::Approx(macro_f1(pt, pp, 5)).epsilon(1e-12));
    }
}
