#include <doctest.h>

#include <cmath>

#include "dkn/distill.hpp"
#include "dkn/metrics.hpp"
#include "dkn/rng.hpp"

using namespace dkn;

TEST_CASE("detection rates from predictions") {
    SUBCASE("perfect predictor") {
        std::vector<int> truth{1, 1, -1, -1};
        Rates r = detection_metrics(truth, truth);
        CHECK(*r.dr == 100.0);
        CHECK(*r.fa == 0.0);
    }
    SUBCASE("constant positive predictor") {
        std::vector<int> truth{1, -1, -1, -1};
        std::vector<int> pred(4, 1);
        Rates r = detection_metrics(pred, truth);
        CHECK(*r.dr == 100.0);
        CHECK(*r.fa == 100.0);
    }
    SUBCASE("typical counts") {
        // TP=97 FN=3 FP=4 TN=96
        std::vector<int> truth, pred;
        auto add = [&](int t, int p, int n) {
            for (int i = 0; i < n; ++i) {
                truth.push_back(t);
                pred.push_back(p);
            }
        };
        add(1, 1, 97);
        add(1, -1, 3);
        add(-1, 1, 4);
        add(-1, -1, 96);
        Rates r = detection_metrics(pred, truth);
        CHECK(*r.dr == doctest::Approx(97.0).epsilon(1e-12));
        CHECK(*r.fa == doctest::Approx(4.0).epsilon(1e-12));
    }
    SUBCASE("single-class ground truth is flagged, not zeroed") {
        std::vector<int> truth{1, 1};
        std::vector<int> pred{1, -1};
        Rates r = detection_metrics(pred, truth);
        CHECK(r.dr.has_value());
        CHECK(!r.fa.has_value());
    }
}

TEST_CASE("equal error rate arithmetic") {
    CHECK(std::abs(eer(97.14, 4.44) - 3.65) < 1e-9);
    CHECK(std::abs(eer(97.55, 43.56) - 23.005) < 1e-9);
    CHECK(eer(100.0, 0.0) == 0.0);

    // symmetry under (dr, fa) -> (100-fa, 100-dr)
    Rng rng(2020);
    for (int i = 0; i < 50; ++i) {
        double dr = 100.0 * rng.uniform();
        double fa = 100.0 * rng.uniform();
        CHECK(eer(dr, fa) == doctest::Approx(eer(100.0 - fa, 100.0 - dr)).epsilon(1e-12));
    }
}

TEST_CASE("conservation metrics") {
    std::vector<int> f{1, 1, -1, -1, -1};
    SUBCASE("a clone of the teacher conserves everything") {
        Rates r = conservation_metrics(f, f);
        CHECK(*r.dr == 100.0);
        CHECK(*r.fa == 0.0);
    }
    SUBCASE("the constant accepter has full relative false alarms") {
        std::vector<int> g(5, 1);
        Rates r = conservation_metrics(g, f);
        CHECK(*r.dr == 100.0);
        CHECK(*r.fa == 100.0);
    }
    SUBCASE("equivalently: detection against the teacher's pseudo labels") {
        Vec scores(5);
        scores << 0.4, 2.0, -0.7, 0.0, -3.0;
        std::vector<int> g{1, -1, 1, -1, 1};
        Rates a = conservation_metrics(g, pseudo_labels(scores));
        Rates b = detection_metrics(g, pseudo_labels(scores));
        CHECK(*a.dr == *b.dr);
        CHECK(*a.fa == *b.fa);
    }
}

TEST_CASE("metrics are permutation invariant") {
    Rng rng(88);
    std::vector<int> truth, pred;
    for (int i = 0; i < 200; ++i) {
        truth.push_back(rng.uniform() < 0.3 ? 1 : -1);
        pred.push_back(rng.uniform() < 0.5 ? 1 : -1);
    }
    Rates before = detection_metrics(pred, truth);
    std::vector<int> idx(200);
    for (int i = 0; i < 200; ++i) idx[i] = i;
    rng.shuffle(idx);
    std::vector<int> t2, p2;
    for (int i : idx) {
        t2.push_back(truth[i]);
        p2.push_back(pred[i]);
    }
    Rates after = detection_metrics(p2, t2);
    CHECK(*before.dr == *after.dr);
    CHECK(*before.fa == *after.fa);
}
