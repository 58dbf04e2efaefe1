#include <doctest.h>

#include <cmath>

#include "dkn/base_kernels.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace dkn;

TEST_CASE("bank construction validates the chunk layout") {
    CHECK_NOTHROW(make_bank(8, 2, Vec::Ones(2)));
    CHECK_THROWS_AS(make_bank(8, 3, Vec::Ones(3)), InvalidInput);
    CHECK_THROWS_AS(make_bank(8, 2, Vec::Zero(2)), InvalidInput);
    CHECK_THROWS_AS(make_bank(8, 2, Vec::Ones(3)), InvalidInput);
}

TEST_CASE("scale estimation on identical points falls back per chunk") {
    Mat x = Mat::Ones(4, 12);
    ScaleEstimate est = estimate_scales(x, 2, 3);
    CHECK(est.degenerate_chunks.size() == 2);
    CHECK(est.scales[0] == 1.0);
    CHECK(est.scales[1] == 1.0);
}

TEST_CASE("scale estimation: two points, one chunk, squared distance 4") {
    Mat x(1, 2);
    x << 0.0, 2.0;
    ScaleEstimate est = estimate_scales(x, 1, 1);
    CHECK(est.scales[0] == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(est.degenerate_chunks.empty());
}

TEST_CASE("scale estimation matches the exhaustive neighbor oracle") {
    Mat x = testutil::random_features(8, 100, 20240001);
    ScaleEstimate est = estimate_scales(x, 2, 5);
    Vec expect = oracle::brute_scales(x, 2, 5);
    for (int q = 0; q < 2; ++q)
        CHECK(std::abs(est.scales[q] - expect[q]) < 1e-12);
}

TEST_CASE("scale estimation rejects bad inputs") {
    Mat empty(4, 0);
    CHECK_THROWS_AS(estimate_scales(empty, 2, 1), InvalidInput);
    Mat two = testutil::random_features(4, 2, 1);
    CHECK_THROWS_AS(estimate_scales(two, 2, 5), InvalidInput);  // needs k+1 samples
}

TEST_CASE("base kernel vector basics") {
    KernelBank bank = testutil::unit_bank(8, 2);
    Mat x = testutil::random_features(8, 2, 77);

    SUBCASE("identical inputs give all ones") {
        Vec k = base_kernel_vector(bank, x.col(0), x.col(0));
        CHECK(k[0] == 1.0);
        CHECK(k[1] == 1.0);
    }
    SUBCASE("unit squared distance gives exp(-1)") {
        Vec a = Vec::Zero(2), b = Vec::Zero(2);
        b[0] = 1.0;  // squared distance 1 within the single chunk
        KernelBank one = testutil::unit_bank(2, 1);
        Vec k = base_kernel_vector(one, a, b);
        CHECK(k[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    }
    SUBCASE("dimension mismatch is rejected") {
        CHECK_THROWS_AS(base_kernel_vector(bank, Vec::Zero(4), Vec::Zero(8)), InvalidInput);
    }
}

TEST_CASE("base kernel vector matches a scalar recomputation") {
    Mat x = testutil::random_features(8, 6, 909);
    ScaleEstimate est = estimate_scales(x, 2, 2);
    KernelBank bank = make_bank(8, 2, est.scales);
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
            Vec got = base_kernel_vector(bank, x.col(i), x.col(j));
            Vec expect = oracle::scalar_base_kernel(x, x, i, j, bank.scales);
            for (int q = 0; q < 2; ++q) CHECK(std::abs(got[q] - expect[q]) < 1e-12);
        }
    }
}

TEST_CASE("base kernel properties: symmetry, bounds, monotonicity") {
    KernelBank bank = testutil::unit_bank(6, 3);
    Mat x = testutil::random_features(6, 20, 4242);
    for (int i = 0; i < 20; ++i) {
        for (int j = 0; j < 20; ++j) {
            Vec kij = base_kernel_vector(bank, x.col(i), x.col(j));
            Vec kji = base_kernel_vector(bank, x.col(j), x.col(i));
            for (int q = 0; q < 3; ++q) {
                CHECK(kij[q] == kji[q]);  // exact symmetry
                CHECK(kij[q] > 0.0);
                CHECK(kij[q] <= 1.0);
                bool chunks_equal =
                    (x.col(i).segment(q * 2, 2).array() == x.col(j).segment(q * 2, 2).array())
                        .all();
                CHECK((kij[q] == 1.0) == chunks_equal);
            }
        }
    }

    // strictly decreasing in the chunk distance
    KernelBank one = testutil::unit_bank(1, 1);
    Vec origin = Vec::Zero(1);
    double prev = 2.0;
    for (double t = 0.0; t < 3.0; t += 0.25) {
        Vec p(1);
        p[0] = t;
        double k = base_kernel_vector(one, origin, p)[0];
        CHECK(k < prev);
        prev = k;
    }
}
