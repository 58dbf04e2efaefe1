#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "dkn/kernel_net.hpp"
#include "dkn/serialize.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace dkn;

TEST_CASE("architecture validation") {
    CHECK_THROWS_AS(Architecture({4}), InvalidInput);
    CHECK_THROWS_AS(Architecture({4, 2}), InvalidInput);   // final layer must be 1
    CHECK_THROWS_AS(Architecture({4, 0, 1}), InvalidInput);
    Architecture a({2, 2, 2, 1});
    CHECK(a.mac_count() == 10);
}

TEST_CASE("flat initialization is a nested average") {
    KernelNetwork net = init_flat(Architecture({2, 1}));
    CHECK(net.wt[0].rows() == 1);
    CHECK(net.wt[0].cols() == 2);
    CHECK(net.wt[0](0, 0) == 0.5);
    CHECK(net.wt[0](0, 1) == 0.5);

    // deep flat net: layer-1 weights are 1/128, all-ones input stays 1.0
    std::vector<int> sizes(7, 128);
    sizes.push_back(1);
    KernelNetwork deep = init_flat(Architecture(sizes));
    CHECK(deep.wt[0](17, 5) == doctest::Approx(1.0 / 128).epsilon(1e-15));
    ForwardTrace t = forward(deep, Vec::Ones(128));
    CHECK(t.output == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("forward basics") {
    SUBCASE("all-zero weights give zero output") {
        KernelNetwork net = init_flat(Architecture({3, 2, 1}));
        for (auto& w : net.wt) w.setZero();
        CHECK(forward(net, Vec::Ones(3)).output == 0.0);
    }
    SUBCASE("ReLU clamps a negative pre-activation") {
        KernelNetwork net = init_flat(Architecture({2, 1}));
        net.wt[0](0, 0) = 1.0;
        net.wt[0](0, 1) = -1.0;
        Vec base(2);
        base << 0.3, 0.8;
        ForwardTrace t = forward(net, base);
        CHECK(t.pre[0][0] == doctest::Approx(-0.5).epsilon(1e-15));
        CHECK(t.output == 0.0);
    }
    SUBCASE("length mismatch is rejected") {
        KernelNetwork net = init_flat(Architecture({3, 1}));
        RowVec out;
        CHECK_THROWS_AS(forward(net, Vec::Ones(4)), InvalidInput);
    }
}

TEST_CASE("forward matches a hand-rolled dense oracle") {
    Architecture arch({4, 3, 1});
    for (std::uint64_t seed : {11u, 12u, 13u, 14u}) {
        KernelNetwork net = testutil::random_network(arch, seed);
        Rng rng(seed + 1000);
        Vec base(4);
        for (int i = 0; i < 4; ++i) base[i] = std::abs(rng.normal());
        double expect = oracle::dense_forward(oracle::math_weights(net), base);
        CHECK(std::abs(forward(net, base).output - expect) < 1e-12);
    }
}

TEST_CASE("block forward is bit-identical to single-pair forward") {
    Architecture arch({4, 5, 3, 1});
    KernelNetwork net = testutil::random_network(arch, 99);
    Mat bases = testutil::random_features(4, 257, 100).cwiseAbs();
    RowVec out;
    forward_block(net, bases, out, nullptr);
    for (int c = 0; c < bases.cols(); ++c) {
        double single = forward(net, bases.col(c)).output;
        CHECK(out[c] == single);
    }
}

TEST_CASE("backward basics") {
    SUBCASE("zero upstream gradient gives zero weight gradients") {
        Architecture arch({4, 3, 1});
        KernelNetwork net = testutil::random_network(arch, 5);
        ForwardTrace t = forward(net, Vec::Ones(4) * 0.5);
        auto grads = backward(net, t, 0.0);
        for (const auto& g : grads) CHECK(g.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("single-edge chain rule") {
        KernelNetwork net = init_flat(Architecture({1, 1}));
        net.wt[0](0, 0) = 0.8;
        Vec base(1);
        base << 0.4;
        ForwardTrace t = forward(net, base);
        auto grads = backward(net, t, 2.5);
        CHECK(grads[0](0, 0) == doctest::Approx(2.5 * 0.4).epsilon(1e-15));
    }
}

TEST_CASE("backward matches central finite differences") {
    Architecture arch({4, 3, 1});
    int checked = 0;
    for (std::uint64_t seed : {21u, 22u, 23u, 24u, 25u}) {
        KernelNetwork net = testutil::random_network(arch, seed);
        Rng rng(seed + 2000);
        Vec base(4);
        for (int i = 0; i < 4; ++i) base[i] = std::abs(rng.normal());
        ForwardTrace t = forward(net, base);
        auto grads = backward(net, t, 1.7);
        auto fd = oracle::fd_weight_gradients(net, base, 1.7, 1e-6);
        for (std::size_t l = 0; l < grads.size(); ++l) {
            for (long r = 0; r < grads[l].rows(); ++r) {
                for (long c = 0; c < grads[l].cols(); ++c) {
                    double a = grads[l](r, c), b = fd[l](r, c);
                    double denom = std::max({std::abs(a), std::abs(b), 1e-8});
                    CHECK(std::abs(a - b) / denom < 1e-4);
                    ++checked;
                }
            }
        }
    }
    CHECK(checked > 50);
}

TEST_CASE("block gradient accumulation equals summed per-pair backward") {
    Architecture arch({3, 4, 1});
    KernelNetwork net = testutil::random_network(arch, 31);
    Mat bases = testutil::random_features(3, 40, 32).cwiseAbs();
    Rng rng(33);
    RowVec coefs(40);
    for (int i = 0; i < 40; ++i) coefs[i] = rng.normal();

    BlockTrace trace;
    RowVec out;
    forward_block(net, bases, out, &trace);
    std::vector<Mat> block = zero_gradients(net);
    accumulate_gradients_block(net, trace, coefs, block);

    std::vector<Mat> summed = zero_gradients(net);
    for (int i = 0; i < 40; ++i) {
        ForwardTrace t = forward(net, bases.col(i));
        auto g = backward(net, t, coefs[i]);
        for (std::size_t l = 0; l < g.size(); ++l) summed[l] += g[l];
    }
    for (std::size_t l = 0; l < block.size(); ++l) {
        double denom = std::max(1.0, summed[l].cwiseAbs().maxCoeff());
        CHECK((block[l] - summed[l]).cwiseAbs().maxCoeff() / denom < 1e-12);
    }
}

TEST_CASE("gram matrix") {
    KernelBank bank = testutil::unit_bank(8, 4);
    SUBCASE("a single sample yields its self-similarity") {
        Mat x = testutil::random_features(8, 1, 51);
        KernelNetwork net = init_flat(Architecture({4, 2, 1}));
        Mat gram = gram_matrix(net, bank, x);
        CHECK(gram.rows() == 1);
        CHECK(gram(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("flat-init diagonal is exactly the forward of an all-ones base") {
        Mat x = testutil::random_features(8, 5, 52);
        KernelNetwork net = init_flat(Architecture({4, 4, 1}));
        Mat gram = gram_matrix(net, bank, x);
        double self = forward(net, Vec::Ones(4)).output;
        for (int i = 0; i < 5; ++i) CHECK(gram(i, i) == self);
    }
    SUBCASE("entries equal entrywise recomputation via forward, exactly") {
        Mat x = testutil::random_features(8, 10, 53);
        KernelNetwork net = testutil::random_network(Architecture({4, 3, 1}), 54);
        Mat gram = gram_matrix(net, bank, x);
        for (int i = 0; i < 10; ++i) {
            for (int j = 0; j < 10; ++j) {
                double direct =
                    forward(net, base_kernel_vector(bank, x.col(i), x.col(j))).output;
                CHECK(gram(i, j) == direct);
                CHECK(gram(i, j) == gram(j, i));
                CHECK(gram(i, j) >= 0.0);
            }
        }
    }
    SUBCASE("empty sample list is rejected") {
        Mat empty(8, 0);
        KernelNetwork net = init_flat(Architecture({4, 1}));
        CHECK_THROWS_AS(gram_matrix(net, bank, empty), InvalidInput);
    }
}

TEST_CASE("network serialization round-trips bit-exactly") {
    Architecture arch({6, 5, 4, 1});
    KernelNetwork net = testutil::random_network(arch, 61);
    std::string path = "test_net.dknnet";
    save_network(net, path);
    KernelNetwork loaded = load_network(path);
    REQUIRE(loaded.arch.layer_sizes == net.arch.layer_sizes);
    for (std::size_t l = 0; l < net.wt.size(); ++l)
        CHECK((loaded.wt[l].array() == net.wt[l].array()).all());

    // second save produces identical bytes
    std::string path2 = "test_net2.dknnet";
    save_network(loaded, path2);
    CHECK(testutil::read_file_bytes(path) == testutil::read_file_bytes(path2));
    std::remove(path.c_str());
    std::remove(path2.c_str());
}

TEST_CASE("truncated network file reports the byte offset") {
    Architecture arch({3, 2, 1});
    KernelNetwork net = testutil::random_network(arch, 71);
    std::string path = "test_net_trunc.dknnet";
    save_network(net, path);
    ByteReader full = ByteReader::from_file(path);
    // rewrite only the first half of the file
    {
        ByteWriter w;
        write_network(net, w);
        std::vector<std::uint8_t> half(w.bytes().begin(),
                                       w.bytes().begin() + w.bytes().size() / 2);
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(half.data()),
                  static_cast<std::streamsize>(half.size()));
    }
    CHECK_THROWS_AS(load_network(path), ParseError);
    std::remove(path.c_str());
}
