#pragma once

#include <doctest.h>

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include "dkn/base_kernels.hpp"
#include "dkn/data.hpp"
#include "dkn/kernel_net.hpp"
#include "dkn/rng.hpp"
#include "dkn/types.hpp"

namespace testutil {

inline std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline dkn::Mat random_features(int d, int n, std::uint64_t seed) {
    dkn::Rng rng(seed);
    dkn::Mat x(d, n);
    for (int c = 0; c < n; ++c)
        for (int r = 0; r < d; ++r) x(r, c) = rng.normal();
    return x;
}

inline dkn::KernelNetwork random_network(const dkn::Architecture& arch, std::uint64_t seed,
                                         double scale = 0.7) {
    dkn::Rng rng(seed);
    dkn::KernelNetwork net = dkn::init_flat(arch);
    for (auto& w : net.wt)
        for (long c = 0; c < w.cols(); ++c)
            for (long r = 0; r < w.rows(); ++r) w(r, c) = scale * rng.normal();
    return net;
}

inline dkn::KernelBank unit_bank(int dim, int chunks) {
    return dkn::make_bank(dim, chunks, dkn::Vec::Ones(chunks));
}

}  // namespace testutil
