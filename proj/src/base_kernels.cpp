#include "dkn/base_kernels.hpp"

#include <algorithm>
#include <cmath>

namespace dkn {

namespace {

// Single accumulation order shared by the scalar and batched entry points so
// the two produce bit-identical kernels.
inline double chunk_sq_dist(const double* x, const double* y, int len) {
    double acc = 0.0;
    for (int i = 0; i < len; ++i) {
        double d = x[i] - y[i];
        acc += d * d;
    }
    return acc;
}

}  // namespace

KernelBank make_bank(int dim, int num_chunks, Vec scales) {
    if (dim <= 0 || num_chunks <= 0) throw InvalidInput("bank dimensions must be positive");
    if (dim % num_chunks != 0)
        throw InvalidInput("num_chunks must divide the feature dimension exactly");
    if (scales.size() != num_chunks) throw InvalidInput("one scale per chunk required");
    for (int q = 0; q < num_chunks; ++q)
        if (!(scales[q] > 0.0)) throw InvalidInput("kernel scales must be positive");
    return KernelBank{num_chunks, dim / num_chunks, std::move(scales)};
}

ScaleEstimate estimate_scales(const Mat& features, int num_chunks, int k_neighbors) {
    const int n = static_cast<int>(features.cols());
    const int d = static_cast<int>(features.rows());
    if (n == 0) throw InvalidInput("empty dataset");
    if (k_neighbors <= 0) throw InvalidInput("k_neighbors must be positive");
    if (n < k_neighbors + 1) throw InvalidInput("dataset needs at least k_neighbors+1 samples");
    if (d % num_chunks != 0)
        throw InvalidInput("num_chunks must divide the feature dimension exactly");
    const int chunk = d / num_chunks;

    Vec acc = Vec::Zero(num_chunks);
    std::vector<std::pair<double, int>> dist;
    dist.reserve(n - 1);
    for (int i = 0; i < n; ++i) {
        dist.clear();
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            dist.emplace_back((features.col(j) - features.col(i)).squaredNorm(), j);
        }
        // ties broken by sample index for a deterministic neighbor set
        std::partial_sort(dist.begin(), dist.begin() + k_neighbors, dist.end());
        for (int k = 0; k < k_neighbors; ++k) {
            const double* xi = features.col(i).data();
            const double* xj = features.col(dist[k].second).data();
            for (int q = 0; q < num_chunks; ++q)
                acc[q] += chunk_sq_dist(xi + q * chunk, xj + q * chunk, chunk);
        }
    }
    ScaleEstimate est;
    est.scales = acc / (static_cast<double>(n) * k_neighbors);
    for (int q = 0; q < num_chunks; ++q) {
        if (!(est.scales[q] > 0.0)) {
            est.scales[q] = 1.0;
            est.degenerate_chunks.push_back(q);
        }
    }
    return est;
}

Vec base_kernel_vector(const KernelBank& bank, const Vec& x, const Vec& y) {
    if (x.size() != bank.dim() || y.size() != bank.dim())
        throw InvalidInput("feature dimension does not match bank layout");
    Vec out(bank.num_chunks);
    const int cs = bank.chunk_size;
    for (int q = 0; q < bank.num_chunks; ++q)
        out[q] = std::exp(-chunk_sq_dist(x.data() + q * cs, y.data() + q * cs, cs) /
                          bank.scales[q]);
    return out;
}

void base_kernel_columns(const KernelBank& bank, const Mat& A, const int* ai, const Mat& B,
                         const int* bi, int count, Eigen::Ref<Mat> out) {
    const int cs = bank.chunk_size;
    for (int c = 0; c < count; ++c) {
        const double* x = A.col(ai[c]).data();
        const double* y = B.col(bi[c]).data();
        for (int q = 0; q < bank.num_chunks; ++q)
            out(q, c) =
                std::exp(-chunk_sq_dist(x + q * cs, y + q * cs, cs) / bank.scales[q]);
    }
}

}  // namespace dkn
