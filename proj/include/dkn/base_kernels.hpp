#pragma once

#include <vector>

#include "dkn/types.hpp"

namespace dkn {

/// Bank of per-chunk Gaussian input kernels. Feature vectors of dimension
/// num_chunks * chunk_size are sliced into disjoint chunks; kernel q is
/// exp(-||x_q - x'_q||^2 / scales[q]).
struct KernelBank {
    int num_chunks = 0;
    int chunk_size = 0;
    Vec scales;

    int dim() const { return num_chunks * chunk_size; }
};

KernelBank make_bank(int dim, int num_chunks, Vec scales);

struct ScaleEstimate {
    Vec scales;
    std::vector<int> degenerate_chunks;  // chunks that fell back to 1.0
};

/// Per-chunk bandwidths: sigma_q = mean over samples of the mean squared
/// chunk-q distance to each sample's k nearest neighbors, neighbors taken
/// in full feature space. `features` is d x n, one column per sample.
ScaleEstimate estimate_scales(const Mat& features, int num_chunks, int k_neighbors);

/// Layer-1 kernel vector for a pair of feature vectors; length num_chunks,
/// every component in (0, 1].
Vec base_kernel_vector(const KernelBank& bank, const Vec& x, const Vec& y);

/// Batched form: column c of `out` is base_kernel_vector(bank, A.col(ai[c]), B.col(bi[c])).
/// `out` must be preallocated to num_chunks x count.
void base_kernel_columns(const KernelBank& bank, const Mat& A, const int* ai, const Mat& B,
                         const int* bi, int count, Eigen::Ref<Mat> out);

}  // namespace dkn
