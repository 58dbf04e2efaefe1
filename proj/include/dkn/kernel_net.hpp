#pragma once

#include <vector>

#include "dkn/base_kernels.hpp"
#include "dkn/types.hpp"

namespace dkn {

/// Layered recombination of base kernel values with ReLU units. The single
/// output is used as an SVM kernel value.
///
/// Weights are stored output-major: wt[l](p, q) is the weight from unit q of
/// layer l+1 to unit p of layer l+2 (0-based l), i.e. the transpose of the
/// conventional fan-in x fan-out matrix. This keeps the forward pass a
/// column-major matrix-vector product.
struct KernelNetwork {
    Architecture arch;
    std::vector<Mat> wt;

    void validate() const;
};

/// Activations of one forward pass. act[0] is the base kernel vector; for
/// l >= 1, act[l] = max(0, pre[l-1]).
struct ForwardTrace {
    std::vector<Vec> pre;
    std::vector<Vec> act;
    double output = 0.0;
};

/// Batched counterpart, one column per evaluated pair.
struct BlockTrace {
    std::vector<Mat> pre;
    std::vector<Mat> act;
};

/// Every weight in layer l set to 1/n_l so the initial output is a nested
/// average of the base kernels.
KernelNetwork init_flat(const Architecture& arch);

ForwardTrace forward(const KernelNetwork& net, const Vec& base);

/// Forward over many base vectors at once; outputs go to `out` (length = cols
/// of base_cols). Per-column results are bit-identical to forward(). If
/// `trace` is non-null the full activations are kept for a backward pass.
void forward_block(const KernelNetwork& net, const Eigen::Ref<const Mat>& base_cols,
                   RowVec& out, BlockTrace* trace);

/// Gradients of a scalar objective w.r.t. every weight, via the chain rule.
/// ReLU subgradient at 0 is 0. Returned matrices mirror the wt layout.
std::vector<Mat> backward(const KernelNetwork& net, const ForwardTrace& trace,
                          double dJ_dkappa);

/// Accumulate sum_c dJ_dkappa[c] * dkappa_c/dw into `grads` (preallocated,
/// zeroed by the caller on first use). Uses dense matrix products; results
/// agree with per-pair backward() to rounding, not bitwise.
void accumulate_gradients_block(const KernelNetwork& net, const BlockTrace& trace,
                                const Eigen::Ref<const RowVec>& dJ_dkappa,
                                std::vector<Mat>& grads);

std::vector<Mat> zero_gradients(const KernelNetwork& net);

/// Gram matrix over samples (d x l, one column per sample): entry (i, j) is
/// the network output on the pair's base kernel vector. Exactly symmetric;
/// the diagonal is computed, not assumed.
Mat gram_matrix(const KernelNetwork& net, const KernelBank& bank, const Mat& samples);

/// Rectangular kernel block: entry (r, c) = kernel of (A.col(a_idx[r]),
/// B.col(b_idx[c])). Bitwise identical to the corresponding forward() calls.
Mat kernel_block(const KernelNetwork& net, const KernelBank& bank, const Mat& A,
                 const std::vector<int>& a_idx, const Mat& B,
                 const std::vector<int>& b_idx);

}  // namespace dkn
