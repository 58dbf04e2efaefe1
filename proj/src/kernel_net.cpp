#include "dkn/kernel_net.hpp"

namespace dkn {

namespace {
constexpr int kGramChunk = 4096;  // pairs per block in the chunked Gram sweep
}

void KernelNetwork::validate() const {
    arch.validate();
    if (static_cast<int>(wt.size()) != arch.depth() - 1)
        throw InvalidInput("weight matrix count does not match architecture");
    for (int l = 0; l + 1 < arch.depth(); ++l) {
        if (wt[l].rows() != arch.layer_sizes[l + 1] || wt[l].cols() != arch.layer_sizes[l])
            throw InvalidInput("weight matrix shape mismatch at layer " + std::to_string(l));
        if (!wt[l].allFinite()) throw InvalidInput("non-finite weight at layer " + std::to_string(l));
    }
}

KernelNetwork init_flat(const Architecture& arch) {
    arch.validate();
    KernelNetwork net{arch, {}};
    net.wt.reserve(arch.depth() - 1);
    for (int l = 0; l + 1 < arch.depth(); ++l) {
        double w = 1.0 / arch.layer_sizes[l];
        net.wt.push_back(Mat::Constant(arch.layer_sizes[l + 1], arch.layer_sizes[l], w));
    }
    return net;
}

void forward_block(const KernelNetwork& net, const Eigen::Ref<const Mat>& base_cols,
                   RowVec& out, BlockTrace* trace) {
    const int layers = net.arch.depth();
    if (base_cols.rows() != net.arch.input_units())
        throw InvalidInput("base vector length does not match input layer");
    const int cols = static_cast<int>(base_cols.cols());
    out.resize(cols);

    if (trace) {
        trace->pre.assign(layers - 1, Mat());
        trace->act.assign(layers, Mat());
        trace->act[0] = base_cols;
    }

    Mat cur = base_cols;
    Mat next;
    for (int l = 0; l + 1 < layers; ++l) {
        next.resize(net.arch.layer_sizes[l + 1], cols);
        // One gemv per column: keeps per-pair results independent of how
        // pairs are grouped into blocks.
        for (int c = 0; c < cols; ++c) next.col(c).noalias() = net.wt[l] * cur.col(c);
        if (trace) trace->pre[l] = next;
        cur = next.cwiseMax(0.0);
        if (trace) trace->act[l + 1] = cur;
    }
    out = cur.row(0);
}

ForwardTrace forward(const KernelNetwork& net, const Vec& base) {
    RowVec out;
    BlockTrace block;
    Mat base_col = base;
    forward_block(net, base_col, out, &block);
    ForwardTrace t;
    t.pre.reserve(block.pre.size());
    t.act.reserve(block.act.size());
    for (const Mat& m : block.pre) t.pre.push_back(m.col(0));
    for (const Mat& m : block.act) t.act.push_back(m.col(0));
    t.output = out[0];
    return t;
}

std::vector<Mat> zero_gradients(const KernelNetwork& net) {
    std::vector<Mat> g;
    g.reserve(net.wt.size());
    for (const Mat& w : net.wt) g.push_back(Mat::Zero(w.rows(), w.cols()));
    return g;
}

std::vector<Mat> backward(const KernelNetwork& net, const ForwardTrace& trace,
                          double dJ_dkappa) {
    const int layers = net.arch.depth();
    if (static_cast<int>(trace.act.size()) != layers ||
        static_cast<int>(trace.pre.size()) != layers - 1)
        throw InvalidInput("trace does not match network depth");
    for (int l = 0; l < layers; ++l)
        if (trace.act[l].size() != net.arch.layer_sizes[l])
            throw InvalidInput("trace layer width mismatch");

    std::vector<Mat> grads = zero_gradients(net);
    Vec delta = Vec::Constant(1, dJ_dkappa);
    for (int l = layers - 2; l >= 0; --l) {
        // ReLU subgradient, 0 at exactly 0
        delta = delta.cwiseProduct((trace.pre[l].array() > 0.0).cast<double>().matrix());
        grads[l] = delta * trace.act[l].transpose();
        if (l > 0) delta = net.wt[l].transpose() * delta;
    }
    return grads;
}

void accumulate_gradients_block(const KernelNetwork& net, const BlockTrace& trace,
                                const Eigen::Ref<const RowVec>& dJ_dkappa,
                                std::vector<Mat>& grads) {
    const int layers = net.arch.depth();
    Mat delta = dJ_dkappa;
    for (int l = layers - 2; l >= 0; --l) {
        delta = delta.cwiseProduct((trace.pre[l].array() > 0.0).cast<double>().matrix());
        grads[l].noalias() += delta * trace.act[l].transpose();
        if (l > 0) delta = (net.wt[l].transpose() * delta).eval();
    }
}

Mat gram_matrix(const KernelNetwork& net, const KernelBank& bank, const Mat& samples) {
    const int n = static_cast<int>(samples.cols());
    if (n == 0) throw InvalidInput("empty sample list");
    if (samples.rows() != bank.dim()) throw InvalidInput("sample dimension mismatch");
    if (net.arch.input_units() != bank.num_chunks)
        throw InvalidInput("network input width must equal the number of base kernels");

    // enumerate unordered pairs (i <= j) in fixed row-major order
    const long total = static_cast<long>(n) * (n + 1) / 2;
    std::vector<int> ai(kGramChunk), bi(kGramChunk);
    Mat base(bank.num_chunks, kGramChunk);
    Mat gram(n, n);
    RowVec out;

    long done = 0;
    int i = 0, j = 0;
    while (done < total) {
        int count = static_cast<int>(std::min<long>(kGramChunk, total - done));
        for (int c = 0; c < count; ++c) {
            ai[c] = i;
            bi[c] = j;
            if (++j == n) j = ++i;
        }
        base_kernel_columns(bank, samples, ai.data(), samples, bi.data(), count,
                            base.leftCols(count));
        forward_block(net, base.leftCols(count), out, nullptr);
        for (int c = 0; c < count; ++c) {
            gram(ai[c], bi[c]) = out[c];
            gram(bi[c], ai[c]) = out[c];
        }
        done += count;
    }
    return gram;
}

Mat kernel_block(const KernelNetwork& net, const KernelBank& bank, const Mat& A,
                 const std::vector<int>& a_idx, const Mat& B,
                 const std::vector<int>& b_idx) {
    const long rows = static_cast<long>(a_idx.size());
    const long cols = static_cast<long>(b_idx.size());
    Mat block(rows, cols);
    if (rows == 0 || cols == 0) return block;

    const long total = rows * cols;
    std::vector<int> ai(kGramChunk), bi(kGramChunk);
    Mat base(bank.num_chunks, kGramChunk);
    RowVec out;
    long done = 0;
    while (done < total) {
        int count = static_cast<int>(std::min<long>(kGramChunk, total - done));
        for (int c = 0; c < count; ++c) {
            long flat = done + c;
            ai[c] = a_idx[flat / cols];
            bi[c] = b_idx[flat % cols];
        }
        base_kernel_columns(bank, A, ai.data(), B, bi.data(), count, base.leftCols(count));
        forward_block(net, base.leftCols(count), out, nullptr);
        for (int c = 0; c < count; ++c) {
            long flat = done + c;
            block(flat / cols, flat % cols) = out[c];
        }
        done += count;
    }
    return block;
}

}  // namespace dkn
