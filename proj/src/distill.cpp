#include "dkn/distill.hpp"

#include <cmath>
#include <limits>

#include "dkn/metrics.hpp"
#include "dkn/rng.hpp"

namespace dkn {

namespace {

constexpr int kPairChunk = 4096;

// logistic sigma(z) without overflow on either tail
inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

// sigma(z) * sigma(-z), the derivative factor
inline double sigmoid_pair(double z) {
    double e = std::exp(-std::abs(z));
    double d = 1.0 + e;
    return e / (d * d);
}

// dJ/dg per sample
Vec score_gradients(const Vec& g_scores, const std::vector<int>& pseudo, double beta_plus,
                    double beta_minus, double gamma) {
    Vec s(g_scores.size());
    for (long i = 0; i < g_scores.size(); ++i) {
        double factor = gamma * sigmoid_pair(gamma * g_scores[i]);
        s[i] = pseudo[i] > 0 ? -beta_plus * factor : beta_minus * factor;
    }
    return s;
}

void require_both_classes(const std::vector<int>& labels, const char* what) {
    bool pos = false, neg = false;
    for (int y : labels) (y > 0 ? pos : neg) = true;
    if (!pos || !neg) throw InvalidInput(std::string(what) + ": both classes must be present");
}

}  // namespace

std::vector<int> pseudo_labels(const Vec& f_scores) {
    std::vector<int> labels(f_scores.size());
    for (long i = 0; i < f_scores.size(); ++i) labels[i] = f_scores[i] > 0.0 ? 1 : -1;
    return labels;
}

std::pair<double, double> betas_for_f(const std::vector<int>& labels) {
    long pos = 0, neg = 0;
    for (int y : labels) (y > 0 ? pos : neg)++;
    if (pos == 0 || neg == 0) throw InvalidInput("betas_for_f: both classes must be present");
    return {1.0 / pos, 1.0 / neg};
}

std::pair<double, double> betas_for_g(const Vec& f_scores) {
    long pos = 0, neg = 0;
    for (long i = 0; i < f_scores.size(); ++i) (f_scores[i] > 0.0 ? pos : neg)++;
    if (pos == 0 || neg == 0)
        throw InvalidInput("betas_for_g: both pseudo-classes must be present");
    return {0.99 / pos, 0.01 / neg};
}

double loss(const Vec& g_scores, const std::vector<int>& pseudo, const DistillConfig& cfg) {
    if (g_scores.size() != static_cast<long>(pseudo.size()))
        throw InvalidInput("score and label lengths differ");
    if (cfg.beta_plus < 0.0 || cfg.beta_minus < 0.0)
        throw InvalidInput("loss requires resolved betas");
    double acc = 0.0;
    for (long i = 0; i < g_scores.size(); ++i) {
        double z = cfg.gamma * g_scores[i];
        acc += pseudo[i] > 0 ? cfg.beta_plus * sigmoid(-z) : cfg.beta_minus * sigmoid(z);
    }
    return acc;
}

Mat loss_gradient_wrt_gram(const Vec& g_scores, const std::vector<int>& pseudo,
                           const SvmModel& svm, const DistillConfig& cfg) {
    const long l = g_scores.size();
    if (l != static_cast<long>(pseudo.size()) || l != svm.alphas.size())
        throw InvalidInput("score, label and model sizes differ");
    Vec s = score_gradients(g_scores, pseudo, cfg.beta_plus, cfg.beta_minus, cfg.gamma);
    Vec ay(l);
    for (long i = 0; i < l; ++i) ay[i] = svm.alphas[i] * svm.labels[i];
    Mat grad(l, l);
    for (long i = 0; i < l; ++i) {
        for (long j = 0; j < l; ++j) {
            grad(i, j) = (i == j) ? s[i] * ay[i] : s[i] * ay[j] + s[j] * ay[i];
        }
    }
    return grad;
}

double adapt_step(double step, const std::vector<double>& objective_history, double decay) {
    const std::size_t n = objective_history.size();
    if (n < 3) return step;
    double d_now = std::abs(objective_history[n - 1] - objective_history[n - 2]);
    double d_prev = std::abs(objective_history[n - 2] - objective_history[n - 3]);
    return d_now > d_prev ? step * decay : step / decay;
}

TrainingState train_with_labels(const Mat& samples, const std::vector<int>& labels,
                                const Architecture& arch, const KernelBank& bank,
                                DistillConfig cfg, const Mat* val_samples,
                                const std::vector<int>* val_labels) {
    cfg.validate();
    if (cfg.beta_plus < 0.0 || cfg.beta_minus < 0.0)
        throw InvalidInput("train_with_labels requires resolved betas");
    const int l = static_cast<int>(samples.cols());
    if (l == 0 || static_cast<int>(labels.size()) != l)
        throw InvalidInput("sample/label count mismatch");
    require_both_classes(labels, "train");

    TrainingState state;
    state.network = init_flat(arch);
    state.step = cfg.initial_step;

    // static partition of sample indices; pair (i,j), i<=j, belongs to the
    // batch of index i
    std::vector<int> batch_of(l);
    {
        std::vector<int> perm(l);
        for (int i = 0; i < l; ++i) perm[i] = i;
        Rng rng(mix_seed(cfg.seed, 0x6261746368ull));
        rng.shuffle(perm);
        for (int t = 0; t < l; ++t) batch_of[perm[t]] = t % cfg.num_batches;
    }

    std::vector<int> ai(kPairChunk), bi(kPairChunk);
    Mat base(bank.num_chunks, kPairChunk);
    RowVec coef(kPairChunk), out;
    BlockTrace trace;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        Mat gram = gram_matrix(state.network, bank, samples);
        SvmModel svm = solve_dual({gram, labels, cfg.svm_c}, cfg.svm_tol, cfg.svm_max_passes);
        Vec scores = decision_scores(svm, gram);
        double objective = loss(scores, labels, cfg);
        if (!std::isfinite(objective)) throw TrainingDiverged(epoch, objective);
        state.objective_history.push_back(objective);

        Vec s = score_gradients(scores, labels, cfg.beta_plus, cfg.beta_minus, cfg.gamma);
        Vec ay(l);
        for (int i = 0; i < l; ++i) ay[i] = svm.alphas[i] * svm.labels[i];

        // the SVM (and hence dJ/dK and all traces) is frozen at epoch start;
        // batches sweep the pair set against that snapshot
        KernelNetwork snapshot = state.network;
        for (int b = 0; b < cfg.num_batches; ++b) {
            std::vector<Mat> grads = zero_gradients(snapshot);
            int count = 0;
            bool any = false;
            auto flush = [&]() {
                if (count == 0) return;
                base_kernel_columns(bank, samples, ai.data(), samples, bi.data(), count,
                                    base.leftCols(count));
                forward_block(snapshot, base.leftCols(count), out, &trace);
                accumulate_gradients_block(snapshot, trace, coef.head(count), grads);
                count = 0;
            };
            for (int i = 0; i < l; ++i) {
                if (batch_of[i] != b) continue;
                for (int j = i; j < l; ++j) {
                    double c = (i == j) ? s[i] * ay[i] : s[i] * ay[j] + s[j] * ay[i];
                    if (c == 0.0) continue;  // exact zeros contribute nothing
                    ai[count] = i;
                    bi[count] = j;
                    coef[count] = c;
                    ++count;
                    any = true;
                    if (count == kPairChunk) flush();
                }
            }
            flush();
            if (!any) continue;
            for (std::size_t m = 0; m < grads.size(); ++m)
                state.network.wt[m].noalias() -= state.step * grads[m];
        }

        EpochLog entry{};
        entry.epoch = epoch;
        entry.objective = objective;
        entry.step = state.step;  // step used for this epoch's update
        entry.train_eer = eer_of_scores(scores, labels);
        entry.val_eer = std::numeric_limits<double>::quiet_NaN();
        if (val_samples && val_labels && val_samples->cols() > 0) {
            std::vector<int> val_idx(val_samples->cols());
            for (std::size_t k = 0; k < val_idx.size(); ++k) val_idx[k] = static_cast<int>(k);
            Mat cross = kernel_block(snapshot, bank, *val_samples, val_idx, samples,
                                     svm.support);
            Vec val_scores(cross.rows());
            for (long r = 0; r < cross.rows(); ++r) {
                double acc = 0.0;
                for (long k = 0; k < cross.cols(); ++k) {
                    int t = svm.support[k];
                    acc += svm.alphas[t] * svm.labels[t] * cross(r, k);
                }
                val_scores[r] = acc + svm.bias;
            }
            entry.val_eer = eer_of_scores(val_scores, *val_labels);
        }
        state.log.push_back(entry);

        state.step = adapt_step(state.step, state.objective_history, cfg.step_decay);

        const int w = cfg.converge_window;
        if (static_cast<int>(state.objective_history.size()) > w) {
            double now = state.objective_history.back();
            double then = state.objective_history[state.objective_history.size() - 1 - w];
            if (std::abs(now - then) / std::max(std::abs(then), 1e-300) < cfg.converge_rel)
                break;
        }
    }

    // final SVM consistent with the final weights
    Mat gram = gram_matrix(state.network, bank, samples);
    state.svm = solve_dual({gram, labels, cfg.svm_c}, cfg.svm_tol, cfg.svm_max_passes);
    state.train_scores = decision_scores(state.svm, gram);
    return state;
}

TrainingState train_f(const Mat& samples, const std::vector<int>& labels,
                      const Architecture& arch, const KernelBank& bank, DistillConfig cfg,
                      const Mat* val_samples, const std::vector<int>* val_labels) {
    if (cfg.beta_plus < 0.0 || cfg.beta_minus < 0.0) {
        auto [bp, bm] = betas_for_f(labels);
        cfg.beta_plus = bp;
        cfg.beta_minus = bm;
    }
    return train_with_labels(samples, labels, arch, bank, cfg, val_samples, val_labels);
}

TrainingState train_g(const Mat& samples, const Vec& teacher_scores,
                      const Architecture& arch, const KernelBank& bank, DistillConfig cfg,
                      const Mat* val_samples, const Vec* val_teacher_scores) {
    std::vector<int> labels = pseudo_labels(teacher_scores);
    if (cfg.beta_plus < 0.0 || cfg.beta_minus < 0.0) {
        auto [bp, bm] = betas_for_g(teacher_scores);
        cfg.beta_plus = bp;
        cfg.beta_minus = bm;
    }
    std::vector<int> val_labels;
    const std::vector<int>* val_ptr = nullptr;
    if (val_samples && val_teacher_scores) {
        val_labels = pseudo_labels(*val_teacher_scores);
        val_ptr = &val_labels;
    }
    return train_with_labels(samples, labels, arch, bank, cfg, val_samples, val_ptr);
}

}  // namespace dkn
