#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dkn/kernel_net.hpp"
#include "dkn/svm.hpp"
#include "dkn/types.hpp"

namespace dkn {

struct DistillConfig {
    // class weights of the cross-entropy loss; negative means "derive from
    // the label source" (betas_for_f / betas_for_g)
    double beta_plus = -1.0;
    double beta_minus = -1.0;
    double gamma = 10.0;  // logistic steepness
    int max_epochs = 1000;
    int num_batches = 10;
    double initial_step = 0.1;
    double step_decay = 0.99;
    double svm_c = 1.0;
    double svm_tol = 1e-3;
    int svm_max_passes = 200;
    std::uint64_t seed = 0;
    double converge_rel = 1e-6;
    int converge_window = 20;

    void validate() const {
        if (!(gamma > 0.0)) throw InvalidInput("gamma must be positive");
        if (!(step_decay > 0.0 && step_decay < 1.0))
            throw InvalidInput("step_decay must lie in (0,1)");
        if (max_epochs < 0) throw InvalidInput("max_epochs must be nonnegative");
        if (num_batches <= 0) throw InvalidInput("num_batches must be positive");
        if (!(initial_step > 0.0)) throw InvalidInput("initial_step must be positive");
        if (!(svm_c > 0.0)) throw InvalidInput("svm_c must be positive");
    }
};

struct EpochLog {
    int epoch;
    double objective;
    double step;
    double train_eer;
    double val_eer;  // NaN when no validation set was supplied
};

struct TrainingState {
    KernelNetwork network;
    SvmModel svm;
    double step = 0.0;
    std::vector<double> objective_history;
    Vec train_scores;  // decision scores of the final model on its training set
    std::vector<EpochLog> log;
};

/// +1 where the teacher score is > 0, -1 where it is <= 0.
std::vector<int> pseudo_labels(const Vec& f_scores);

/// beta+ = 1/N+, beta- = 1/N- over true labels.
std::pair<double, double> betas_for_f(const std::vector<int>& labels);

/// beta+ = 0.99/|{f>0}|, beta- = 0.01/|{f<=0}|: the weighting that favors
/// keeping every teacher positive.
std::pair<double, double> betas_for_g(const Vec& f_scores);

/// Weighted logistic loss over classifier scores. Stable for |gamma*score|
/// up to 1e4 and beyond.
double loss(const Vec& g_scores, const std::vector<int>& pseudo, const DistillConfig& cfg);

/// dJ/dK as an l x l matrix: entry (i,j), i != j, is s_i a_j y_j + s_j a_i y_i
/// with s = dJ/dg; the diagonal is s_i a_i y_i.
Mat loss_gradient_wrt_gram(const Vec& g_scores, const std::vector<int>& pseudo,
                           const SvmModel& svm, const DistillConfig& cfg);

/// Step-size rule: compares the last two absolute objective changes; shrinks
/// by `decay` when the change accelerated, grows by 1/decay otherwise. The
/// first two epochs leave the step unchanged.
double adapt_step(double step, const std::vector<double>& objective_history, double decay);

/// Alternating optimization: Gram -> SVM -> loss gradient -> batched
/// backprop/SGD -> step adaptation, until max_epochs or the objective
/// plateaus. cfg betas must be resolved (>= 0). The returned state holds a
/// final SVM solved on the final weights.
TrainingState train_with_labels(const Mat& samples, const std::vector<int>& labels,
                                const Architecture& arch, const KernelBank& bank,
                                DistillConfig cfg, const Mat* val_samples = nullptr,
                                const std::vector<int>* val_labels = nullptr);

/// Teacher-free mode: true labels, betas_for_f when cfg leaves them negative.
TrainingState train_f(const Mat& samples, const std::vector<int>& labels,
                      const Architecture& arch, const KernelBank& bank, DistillConfig cfg,
                      const Mat* val_samples = nullptr,
                      const std::vector<int>* val_labels = nullptr);

/// Distillation mode: labels are the signs of the teacher scores, betas_for_g
/// when cfg leaves them negative.
TrainingState train_g(const Mat& samples, const Vec& teacher_scores,
                      const Architecture& arch, const KernelBank& bank, DistillConfig cfg,
                      const Mat* val_samples = nullptr,
                      const Vec* val_teacher_scores = nullptr);

}  // namespace dkn
