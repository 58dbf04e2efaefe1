#pragma once

#include <cstdint>
#include <vector>

#include "dkn/distill.hpp"
#include "dkn/kernel_net.hpp"
#include "dkn/types.hpp"

namespace dkn {

struct StageSpec {
    Architecture arch;
    DistillConfig config;
};

/// One trained stage. Support vectors are referenced by index into the
/// cascade's shared sample store; coeff[k] = alpha_k * label_k.
struct Stage {
    KernelNetwork net;
    double bias = 0.0;
    double threshold = 0.0;  // decision threshold, 0 unless tuned
    std::vector<int> sv_store;
    Vec sv_coeff;

    long mac_per_kernel() const { return net.arch.mac_count(); }
};

struct Cascade {
    KernelBank bank;
    Mat store;  // d x m referenced feature vectors
    std::vector<Stage> stages;
};

struct EvalOutcome {
    int label = -1;
    int stages_consumed = 0;
    long kernel_evals = 0;  // deep-kernel forwards spent (one per support vector)
    long mac_cost = 0;      // the same forwards weighted by per-network MACs
    std::vector<double> scores;
};

/// The six stage shapes used throughout: four 4-layer/2-unit style networks
/// of growing width and depth, then the f architecture itself.
std::vector<StageSpec> default_stage_specs(int n1, const Architecture& f_arch,
                                           const DistillConfig& g_config);

/// f architecture for a bank of n1 input kernels: `layers` total layers
/// (hidden plus output unit) of width `units`; units <= 0 picks
/// max(64, n1), which reproduces the reference shape at n1 = 128.
Architecture f_architecture(int n1, int units = 0, int layers = 8);

/// Distill every non-final spec against the teacher's training scores, then
/// append the teacher itself as the final stage.
Cascade build(const TrainingState& f_state, const Mat& train_samples,
              const KernelBank& bank, const std::vector<StageSpec>& specs,
              const Mat* val_samples = nullptr);

/// Score of stage t on one pattern (no short-circuit).
double stage_score(const Cascade& cascade, int t, const Vec& x);

/// Stage scores for many patterns, chunked; identical bits to stage_score.
Vec stage_scores(const Cascade& cascade, int t, const Mat& X, int threads = 1);

/// Short-circuit evaluation: stages applied in order, stop at the first
/// non-positive score.
EvalOutcome evaluate(const Cascade& cascade, const Vec& x);

/// Batched short-circuit evaluation over the columns of X. Outcomes are
/// bit-identical to per-pattern evaluate() for any thread count.
std::vector<EvalOutcome> evaluate_all(const Cascade& cascade, const Mat& X,
                                      int threads = 1);

/// Per-pattern cost of one full stage evaluation: support count times the
/// MAC count of one network forward.
long stage_cost(const Stage& stage);

}  // namespace dkn
