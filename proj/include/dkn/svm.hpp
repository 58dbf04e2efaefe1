#pragma once

#include <functional>
#include <vector>

#include "dkn/types.hpp"

namespace dkn {

/// C-SVC dual problem over a precomputed (possibly indefinite) Gram matrix.
struct SvmProblem {
    const Mat& gram;               // l x l, symmetric to 1e-9
    const std::vector<int>& labels;  // entries in {-1,+1}
    double C = 1.0;
};

struct SvmModel {
    Vec alphas;
    double bias = 0.0;
    std::vector<int> labels;    // training labels the coefficients refer to
    std::vector<int> support;   // indices with alpha > 0, ascending
    bool converged = true;
    bool degenerate = false;    // single-class input, alpha = 0
    double dual_objective = 0.0;
    long iterations = 0;
};

/// Called after every accepted pair update with the current dual objective;
/// intended for tests that assert monotone ascent.
using SmoStepObserver = std::function<void(double)>;

/// SMO with maximal-violating-pair selection (second-order gain on the second
/// index). Terminates when every KKT condition holds within tol or after
/// max_passes * l pair updates. Non-positive-curvature subproblems are solved
/// by evaluating both feasible segment ends.
SvmModel solve_dual(const SvmProblem& problem, double tol, int max_passes,
                    const SmoStepObserver& observer = nullptr);

/// score = sum_i alpha_i y_i kernel_row[i] + bias. Predictions take
/// sign(score) with sign(0) = -1.
double decision(const SvmModel& model, const Vec& kernel_row);

/// Decision scores for every training sample, kernel rows taken from `gram`.
Vec decision_scores(const SvmModel& model, const Mat& gram);

std::vector<int> nonzero_support(const SvmModel& model);

/// Max KKT violation of `model` on its training problem; <= tol after a
/// converged solve.
double kkt_violation(const SvmModel& model, const SvmProblem& problem);

}  // namespace dkn
