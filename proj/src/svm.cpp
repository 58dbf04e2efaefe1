#include "dkn/svm.hpp"

#include <cmath>
#include <limits>

namespace dkn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_problem(const SvmProblem& p) {
    const auto l = p.gram.rows();
    if (p.gram.cols() != l) throw InvalidInput("gram matrix must be square");
    if (static_cast<long>(p.labels.size()) != l)
        throw InvalidInput("label count must match gram size");
    if (!(p.C > 0.0)) throw InvalidInput("C must be positive");
    for (int y : p.labels)
        if (y != 1 && y != -1) throw InvalidInput("labels must be -1 or +1");
    for (long i = 0; i < l; ++i)
        for (long j = i + 1; j < l; ++j)
            if (std::abs(p.gram(i, j) - p.gram(j, i)) > 1e-9)
                throw InvalidInput("gram matrix is not symmetric");
}

double dual_objective_of(const Vec& alpha, const SvmProblem& p) {
    const long l = alpha.size();
    double quad = 0.0;
    for (long i = 0; i < l; ++i) {
        if (alpha[i] == 0.0) continue;
        for (long j = 0; j < l; ++j) {
            if (alpha[j] == 0.0) continue;
            quad += alpha[i] * alpha[j] * p.labels[i] * p.labels[j] * p.gram(i, j);
        }
    }
    return alpha.sum() - 0.5 * quad;
}

}  // namespace

SvmModel solve_dual(const SvmProblem& problem, double tol, int max_passes,
                    const SmoStepObserver& observer) {
    validate_problem(problem);
    const int l = static_cast<int>(problem.gram.rows());
    const double C = problem.C;
    const Mat& K = problem.gram;
    const std::vector<int>& y = problem.labels;

    SvmModel model;
    model.labels = y;
    model.alphas = Vec::Zero(l);

    bool has_pos = false, has_neg = false;
    for (int t : y) (t > 0 ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) {
        // equality constraint pins alpha at zero; decision falls back to the bias
        model.degenerate = true;
        model.bias = has_pos ? 1.0 : -1.0;
        return model;
    }

    Vec alpha = Vec::Zero(l);
    Vec grad = Vec::Constant(l, -1.0);  // gradient of 1/2 a'Qa - e'a at a = 0
    const long max_iter = static_cast<long>(max_passes) * l;
    long iter = 0;
    bool converged = false;

    while (iter < max_iter) {
        // first index: maximal violation over I_up
        double gmax = -kInf;
        int i = -1;
        for (int t = 0; t < l; ++t) {
            double v = -y[t] * grad[t];
            bool in_up = (y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0);
            if (in_up && v > gmax) {
                gmax = v;
                i = t;
            }
        }
        // second index: best second-order gain among violating members of I_low
        double gmin = kInf;
        double best_gain = 0.0;
        int j = -1;
        for (int t = 0; t < l; ++t) {
            bool in_low = (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < C);
            if (!in_low) continue;
            double v = -y[t] * grad[t];
            if (v < gmin) gmin = v;
            double diff = gmax - v;
            if (diff <= 0.0) continue;
            double curv = K(i, i) + K(t, t) - 2.0 * y[i] * y[t] * K(i, t);
            if (curv <= 0.0) curv = 1e-12;
            double gain = diff * diff / curv;
            if (gain > best_gain) {
                best_gain = gain;
                j = t;
            }
        }
        if (i == -1 || gmax - gmin <= tol) {
            converged = true;
            break;
        }
        if (j == -1) break;  // violating pair exists but no feasible partner: stall

        // two-variable subproblem along the equality constraint,
        // parameterized by t = new alpha_j
        const double ai = alpha[i], aj = alpha[j];
        const double eta = K(i, i) + K(j, j) - 2.0 * K(i, j);
        double lo, hi;
        if (y[i] != y[j]) {
            lo = std::max(0.0, aj - ai);
            hi = std::min(C, C + aj - ai);
        } else {
            lo = std::max(0.0, ai + aj - C);
            hi = std::min(C, ai + aj);
        }
        double t_new;
        if (eta > 1e-12) {
            t_new = aj + y[j] * (y[i] * grad[i] - y[j] * grad[j]) / eta;
            t_new = std::min(hi, std::max(lo, t_new));
        } else {
            // flat or concave-free direction: the segment end with the larger
            // dual objective wins
            auto delta_obj = [&](double t) {
                double dj = t - aj;
                double di = (y[i] == y[j]) ? -dj : dj;
                return -di * grad[i] - dj * grad[j] -
                       0.5 * (di * di * K(i, i) + dj * dj * K(j, j) +
                              2.0 * di * dj * y[i] * y[j] * K(i, j));
            };
            t_new = (delta_obj(hi) > delta_obj(lo)) ? hi : lo;
        }
        double dj = t_new - aj;
        double di = (y[i] == y[j]) ? -dj : dj;
        if (di == 0.0 && dj == 0.0) break;  // no representable progress

        alpha[i] = ai + di;
        alpha[j] = t_new;
        // the pair moves along the constraint, so the equality holds exactly;
        // clip rounding dust off the box
        alpha[i] = std::min(C, std::max(0.0, alpha[i]));
        alpha[j] = std::min(C, std::max(0.0, alpha[j]));
        di = alpha[i] - ai;
        dj = alpha[j] - aj;

        for (int t = 0; t < l; ++t)
            grad[t] += y[t] * (y[i] * K(t, i) * di + y[j] * K(t, j) * dj);
        ++iter;
        if (observer) observer(dual_objective_of(alpha, problem));
    }

    model.alphas = alpha;
    model.converged = converged;
    model.iterations = iter;

    // bias: average over free support vectors, else midpoint of the KKT bounds
    double free_sum = 0.0;
    int free_count = 0;
    double blo = -kInf, bhi = kInf;
    for (int t = 0; t < l; ++t) {
        double v = -y[t] * grad[t];
        if (alpha[t] > 0.0 && alpha[t] < C) {
            free_sum += v;
            ++free_count;
        } else {
            bool in_up = (y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0);
            bool in_low = (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < C);
            if (in_up) blo = std::max(blo, v);
            if (in_low) bhi = std::min(bhi, v);
        }
    }
    if (free_count > 0)
        model.bias = free_sum / free_count;
    else
        model.bias = 0.5 * (blo + bhi);

    for (int t = 0; t < l; ++t)
        if (alpha[t] > 0.0) model.support.push_back(t);
    model.dual_objective = dual_objective_of(alpha, problem);
    return model;
}

double decision(const SvmModel& model, const Vec& kernel_row) {
    if (kernel_row.size() != model.alphas.size())
        throw InvalidInput("kernel row length must match training size");
    double s = 0.0;
    for (int t : model.support) s += model.alphas[t] * model.labels[t] * kernel_row[t];
    return s + model.bias;
}

Vec decision_scores(const SvmModel& model, const Mat& gram) {
    const long l = gram.rows();
    Vec scores(l);
    for (long r = 0; r < l; ++r) {
        double s = 0.0;
        for (int t : model.support) s += model.alphas[t] * model.labels[t] * gram(r, t);
        scores[r] = s + model.bias;
    }
    return scores;
}

std::vector<int> nonzero_support(const SvmModel& model) { return model.support; }

double kkt_violation(const SvmModel& model, const SvmProblem& problem) {
    const int l = static_cast<int>(problem.gram.rows());
    double worst = 0.0;
    for (int t = 0; t < l; ++t) {
        double s = 0.0;
        for (int u : model.support)
            s += model.alphas[u] * model.labels[u] * problem.gram(t, u);
        double margin = problem.labels[t] * (s + model.bias);
        double a = model.alphas[t];
        if (a <= 0.0)
            worst = std::max(worst, 1.0 - margin);  // need margin >= 1
        else if (a >= problem.C)
            worst = std::max(worst, margin - 1.0);  // need margin <= 1
        else
            worst = std::max(worst, std::abs(margin - 1.0));
    }
    return worst;
}

}  // namespace dkn
