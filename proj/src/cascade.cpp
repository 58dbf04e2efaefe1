#include "dkn/cascade.hpp"

#include <algorithm>
#include <map>

#include "dkn/parallel.hpp"

namespace dkn {

namespace {

constexpr int kSvChunk = 4096;   // support-vector columns per forward block
constexpr long kEvalChunk = 256;  // patterns per parallel work item

// Stage score of one pattern, the single arithmetic path shared by scalar,
// batched and threaded evaluation.
double score_one(const KernelBank& bank, const Mat& store, const Stage& stage,
                 const Mat& X, int col) {
    const int nsv = static_cast<int>(stage.sv_store.size());
    double acc = 0.0;
    if (nsv > 0) {
        std::vector<int> ai(std::min(nsv, kSvChunk), col);
        Mat base(bank.num_chunks, std::min(nsv, kSvChunk));
        RowVec out;
        for (int start = 0; start < nsv; start += kSvChunk) {
            int count = std::min(kSvChunk, nsv - start);
            base_kernel_columns(bank, X, ai.data(), store, stage.sv_store.data() + start,
                                count, base.leftCols(count));
            forward_block(stage.net, base.leftCols(count), out, nullptr);
            for (int k = 0; k < count; ++k) acc += stage.sv_coeff[start + k] * out[k];
        }
    }
    return acc + stage.bias;
}

EvalOutcome evaluate_one(const Cascade& cascade, const Mat& X, int col) {
    EvalOutcome outcome;
    const int T = static_cast<int>(cascade.stages.size());
    for (int t = 0; t < T; ++t) {
        const Stage& stage = cascade.stages[t];
        double score = score_one(cascade.bank, cascade.store, stage, X, col);
        outcome.scores.push_back(score);
        outcome.stages_consumed = t + 1;
        outcome.kernel_evals += static_cast<long>(stage.sv_store.size());
        outcome.mac_cost += stage_cost(stage);
        if (!(score > stage.threshold)) {
            outcome.label = -1;
            return outcome;
        }
    }
    outcome.label = 1;
    return outcome;
}

}  // namespace

Architecture f_architecture(int n1, int units, int layers) {
    if (n1 <= 0) throw InvalidInput("n1 must be positive");
    if (layers < 2) throw InvalidInput("f network needs at least 2 layers");
    if (units <= 0) units = std::max(64, n1);
    std::vector<int> sizes;
    sizes.push_back(n1);
    for (int i = 0; i < layers - 1; ++i) sizes.push_back(units);
    sizes.push_back(1);
    return Architecture(sizes);
}

std::vector<StageSpec> default_stage_specs(int n1, const Architecture& f_arch,
                                           const DistillConfig& g_config) {
    auto arch = [n1](int hidden_layers, int units) {
        std::vector<int> sizes;
        sizes.push_back(n1);
        for (int i = 0; i < hidden_layers; ++i) sizes.push_back(units);
        sizes.push_back(1);
        return Architecture(sizes);
    };
    std::vector<StageSpec> specs;
    specs.push_back({arch(3, 2), g_config});   // 4 layers, 2 units
    specs.push_back({arch(3, 8), g_config});   // same, 8 units
    specs.push_back({arch(5, 8), g_config});   // 6 layers
    specs.push_back({arch(5, 32), g_config});  // 32 units
    specs.push_back({arch(5, 64), g_config});  // 64 units
    specs.push_back({f_arch, g_config});       // the pretrained teacher itself
    return specs;
}

Cascade build(const TrainingState& f_state, const Mat& train_samples,
              const KernelBank& bank, const std::vector<StageSpec>& specs,
              const Mat* val_samples) {
    if (specs.empty()) throw InvalidInput("cascade needs at least one stage spec");
    if (specs.back().arch.layer_sizes != f_state.network.arch.layer_sizes)
        throw InvalidInput("final stage spec must match the teacher architecture");

    const int T = static_cast<int>(specs.size());
    const Vec& teacher = f_state.train_scores;
    if (teacher.size() != train_samples.cols())
        throw InvalidInput("teacher scores must cover the training samples");

    // teacher scores on the validation set, for per-stage logging
    Vec val_teacher;
    bool have_val = val_samples && val_samples->cols() > 0;
    if (have_val) {
        std::vector<int> val_idx(val_samples->cols());
        for (std::size_t k = 0; k < val_idx.size(); ++k) val_idx[k] = static_cast<int>(k);
        Mat cross = kernel_block(f_state.network, bank, *val_samples, val_idx,
                                 train_samples, f_state.svm.support);
        val_teacher.resize(cross.rows());
        for (long r = 0; r < cross.rows(); ++r) {
            double acc = 0.0;
            for (long k = 0; k < cross.cols(); ++k) {
                int t = f_state.svm.support[k];
                acc += f_state.svm.alphas[t] * f_state.svm.labels[t] * cross(r, k);
            }
            val_teacher[r] = acc + f_state.svm.bias;
        }
    }

    std::vector<TrainingState> trained;
    trained.reserve(T);
    for (int t = 0; t + 1 < T; ++t) {
        try {
            trained.push_back(train_g(train_samples, teacher, specs[t].arch, bank,
                                      specs[t].config, have_val ? val_samples : nullptr,
                                      have_val ? &val_teacher : nullptr));
        } catch (const std::exception& e) {
            throw std::runtime_error("stage " + std::to_string(t + 1) + ": " + e.what());
        }
    }

    // shared store: union of every stage's support vectors
    std::vector<int> used;
    auto collect = [&used](const SvmModel& svm) {
        used.insert(used.end(), svm.support.begin(), svm.support.end());
    };
    for (const auto& st : trained) collect(st.svm);
    collect(f_state.svm);
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    std::map<int, int> remap;
    for (std::size_t k = 0; k < used.size(); ++k) remap[used[k]] = static_cast<int>(k);

    Cascade cascade;
    cascade.bank = bank;
    cascade.store.resize(train_samples.rows(), used.size());
    for (std::size_t k = 0; k < used.size(); ++k)
        cascade.store.col(k) = train_samples.col(used[k]);

    auto to_stage = [&remap](const KernelNetwork& net, const SvmModel& svm) {
        Stage stage;
        stage.net = net;
        stage.bias = svm.bias;
        stage.sv_store.reserve(svm.support.size());
        stage.sv_coeff.resize(svm.support.size());
        for (std::size_t k = 0; k < svm.support.size(); ++k) {
            int orig = svm.support[k];
            stage.sv_store.push_back(remap.at(orig));
            stage.sv_coeff[k] = svm.alphas[orig] * svm.labels[orig];
        }
        return stage;
    };
    for (const auto& st : trained) cascade.stages.push_back(to_stage(st.network, st.svm));
    cascade.stages.push_back(to_stage(f_state.network, f_state.svm));
    return cascade;
}

double stage_score(const Cascade& cascade, int t, const Vec& x) {
    Mat one = x;
    return score_one(cascade.bank, cascade.store, cascade.stages.at(t), one, 0);
}

Vec stage_scores(const Cascade& cascade, int t, const Mat& X, int threads) {
    const Stage& stage = cascade.stages.at(t);
    Vec scores(X.cols());
    parallel_chunks(X.cols(), kEvalChunk, threads, [&](long begin, long end) {
        for (long p = begin; p < end; ++p)
            scores[p] = score_one(cascade.bank, cascade.store, stage, X, static_cast<int>(p));
    });
    return scores;
}

EvalOutcome evaluate(const Cascade& cascade, const Vec& x) {
    Mat one = x;
    return evaluate_one(cascade, one, 0);
}

std::vector<EvalOutcome> evaluate_all(const Cascade& cascade, const Mat& X, int threads) {
    std::vector<EvalOutcome> outcomes(X.cols());
    parallel_chunks(X.cols(), kEvalChunk, threads, [&](long begin, long end) {
        for (long p = begin; p < end; ++p)
            outcomes[p] = evaluate_one(cascade, X, static_cast<int>(p));
    });
    return outcomes;
}

long stage_cost(const Stage& stage) {
    return static_cast<long>(stage.sv_store.size()) * stage.mac_per_kernel();
}

}  // namespace dkn
