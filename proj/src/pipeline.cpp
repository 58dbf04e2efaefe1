#include "dkn/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dkn/metrics.hpp"
#include "dkn/serialize.hpp"

namespace dkn {

namespace {

void ensure_dir(const std::string& dir) {
    std::filesystem::create_directories(dir);
}

std::string join(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

void echo_config(const RunConfig& cfg, const std::string& out_dir) {
    ensure_dir(out_dir);
    write_text(join(out_dir, "resolved_config.ini"), cfg.render());
}

std::string hex64(std::uint64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string pct(std::optional<double> v) {
    if (!v || !std::isfinite(*v)) return "-";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", *v);
    return buf;
}

std::string num(double v, const char* fmt = "%.2f") {
    if (!std::isfinite(v)) return "-";
    char buf[48];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

}  // namespace

LoadedData load_and_split(const RunConfig& cfg) {
    LoadedData out;
    out.dataset = load_pairs(cfg.data.path);
    if (out.dataset.dim() != cfg.data.dim)
        throw InvalidInput("dataset dimension " + std::to_string(out.dataset.dim()) +
                           " does not match config dim " + std::to_string(cfg.data.dim));
    SplitSpec spec;
    spec.labeled_count = cfg.split.labeled_count;
    spec.seed = cfg.split.seed;
    out.indices = split(out.dataset, spec);
    if (out.indices.test.empty())
        std::cerr << "warning: labeled_count covers the whole dataset, test set is empty\n";
    out.train_x = gather_columns(out.dataset.features, out.indices.train);
    out.val_x = gather_columns(out.dataset.features, out.indices.validation);
    out.test_x = gather_columns(out.dataset.features, out.indices.test);
    if (out.dataset.has_labels()) {
        out.train_y = gather_labels(out.dataset.labels, out.indices.train);
        out.val_y = gather_labels(out.dataset.labels, out.indices.validation);
        out.test_y = gather_labels(out.dataset.labels, out.indices.test);
    }
    return out;
}

KernelBank bank_from_config(const RunConfig& cfg, const Mat& train_x,
                            std::vector<int>* degenerate) {
    ScaleEstimate est = estimate_scales(train_x, cfg.bank.n1, cfg.bank.k_neighbors);
    if (degenerate) *degenerate = est.degenerate_chunks;
    for (int q : est.degenerate_chunks)
        std::cerr << "warning: degenerate chunk " << q << ", scale set to 1.0\n";
    return make_bank(static_cast<int>(train_x.rows()), cfg.bank.n1, est.scales);
}

Cascade f_artifact(const TrainingState& state, const Mat& train_x, const KernelBank& bank) {
    Cascade cascade;
    cascade.bank = bank;
    cascade.store = train_x;
    Stage stage;
    stage.net = state.network;
    stage.bias = state.svm.bias;
    stage.sv_store = state.svm.support;
    stage.sv_coeff.resize(state.svm.support.size());
    for (std::size_t k = 0; k < state.svm.support.size(); ++k) {
        int i = state.svm.support[k];
        stage.sv_coeff[k] = state.svm.alphas[i] * state.svm.labels[i];
    }
    cascade.stages.push_back(std::move(stage));
    return cascade;
}

TrainingState f_state_from_artifact(const Cascade& f_cascade, const Mat& train_x) {
    if (f_cascade.stages.size() != 1)
        throw InvalidInput("teacher artifact must contain exactly one stage");
    if (f_cascade.store.cols() != train_x.cols() || f_cascade.store.rows() != train_x.rows())
        throw InvalidInput("teacher artifact store does not match the training partition");
    if ((f_cascade.store.array() != train_x.array()).any())
        throw InvalidInput(
            "teacher artifact was trained on a different split; check data/split seeds");

    const Stage& stage = f_cascade.stages[0];
    const long l = train_x.cols();
    TrainingState state;
    state.network = stage.net;
    state.svm.alphas = Vec::Zero(l);
    state.svm.labels.assign(l, 1);
    state.svm.bias = stage.bias;
    state.svm.support = stage.sv_store;
    for (std::size_t k = 0; k < stage.sv_store.size(); ++k) {
        int i = stage.sv_store[k];
        double c = stage.sv_coeff[k];
        state.svm.alphas[i] = std::abs(c);
        state.svm.labels[i] = c > 0.0 ? 1 : -1;
    }
    state.train_scores = stage_scores(f_cascade, 0, train_x, 1);
    return state;
}

std::string training_log_tsv(const TrainingState& state, std::uint64_t config_hash) {
    std::ostringstream out;
    out << "# config=" << hex64(config_hash) << "\n";
    out << "epoch\tobjective\tstep\ttrain_eer\tval_eer\n";
    for (const EpochLog& e : state.log) {
        out << e.epoch << '\t' << num(e.objective, "%.10e") << '\t' << num(e.step, "%.10e")
            << '\t' << num(e.train_eer) << '\t' << num(e.val_eer) << '\n';
    }
    return out.str();
}

std::string eval_report(const Cascade& cascade, const Mat& X, const std::vector<int>* labels,
                        int threads, std::uint64_t config_hash,
                        const std::vector<double>* stage_ms,
                        std::optional<double> cascade_ms) {
    const int T = static_cast<int>(cascade.stages.size());
    const long n = X.cols();
    if (n == 0) throw InvalidInput("evaluation set is empty");

    std::vector<std::vector<int>> preds(T);
    for (int t = 0; t < T; ++t) {
        Vec scores = stage_scores(cascade, t, X, threads);
        preds[t].resize(n);
        for (long i = 0; i < n; ++i)
            preds[t][i] = scores[i] > cascade.stages[t].threshold ? 1 : -1;
    }
    const std::vector<int>& f_pred = preds[T - 1];

    std::vector<EvalOutcome> outcomes = evaluate_all(cascade, X, threads);
    std::vector<int> cascade_pred(n);
    double mean_kernel_evals = 0.0, mean_mac = 0.0;
    for (long i = 0; i < n; ++i) {
        cascade_pred[i] = outcomes[i].label;
        mean_kernel_evals += static_cast<double>(outcomes[i].kernel_evals);
        mean_mac += static_cast<double>(outcomes[i].mac_cost);
    }
    mean_kernel_evals /= static_cast<double>(n);
    mean_mac /= static_cast<double>(n);

    std::ostringstream out;
    out << "# config=" << hex64(config_hash) << "\n";
    out << "stage\tcons\trfa\tdr\tfa\teer\ttime_ms\tsvs\tmac_fwd\tmean_kernel_evals\t"
           "mean_mac_cost\n";

    auto detection_cells = [&](const std::vector<int>& p) {
        std::ostringstream cells;
        if (labels && !labels->empty()) {
            Rates r = detection_metrics(p, *labels);
            cells << pct(r.dr) << '\t' << pct(r.fa) << '\t';
            if (r.dr && r.fa)
                cells << pct(eer(*r.dr, *r.fa));
            else
                cells << "-";
        } else {
            cells << "-\t-\t-";
        }
        return cells.str();
    };

    for (int t = 0; t < T; ++t) {
        const Stage& stage = cascade.stages[t];
        out << (t + 1) << '\t';
        if (t == T - 1) {
            out << "-\t-\t";  // the final stage is the teacher itself
        } else {
            Rates c = conservation_metrics(preds[t], f_pred);
            out << pct(c.dr) << '\t' << pct(c.fa) << '\t';
        }
        out << detection_cells(preds[t]) << '\t';
        out << (stage_ms ? num((*stage_ms)[t]) : "-") << '\t';
        out << stage.sv_store.size() << '\t' << stage.mac_per_kernel() << '\t';
        out << num(static_cast<double>(stage.sv_store.size())) << '\t'
            << num(static_cast<double>(stage_cost(stage))) << '\n';
    }

    Rates cons = conservation_metrics(cascade_pred, f_pred);
    out << "cascade\t" << pct(cons.dr) << '\t' << pct(cons.fa) << '\t'
        << detection_cells(cascade_pred) << '\t'
        << (cascade_ms ? num(*cascade_ms) : "-") << "\t-\t-\t" << num(mean_kernel_evals)
        << '\t' << num(mean_mac) << '\n';
    return out.str();
}

void cmd_gen_data(const RunConfig& cfg, const std::string& out_dir) {
    Dataset ds = generate_synthetic(cfg.data.n, cfg.data.dim, cfg.data.positive_fraction,
                                    cfg.data.separation, cfg.data.seed);
    if (cfg.data.grid_rows > 0 || cfg.data.grid_cols > 0) {
        if (static_cast<long>(cfg.data.grid_rows) * cfg.data.grid_cols != cfg.data.n)
            throw InvalidInput("grid_rows * grid_cols must equal data.n");
        ds.grid_rows = cfg.data.grid_rows;
        ds.grid_cols = cfg.data.grid_cols;
    }
    save_pairs(ds, cfg.data.path);
    echo_config(cfg, out_dir);
    std::cout << "wrote " << cfg.data.path << " (" << ds.count() << " samples, dim "
              << ds.dim() << ")\n";
}

void cmd_train_f(const RunConfig& cfg, const std::string& out_dir) {
    LoadedData data = load_and_split(cfg);
    if (data.train_y.empty()) throw InvalidInput("training the teacher requires labels");
    KernelBank bank = bank_from_config(cfg, data.train_x);
    Architecture arch = f_architecture(cfg.bank.n1, cfg.f.units, cfg.f.layers);

    TrainingState state = train_f(data.train_x, data.train_y, arch, bank,
                                  cfg.f_distill_config(), &data.val_x, &data.val_y);

    echo_config(cfg, out_dir);
    write_text(join(out_dir, "f_training_log.tsv"), training_log_tsv(state, cfg.hash()));
    save_cascade(f_artifact(state, data.train_x, bank), join(out_dir, "f.dknc"), cfg.hash());
    double final_val = state.log.empty() ? std::nan("") : state.log.back().val_eer;
    std::cout << "teacher trained: " << state.objective_history.size() << " epochs, "
              << state.svm.support.size() << " support vectors, final validation EER "
              << num(final_val) << "%\n";
}

namespace {

// teacher artifact -> training state, rebuilt against the configured split
TrainingState load_teacher(const RunConfig& cfg, const std::string& f_artifact_path,
                           LoadedData& data, KernelBank& bank) {
    data = load_and_split(cfg);
    std::uint64_t stored_hash = 0;
    Cascade f_cascade = load_cascade(f_artifact_path, &stored_hash);
    if (stored_hash != cfg.hash())
        std::cerr << "warning: teacher artifact was produced under a different config\n";
    bank = f_cascade.bank;
    return f_state_from_artifact(f_cascade, data.train_x);
}

}  // namespace

void cmd_distill(const RunConfig& cfg, int stage_index, const std::string& f_artifact_path,
                 const std::string& out_dir) {
    LoadedData data;
    KernelBank bank;
    TrainingState f_state = load_teacher(cfg, f_artifact_path, data, bank);
    Architecture f_arch = f_state.network.arch;
    std::vector<StageSpec> specs =
        default_stage_specs(bank.num_chunks, f_arch, cfg.g_distill_config(0));
    if (stage_index < 1 || stage_index > static_cast<int>(specs.size()))
        throw InvalidInput("stage index must lie in [1, " + std::to_string(specs.size()) +
                           "]");
    if (stage_index == static_cast<int>(specs.size()))
        throw InvalidInput("the final stage is the teacher itself; nothing to distill");

    StageSpec spec = specs[stage_index - 1];
    spec.config = cfg.g_distill_config(stage_index - 1);
    TrainingState state = train_g(data.train_x, f_state.train_scores, spec.arch, bank,
                                  spec.config, &data.val_x, nullptr);

    // standalone one-stage artifact holding only the referenced vectors
    Cascade single;
    single.bank = bank;
    std::vector<int> used = state.svm.support;
    single.store.resize(data.train_x.rows(), used.size());
    Stage stage;
    stage.net = state.network;
    stage.bias = state.svm.bias;
    stage.sv_coeff.resize(used.size());
    for (std::size_t k = 0; k < used.size(); ++k) {
        single.store.col(k) = data.train_x.col(used[k]);
        stage.sv_store.push_back(static_cast<int>(k));
        stage.sv_coeff[k] = state.svm.alphas[used[k]] * state.svm.labels[used[k]];
    }
    single.stages.push_back(std::move(stage));

    echo_config(cfg, out_dir);
    std::string name = "stage" + std::to_string(stage_index);
    write_text(join(out_dir, name + "_training_log.tsv"),
               training_log_tsv(state, cfg.hash()));
    save_cascade(single, join(out_dir, name + ".dknc"), cfg.hash());
    std::cout << "distilled stage " << stage_index << ": "
              << state.objective_history.size() << " epochs, "
              << state.svm.support.size() << " support vectors\n";
}

void cmd_build_cascade(const RunConfig& cfg, const std::string& f_artifact_path,
                       const std::string& out_dir) {
    LoadedData data;
    KernelBank bank;
    TrainingState f_state = load_teacher(cfg, f_artifact_path, data, bank);
    std::vector<StageSpec> specs =
        default_stage_specs(bank.num_chunks, f_state.network.arch, cfg.g_distill_config(0));
    for (std::size_t t = 0; t + 1 < specs.size(); ++t)
        specs[t].config = cfg.g_distill_config(static_cast<int>(t));

    Cascade cascade = build(f_state, data.train_x, bank, specs, &data.val_x);
    echo_config(cfg, out_dir);
    save_cascade(cascade, join(out_dir, "cascade.dknc"), cfg.hash());
    std::cout << "cascade built: " << cascade.stages.size() << " stages, store of "
              << cascade.store.cols() << " vectors\n";
}

void cmd_eval(const RunConfig& cfg, const std::string& cascade_path,
              const std::string& out_dir) {
    LoadedData data = load_and_split(cfg);
    Cascade cascade = load_cascade(cascade_path);
    if (data.test_x.cols() == 0) throw InvalidInput("test partition is empty");
    std::string report =
        eval_report(cascade, data.test_x, data.test_y.empty() ? nullptr : &data.test_y,
                    cfg.eval.threads, cfg.hash());
    echo_config(cfg, out_dir);
    write_text(join(out_dir, "report.tsv"), report);
    std::cout << report;
}

void cmd_bench(const RunConfig& cfg, const std::string& cascade_path,
               const std::string& out_dir) {
    LoadedData data = load_and_split(cfg);
    Cascade cascade = load_cascade(cascade_path);
    if (data.test_x.cols() == 0) throw InvalidInput("test partition is empty");
    const Mat& X = data.test_x;
    const int T = static_cast<int>(cascade.stages.size());

    std::vector<double> stage_ms(T);
    for (int t = 0; t < T; ++t) {
        auto t0 = std::chrono::steady_clock::now();
        stage_scores(cascade, t, X, cfg.eval.threads);
        stage_ms[t] = elapsed_ms(t0);
    }
    auto t0 = std::chrono::steady_clock::now();
    std::vector<EvalOutcome> outcomes = evaluate_all(cascade, X, cfg.eval.threads);
    double cascade_parallel_ms = elapsed_ms(t0);
    t0 = std::chrono::steady_clock::now();
    evaluate_all(cascade, X, 1);
    double cascade_serial_ms = elapsed_ms(t0);

    double mean_mac = 0.0;
    for (const auto& o : outcomes) mean_mac += static_cast<double>(o.mac_cost);
    mean_mac /= static_cast<double>(outcomes.size());
    double full_mac = static_cast<double>(stage_cost(cascade.stages[T - 1]));

    std::string report = eval_report(cascade, X,
                                     data.test_y.empty() ? nullptr : &data.test_y,
                                     cfg.eval.threads, cfg.hash(), &stage_ms,
                                     cascade_parallel_ms);
    std::ostringstream extra;
    extra << "\n# bench (" << X.cols() << " patterns)\n";
    extra << "metric\tvalue\n";
    extra << "cascade_ms_threads_" << cfg.eval.threads << "\t" << num(cascade_parallel_ms)
          << "\n";
    extra << "cascade_ms_threads_1\t" << num(cascade_serial_ms) << "\n";
    extra << "final_stage_ms\t" << num(stage_ms[T - 1]) << "\n";
    extra << "mean_mac_cost\t" << num(mean_mac) << "\n";
    extra << "final_stage_mac_cost\t" << num(full_mac) << "\n";
    extra << "mac_speedup_vs_final\t" << num(full_mac / std::max(mean_mac, 1e-12)) << "\n";
    extra << "wall_speedup_vs_final\t"
          << num(stage_ms[T - 1] / std::max(cascade_parallel_ms, 1e-12)) << "\n";

    echo_config(cfg, out_dir);
    write_text(join(out_dir, "bench.tsv"), report + extra.str());
    std::cout << report << extra.str();
}

void cmd_map(const RunConfig& cfg, const std::string& cascade_path,
             const std::string& out_dir) {
    Dataset ds = load_pairs(cfg.data.path);
    if (!ds.has_grid()) throw InvalidInput("stage maps require a dataset with a grid");
    Cascade cascade = load_cascade(cascade_path);
    std::vector<EvalOutcome> outcomes =
        evaluate_all(cascade, ds.features, cfg.eval.threads);
    echo_config(cfg, out_dir);
    emit_stage_map(outcomes, ds.grid_rows, ds.grid_cols,
                   static_cast<int>(cascade.stages.size()), join(out_dir, "map.pgm"),
                   join(out_dir, "map_counts.tsv"));
    std::cout << "wrote map.pgm and map_counts.tsv (" << ds.grid_rows << "x"
              << ds.grid_cols << ")\n";
}

}  // namespace dkn
