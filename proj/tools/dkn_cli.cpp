#include <chrono>
#include <cstdio>
#include <ctime>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dkn/pipeline.hpp"

namespace {

std::string timestamped_dir(const std::string& command) {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    localtime_r(&now, &tm);
    char buf[64];
    std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
    return "runs/" + command + "-" + buf;
}

struct GlobalOpts {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool has_seed = false;
    int threads = 0;
};

dkn::RunConfig resolve_config(const GlobalOpts& opts) {
    dkn::RunConfig cfg;
    if (!opts.config_path.empty()) cfg = dkn::load_config(opts.config_path);
    if (opts.has_seed) cfg.reseed(opts.seed);
    if (opts.threads > 0) cfg.eval.threads = opts.threads;
    cfg.validate();
    return cfg;
}

void add_global_opts(CLI::App* cmd, GlobalOpts& opts) {
    cmd->add_option("--config", opts.config_path, "configuration file (key = value sections)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", opts.seed, "master seed overriding every configured seed")
        ->each([&opts](const std::string&) { opts.has_seed = true; });
    cmd->add_option("--threads", opts.threads, "worker threads for evaluation commands");
    cmd->add_option("--out", opts.out_dir, "run directory (default: runs/<cmd>-<timestamp>)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deep kernel network cascades: train, distill, evaluate"};
    app.require_subcommand(1);

    GlobalOpts opts;
    int stage_index = 1;
    std::string f_path = "f.dknc";
    std::string cascade_path = "cascade.dknc";

    CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic pair dataset");
    add_global_opts(gen, opts);

    CLI::App* trainf = app.add_subcommand("train-f", "train the teacher network");
    add_global_opts(trainf, opts);

    CLI::App* distill = app.add_subcommand("distill", "distill one cascade stage");
    add_global_opts(distill, opts);
    distill->add_option("--stage", stage_index, "stage index (1-based)")->required();
    distill->add_option("--teacher", f_path, "teacher artifact path");

    CLI::App* buildc = app.add_subcommand("build-cascade", "distill all stages and assemble");
    add_global_opts(buildc, opts);
    buildc->add_option("--teacher", f_path, "teacher artifact path");

    CLI::App* eval = app.add_subcommand("eval", "per-stage and cascade report on the test split");
    add_global_opts(eval, opts);
    eval->add_option("--cascade", cascade_path, "cascade artifact path");

    CLI::App* bench = app.add_subcommand("bench", "timed evaluation report");
    add_global_opts(bench, opts);
    bench->add_option("--cascade", cascade_path, "cascade artifact path");

    CLI::App* map = app.add_subcommand("map", "grayscale map of processing depth");
    add_global_opts(map, opts);
    map->add_option("--cascade", cascade_path, "cascade artifact path");

    CLI11_PARSE(app, argc, argv);

    CLI::App* active = app.get_subcommands().front();
    std::string out_dir =
        opts.out_dir.empty() ? timestamped_dir(active->get_name()) : opts.out_dir;

    try {
        dkn::RunConfig cfg = resolve_config(opts);
        if (active == gen)
            dkn::cmd_gen_data(cfg, out_dir);
        else if (active == trainf)
            dkn::cmd_train_f(cfg, out_dir);
        else if (active == distill)
            dkn::cmd_distill(cfg, stage_index, f_path, out_dir);
        else if (active == buildc)
            dkn::cmd_build_cascade(cfg, f_path, out_dir);
        else if (active == eval)
            dkn::cmd_eval(cfg, cascade_path, out_dir);
        else if (active == bench)
            dkn::cmd_bench(cfg, cascade_path, out_dir);
        else if (active == map)
            dkn::cmd_map(cfg, cascade_path, out_dir);
    } catch (const dkn::InvalidInput& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const dkn::ParseError& e) {
        std::cerr << "artifact error: " << e.what() << "\n";
        return 3;
    } catch (const dkn::TrainingDiverged& e) {
        std::cerr << "training error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
