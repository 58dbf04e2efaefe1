#pragma once

#include <optional>
#include <string>

#include "dkn/cascade.hpp"
#include "dkn/config.hpp"
#include "dkn/data.hpp"
#include "dkn/distill.hpp"

namespace dkn {

/// Dataset plus the seeded train/validation/test partition materialized as
/// column matrices.
struct LoadedData {
    Dataset dataset;
    SplitIndices indices;
    Mat train_x, val_x, test_x;
    std::vector<int> train_y, val_y, test_y;
};

LoadedData load_and_split(const RunConfig& cfg);

/// Bank with scales estimated on the training partition.
KernelBank bank_from_config(const RunConfig& cfg, const Mat& train_x,
                            std::vector<int>* degenerate = nullptr);

/// Rebuild the teacher's training-time state from a one-stage artifact whose
/// store is the full training partition.
TrainingState f_state_from_artifact(const Cascade& f_cascade, const Mat& train_x);

/// One-stage cascade wrapping a trained teacher; the store holds every
/// training sample so later stages can be distilled against it.
Cascade f_artifact(const TrainingState& state, const Mat& train_x, const KernelBank& bank);

std::string training_log_tsv(const TrainingState& state, std::uint64_t config_hash);

/// Table 2-shaped report: one row per stage evaluated independently on X,
/// plus a short-circuit cascade row. `stage_ms`/`cascade_ms` fill the time
/// column when provided (bench mode); otherwise it renders "-" so that eval
/// reports stay byte-identical across runs.
std::string eval_report(const Cascade& cascade, const Mat& X, const std::vector<int>* labels,
                        int threads, std::uint64_t config_hash,
                        const std::vector<double>* stage_ms = nullptr,
                        std::optional<double> cascade_ms = std::nullopt);

// Command bodies shared by the CLI and tests. Each writes its outputs plus
// resolved_config.ini into out_dir and throws on failure.
void cmd_gen_data(const RunConfig& cfg, const std::string& out_dir);
void cmd_train_f(const RunConfig& cfg, const std::string& out_dir);
void cmd_distill(const RunConfig& cfg, int stage_index, const std::string& f_artifact_path,
                 const std::string& out_dir);
void cmd_build_cascade(const RunConfig& cfg, const std::string& f_artifact_path,
                       const std::string& out_dir);
void cmd_eval(const RunConfig& cfg, const std::string& cascade_path,
              const std::string& out_dir);
void cmd_bench(const RunConfig& cfg, const std::string& cascade_path,
               const std::string& out_dir);
void cmd_map(const RunConfig& cfg, const std::string& cascade_path,
             const std::string& out_dir);

}  // namespace dkn
