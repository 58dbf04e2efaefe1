#pragma once

#include <cstdint>
#include <string>

#include "dkn/distill.hpp"
#include "dkn/types.hpp"

namespace dkn {

/// Full pipeline configuration, serialized as "key = value" sections.
/// Unknown keys are rejected at parse time. All defaults below are the
/// documented ones.
struct RunConfig {
    struct Data {
        std::string path = "data.dknpair";
        int n = 20000;
        int dim = 16;
        double positive_fraction = 0.05;
        double separation = 8.0;
        std::uint64_t seed = 42;
        int grid_rows = 0;
        int grid_cols = 0;
    } data;

    struct Split {
        int labeled_count = 1500;
        std::uint64_t seed = 7;
    } split;

    struct Bank {
        int n1 = 8;
        int k_neighbors = 10;
    } bank;

    struct FNet {
        int units = 0;  // 0 = max(64, n1)
        int layers = 8;
        int epochs = 10000;
        double gamma = 10.0;
        double initial_step = 0.1;
        double step_decay = 0.99;
        int num_batches = 10;
        double svm_c = 1.0;
        double svm_tol = 1e-3;
        int svm_max_passes = 200;
        std::uint64_t seed = 1;
    } f;

    struct GNet {
        int epochs = 5000;
        double gamma = 10.0;
        double initial_step = 0.1;
        double step_decay = 0.99;
        int num_batches = 10;
        double svm_c = 1.0;
        double svm_tol = 1e-3;
        int svm_max_passes = 200;
        std::uint64_t seed = 2;
    } g;

    struct Eval {
        int threads = 1;
    } eval;

    DistillConfig f_distill_config() const;
    DistillConfig g_distill_config(int stage_index) const;

    /// Canonical text form: every key explicit, fixed order.
    std::string render() const;
    std::uint64_t hash() const;

    /// Override every seed from one master value.
    void reseed(std::uint64_t master);
    void validate() const;
};

/// Parse the "key = value" section format; unknown or malformed entries
/// raise InvalidInput naming the key and line.
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace dkn
