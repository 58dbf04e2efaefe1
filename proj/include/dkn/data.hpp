#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dkn/cascade.hpp"
#include "dkn/types.hpp"

namespace dkn {

/// Feature-pair collection. One column per sample; labels optional; the grid,
/// when present, maps sample index i to cell (i / cols, i % cols) of a
/// detection map.
struct Dataset {
    Mat features;  // d x n
    std::vector<int> labels;
    int grid_rows = 0;
    int grid_cols = 0;

    int count() const { return static_cast<int>(features.cols()); }
    int dim() const { return static_cast<int>(features.rows()); }
    bool has_labels() const { return !labels.empty(); }
    bool has_grid() const { return grid_rows > 0 && grid_cols > 0; }
};

/// Two Gaussian clusters separated by `separation`, with floor(n * fraction)
/// positives (at least one). Per-sample seeding keeps the result independent
/// of generation order.
Dataset generate_synthetic(int n, int d, double positive_fraction, double separation,
                           std::uint64_t seed);

struct SplitSpec {
    int labeled_count = 0;
    double train_fraction = 2.0 / 3.0;
    std::uint64_t seed = 0;
};

struct SplitIndices {
    std::vector<int> train, validation, test;
};

/// Seeded draw of the labeled subset, split 2/3 train / 1/3 validation; the
/// remainder is the test partition. Disjoint and exhaustive.
SplitIndices split(const Dataset& dataset, const SplitSpec& spec);

Mat gather_columns(const Mat& features, const std::vector<int>& idx);
std::vector<int> gather_labels(const std::vector<int>& labels, const std::vector<int>& idx);

/// Binary feature-pair file (magic DKNPAIR1): header, row-major float32
/// features, optional int8 labels. Bit-exact round trip.
void save_pairs(const Dataset& dataset, const std::string& path);
Dataset load_pairs(const std::string& path);

/// Grayscale map of per-pattern processing depth (PGM, darker = more stages)
/// plus a delimiter-separated grid of the raw stage counts.
void emit_stage_map(const std::vector<EvalOutcome>& outcomes, int grid_rows, int grid_cols,
                    int total_stages, const std::string& pgm_path,
                    const std::string& counts_path);

}  // namespace dkn
