#include "dkn/data.hpp"

#include <cmath>
#include <fstream>

#include "dkn/rng.hpp"
#include "dkn/serialize.hpp"

namespace dkn {

namespace {
constexpr char kPairMagic[9] = "DKNPAIR1";
constexpr std::uint32_t kPairVersion = 1;
}  // namespace

Dataset generate_synthetic(int n, int d, double positive_fraction, double separation,
                           std::uint64_t seed) {
    if (n < 10) throw InvalidInput("need at least 10 samples");
    if (d <= 0) throw InvalidInput("dimension must be positive");
    if (!(positive_fraction > 0.0 && positive_fraction < 0.5))
        throw InvalidInput("positive_fraction must lie in (0, 0.5)");
    if (!(separation > 0.0)) throw InvalidInput("separation must be positive");

    int num_pos = std::max(1, static_cast<int>(std::floor(n * positive_fraction)));

    // positive indices drawn by seeded shuffle
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    Rng label_rng(mix_seed(seed, 0x706f73ull));
    label_rng.shuffle(order);
    std::vector<int> labels(n, -1);
    for (int k = 0; k < num_pos; ++k) labels[order[k]] = 1;

    // positive cluster mean at separation/sqrt(d) per coordinate
    const double shift = separation / std::sqrt(static_cast<double>(d));
    Dataset ds;
    ds.features.resize(d, n);
    ds.labels = labels;
    for (int i = 0; i < n; ++i) {
        Rng rng(mix_seed(seed, 0x73616d70ull + static_cast<std::uint64_t>(i)));
        double mu = labels[i] > 0 ? shift : 0.0;
        for (int r = 0; r < d; ++r) ds.features(r, i) = mu + rng.normal();
    }
    return ds;
}

SplitIndices split(const Dataset& dataset, const SplitSpec& spec) {
    const int n = dataset.count();
    if (spec.labeled_count <= 0 || spec.labeled_count > n)
        throw InvalidInput("labeled_count must lie in [1, n]");
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw InvalidInput("train_fraction must lie in (0, 1)");
    if (!dataset.has_labels()) throw InvalidInput("split requires labels");

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    Rng rng(mix_seed(spec.seed, 0x73706c6974ull));
    rng.shuffle(order);

    const int labeled = spec.labeled_count;
    const int train_count = static_cast<int>(std::floor(labeled * spec.train_fraction));
    SplitIndices out;
    out.train.assign(order.begin(), order.begin() + train_count);
    out.validation.assign(order.begin() + train_count, order.begin() + labeled);
    out.test.assign(order.begin() + labeled, order.end());
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.validation.begin(), out.validation.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

Mat gather_columns(const Mat& features, const std::vector<int>& idx) {
    Mat out(features.rows(), idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) out.col(k) = features.col(idx[k]);
    return out;
}

std::vector<int> gather_labels(const std::vector<int>& labels, const std::vector<int>& idx) {
    std::vector<int> out;
    out.reserve(idx.size());
    for (int i : idx) out.push_back(labels.at(i));
    return out;
}

void save_pairs(const Dataset& dataset, const std::string& path) {
    ByteWriter w;
    w.magic(kPairMagic);
    w.u32(kPairVersion);
    w.u32(static_cast<std::uint32_t>(dataset.count()));
    w.u32(static_cast<std::uint32_t>(dataset.dim()));
    w.u8(dataset.has_labels() ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(dataset.grid_rows));
    w.u32(static_cast<std::uint32_t>(dataset.grid_cols));
    for (int i = 0; i < dataset.count(); ++i)
        for (int r = 0; r < dataset.dim(); ++r)
            w.f32(static_cast<float>(dataset.features(r, i)));
    if (dataset.has_labels())
        for (int y : dataset.labels) w.i8(static_cast<std::int8_t>(y));
    w.write_file(path);
}

Dataset load_pairs(const std::string& path) {
    ByteReader r = ByteReader::from_file(path);
    r.expect_magic(kPairMagic);
    std::uint32_t version = r.u32();
    if (version != kPairVersion)
        throw ParseError("unsupported pair-file version " + std::to_string(version),
                         r.offset() - 4);
    std::uint32_t n = r.u32();
    if (n == 0) throw ParseError("empty dataset", r.offset() - 4);
    std::uint32_t d = r.u32();
    if (d == 0) throw ParseError("zero feature dimension", r.offset() - 4);
    std::uint8_t has_labels = r.u8();
    if (has_labels > 1) throw ParseError("has_labels flag must be 0 or 1", r.offset() - 1);
    std::uint32_t rows = r.u32();
    std::uint32_t cols = r.u32();
    if ((rows == 0) != (cols == 0))
        throw ParseError("grid must set both dimensions or neither", r.offset() - 4);
    if (rows != 0 && static_cast<std::uint64_t>(rows) * cols != n)
        throw ParseError("grid cells must equal the sample count", r.offset() - 4);

    Dataset ds;
    ds.grid_rows = static_cast<int>(rows);
    ds.grid_cols = static_cast<int>(cols);
    ds.features.resize(d, n);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t row = 0; row < d; ++row)
            ds.features(row, i) = static_cast<double>(r.f32());
    if (has_labels) {
        ds.labels.resize(n);
        for (std::uint32_t i = 0; i < n; ++i) {
            int y = r.i8();
            if (y != 1 && y != -1)
                throw ParseError("labels must be -1 or +1", r.offset() - 1);
            ds.labels[i] = y;
        }
    }
    r.expect_end();
    return ds;
}

void emit_stage_map(const std::vector<EvalOutcome>& outcomes, int grid_rows, int grid_cols,
                    int total_stages, const std::string& pgm_path,
                    const std::string& counts_path) {
    if (grid_rows <= 0 || grid_cols <= 0) throw InvalidInput("stage map requires a grid");
    if (static_cast<long>(grid_rows) * grid_cols != static_cast<long>(outcomes.size()))
        throw InvalidInput("grid size must equal the outcome count");
    if (total_stages <= 0) throw InvalidInput("total_stages must be positive");

    // evenly spaced gray levels, lightest for one consumed stage
    auto level = [total_stages](int consumed) -> int {
        if (total_stages == 1) return 0;
        double frac = static_cast<double>(total_stages - consumed) / (total_stages - 1);
        return static_cast<int>(std::lround(255.0 * frac));
    };

    std::ofstream pgm(pgm_path, std::ios::binary | std::ios::trunc);
    if (!pgm) throw std::runtime_error("cannot open for writing: " + pgm_path);
    pgm << "P5\n" << grid_cols << " " << grid_rows << "\n255\n";
    for (const EvalOutcome& o : outcomes)
        pgm.put(static_cast<char>(static_cast<unsigned char>(level(o.stages_consumed))));
    if (!pgm) throw std::runtime_error("write failed: " + pgm_path);
    pgm.close();

    std::ofstream counts(counts_path, std::ios::trunc);
    if (!counts) throw std::runtime_error("cannot open for writing: " + counts_path);
    for (int r = 0; r < grid_rows; ++r) {
        for (int c = 0; c < grid_cols; ++c) {
            if (c) counts << '\t';
            counts << outcomes[static_cast<std::size_t>(r) * grid_cols + c].stages_consumed;
        }
        counts << '\n';
    }
    if (!counts) throw std::runtime_error("write failed: " + counts_path);
}

}  // namespace dkn
