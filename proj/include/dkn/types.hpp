#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dkn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using RowVec = Eigen::RowVectorXd;

/// Thrown when an operation receives inputs that violate its preconditions.
class InvalidInput : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a binary file fails to decode; carries the byte offset of the fault.
class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& what, std::uint64_t offset)
        : std::runtime_error(what + " (byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}
    std::uint64_t offset() const { return offset_; }

  private:
    std::uint64_t offset_;
};

/// Thrown when iterative training produces a non-finite objective.
class TrainingDiverged : public std::runtime_error {
  public:
    TrainingDiverged(int epoch, double objective)
        : std::runtime_error("training diverged at epoch " + std::to_string(epoch) +
                             " (objective " + std::to_string(objective) + ")"),
          epoch_(epoch),
          objective_(objective) {}
    int epoch() const { return epoch_; }
    double objective() const { return objective_; }

  private:
    int epoch_;
    double objective_;
};

/// Layer widths of a kernel network, input kernels first, single output unit last.
struct Architecture {
    std::vector<int> layer_sizes;

    Architecture() = default;
    explicit Architecture(std::vector<int> sizes) : layer_sizes(std::move(sizes)) { validate(); }

    void validate() const {
        if (layer_sizes.size() < 2)
            throw InvalidInput("architecture needs at least 2 layers");
        if (layer_sizes.back() != 1)
            throw InvalidInput("final layer must have exactly one unit");
        for (int n : layer_sizes)
            if (n <= 0) throw InvalidInput("layer sizes must be positive");
    }

    int depth() const { return static_cast<int>(layer_sizes.size()); }
    int input_units() const { return layer_sizes.front(); }

    /// Multiply-accumulate count of one forward pass.
    long mac_count() const {
        long macs = 0;
        for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l)
            macs += static_cast<long>(layer_sizes[l]) * layer_sizes[l + 1];
        return macs;
    }

    bool operator==(const Architecture& other) const { return layer_sizes == other.layer_sizes; }
};

}  // namespace dkn
