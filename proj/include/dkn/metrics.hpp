#pragma once

#include <optional>
#include <vector>

#include "dkn/types.hpp"

namespace dkn {

struct Counts {
    long tp = 0, fp = 0, tn = 0, fn = 0;
};

/// Detection/false-alarm rates in percent. A rate is empty when its
/// denominator class is absent from the ground truth.
struct Rates {
    std::optional<double> dr;
    std::optional<double> fa;
    Counts counts;
};

Counts confusion_counts(const std::vector<int>& predictions,
                        const std::vector<int>& ground_truth);

/// dr = 100*TP/(TP+FN), fa = 100*FP/(FP+TN).
Rates detection_metrics(const std::vector<int>& predictions,
                        const std::vector<int>& ground_truth);

/// (fa + (100 - dr)) / 2, all in percent.
double eer(double dr, double fa);

/// Same rates with the teacher's predictions as ground truth: dr becomes the
/// conservation rate, fa the relative false-alarm rate.
Rates conservation_metrics(const std::vector<int>& g_predictions,
                           const std::vector<int>& f_predictions);

/// EER of score vectors against labels, with sign(0) = -1. Returns NaN for
/// single-class ground truth.
double eer_of_scores(const Vec& scores, const std::vector<int>& labels);

}  // namespace dkn
