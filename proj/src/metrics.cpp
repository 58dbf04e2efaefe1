#include "dkn/metrics.hpp"

#include <cmath>
#include <limits>

namespace dkn {

Counts confusion_counts(const std::vector<int>& predictions,
                        const std::vector<int>& ground_truth) {
    if (predictions.size() != ground_truth.size())
        throw InvalidInput("prediction and ground-truth lengths differ");
    Counts c;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        bool pred_pos = predictions[i] > 0;
        bool true_pos = ground_truth[i] > 0;
        if (true_pos)
            (pred_pos ? c.tp : c.fn)++;
        else
            (pred_pos ? c.fp : c.tn)++;
    }
    return c;
}

Rates detection_metrics(const std::vector<int>& predictions,
                        const std::vector<int>& ground_truth) {
    Rates r;
    r.counts = confusion_counts(predictions, ground_truth);
    const Counts& c = r.counts;
    if (c.tp + c.fn > 0) r.dr = 100.0 * c.tp / static_cast<double>(c.tp + c.fn);
    if (c.fp + c.tn > 0) r.fa = 100.0 * c.fp / static_cast<double>(c.fp + c.tn);
    return r;
}

double eer(double dr, double fa) { return (fa + (100.0 - dr)) / 2.0; }

Rates conservation_metrics(const std::vector<int>& g_predictions,
                           const std::vector<int>& f_predictions) {
    return detection_metrics(g_predictions, f_predictions);
}

double eer_of_scores(const Vec& scores, const std::vector<int>& labels) {
    std::vector<int> pred(labels.size());
    for (std::size_t i = 0; i < pred.size(); ++i) pred[i] = scores[i] > 0.0 ? 1 : -1;
    Rates r = detection_metrics(pred, labels);
    if (!r.dr || !r.fa) return std::numeric_limits<double>::quiet_NaN();
    return eer(*r.dr, *r.fa);
}

}  // namespace dkn
