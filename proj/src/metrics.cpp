#include "avprof/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace avprof {

namespace {

void check_sizes(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw DataError("metric: scores and labels differ in length");
}

// Sample indices sorted by score, descending; stable for determinism.
std::vector<std::size_t> order_desc(std::span<const double> scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return order;
}

}  // namespace

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
    check_sizes(scores, labels);
    const auto n_pos = static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](int y) { return y != 0; }));
    const std::size_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) throw DataError("roc_auc: both classes must be present");

    // Mann-Whitney U with midranks for ties.
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double pos_rank_sum = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] != 0) pos_rank_sum += midrank;
        }
        i = j;
    }
    const double p = static_cast<double>(n_pos);
    const double u = pos_rank_sum - p * (p + 1.0) / 2.0;
    return u / (p * static_cast<double>(n_neg));
}

double pr_auc(std::span<const double> scores, std::span<const int> labels) {
    check_sizes(scores, labels);
    const auto n_pos = std::count_if(labels.begin(), labels.end(), [](int y) { return y != 0; });
    if (n_pos == 0) throw DataError("pr_auc: no positive labels");

    const auto order = order_desc(scores);
    double ap = 0.0;
    double prev_recall = 0.0;
    std::size_t tp = 0;
    std::size_t seen = 0;
    for (std::size_t i = 0; i < order.size();) {
        // consume one threshold (a block of tied scores)
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            tp += labels[order[j]] != 0 ? 1 : 0;
            ++j;
        }
        seen = j;
        const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
        const double precision = static_cast<double>(tp) / static_cast<double>(seen);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j;
    }
    return ap;
}

ThresholdMetrics threshold_metrics(std::span<const double> scores, std::span<const int> labels, double threshold) {
    check_sizes(scores, labels);
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool predicted = scores[i] >= threshold;
        const bool actual = labels[i] != 0;
        if (predicted && actual) ++tp;
        else if (predicted) ++fp;
        else if (actual) ++fn;
        else ++tn;
    }
    auto ratio = [](std::size_t num, std::size_t den) {
        return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    };
    ThresholdMetrics m;
    m.accuracy = ratio(tp + tn, scores.size());
    m.precision = ratio(tp, tp + fp);
    m.recall = ratio(tp, tp + fn);
    m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    return m;
}

double rmse(const Matrix& pred, const Matrix& truth) {
    if (pred.rows() != truth.rows() || pred.cols() != truth.cols()) {
        throw DataError("rmse: shape mismatch " + std::to_string(pred.rows()) + "x" + std::to_string(pred.cols()) +
                        " vs " + std::to_string(truth.rows()) + "x" + std::to_string(truth.cols()));
    }
    if (pred.size() == 0) throw DataError("rmse: empty input");
    return std::sqrt((pred - truth).squaredNorm() / static_cast<double>(pred.size()));
}

MeanStd mean_std(std::span<const double> values) {
    if (values.empty()) return {};
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / n)};
}

}  // namespace avprof
