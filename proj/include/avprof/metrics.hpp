#pragma once

#include <span>
#include <vector>

#include "avprof/common.hpp"

namespace avprof {

/// Probability that a random positive outscores a random negative, ties
/// counted one half. Throws DataError unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

/// Average precision: sum over distinct thresholds of precision * delta recall.
/// Throws DataError when there are no positives.
double pr_auc(std::span<const double> scores, std::span<const int> labels);

struct ThresholdMetrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Confusion-matrix metrics predicting positive when score >= threshold.
/// Precision, recall and F1 are 0 when their denominators vanish.
ThresholdMetrics threshold_metrics(std::span<const double> scores, std::span<const int> labels,
                                   double threshold = 0.5);

/// sqrt(mean((pred - truth)^2)); throws DataError on a shape mismatch.
double rmse(const Matrix& pred, const Matrix& truth);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // population standard deviation
};

MeanStd mean_std(std::span<const double> values);

}  // namespace avprof
