#include "avprof/normalizer.hpp"

#include <limits>
#include <string>

namespace avprof {

Normalizer Normalizer::fit(const std::vector<const Matrix*>& train) {
    if (train.empty()) throw DataError("normalizer: no training data");
    const Eigen::Index k = train.front()->cols();
    Normalizer n;
    n.min = Vector::Constant(k, std::numeric_limits<double>::infinity());
    n.max = Vector::Constant(k, -std::numeric_limits<double>::infinity());
    for (const Matrix* m : train) {
        if (m->cols() != k) throw DataError("normalizer: matrices differ in width");
        if (m->rows() == 0) continue;
        if (!m->allFinite()) throw DataError("normalizer: non-finite training values");
        n.min = n.min.cwiseMin(m->colwise().minCoeff().transpose());
        n.max = n.max.cwiseMax(m->colwise().maxCoeff().transpose());
    }
    if (!n.min.allFinite()) throw DataError("normalizer: training matrices are empty");
    return n;
}

Matrix Normalizer::apply(const Matrix& x) const {
    if (x.cols() != width()) {
        throw DataError("normalizer: expected " + std::to_string(width()) + " columns, got " + std::to_string(x.cols()));
    }
    Matrix out(x.rows(), x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double span = max[j] - min[j];
        if (span > 0.0) {
            out.col(j) = (x.col(j).array() - min[j]) / span;
        } else {
            out.col(j).setConstant(0.5);
        }
    }
    return out;
}

Matrix Normalizer::invert(const Matrix& x) const {
    if (x.cols() != width()) {
        throw DataError("normalizer: expected " + std::to_string(width()) + " columns, got " + std::to_string(x.cols()));
    }
    Matrix out(x.rows(), x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double span = max[j] - min[j];
        if (span > 0.0) {
            out.col(j) = x.col(j).array() * span + min[j];
        } else {
            out.col(j).setConstant(min[j]);
        }
    }
    return out;
}

}  // namespace avprof
