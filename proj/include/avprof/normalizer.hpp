#pragma once

#include <vector>

#include "avprof/common.hpp"

namespace avprof {

/// Per-column min-max scaling fitted on training data only. Constant columns
/// map to 0.5.
struct Normalizer {
    Vector min;
    Vector max;

    static Normalizer fit(const std::vector<const Matrix*>& train);
    static Normalizer fit(const Matrix& train) { return fit(std::vector<const Matrix*>{&train}); }

    Eigen::Index width() const { return min.size(); }
    Matrix apply(const Matrix& x) const;
    Matrix invert(const Matrix& x) const;
};

}  // namespace avprof
