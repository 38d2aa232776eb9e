#pragma once

#include <limits>
#include <vector>

namespace avprof {

/// Patience-based early stopping over per-epoch validation scores.
class EarlyStopping {
public:
    EarlyStopping(int patience, bool maximize) : patience_(patience), maximize_(maximize) {}

    /// Records the score of the next epoch; true if it is a strict improvement.
    bool observe(double score) {
        ++epoch_;
        // NaN never counts as an improvement.
        const bool better =
            score == score && (best_epoch_ == 0 || (maximize_ ? score > best_ : score < best_));
        if (better) {
            best_ = score;
            best_epoch_ = epoch_;
        }
        return better;
    }

    bool should_stop() const { return epoch_ - best_epoch_ >= patience_; }
    int best_epoch() const { return best_epoch_; }
    double best_score() const { return best_; }
    int epochs_seen() const { return epoch_; }

private:
    int patience_;
    bool maximize_;
    int epoch_ = 0;
    int best_epoch_ = 0;
    double best_ = std::numeric_limits<double>::quiet_NaN();
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double val_score = 0.0;
};

}  // namespace avprof
