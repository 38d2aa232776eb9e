#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "avprof/cv.hpp"
#include "avprof/forest.hpp"
#include "avprof/metrics.hpp"
#include "avprof/mlp.hpp"
#include "avprof/recurrent.hpp"
#include "avprof/windowing.hpp"

namespace avprof {

enum class Family { Rf, Seq };

std::string_view to_string(Family f);
/// Accepts "rf" and "seq" (alias "lstm"); anything else is a ConfigError.
Family family_from_string(std::string_view s);

struct ClassificationScores {
    double auroc = 0.0;
    double aupr = 0.0;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool operator==(const ClassificationScores&) const = default;
};

ClassificationScores score_predictions(std::span<const double> scores, std::span<const int> labels);

struct ClassificationConfig {
    DatasetKind kind = DatasetKind::S;
    Family family = Family::Rf;
    std::size_t window = 50;
    std::size_t stride = 1;
    int repeats = 5;
    int folds = 5;
    std::uint64_t seed = 0;
    std::vector<RfHyperParams> rf_grid = default_rf_grid();
    std::vector<SeqHyperParams> seq_grid = default_seq_grid();

    void validate() const;
};

/// Test-only instrumentation: receives every scene set handed to grid search.
struct ExperimentHooks {
    std::function<void(const std::vector<const Scene*>&)> on_grid_search_input;
};

using Classifier = std::variant<RandomForest, SeqModel>;

/// P(autonomous) for each window, in order.
std::vector<double> score_windows(const Classifier& model, const std::vector<WindowSample>& windows, int jobs = 1);

/// Output of model selection and refit on one split.
struct FittedClassifier {
    Classifier model;
    std::size_t chosen_config = 0;
    nlohmann::json hyperparameters;
    GridSearchResult grid;
};

/// Cross-validated grid search over the training scenes (folds at scene
/// granularity), then a refit of the winner on all training windows. Sequence
/// models early-stop on the validation scenes; random forests ignore them.
FittedClassifier fit_classifier(const std::vector<const Scene*>& train, const std::vector<const Scene*>& val,
                                const ClassificationConfig& cfg, std::uint64_t seed, int jobs = 1,
                                const ExperimentHooks* hooks = nullptr);

struct RepeatRecord {
    int repeat = 0;
    std::uint64_t seed = 0;
    std::size_t train_windows = 0;
    std::size_t val_windows = 0;
    std::size_t test_windows = 0;
    std::size_t chosen_config = 0;
    nlohmann::json hyperparameters;
    std::size_t failed_configs = 0;
};

struct ClassificationReport {
    std::string experiment_id;
    nlohmann::json config;
    std::vector<RepeatRecord> repeats;
    std::vector<ClassificationScores> scores;  // one per repeat

    nlohmann::json to_json() const;
    std::string to_csv() const;
};

/// Per repeat: 70/10/20 scene split, windowing, grid search on training scenes
/// only, refit, and scoring on the test windows.
ClassificationReport run_classification_experiment(const std::vector<Scene>& scenes, const ClassificationConfig& cfg,
                                                   int jobs = 1, const ExperimentHooks* hooks = nullptr);

struct DegradationConfig {
    ClassificationConfig base;  // kind is forced to S+D
    std::vector<double> drop_rates{0.2, 0.4, 0.6, 0.8};

    void validate() const;
};

struct DegradationRow {
    double drop_rate = 0.0;  // 0 is the clean baseline
    std::vector<ClassificationScores> scores;  // one per repeat
};

struct DegradationReport {
    std::string experiment_id;
    nlohmann::json config;
    std::vector<RepeatRecord> repeats;
    std::vector<DegradationRow> rows;  // rows[0] is r = 0

    nlohmann::json to_json() const;
    std::string to_csv() const;
};

/// One model per repeat trained on clean data; its test windows are scored
/// clean and at every drop rate after latest-known-state imputation.
DegradationReport run_degradation_sweep(const std::vector<Scene>& scenes, const DegradationConfig& cfg, int jobs = 1);

struct RmsePair {
    double normalized = 0.0;
    double physical = 0.0;
};

struct ClassRmse {
    RmsePair human;
    RmsePair autonomous;
};

/// Test RMSE of one autoregressor split by label. Throws DataError unless both
/// classes are present among the windows.
ClassRmse compare_classes(const MlpModel& model, const std::vector<const WindowSample*>& test);

struct AutoregressionConfig {
    std::vector<int> histories{1, 2, 4, 6, 8, 10, 12};
    std::vector<int> horizons{1, 2, 4, 6, 8};
    std::size_t window = 20;
    std::size_t stride = 1;
    int repeats = 5;
    std::uint64_t seed = 0;
    MlpHyperParams mlp;  // history and horizon are set per cell

    void validate() const;
};

struct AutoregressionCellRepeat {
    std::uint64_t seed = 0;
    int epochs = 0;
    int best_epoch = 0;
    double rmse_normalized = 0.0;
    double rmse_physical = 0.0;
    std::vector<double> rmse_physical_per_feature;
    ClassRmse by_class;
};

struct AutoregressionCell {
    int history = 0;
    int horizon = 0;
    bool skipped = false;
    std::string skip_reason;
    std::vector<AutoregressionCellRepeat> repeats;
};

struct AutoregressionReport {
    std::string experiment_id;
    nlohmann::json config;
    std::vector<std::uint64_t> repeat_seeds;
    std::vector<AutoregressionCell> cells;  // histories-major, in config order

    /// Per repeat, the per-class RMSE averaged over every evaluated cell.
    std::vector<ClassRmse> class_means_per_repeat() const;

    nlohmann::json to_json() const;
    std::string to_csv() const;
    /// Two rows (human, autonomous) per evaluated (H, F) cell.
    std::string class_comparison_csv() const;
};

/// Trains one autoregressor per (H, F, repeat) on windows of `window` state
/// rows; cells with H + F beyond the window are recorded as skipped.
AutoregressionReport run_autoregression_sweep(const std::vector<Scene>& scenes, const AutoregressionConfig& cfg,
                                              int jobs = 1);

nlohmann::json to_json(const ClassificationConfig& cfg);
nlohmann::json to_json(const DegradationConfig& cfg);
nlohmann::json to_json(const AutoregressionConfig& cfg);

}  // namespace avprof
