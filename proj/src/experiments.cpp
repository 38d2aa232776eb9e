#include "avprof/experiments.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "avprof/scene_io.hpp"
#include "avprof/model_io.hpp"

namespace avprof {

using nlohmann::json;

namespace {

constexpr std::array<const char*, 5> kStateNames{"range_m", "speed_mps", "accel_mps2", "lane_offset_m", "yaw_rad"};
constexpr std::array<const char*, 6> kScoreNames{"auroc", "aupr", "accuracy", "precision", "recall", "f1"};

std::array<double, 6> score_values(const ClassificationScores& s) {
    return {s.auroc, s.aupr, s.accuracy, s.precision, s.recall, s.f1};
}

json scores_to_json(const ClassificationScores& s) {
    json j;
    const auto v = score_values(s);
    for (std::size_t k = 0; k < v.size(); ++k) j[kScoreNames[k]] = v[k];
    return j;
}

json mean_std_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }

json summarize_scores(const std::vector<ClassificationScores>& scores) {
    json j;
    for (std::size_t k = 0; k < kScoreNames.size(); ++k) {
        std::vector<double> values;
        for (const auto& s : scores) values.push_back(score_values(s)[k]);
        j[kScoreNames[k]] = mean_std_json(mean_std(values));
    }
    return j;
}

json report_header(const std::string& id, const json& config) {
    return {{"tool", "avprof"}, {"version", std::string(kToolVersion)}, {"experiment", id}, {"config", config}};
}

json repeat_to_json(const RepeatRecord& r) {
    return {{"repeat", r.repeat},
            {"seed", r.seed},
            {"windows", {{"train", r.train_windows}, {"val", r.val_windows}, {"test", r.test_windows}}},
            {"chosen_config", r.chosen_config},
            {"hyperparameters", r.hyperparameters},
            {"failed_configs", r.failed_configs}};
}

std::vector<const WindowSample*> pointers(const std::vector<WindowSample>& windows) {
    std::vector<const WindowSample*> out;
    out.reserve(windows.size());
    for (const auto& w : windows) out.push_back(&w);
    return out;
}

std::vector<int> labels_of(const std::vector<const WindowSample*>& windows) {
    std::vector<int> y;
    y.reserve(windows.size());
    for (const auto* w : windows) y.push_back(to_int(w->label));
    return y;
}

// One unrolled window per row.
Matrix stack_flat(const std::vector<const WindowSample*>& windows) {
    if (windows.empty()) return {};
    const Eigen::Index width = windows.front()->x.size();
    Matrix X(static_cast<Eigen::Index>(windows.size()), width);
    for (std::size_t i = 0; i < windows.size(); ++i) {
        X.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::RowVectorXd>(windows[i]->x.data(), width);
    }
    return X;
}

std::vector<SequenceExample> sequence_examples(const std::vector<const WindowSample*>& windows) {
    std::vector<SequenceExample> out;
    out.reserve(windows.size());
    for (const auto* w : windows) out.push_back({&w->x, to_int(w->label)});
    return out;
}

std::vector<double> score_pointers(const Classifier& model, const std::vector<const WindowSample*>& windows,
                                   int jobs) {
    std::vector<double> scores(windows.size());
    parallel_for(windows.size(), jobs, [&](std::size_t i) {
        const Matrix& x = windows[i]->x;
        if (const auto* rf = std::get_if<RandomForest>(&model)) {
            scores[i] = rf->predict_proba(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
        } else {
            scores[i] = std::get<SeqModel>(model).predict_proba(x);
        }
    });
    return scores;
}

std::vector<const WindowSample*> gather(const std::vector<std::vector<WindowSample>>& per_scene,
                                        const std::vector<std::size_t>& scene_indices) {
    std::vector<const WindowSample*> out;
    for (std::size_t s : scene_indices) {
        for (const auto& w : per_scene[s]) out.push_back(&w);
    }
    return out;
}

std::vector<WindowSample> windows_of(const std::vector<const Scene*>& scenes, const ClassificationConfig& cfg) {
    return slide_all(scenes, cfg.kind, cfg.window, cfg.stride);
}

}  // namespace

std::string_view to_string(Family f) { return f == Family::Rf ? "rf" : "seq"; }

Family family_from_string(std::string_view s) {
    if (s == "rf") return Family::Rf;
    if (s == "seq" || s == "lstm") return Family::Seq;
    throw ConfigError("unknown model family '" + std::string(s) + "' (expected rf or seq)");
}

ClassificationScores score_predictions(std::span<const double> scores, std::span<const int> labels) {
    ClassificationScores s;
    s.auroc = roc_auc(scores, labels);
    s.aupr = pr_auc(scores, labels);
    const auto t = threshold_metrics(scores, labels, 0.5);
    s.accuracy = t.accuracy;
    s.precision = t.precision;
    s.recall = t.recall;
    s.f1 = t.f1;
    return s;
}

void ClassificationConfig::validate() const {
    if (window < 1) throw ConfigError("window length must be at least 1");
    if (stride < 1) throw ConfigError("stride must be at least 1");
    if (repeats < 1) throw ConfigError("repeats must be at least 1");
    if (folds < 2) throw ConfigError("folds must be at least 2");
    if (family == Family::Rf) {
        if (rf_grid.empty()) throw ConfigError("random forest grid is empty");
        for (const auto& p : rf_grid) p.validate();
    } else {
        if (seq_grid.empty()) throw ConfigError("sequence model grid is empty");
        for (const auto& p : seq_grid) p.validate();
    }
}

std::vector<double> score_windows(const Classifier& model, const std::vector<WindowSample>& windows, int jobs) {
    return score_pointers(model, pointers(windows), jobs);
}

FittedClassifier fit_classifier(const std::vector<const Scene*>& train, const std::vector<const Scene*>& val,
                                const ClassificationConfig& cfg, std::uint64_t seed, int jobs,
                                const ExperimentHooks* hooks) {
    cfg.validate();
    if (hooks && hooks->on_grid_search_input) hooks->on_grid_search_input(train);

    std::vector<std::vector<WindowSample>> per_scene;
    std::vector<int> scene_labels;
    for (const Scene* s : train) {
        per_scene.push_back(slide(*s, cfg.kind, cfg.window, cfg.stride));
        scene_labels.push_back(to_int(s->label));
    }

    const bool rf = cfg.family == Family::Rf;
    const std::size_t n_configs = rf ? cfg.rf_grid.size() : cfg.seq_grid.size();
    const FoldEvaluator evaluate = [&](std::size_t c, std::size_t f, const std::vector<std::size_t>& fit_idx,
                                       const std::vector<std::size_t>& held_idx) {
        const auto fit = gather(per_scene, fit_idx);
        const auto held = gather(per_scene, held_idx);
        const std::uint64_t model_seed = derive_seed(derive_seed(seed, "cv-model", c), f);
        Classifier model;
        if (rf) {
            const auto y = labels_of(fit);
            model = rf_train(stack_flat(fit), y, cfg.rf_grid[c], model_seed, 1);
        } else {
            // The held-out fold doubles as the early-stopping monitor inside CV.
            const auto fit_ex = sequence_examples(fit);
            const auto held_ex = sequence_examples(held);
            model = seq_train(fit_ex, held_ex, cfg.seq_grid[c], model_seed, 1);
        }
        const auto scores = score_pointers(model, held, 1);
        return roc_auc(scores, labels_of(held));
    };

    FittedClassifier out;
    out.grid = grid_search(n_configs, scene_labels, cfg.folds, derive_seed(seed, "cv", 0), jobs, evaluate);
    out.chosen_config = out.grid.best_index;

    std::vector<std::size_t> all(train.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const auto train_windows = gather(per_scene, all);
    const std::uint64_t final_seed = derive_seed(seed, "final", 0);
    if (rf) {
        const auto& p = cfg.rf_grid[out.chosen_config];
        out.hyperparameters = to_json(p);
        out.model = rf_train(stack_flat(train_windows), labels_of(train_windows), p, final_seed, jobs);
    } else {
        const auto& p = cfg.seq_grid[out.chosen_config];
        out.hyperparameters = to_json(p);
        const auto val_windows = windows_of(val, cfg);
        const auto train_ex = sequence_examples(train_windows);
        const auto val_ex = sequence_examples(pointers(val_windows));
        out.model = seq_train(train_ex, val_ex, p, final_seed, jobs);
    }
    return out;
}

namespace {

struct RepeatFit {
    RepeatRecord record;
    FittedClassifier fitted;
    std::vector<WindowSample> test;
};

RepeatFit fit_repeat(const std::vector<Scene>& scenes, const ClassificationConfig& cfg, int repeat, int jobs,
                     const ExperimentHooks* hooks) {
    RepeatFit out;
    const std::uint64_t rs = derive_seed(cfg.seed, static_cast<std::uint64_t>(repeat));
    const SplitPlan plan = split_scenes(scenes, rs);
    const auto train = select_scenes(scenes, plan.train_ids);
    const auto val = select_scenes(scenes, plan.val_ids);
    const auto test = select_scenes(scenes, plan.test_ids);

    out.fitted = fit_classifier(train, val, cfg, rs, jobs, hooks);
    out.test = windows_of(test, cfg);

    auto& r = out.record;
    r.repeat = repeat;
    r.seed = rs;
    r.train_windows = windows_of(train, cfg).size();
    r.val_windows = windows_of(val, cfg).size();
    r.test_windows = out.test.size();
    r.chosen_config = out.fitted.chosen_config;
    r.hyperparameters = out.fitted.hyperparameters;
    for (const auto& f : out.fitted.grid.failures) r.failed_configs += f.empty() ? 0 : 1;
    return out;
}

ClassificationScores score_test(const Classifier& model, const std::vector<WindowSample>& test, int jobs) {
    const auto ptrs = pointers(test);
    const auto scores = score_pointers(model, ptrs, jobs);
    return score_predictions(scores, labels_of(ptrs));
}

}  // namespace

ClassificationReport run_classification_experiment(const std::vector<Scene>& scenes, const ClassificationConfig& cfg,
                                                   int jobs, const ExperimentHooks* hooks) {
    cfg.validate();
    ClassificationReport report;
    report.experiment_id = "classify-" + std::string(to_string(cfg.family)) + "-" + std::string(to_string(cfg.kind)) +
                           "-W" + std::to_string(cfg.window);
    report.config = to_json(cfg);
    for (int r = 0; r < cfg.repeats; ++r) {
        auto fit = fit_repeat(scenes, cfg, r, jobs, hooks);
        report.scores.push_back(score_test(fit.fitted.model, fit.test, jobs));
        report.repeats.push_back(std::move(fit.record));
    }
    return report;
}

json ClassificationReport::to_json() const {
    json j = report_header(experiment_id, config);
    json reps = json::array();
    for (std::size_t i = 0; i < repeats.size(); ++i) {
        json r = repeat_to_json(repeats[i]);
        r["scores"] = scores_to_json(scores[i]);
        reps.push_back(std::move(r));
    }
    j["repeats"] = std::move(reps);
    j["summary"] = summarize_scores(scores);
    return j;
}

std::string ClassificationReport::to_csv() const {
    std::ostringstream out;
    out << "experiment,repeat,seed";
    for (const char* name : kScoreNames) out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < repeats.size(); ++i) {
        out << experiment_id << ',' << repeats[i].repeat << ',' << repeats[i].seed;
        for (double v : score_values(scores[i])) out << ',' << format_double(v);
        out << '\n';
    }
    return out.str();
}

void DegradationConfig::validate() const {
    base.validate();
    if (drop_rates.empty()) throw ConfigError("at least one drop rate is required");
    for (double r : drop_rates) {
        if (!(r > 0.0 && r < 1.0)) throw ConfigError("drop rate " + format_double(r) + " is outside (0, 1)");
    }
}

DegradationReport run_degradation_sweep(const std::vector<Scene>& scenes, const DegradationConfig& cfg_in, int jobs) {
    DegradationConfig cfg = cfg_in;
    cfg.base.kind = DatasetKind::SD;
    cfg.validate();

    DegradationReport report;
    report.experiment_id = "degrade-" + std::string(to_string(cfg.base.family)) + "-W" + std::to_string(cfg.base.window);
    report.config = to_json(cfg);
    report.rows.push_back({0.0, {}});
    for (double r : cfg.drop_rates) report.rows.push_back({r, {}});

    for (int rep = 0; rep < cfg.base.repeats; ++rep) {
        auto fit = fit_repeat(scenes, cfg.base, rep, jobs, nullptr);
        report.rows[0].scores.push_back(score_test(fit.fitted.model, fit.test, jobs));
        for (std::size_t i = 0; i < cfg.drop_rates.size(); ++i) {
            const auto degraded = degrade(fit.test, cfg.drop_rates[i], derive_seed(fit.record.seed, "degrade", i));
            std::vector<WindowSample> imputed;
            imputed.reserve(degraded.size());
            for (const auto& w : degraded) imputed.push_back(impute_last_known(w));
            report.rows[i + 1].scores.push_back(score_test(fit.fitted.model, imputed, jobs));
        }
        report.repeats.push_back(std::move(fit.record));
    }
    return report;
}

json DegradationReport::to_json() const {
    json j = report_header(experiment_id, config);
    json reps = json::array();
    for (const auto& r : repeats) reps.push_back(repeat_to_json(r));
    j["repeats"] = std::move(reps);
    json rows_json = json::array();
    for (const auto& row : rows) {
        json per = json::array();
        for (const auto& s : row.scores) per.push_back(scores_to_json(s));
        rows_json.push_back({{"drop_rate", row.drop_rate}, {"per_repeat", per}, {"summary", summarize_scores(row.scores)}});
    }
    j["rows"] = std::move(rows_json);
    return j;
}

std::string DegradationReport::to_csv() const {
    std::ostringstream out;
    out << "experiment,drop_rate,repeat,seed";
    for (const char* name : kScoreNames) out << ',' << name;
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.scores.size(); ++i) {
            out << experiment_id << ',' << format_double(row.drop_rate) << ',' << repeats[i].repeat << ','
                << repeats[i].seed;
            for (double v : score_values(row.scores[i])) out << ',' << format_double(v);
            out << '\n';
        }
    }
    return out.str();
}

namespace {

struct ForecastErrors {
    double sq_normalized = 0.0;
    double sq_physical = 0.0;
    std::vector<double> sq_physical_per_feature;
    std::size_t elements = 0;  // entries per error sum
    std::size_t rows = 0;      // per-feature denominator

    RmsePair rmse() const {
        if (elements == 0) throw DataError("forecast error over zero windows");
        const double n = static_cast<double>(elements);
        return {std::sqrt(sq_normalized / n), std::sqrt(sq_physical / n)};
    }
};

ForecastErrors forecast_errors(const MlpModel& model, const std::vector<const WindowSample*>& windows) {
    const auto H = static_cast<Eigen::Index>(model.params.history);
    const auto F = static_cast<Eigen::Index>(model.params.horizon);
    ForecastErrors e;
    e.sq_physical_per_feature.assign(static_cast<std::size_t>(model.params.state_dim), 0.0);
    for (const auto* w : windows) {
        if (w->x.rows() < H + F) throw DataError("autoregression window shorter than H+F");
        const Matrix history = w->x.topRows(H);
        const Matrix truth = w->x.middleRows(H, F);
        const Matrix pred_norm = model.predict_normalized(model.normalizer.apply(history));
        const Matrix pred = model.normalizer.invert(pred_norm);
        e.sq_normalized += (pred_norm - model.normalizer.apply(truth)).squaredNorm();
        const Matrix diff = pred - truth;
        e.sq_physical += diff.squaredNorm();
        for (Eigen::Index c = 0; c < diff.cols(); ++c) {
            e.sq_physical_per_feature[static_cast<std::size_t>(c)] += diff.col(c).squaredNorm();
        }
        e.elements += static_cast<std::size_t>(diff.size());
        e.rows += static_cast<std::size_t>(diff.rows());
    }
    return e;
}

}  // namespace

ClassRmse compare_classes(const MlpModel& model, const std::vector<const WindowSample*>& test) {
    std::vector<const WindowSample*> human, autonomous;
    for (const auto* w : test) (w->label == Label::Human ? human : autonomous).push_back(w);
    if (human.empty() || autonomous.empty()) {
        throw DataError("compare_classes: both labels must be present among the test windows");
    }
    return {forecast_errors(model, human).rmse(), forecast_errors(model, autonomous).rmse()};
}

void AutoregressionConfig::validate() const {
    if (histories.empty() || horizons.empty()) throw ConfigError("history and horizon grids must be non-empty");
    for (int h : histories) {
        if (h < 1) throw ConfigError("history lengths must be at least 1");
    }
    for (int f : horizons) {
        if (f < 1) throw ConfigError("horizon lengths must be at least 1");
    }
    if (window < 2) throw ConfigError("autoregression window must hold at least 2 rows");
    if (stride < 1) throw ConfigError("stride must be at least 1");
    if (repeats < 1) throw ConfigError("repeats must be at least 1");
    MlpHyperParams probe = mlp;
    probe.history = 1;
    probe.horizon = 1;
    probe.validate();
}

AutoregressionReport run_autoregression_sweep(const std::vector<Scene>& scenes, const AutoregressionConfig& cfg,
                                              int jobs) {
    cfg.validate();
    AutoregressionReport report;
    report.experiment_id = "autoregress-W" + std::to_string(cfg.window);
    report.config = to_json(cfg);

    struct SplitWindows {
        std::vector<WindowSample> train, val, test;
    };
    std::vector<SplitWindows> splits(static_cast<std::size_t>(cfg.repeats));
    for (int r = 0; r < cfg.repeats; ++r) {
        const std::uint64_t rs = derive_seed(cfg.seed, static_cast<std::uint64_t>(r));
        report.repeat_seeds.push_back(rs);
        const SplitPlan plan = split_scenes(scenes, rs);
        auto& sw = splits[static_cast<std::size_t>(r)];
        sw.train = slide_all(select_scenes(scenes, plan.train_ids), DatasetKind::S, cfg.window, cfg.stride);
        sw.val = slide_all(select_scenes(scenes, plan.val_ids), DatasetKind::S, cfg.window, cfg.stride);
        sw.test = slide_all(select_scenes(scenes, plan.test_ids), DatasetKind::S, cfg.window, cfg.stride);
    }

    struct Task {
        std::size_t cell;
        int repeat;
    };
    std::vector<Task> tasks;
    for (int h : cfg.histories) {
        for (int f : cfg.horizons) {
            AutoregressionCell cell;
            cell.history = h;
            cell.horizon = f;
            if (static_cast<std::size_t>(h + f) > cfg.window) {
                cell.skipped = true;
                cell.skip_reason = "H+F=" + std::to_string(h + f) + " exceeds the window of " +
                                   std::to_string(cfg.window) + " rows";
            } else {
                cell.repeats.resize(static_cast<std::size_t>(cfg.repeats));
                for (int r = 0; r < cfg.repeats; ++r) tasks.push_back({report.cells.size(), r});
            }
            report.cells.push_back(std::move(cell));
        }
    }

    parallel_for(tasks.size(), jobs, [&](std::size_t t) {
        const Task& task = tasks[t];
        auto& cell = report.cells[task.cell];
        const auto& sw = splits[static_cast<std::size_t>(task.repeat)];
        std::vector<const Matrix*> train, val;
        for (const auto& w : sw.train) train.push_back(&w.x);
        for (const auto& w : sw.val) val.push_back(&w.x);
        MlpHyperParams p = cfg.mlp;
        p.history = cell.history;
        p.horizon = cell.horizon;
        auto& out = cell.repeats[static_cast<std::size_t>(task.repeat)];
        out.seed = derive_seed(report.repeat_seeds[static_cast<std::size_t>(task.repeat)], "mlp", task.cell);
        const MlpModel model = mlp_train(train, val, p, out.seed);
        out.epochs = static_cast<int>(model.log.size());
        out.best_epoch = model.best_epoch;
        const auto test = pointers(sw.test);
        const ForecastErrors e = forecast_errors(model, test);
        const RmsePair overall = e.rmse();
        out.rmse_normalized = overall.normalized;
        out.rmse_physical = overall.physical;
        for (double sq : e.sq_physical_per_feature) {
            out.rmse_physical_per_feature.push_back(std::sqrt(sq / static_cast<double>(e.rows)));
        }
        out.by_class = compare_classes(model, test);
    });
    return report;
}

std::vector<ClassRmse> AutoregressionReport::class_means_per_repeat() const {
    std::vector<ClassRmse> out(repeat_seeds.size());
    std::size_t evaluated = 0;
    for (const auto& cell : cells) {
        if (cell.skipped) continue;
        ++evaluated;
        for (std::size_t r = 0; r < cell.repeats.size(); ++r) {
            const auto& c = cell.repeats[r].by_class;
            out[r].human.normalized += c.human.normalized;
            out[r].human.physical += c.human.physical;
            out[r].autonomous.normalized += c.autonomous.normalized;
            out[r].autonomous.physical += c.autonomous.physical;
        }
    }
    if (evaluated == 0) return out;
    const double n = static_cast<double>(evaluated);
    for (auto& c : out) {
        c.human.normalized /= n;
        c.human.physical /= n;
        c.autonomous.normalized /= n;
        c.autonomous.physical /= n;
    }
    return out;
}

namespace {

json rmse_pair_json(const RmsePair& p) { return {{"normalized", p.normalized}, {"physical", p.physical}}; }

json class_summary_json(const std::vector<ClassRmse>& values) {
    auto stat = [&](auto getter) {
        std::vector<double> v;
        for (const auto& c : values) v.push_back(getter(c));
        return mean_std_json(mean_std(v));
    };
    return {{"human",
             {{"normalized", stat([](const ClassRmse& c) { return c.human.normalized; })},
              {"physical", stat([](const ClassRmse& c) { return c.human.physical; })}}},
            {"autonomous",
             {{"normalized", stat([](const ClassRmse& c) { return c.autonomous.normalized; })},
              {"physical", stat([](const ClassRmse& c) { return c.autonomous.physical; })}}}};
}

std::vector<ClassRmse> cell_class_values(const AutoregressionCell& cell) {
    std::vector<ClassRmse> v;
    for (const auto& r : cell.repeats) v.push_back(r.by_class);
    return v;
}

}  // namespace

json AutoregressionReport::to_json() const {
    json j = report_header(experiment_id, config);
    j["repeat_seeds"] = repeat_seeds;
    json cells_json = json::array();
    for (const auto& cell : cells) {
        json c{{"history", cell.history}, {"horizon", cell.horizon}, {"status", cell.skipped ? "skipped" : "ok"}};
        if (cell.skipped) {
            c["reason"] = cell.skip_reason;
            cells_json.push_back(std::move(c));
            continue;
        }
        json reps = json::array();
        std::vector<double> norm, phys;
        std::vector<std::vector<double>> per_feature(kStateNames.size());
        for (const auto& r : cell.repeats) {
            json pf;
            for (std::size_t k = 0; k < r.rmse_physical_per_feature.size(); ++k) {
                pf[kStateNames[k]] = r.rmse_physical_per_feature[k];
                per_feature[k].push_back(r.rmse_physical_per_feature[k]);
            }
            reps.push_back({{"seed", r.seed},
                            {"epochs", r.epochs},
                            {"best_epoch", r.best_epoch},
                            {"rmse_normalized", r.rmse_normalized},
                            {"rmse_physical", r.rmse_physical},
                            {"rmse_physical_per_feature", pf},
                            {"by_class",
                             {{"human", rmse_pair_json(r.by_class.human)},
                              {"autonomous", rmse_pair_json(r.by_class.autonomous)}}}});
            norm.push_back(r.rmse_normalized);
            phys.push_back(r.rmse_physical);
        }
        json pf_summary;
        for (std::size_t k = 0; k < kStateNames.size(); ++k) pf_summary[kStateNames[k]] = mean_std_json(mean_std(per_feature[k]));
        c["repeats"] = std::move(reps);
        c["summary"] = {{"rmse_normalized", mean_std_json(mean_std(norm))},
                        {"rmse_physical", mean_std_json(mean_std(phys))},
                        {"rmse_physical_per_feature", pf_summary},
                        {"by_class", class_summary_json(cell_class_values(cell))}};
        cells_json.push_back(std::move(c));
    }
    j["cells"] = std::move(cells_json);

    const auto per_repeat = class_means_per_repeat();
    json pr = json::array();
    std::size_t human_lower = 0;
    for (const auto& c : per_repeat) {
        pr.push_back({{"human", rmse_pair_json(c.human)}, {"autonomous", rmse_pair_json(c.autonomous)}});
        human_lower += c.human.normalized < c.autonomous.normalized ? 1 : 0;
    }
    j["class_comparison"] = {{"per_repeat", pr},
                             {"summary", class_summary_json(per_repeat)},
                             {"repeats_human_lower_normalized", human_lower}};
    return j;
}

std::string AutoregressionReport::to_csv() const {
    std::ostringstream out;
    out << "history,horizon,status,repeat,seed,epochs,best_epoch,rmse_normalized,rmse_physical";
    for (const char* name : kStateNames) out << ",rmse_" << name;
    out << '\n';
    for (const auto& cell : cells) {
        if (cell.skipped) {
            out << cell.history << ',' << cell.horizon << ",skipped,,,,,,";
            for (std::size_t k = 0; k < kStateNames.size(); ++k) out << ',';
            out << '\n';
            continue;
        }
        for (std::size_t r = 0; r < cell.repeats.size(); ++r) {
            const auto& rep = cell.repeats[r];
            out << cell.history << ',' << cell.horizon << ",ok," << r << ',' << rep.seed << ',' << rep.epochs << ','
                << rep.best_epoch << ',' << format_double(rep.rmse_normalized) << ','
                << format_double(rep.rmse_physical);
            for (double v : rep.rmse_physical_per_feature) out << ',' << format_double(v);
            out << '\n';
        }
    }
    return out.str();
}

std::string AutoregressionReport::class_comparison_csv() const {
    std::ostringstream out;
    out << "history,horizon,class,rmse_normalized_mean,rmse_normalized_std,rmse_physical_mean,rmse_physical_std\n";
    for (const auto& cell : cells) {
        if (cell.skipped) continue;
        std::vector<double> hn, hp, an, ap;
        for (const auto& r : cell.repeats) {
            hn.push_back(r.by_class.human.normalized);
            hp.push_back(r.by_class.human.physical);
            an.push_back(r.by_class.autonomous.normalized);
            ap.push_back(r.by_class.autonomous.physical);
        }
        auto row = [&](const char* label, const std::vector<double>& n, const std::vector<double>& p) {
            const auto mn = mean_std(n);
            const auto mp = mean_std(p);
            out << cell.history << ',' << cell.horizon << ',' << label << ',' << format_double(mn.mean) << ','
                << format_double(mn.std) << ',' << format_double(mp.mean) << ',' << format_double(mp.std) << '\n';
        };
        row("human", hn, hp);
        row("autonomous", an, ap);
    }
    return out.str();
}

json to_json(const ClassificationConfig& cfg) {
    json grid = json::array();
    if (cfg.family == Family::Rf) {
        for (const auto& p : cfg.rf_grid) grid.push_back(to_json(p));
    } else {
        for (const auto& p : cfg.seq_grid) grid.push_back(to_json(p));
    }
    return {{"kind", std::string(to_string(cfg.kind))},
            {"family", std::string(to_string(cfg.family))},
            {"window", cfg.window},
            {"stride", cfg.stride},
            {"repeats", cfg.repeats},
            {"folds", cfg.folds},
            {"seed", cfg.seed},
            {"grid", grid}};
}

json to_json(const DegradationConfig& cfg) {
    json j = to_json(cfg.base);
    j["drop_rates"] = cfg.drop_rates;
    return j;
}

json to_json(const AutoregressionConfig& cfg) {
    json mlp = to_json(cfg.mlp);
    mlp.erase("history");
    mlp.erase("horizon");
    return {{"histories", cfg.histories}, {"horizons", cfg.horizons}, {"window", cfg.window},
            {"stride", cfg.stride},       {"repeats", cfg.repeats},   {"seed", cfg.seed},
            {"mlp", mlp}};
}

}  // namespace avprof
