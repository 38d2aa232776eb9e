#include "avprof/cli.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "avprof/detection.hpp"
#include "avprof/experiments.hpp"
#include "avprof/scene_io.hpp"
#include "avprof/synth.hpp"

namespace avprof {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOptions {
    std::string config;
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string out = "out";
};

void add_common(CLI::App* sub, CommonOptions& c) {
    sub->add_option("--config", c.config, "JSON file with option values (flags take precedence)");
    sub->add_option("--seed", c.seed, "Master seed")->capture_default_str();
    sub->add_option("--jobs", c.jobs, "Worker threads; results do not depend on it")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", c.out, "Output directory")->capture_default_str();
}

std::string env_name(const std::string& long_name) {
    std::string name = "AVPROF_";
    for (char ch : long_name) name += ch == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    return name;
}

void attach_env_names(CLI::App* sub) {
    for (CLI::Option* opt : sub->get_options()) {
        const auto& names = opt->get_lnames();
        if (names.empty() || names.front() == "help") continue;
        opt->envname(env_name(names.front()));
    }
}

std::string json_scalar_text(const json& v, const std::string& key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw ConfigError("config key '" + key + "' must hold a string, number, boolean or array of those");
}

/// Fills options that neither a flag nor the environment set.
void apply_config_file(CLI::App* sub, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config file " + path + " must hold a JSON object");
    for (const auto& [key, value] : j.items()) {
        std::string name = key;
        std::replace(name.begin(), name.end(), '_', '-');
        CLI::Option* opt = sub->get_option_no_throw("--" + name);
        if (opt == nullptr || name == "config" || name == "help") {
            throw ConfigError("unknown key '" + key + "' in config file " + path);
        }
        if (opt->count() > 0) continue;
        if (value.is_array()) {
            for (const auto& v : value) opt->add_result(json_scalar_text(v, key));
        } else {
            opt->add_result(json_scalar_text(value, key));
        }
        try {
            opt->run_callback();
        } catch (const CLI::Error& e) {
            throw ConfigError("config key '" + key + "': " + e.what());
        }
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

fs::path ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
    return fs::path(dir);
}

json document(const std::string& command, const json& run_config) {
    return {{"tool", "avprof"}, {"version", std::string(kToolVersion)}, {"command", command}, {"run_config", run_config}};
}

// ---- synth -------------------------------------------------------------

struct SynthOptions {
    std::size_t per_class = 30;
    std::size_t T = 120;
    double dt = 0.5;
    bool force = false;
};

int cmd_synth(const CommonOptions& c, const SynthOptions& o, std::ostream& out) {
    const json run_config{{"per_class", o.per_class}, {"T", o.T}, {"dt", o.dt}, {"seed", c.seed}};
    const auto scenes = synth_dataset(o.per_class, o.T, o.dt, c.seed);
    const fs::path root = ensure_dir(c.out);
    json manifest = document("synth", run_config);
    json list = json::array();
    for (const auto& s : scenes) {
        write_scene(s, root / s.id, o.force);
        list.push_back({{"id", s.id}, {"label", to_int(s.label)}});
    }
    manifest["count"] = scenes.size();
    manifest["scenes"] = std::move(list);
    write_json(root / "manifest.json", manifest);
    out << "wrote " << scenes.size() << " scenes to " << root.string() << "\n";
    return kExitOk;
}

// ---- ingest ------------------------------------------------------------

struct IngestOptions {
    std::string input;
    std::string column_map;
    bool force = false;
};

int cmd_ingest(const CommonOptions& c, const IngestOptions& o, std::ostream& out, std::ostream& err) {
    if (o.column_map.empty()) throw ConfigError("ingest requires --column-map");
    if (o.input.empty()) throw ConfigError("ingest requires --input");
    const ColumnMap map = ColumnMap::from_json_file(o.column_map);
    const IngestResult result = ingest_nexus(o.input, map, c.jobs);
    const fs::path root = ensure_dir(c.out);

    json manifest = document("ingest", {{"input", o.input}, {"column_map", o.column_map}});
    json list = json::array();
    std::size_t autonomous = 0;
    for (const auto& s : result.scenes) {
        write_scene(s, root / s.id, o.force);
        list.push_back({{"id", s.id}, {"label", to_int(s.label)}});
        autonomous += s.label == Label::Autonomous ? 1 : 0;
    }
    json skipped = json::array();
    for (const auto& s : result.skipped) skipped.push_back({{"scene", s.scene}, {"reason", s.reason}});
    manifest["count"] = result.scenes.size();
    manifest["per_label"] = {{"human", result.scenes.size() - autonomous}, {"autonomous", autonomous}};
    manifest["scenes"] = std::move(list);
    manifest["skipped"] = std::move(skipped);
    manifest["warnings"] = result.warnings;
    write_json(root / "manifest.json", manifest);
    for (const auto& w : result.warnings) err << "warning: " << w << "\n";
    for (const auto& s : result.skipped) err << "warning: skipped " << s.scene << ": " << s.reason << "\n";
    out << "ingested " << result.scenes.size() << " scenes (" << result.skipped.size() << " skipped)\n";
    return kExitOk;
}

// ---- detect ------------------------------------------------------------

struct DetectOptions {
    std::string candidates;
    std::string templates;
};

int cmd_detect(const CommonOptions& c, const DetectOptions& o, std::ostream& out, std::ostream& err) {
    if (o.candidates.empty() || o.templates.empty()) throw ConfigError("detect requires --candidates and --templates");
    const auto frames = read_candidate_file(o.candidates);
    const TemplateSet templates = read_template_file(o.templates);
    const fs::path root = ensure_dir(c.out);
    json report = document("detect", {{"candidates", o.candidates}, {"templates", o.templates}});
    report["condition"] = templates.condition_tag;
    report["frames"] = frames.size();

    DetectionSeries series;
    try {
        series = assemble_detection_series(frames, templates);
    } catch (const DataError& e) {
        report["status"] = "error";
        report["message"] = e.what();
        write_json(root / "detect_report.json", report);
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }

    std::string csv = "frame,selected,cx,cy,h,w\n";
    json selected = json::array();
    std::size_t filled = 0;
    for (std::size_t f = 0; f < series.boxes.size(); ++f) {
        const auto& b = series.boxes[f];
        const auto& sel = series.selected[f];
        csv += std::to_string(f) + "," + (sel ? std::to_string(*sel) : std::string()) + "," + format_double(b.cx) +
               "," + format_double(b.cy) + "," + format_double(b.h) + "," + format_double(b.w) + "\n";
        selected.push_back(sel ? json(*sel) : json(nullptr));
        filled += sel ? 0 : 1;
    }
    write_text(root / "detections.csv", csv);
    report["status"] = "ok";
    report["selected"] = std::move(selected);
    report["filled_frames"] = filled;
    write_json(root / "detect_report.json", report);
    out << "selected targets in " << (series.boxes.size() - filled) << " of " << series.boxes.size() << " frames\n";
    return kExitOk;
}

// ---- classify / degrade ------------------------------------------------

struct GridOptions {
    std::vector<int> rf_trees{100, 200, 300, 400, 500, 600, 700, 800, 900, 1000};
    std::vector<int> rf_min_leaf{1, 2, 3, 4, 5};
    std::vector<std::string> rf_criterion{"gini", "entropy"};
    std::vector<std::string> rf_max_features{"sqrt", "log2"};
    std::vector<int> seq_depth{1, 4, 8};
    std::vector<double> seq_dropout{0.1, 0.3};
    std::vector<int> seq_hidden{32, 64, 128};
    int seq_batch_size = 256;
    double seq_learning_rate = 1e-4;
    int seq_max_epochs = 1000;
    int seq_patience = 5;
};

void add_grid_options(CLI::App* sub, GridOptions& g) {
    sub->add_option("--rf-trees", g.rf_trees, "Forest sizes searched")->delimiter(',')->capture_default_str();
    sub->add_option("--rf-min-leaf", g.rf_min_leaf, "Minimum leaf sizes searched")->delimiter(',')->capture_default_str();
    sub->add_option("--rf-criterion", g.rf_criterion, "Split criteria searched")->delimiter(',')->capture_default_str();
    sub->add_option("--rf-max-features", g.rf_max_features, "Feature subset rules searched")
        ->delimiter(',')
        ->capture_default_str();
    sub->add_option("--seq-depth", g.seq_depth, "Stacked cell counts searched")->delimiter(',')->capture_default_str();
    sub->add_option("--seq-dropout", g.seq_dropout, "Dropout rates searched")->delimiter(',')->capture_default_str();
    sub->add_option("--seq-hidden", g.seq_hidden, "Hidden widths searched")->delimiter(',')->capture_default_str();
    sub->add_option("--seq-batch-size", g.seq_batch_size)->capture_default_str();
    sub->add_option("--seq-learning-rate", g.seq_learning_rate)->capture_default_str();
    sub->add_option("--seq-max-epochs", g.seq_max_epochs)->capture_default_str();
    sub->add_option("--seq-patience", g.seq_patience)->capture_default_str();
}

std::vector<RfHyperParams> build_rf_grid(const GridOptions& g) {
    std::vector<RfHyperParams> grid;
    for (int trees : g.rf_trees) {
        for (int leaf : g.rf_min_leaf) {
            for (const auto& c : g.rf_criterion) {
                for (const auto& m : g.rf_max_features) {
                    RfHyperParams p;
                    p.n_trees = trees;
                    p.min_leaf = leaf;
                    p.criterion = criterion_from_string(c);
                    p.max_features = max_features_from_string(m);
                    grid.push_back(p);
                }
            }
        }
    }
    return grid;
}

std::vector<SeqHyperParams> build_seq_grid(const GridOptions& g) {
    std::vector<SeqHyperParams> grid;
    for (int depth : g.seq_depth) {
        for (double dropout : g.seq_dropout) {
            for (int hidden : g.seq_hidden) {
                SeqHyperParams p;
                p.depth = depth;
                p.dropout = dropout;
                p.hidden_dim = hidden;
                p.batch_size = g.seq_batch_size;
                p.learning_rate = g.seq_learning_rate;
                p.max_epochs = g.seq_max_epochs;
                p.patience = g.seq_patience;
                grid.push_back(p);
            }
        }
    }
    return grid;
}

std::vector<Scene> load_scenes(const std::string& data) {
    if (data.empty()) throw ConfigError("--data is required");
    if (!fs::is_directory(data)) throw IoError("dataset directory " + data + " does not exist");
    auto scenes = load_dataset(data);
    if (scenes.empty()) throw DataError("dataset directory " + data + " holds no scenes");
    return scenes;
}

std::size_t shortest_scene(const std::vector<Scene>& scenes) {
    std::size_t n = scenes.front().length();
    for (const auto& s : scenes) n = std::min(n, s.length());
    return n;
}

/// Window lengths from explicit --window values or --duration seconds.
std::vector<std::size_t> resolve_windows(const std::vector<std::size_t>& windows, const std::vector<double>& durations,
                                         const std::vector<Scene>& scenes) {
    if (!windows.empty() && !durations.empty()) throw ConfigError("give either --window or --duration, not both");
    std::vector<std::size_t> out = windows;
    for (double d : durations) out.push_back(window_length_for(d, scenes.front().sample_interval_s));
    if (out.empty()) out.push_back(50);
    const std::size_t T = shortest_scene(scenes);
    for (std::size_t w : out) {
        if (w < 1 || w > T) {
            throw ConfigError("window length " + std::to_string(w) + " does not fit scenes of " + std::to_string(T) +
                              " timestamps");
        }
    }
    return out;
}

struct ClassifyOptions {
    std::string data;
    std::vector<std::string> families{"rf"};
    std::vector<std::string> kinds{"S"};
    std::vector<std::size_t> windows;
    std::vector<double> durations;
    std::size_t stride = 1;
    int repeats = 5;
    int folds = 5;
    GridOptions grid;
};

json grid_run_config(const GridOptions& g, Family family) {
    if (family == Family::Rf) {
        return {{"rf_trees", g.rf_trees},
                {"rf_min_leaf", g.rf_min_leaf},
                {"rf_criterion", g.rf_criterion},
                {"rf_max_features", g.rf_max_features}};
    }
    return {{"seq_depth", g.seq_depth},           {"seq_dropout", g.seq_dropout},
            {"seq_hidden", g.seq_hidden},         {"seq_batch_size", g.seq_batch_size},
            {"seq_learning_rate", g.seq_learning_rate}, {"seq_max_epochs", g.seq_max_epochs},
            {"seq_patience", g.seq_patience}};
}

int cmd_classify(const CommonOptions& c, const ClassifyOptions& o, std::ostream& out) {
    std::vector<Family> families;
    for (const auto& f : o.families) families.push_back(family_from_string(f));
    std::vector<DatasetKind> kinds;
    for (const auto& k : o.kinds) {
        try {
            kinds.push_back(dataset_kind_from_string(k));
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    }
    const auto scenes = load_scenes(o.data);
    const auto windows = resolve_windows(o.windows, o.durations, scenes);
    const fs::path root = ensure_dir(c.out);

    std::size_t written = 0;
    for (Family family : families) {
        for (DatasetKind kind : kinds) {
            for (std::size_t w : windows) {
                ClassificationConfig cfg;
                cfg.kind = kind;
                cfg.family = family;
                cfg.window = w;
                cfg.stride = o.stride;
                cfg.repeats = o.repeats;
                cfg.folds = o.folds;
                cfg.seed = c.seed;
                cfg.rf_grid = build_rf_grid(o.grid);
                cfg.seq_grid = build_seq_grid(o.grid);
                cfg.validate();
                const auto report = run_classification_experiment(scenes, cfg, c.jobs);

                json run_config{{"data", o.data}, {"family", std::string(to_string(family))},
                                {"kind", std::string(to_string(kind))}, {"window", w},
                                {"stride", o.stride}, {"repeats", o.repeats},
                                {"folds", o.folds}, {"seed", c.seed}};
                run_config.update(grid_run_config(o.grid, family));
                json doc = report.to_json();
                doc["command"] = "classify";
                doc["run_config"] = run_config;
                write_json(root / (report.experiment_id + ".json"), doc);
                write_text(root / (report.experiment_id + ".csv"), report.to_csv());
                ++written;
                out << report.experiment_id << ": auROC " << format_double(doc["summary"]["auroc"]["mean"].get<double>())
                    << "\n";
            }
        }
    }
    out << "wrote " << written << " reports to " << root.string() << "\n";
    return kExitOk;
}

struct DegradeOptions {
    std::string data;
    std::string family = "rf";
    std::vector<std::size_t> windows;
    std::vector<double> durations;
    std::size_t stride = 1;
    int repeats = 5;
    int folds = 5;
    std::vector<double> drop_rates{0.2, 0.4, 0.6, 0.8};
    GridOptions grid;
};

int cmd_degrade(const CommonOptions& c, const DegradeOptions& o, std::ostream& out) {
    DegradationConfig cfg;
    cfg.base.family = family_from_string(o.family);
    cfg.drop_rates = o.drop_rates;
    for (double r : cfg.drop_rates) {
        if (!(r > 0.0 && r < 1.0)) throw ConfigError("drop rate " + format_double(r) + " is outside (0, 1)");
    }
    if (o.windows.size() + o.durations.size() > 1) throw ConfigError("degrade takes a single window length");
    const auto scenes = load_scenes(o.data);
    const auto windows = resolve_windows(o.windows, o.durations, scenes);
    cfg.base.kind = DatasetKind::SD;
    cfg.base.window = windows.front();
    cfg.base.stride = o.stride;
    cfg.base.repeats = o.repeats;
    cfg.base.folds = o.folds;
    cfg.base.seed = c.seed;
    cfg.base.rf_grid = build_rf_grid(o.grid);
    cfg.base.seq_grid = build_seq_grid(o.grid);
    cfg.validate();
    const fs::path root = ensure_dir(c.out);
    const auto report = run_degradation_sweep(scenes, cfg, c.jobs);

    json run_config{{"data", o.data},       {"family", o.family},   {"window", cfg.base.window},
                    {"stride", o.stride},   {"repeats", o.repeats}, {"folds", o.folds},
                    {"seed", c.seed},       {"drop_rates", o.drop_rates}};
    run_config.update(grid_run_config(o.grid, cfg.base.family));
    json doc = report.to_json();
    doc["command"] = "degrade";
    doc["run_config"] = run_config;
    write_json(root / (report.experiment_id + ".json"), doc);
    write_text(root / (report.experiment_id + ".csv"), report.to_csv());
    for (const auto& row : doc["rows"]) {
        out << "r=" << format_double(row["drop_rate"].get<double>())
            << ": auROC " << format_double(row["summary"]["auroc"]["mean"].get<double>()) << "\n";
    }
    return kExitOk;
}

// ---- autoregress -------------------------------------------------------

struct AutoregressOptions {
    std::string data;
    std::vector<int> histories{1, 2, 4, 6, 8, 10, 12};
    std::vector<int> horizons{1, 2, 4, 6, 8};
    std::size_t window = 20;
    std::size_t stride = 1;
    int repeats = 5;
    int max_epochs = 10000;
    int patience = 10;
    int batch_size = 32;
    double learning_rate = 1e-4;
};

int cmd_autoregress(const CommonOptions& c, const AutoregressOptions& o, std::ostream& out) {
    AutoregressionConfig cfg;
    cfg.histories = o.histories;
    cfg.horizons = o.horizons;
    cfg.window = o.window;
    cfg.stride = o.stride;
    cfg.repeats = o.repeats;
    cfg.seed = c.seed;
    cfg.mlp.max_epochs = o.max_epochs;
    cfg.mlp.patience = o.patience;
    cfg.mlp.batch_size = o.batch_size;
    cfg.mlp.learning_rate = o.learning_rate;
    cfg.validate();
    const auto scenes = load_scenes(o.data);
    if (o.window > shortest_scene(scenes)) throw ConfigError("autoregression window exceeds the scene length");
    const fs::path root = ensure_dir(c.out);
    const auto report = run_autoregression_sweep(scenes, cfg, c.jobs);

    const json run_config{{"data", o.data},           {"histories", o.histories},   {"horizons", o.horizons},
                          {"window", o.window},       {"stride", o.stride},         {"repeats", o.repeats},
                          {"max_epochs", o.max_epochs}, {"patience", o.patience},   {"batch_size", o.batch_size},
                          {"learning_rate", o.learning_rate}, {"seed", c.seed}};
    json doc = report.to_json();
    doc["command"] = "autoregress";
    doc["run_config"] = run_config;
    write_json(root / "autoregress.json", doc);
    write_text(root / "autoregress.csv", report.to_csv());
    write_text(root / "class_comparison.csv", report.class_comparison_csv());
    std::size_t skipped = 0;
    for (const auto& cell : report.cells) skipped += cell.skipped ? 1 : 0;
    out << "evaluated " << report.cells.size() - skipped << " cells, skipped " << skipped << "\n";
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Autonomous-vs-human driver profiling toolkit", "avprof"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    CommonOptions common;

    SynthOptions synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a labeled synthetic scene dataset");
    add_common(synth_cmd, common);
    synth_cmd->add_option("--per-class", synth.per_class, "Scenes per label")->capture_default_str();
    synth_cmd->add_option("--T", synth.T, "Timestamps per scene")->capture_default_str();
    synth_cmd->add_option("--dt", synth.dt, "Sample interval in seconds")->capture_default_str();
    synth_cmd->add_flag("--force", synth.force, "Overwrite existing scene files");

    IngestOptions ingest;
    auto* ingest_cmd = app.add_subcommand("ingest", "Convert an archive of scenes into the canonical format");
    add_common(ingest_cmd, common);
    ingest_cmd->add_option("--input", ingest.input, "Archive root (one subdirectory per scene)");
    ingest_cmd->add_option("--column-map", ingest.column_map, "JSON column mapping");
    ingest_cmd->add_flag("--force", ingest.force, "Overwrite existing scene files");

    DetectOptions detect;
    auto* detect_cmd = app.add_subcommand("detect", "Select the target box per frame from candidate detections");
    add_common(detect_cmd, common);
    detect_cmd->add_option("--candidates", detect.candidates, "JSON-lines candidate file");
    detect_cmd->add_option("--templates", detect.templates, "JSON template embedding file");

    ClassifyOptions classify;
    auto* classify_cmd = app.add_subcommand("classify", "Repeated-split classification experiments");
    add_common(classify_cmd, common);
    classify_cmd->add_option("--data", classify.data, "Canonical dataset directory");
    classify_cmd->add_option("--family", classify.families, "rf and/or seq")->delimiter(',')->capture_default_str();
    classify_cmd->add_option("--kind", classify.kinds, "S, D and/or S+D")->delimiter(',')->capture_default_str();
    classify_cmd->add_option("--window", classify.windows, "Window lengths in timestamps")->delimiter(',');
    classify_cmd->add_option("--duration", classify.durations, "Window durations in seconds")->delimiter(',');
    classify_cmd->add_option("--stride", classify.stride)->capture_default_str()->check(CLI::PositiveNumber);
    classify_cmd->add_option("--repeats", classify.repeats)->capture_default_str()->check(CLI::PositiveNumber);
    classify_cmd->add_option("--folds", classify.folds)->capture_default_str();
    add_grid_options(classify_cmd, classify.grid);

    DegradeOptions degrade_opts;
    auto* degrade_cmd = app.add_subcommand("degrade", "State-dropout robustness sweep on S+D windows");
    add_common(degrade_cmd, common);
    degrade_cmd->add_option("--data", degrade_opts.data, "Canonical dataset directory");
    degrade_cmd->add_option("--family", degrade_opts.family, "rf or seq")->capture_default_str();
    degrade_cmd->add_option("--window", degrade_opts.windows, "Window length in timestamps");
    degrade_cmd->add_option("--duration", degrade_opts.durations, "Window duration in seconds");
    degrade_cmd->add_option("--stride", degrade_opts.stride)->capture_default_str()->check(CLI::PositiveNumber);
    degrade_cmd->add_option("--repeats", degrade_opts.repeats)->capture_default_str()->check(CLI::PositiveNumber);
    degrade_cmd->add_option("--folds", degrade_opts.folds)->capture_default_str();
    degrade_cmd->add_option("--drop-rates", degrade_opts.drop_rates, "Drop rates in (0, 1)")
        ->delimiter(',')
        ->capture_default_str();
    add_grid_options(degrade_cmd, degrade_opts.grid);

    AutoregressOptions ar;
    auto* ar_cmd = app.add_subcommand("autoregress", "History/horizon sweep of the state autoregressor");
    add_common(ar_cmd, common);
    ar_cmd->add_option("--data", ar.data, "Canonical dataset directory");
    ar_cmd->add_option("--histories", ar.histories, "History lengths H")->delimiter(',')->capture_default_str();
    ar_cmd->add_option("--horizons", ar.horizons, "Horizon lengths F")->delimiter(',')->capture_default_str();
    ar_cmd->add_option("--window", ar.window, "Window length in timestamps")->capture_default_str();
    ar_cmd->add_option("--stride", ar.stride)->capture_default_str()->check(CLI::PositiveNumber);
    ar_cmd->add_option("--repeats", ar.repeats)->capture_default_str()->check(CLI::PositiveNumber);
    ar_cmd->add_option("--max-epochs", ar.max_epochs)->capture_default_str();
    ar_cmd->add_option("--patience", ar.patience)->capture_default_str();
    ar_cmd->add_option("--batch-size", ar.batch_size)->capture_default_str();
    ar_cmd->add_option("--learning-rate", ar.learning_rate)->capture_default_str();

    for (auto* sub : app.get_subcommands({})) attach_env_names(sub);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return kExitOk;
        }
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        if (!common.config.empty()) apply_config_file(sub, common.config);
        if (sub == synth_cmd) return cmd_synth(common, synth, out);
        if (sub == ingest_cmd) return cmd_ingest(common, ingest, out, err);
        if (sub == detect_cmd) return cmd_detect(common, detect, out, err);
        if (sub == classify_cmd) return cmd_classify(common, classify, out);
        if (sub == degrade_cmd) return cmd_degrade(common, degrade_opts, out);
        return cmd_autoregress(common, ar, out);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const CLI::Error& e) {
        err << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

}  // namespace avprof
