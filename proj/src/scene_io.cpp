#include "avprof/scene_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace avprof {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<const char*, 10> kCanonicalColumns = {
    "t", "range_m", "speed_mps", "accel_mps2", "lane_offset_m", "yaw_rad",
    "det_cx", "det_cy", "det_h", "det_w"};

// Keys that live in Scene fields rather than in Scene::metadata.
constexpr std::array<const char*, 4> kReservedKeys = {"id", "label", "dt", "timestamps"};

std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return cells;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    return s;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const fs::path& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw DataError(path.string() + ": invalid JSON: " + e.what());
    }
}

std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        auto line = trim(text.substr(start, nl - start));
        if (!line.empty()) lines.push_back(line);
        start = nl + 1;
    }
    return lines;
}

double parse_cell(std::string_view cell, std::size_t row, std::string_view column, const fs::path& path) {
    try {
        return parse_double(trim(cell));
    } catch (const DataError&) {
        throw DataError(path.string() + ": row " + std::to_string(row) + ", column '" +
                        std::string(column) + "': cannot parse '" + std::string(cell) + "'");
    }
}

struct RawRow {
    double t = 0.0;
    StateVector state;
    std::optional<Detection> det;
};

// cells are already ordered canonically (10 entries).
RawRow decode_row(const std::array<std::string_view, 10>& cells, std::size_t row, const fs::path& path) {
    RawRow out;
    out.t = parse_cell(cells[0], row, kCanonicalColumns[0], path);
    std::array<double, kStateWidth> s{};
    for (int j = 0; j < kStateWidth; ++j) s[j] = parse_cell(cells[1 + j], row, kCanonicalColumns[1 + j], path);
    out.state = {s[0], s[1], s[2], s[3], s[4]};

    int blanks = 0;
    for (int j = 6; j < 10; ++j) blanks += trim(cells[j]).empty() ? 1 : 0;
    if (blanks == 4) return out;
    if (blanks != 0) {
        throw DataError(path.string() + ": row " + std::to_string(row) + ": detection cells partially blank");
    }
    std::array<double, kDetectionWidth> d{};
    for (int j = 0; j < kDetectionWidth; ++j) d[j] = parse_cell(cells[6 + j], row, kCanonicalColumns[6 + j], path);
    out.det = Detection{d[0], d[1], d[2], d[3]};
    return out;
}

Label label_from_json(const json& v) {
    if (v.is_boolean()) return v.get<bool>() ? Label::Autonomous : Label::Human;
    if (v.is_number_integer()) return label_from_int(v.get<long long>());
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "1" || s == "autonomous") return Label::Autonomous;
        if (s == "0" || s == "human") return Label::Human;
    }
    throw DataError("unrecognised label value " + v.dump());
}

std::string metadata_text(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw DataError("cannot format double");
    return std::string(buf.data(), ptr);
}

double parse_double(std::string_view text) {
    double v = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    if (!text.empty() && text.front() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || first == last) {
        throw DataError("cannot parse number '" + std::string(text) + "'");
    }
    return v;
}

Scene parse_scene(const SceneFileSet& files) {
    const json meta = read_json(files.meta_path);
    if (!meta.is_object()) throw DataError(files.meta_path.string() + ": metadata must be an object");

    Scene scene;
    if (!meta.contains("label")) throw DataError(files.meta_path.string() + ": label missing from metadata");
    scene.label = label_from_json(meta.at("label"));
    scene.id = meta.contains("id") ? metadata_text(meta.at("id")) : files.meta_path.parent_path().filename().string();
    if (meta.contains("dt")) {
        if (!meta.at("dt").is_number()) throw DataError(files.meta_path.string() + ": dt must be a number");
        scene.sample_interval_s = meta.at("dt").get<double>();
    }
    for (const auto& [key, value] : meta.items()) {
        if (std::find_if(kReservedKeys.begin(), kReservedKeys.end(),
                         [&](const char* r) { return key == r; }) != kReservedKeys.end()) {
            continue;
        }
        scene.metadata[key] = metadata_text(value);
    }

    const std::string text = read_file(files.series_path);
    const auto lines = lines_of(text);
    if (lines.empty() || lines.front() != kSeriesHeader) {
        throw DataError(files.series_path.string() + ": missing or unexpected header");
    }
    for (std::size_t row = 1; row < lines.size(); ++row) {
        const auto cells = split_csv_line(lines[row]);
        if (cells.size() != kCanonicalColumns.size()) {
            throw DataError(files.series_path.string() + ": row " + std::to_string(row) + " has " +
                            std::to_string(cells.size()) + " columns, expected " +
                            std::to_string(kCanonicalColumns.size()));
        }
        std::array<std::string_view, 10> ordered{};
        std::copy(cells.begin(), cells.end(), ordered.begin());
        auto decoded = decode_row(ordered, row, files.series_path);
        scene.states.push_back(decoded.state);
        scene.detections.push_back(decoded.det);
    }

    if (meta.contains("timestamps")) {
        const auto declared = meta.at("timestamps").get<std::size_t>();
        if (declared != scene.length()) {
            throw DataError(files.series_path.string() + ": length mismatch: metadata declares " +
                            std::to_string(declared) + " timestamps, series has " +
                            std::to_string(scene.length()) + " rows");
        }
    }
    scene.validate();
    return scene;
}

SceneFileSet write_scene(const Scene& scene, const fs::path& dir, bool force) {
    scene.validate();
    const auto files = SceneFileSet::in_directory(dir);
    if (!force && (fs::exists(files.meta_path) || fs::exists(files.series_path))) {
        throw IoError("refusing to overwrite existing scene files in " + dir.string());
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());

    json meta = json::object();
    for (const auto& [k, v] : scene.metadata) meta[k] = v;
    meta["id"] = scene.id;
    meta["label"] = to_int(scene.label);
    meta["dt"] = scene.sample_interval_s;
    meta["timestamps"] = scene.length();
    write_text(files.meta_path, meta.dump(2) + "\n");

    std::string csv = std::string(kSeriesHeader) + "\n";
    for (std::size_t t = 0; t < scene.length(); ++t) {
        csv += format_double(static_cast<double>(t) * scene.sample_interval_s);
        for (double v : scene.states[t].to_array()) csv += "," + format_double(v);
        if (const auto& det = scene.detections[t]) {
            for (double v : det->to_array()) csv += "," + format_double(v);
        } else {
            csv += ",,,,";
        }
        csv += "\n";
    }
    write_text(files.series_path, csv);
    return files;
}

ColumnMap ColumnMap::canonical() {
    ColumnMap m;
    for (const char* c : kCanonicalColumns) m.columns[c] = c;
    return m;
}

void ColumnMap::validate() const {
    for (const char* c : kCanonicalColumns) {
        if (!columns.contains(c) || columns.at(c).empty()) {
            throw ConfigError(std::string("column map: mandatory column '") + c + "' is unmapped");
        }
    }
    if (expected_length < 2) throw ConfigError("column map: expected_length must be at least 2");
}

ColumnMap ColumnMap::from_json_file(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": invalid JSON: " + e.what());
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    }
    ColumnMap m;
    try {
        m.meta_file = j.value("meta_file", m.meta_file);
        m.series_file = j.value("series_file", m.series_file);
        m.label_key = j.value("label_key", m.label_key);
        m.id_key = j.value("id_key", m.id_key);
        m.expected_length = j.value("expected_length", m.expected_length);
        if (j.contains("columns")) m.columns = j.at("columns").get<std::map<std::string, std::string>>();
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    m.validate();
    return m;
}

namespace {

Scene ingest_one(const fs::path& dir, const ColumnMap& map) {
    const fs::path meta_path = dir / map.meta_file;
    const fs::path series_path = dir / map.series_file;
    const json meta = read_json(meta_path);
    if (!meta.is_object() || !meta.contains(map.label_key)) {
        throw DataError(meta_path.string() + ": label missing from metadata");
    }

    Scene scene;
    scene.label = label_from_json(meta.at(map.label_key));
    scene.id = meta.contains(map.id_key) ? metadata_text(meta.at(map.id_key)) : dir.filename().string();
    for (const char* key : {"city", "traffic", "weather"}) {
        if (meta.contains(key)) scene.metadata[key] = metadata_text(meta.at(key));
    }
    scene.metadata["source"] = "nexus";

    const std::string text = read_file(series_path);
    const auto lines = lines_of(text);
    if (lines.empty()) throw DataError(series_path.string() + ": empty series file");
    const auto header = split_csv_line(lines.front());
    std::array<std::size_t, 10> index{};
    for (std::size_t c = 0; c < kCanonicalColumns.size(); ++c) {
        const auto& wanted = map.columns.at(kCanonicalColumns[c]);
        auto it = std::find_if(header.begin(), header.end(), [&](std::string_view h) { return trim(h) == wanted; });
        if (it == header.end()) throw DataError(series_path.string() + ": column '" + wanted + "' not found");
        index[c] = static_cast<std::size_t>(it - header.begin());
    }

    const std::size_t available = lines.size() - 1;
    if (available < map.expected_length) {
        throw DataError(series_path.string() + ": scene shorter than declared (" + std::to_string(available) +
                        " < " + std::to_string(map.expected_length) + " timestamps)");
    }
    std::vector<double> times;
    for (std::size_t row = 1; row <= map.expected_length; ++row) {
        const auto cells = split_csv_line(lines[row]);
        if (cells.size() != header.size()) {
            throw DataError(series_path.string() + ": row " + std::to_string(row) + " has " +
                            std::to_string(cells.size()) + " columns, header has " + std::to_string(header.size()));
        }
        std::array<std::string_view, 10> ordered{};
        for (std::size_t c = 0; c < ordered.size(); ++c) ordered[c] = cells[index[c]];
        auto decoded = decode_row(ordered, row, series_path);
        times.push_back(decoded.t);
        scene.states.push_back(decoded.state);
        scene.detections.push_back(decoded.det);
    }
    scene.sample_interval_s = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    if (!(scene.sample_interval_s > 0.0)) {
        throw DataError(series_path.string() + ": timestamps are not increasing");
    }
    return scene;
}

}  // namespace

IngestResult ingest_nexus(const fs::path& root, const ColumnMap& map, int jobs) {
    map.validate();
    if (!fs::is_directory(root)) throw IoError("not a directory: " + root.string());

    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory()) dirs.push_back(entry.path());
    }
    std::sort(dirs.begin(), dirs.end());

    IngestResult result;
    if (dirs.empty()) {
        result.warnings.push_back("no scene directories found under " + root.string());
        return result;
    }

    std::vector<std::optional<Scene>> parsed(dirs.size());
    std::vector<std::string> errors(dirs.size());
    parallel_for(dirs.size(), jobs, [&](std::size_t i) {
        try {
            parsed[i] = ingest_one(dirs[i], map);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    for (std::size_t i = 0; i < dirs.size(); ++i) {
        if (parsed[i]) {
            result.scenes.push_back(std::move(*parsed[i]));
        } else {
            result.skipped.push_back({dirs[i].filename().string(), errors[i]});
            result.warnings.push_back("skipped " + dirs[i].filename().string() + ": " + errors[i]);
        }
    }
    std::sort(result.scenes.begin(), result.scenes.end(),
              [](const Scene& a, const Scene& b) { return a.id < b.id; });
    return result;
}

std::vector<Scene> load_dataset(const fs::path& root) {
    if (!fs::is_directory(root)) throw IoError("not a directory: " + root.string());
    std::vector<Scene> scenes;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (!entry.is_directory()) continue;
        const auto files = SceneFileSet::in_directory(entry.path());
        if (!fs::exists(files.meta_path)) continue;
        scenes.push_back(parse_scene(files));
    }
    std::sort(scenes.begin(), scenes.end(), [](const Scene& a, const Scene& b) { return a.id < b.id; });
    return scenes;
}

}  // namespace avprof
