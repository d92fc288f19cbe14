#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "kploc/annotation.hpp"
#include "kploc/consensus.hpp"
#include "kploc/geometry.hpp"
#include "kploc/keypoints.hpp"
#include "kploc/metrics.hpp"
#include "kploc/simulator.hpp"
#include "kploc/training.hpp"

namespace kploc::io {

using nlohmann::json;

/// Error with file and line context for any malformed input.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::filesystem::path& file, std::size_t line, const std::string& message)
        : std::runtime_error(file.string() + ":" + std::to_string(line) + ": " + message) {}
    ParseError(const std::filesystem::path& file, const std::string& message)
        : std::runtime_error(file.string() + ": " + message) {}
};

namespace detail {

inline std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError(path, "cannot open file");
    }
    return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);  // no platform newline translation
    if (!out) {
        throw std::runtime_error("cannot write file: " + path.string());
    }
    return out;
}

inline void require_finite(double v, const std::filesystem::path& file, std::size_t line,
                           const std::string& field) {
    if (!std::isfinite(v)) {
        throw ParseError(file, line, field + ": value must be finite");
    }
}

inline void require_confidence(double v, const std::filesystem::path& file, std::size_t line,
                               const std::string& field) {
    require_finite(v, file, line, field);
    if (v < 0.0 || v > 1.0) {
        throw ParseError(file, line, field + ": confidence outside [0,1]");
    }
}

/// Shortest representation that parses back to the same double; used for
/// the plain-text writers so round-trips are exact.
inline std::string format_double(double v) { return json(v).dump(); }

}  // namespace detail

// ---------------------------------------------------------------------------
// CUB-format annotation directories
// ---------------------------------------------------------------------------

/// Loads a CUB-format annotation directory: images.txt, part_locs.txt,
/// bounding_boxes.txt, train_test_split.txt, and optionally sizes.txt
/// (image_id width height). Coordinates are taken as-is; pass
/// `shift_to_zero_indexed` to subtract one pixel from all coordinates for
/// releases that store 1-indexed positions.
inline std::vector<ImageAnnotation> load_cub_annotations(const std::filesystem::path& root,
                                                         bool shift_to_zero_indexed = false) {
    namespace fs = std::filesystem;
    const double shift = shift_to_zero_indexed ? 1.0 : 0.0;

    struct Parsed {
        std::string path;
        std::optional<Rect> box;
        std::vector<std::optional<AnnotatedKeypoint>> parts =
            std::vector<std::optional<AnnotatedKeypoint>>(kNumKeypoints);
        bool is_training = true;
        double width = 0.0, height = 0.0;
    };
    std::map<long long, Parsed> images;
    std::vector<long long> order;

    {
        const fs::path file = root / "images.txt";
        std::ifstream in = detail::open_input(file);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            std::istringstream ss(line);
            long long id;
            std::string rel;
            if (!(ss >> id >> rel)) {
                throw ParseError(file, lineno, "expected '<image_id> <path>'");
            }
            if (images.count(id)) {
                throw ParseError(file, lineno, "duplicate image id " + std::to_string(id));
            }
            images[id].path = rel;
            order.push_back(id);
        }
    }

    {
        const fs::path file = root / "bounding_boxes.txt";
        std::ifstream in = detail::open_input(file);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            std::istringstream ss(line);
            long long id;
            double x, y, w, h;
            if (!(ss >> id >> x >> y >> w >> h)) {
                throw ParseError(file, lineno, "expected '<image_id> <x> <y> <w> <h>'");
            }
            const auto it = images.find(id);
            if (it == images.end()) {
                throw ParseError(file, lineno, "unknown image id " + std::to_string(id));
            }
            if (!(w > 0.0) || !(h > 0.0)) {
                throw ParseError(file, lineno, "bounding box must have positive size");
            }
            it->second.box = Rect{x - shift, y - shift, w, h};
        }
    }

    {
        const fs::path file = root / "part_locs.txt";
        std::ifstream in = detail::open_input(file);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            std::istringstream ss(line);
            long long id, part_id;
            double x, y;
            int visible;
            if (!(ss >> id >> part_id >> x >> y >> visible)) {
                throw ParseError(file, lineno, "expected '<image_id> <part_id> <x> <y> <visible>'");
            }
            const auto it = images.find(id);
            if (it == images.end()) {
                throw ParseError(file, lineno, "unknown image id " + std::to_string(id));
            }
            if (part_id < 1 || part_id > static_cast<long long>(kNumKeypoints)) {
                throw ParseError(file, lineno,
                                 "part id " + std::to_string(part_id) + " outside 1.." +
                                     std::to_string(kNumKeypoints));
            }
            if (visible != 0 && visible != 1) {
                throw ParseError(file, lineno, "visible flag must be 0 or 1");
            }
            auto& slot = it->second.parts[static_cast<std::size_t>(part_id - 1)];
            if (slot) {
                throw ParseError(file, lineno, "duplicate part " + std::to_string(part_id) +
                                                   " for image " + std::to_string(id));
            }
            slot = AnnotatedKeypoint{{x - shift, y - shift}, visible == 1};
        }
    }

    {
        const fs::path file = root / "train_test_split.txt";
        std::ifstream in = detail::open_input(file);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            std::istringstream ss(line);
            long long id;
            int flag;
            if (!(ss >> id >> flag)) {
                throw ParseError(file, lineno, "expected '<image_id> <is_training>'");
            }
            const auto it = images.find(id);
            if (it == images.end()) {
                throw ParseError(file, lineno, "unknown image id " + std::to_string(id));
            }
            it->second.is_training = flag != 0;
        }
    }

    if (fs::exists(root / "sizes.txt")) {
        const fs::path file = root / "sizes.txt";
        std::ifstream in = detail::open_input(file);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            std::istringstream ss(line);
            long long id;
            double w, h;
            if (!(ss >> id >> w >> h)) {
                throw ParseError(file, lineno, "expected '<image_id> <width> <height>'");
            }
            const auto it = images.find(id);
            if (it == images.end()) {
                throw ParseError(file, lineno, "unknown image id " + std::to_string(id));
            }
            it->second.width = w;
            it->second.height = h;
        }
    }

    std::vector<ImageAnnotation> out;
    out.reserve(order.size());
    for (const long long id : order) {
        const Parsed& p = images.at(id);
        if (!p.box) {
            throw ParseError(root / "bounding_boxes.txt",
                             "image " + std::to_string(id) + " has no bounding box");
        }
        ImageAnnotation ann(id, *p.box);
        ann.path = p.path;
        const std::size_t slash = p.path.find('/');
        ann.class_label = slash == std::string::npos ? "" : p.path.substr(0, slash);
        ann.is_training = p.is_training;
        ann.width = p.width;
        ann.height = p.height;
        ann.keypoints.reserve(kNumKeypoints);
        for (std::size_t k = 0; k < kNumKeypoints; ++k) {
            if (!p.parts[k]) {
                throw ParseError(root / "part_locs.txt",
                                 "image " + std::to_string(id) + " missing part " +
                                     std::to_string(k + 1));
            }
            const AnnotatedKeypoint& kp = *p.parts[k];
            if (kp.visible && p.width > 0.0 && p.height > 0.0 &&
                (kp.location.x < 0.0 || kp.location.x > p.width || kp.location.y < 0.0 ||
                 kp.location.y > p.height)) {
                throw ParseError(root / "part_locs.txt",
                                 "image " + std::to_string(id) + " part " + std::to_string(k + 1) +
                                     ": visible keypoint outside image bounds");
            }
            ann.keypoints.push_back(kp);
        }
        out.push_back(std::move(ann));
    }
    return out;
}

/// Inverse of load_cub_annotations; writes the standard text files (plus
/// sizes.txt when sizes are known). Intended for fixtures and synthetic
/// datasets.
inline void save_cub_annotations(const std::filesystem::path& root,
                                 std::span<const ImageAnnotation> annotations) {
    namespace fs = std::filesystem;
    fs::create_directories(root);
    std::ofstream images = detail::open_output(root / "images.txt");
    std::ofstream boxes = detail::open_output(root / "bounding_boxes.txt");
    std::ofstream parts = detail::open_output(root / "part_locs.txt");
    std::ofstream split = detail::open_output(root / "train_test_split.txt");
    std::ofstream sizes;
    bool any_sizes = false;
    for (const ImageAnnotation& a : annotations) {
        if (a.width > 0.0 && a.height > 0.0) any_sizes = true;
    }
    if (any_sizes) sizes = detail::open_output(root / "sizes.txt");

    using detail::format_double;
    for (const ImageAnnotation& a : annotations) {
        images << a.image_id << ' ' << (a.path.empty() ? "unknown.jpg" : a.path) << '\n';
        boxes << a.image_id << ' ' << format_double(a.object_box.x) << ' '
              << format_double(a.object_box.y) << ' ' << format_double(a.object_box.w) << ' '
              << format_double(a.object_box.h) << '\n';
        for (std::size_t k = 0; k < a.keypoints.size(); ++k) {
            const AnnotatedKeypoint& kp = a.keypoints[k];
            parts << a.image_id << ' ' << (k + 1) << ' ' << format_double(kp.location.x) << ' '
                  << format_double(kp.location.y) << ' ' << (kp.visible ? 1 : 0) << '\n';
        }
        split << a.image_id << ' ' << (a.is_training ? 1 : 0) << '\n';
        if (any_sizes) {
            sizes << a.image_id << ' ' << format_double(a.width) << ' '
                  << format_double(a.height) << '\n';
        }
    }
}

/// Per-keypoint annotator standard deviations, lines of '<part_id> <sigma>'.
inline AnnotatorStd load_annotator_std(const std::filesystem::path& path,
                                       std::size_t n = kNumKeypoints) {
    std::ifstream in = detail::open_input(path);
    AnnotatorStd out;
    out.sigma.assign(n, 0.0);
    std::vector<bool> seen(n, false);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        long long part_id;
        double sigma;
        if (!(ss >> part_id >> sigma)) {
            throw ParseError(path, lineno, "expected '<part_id> <sigma>'");
        }
        if (part_id < 1 || part_id > static_cast<long long>(n)) {
            throw ParseError(path, lineno, "part id outside 1.." + std::to_string(n));
        }
        if (!(sigma > 0.0) || !std::isfinite(sigma)) {
            throw ParseError(path, lineno, "sigma must be positive and finite");
        }
        seen[static_cast<std::size_t>(part_id - 1)] = true;
        out.sigma[static_cast<std::size_t>(part_id - 1)] = sigma;
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (!seen[k]) {
            throw ParseError(path, "missing sigma for part " + std::to_string(k + 1));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Line-delimited JSON containers
// ---------------------------------------------------------------------------

namespace detail {

inline json parse_json_line(const std::filesystem::path& file, std::size_t lineno,
                            const std::string& line) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
        throw ParseError(file, lineno, "malformed JSON record");
    }
    return j;
}

/// Reads a JSONL file, checking the header's format tag and version.
/// Returns the header and the data records with their line numbers.
inline std::pair<json, std::vector<std::pair<std::size_t, json>>> read_jsonl(
    const std::filesystem::path& path, const std::string& expected_format) {
    std::ifstream in = open_input(path);
    std::string line;
    std::size_t lineno = 0;
    json header;
    std::vector<std::pair<std::size_t, json>> records;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = parse_json_line(path, lineno, line);
        if (lineno == 1 || header.is_null()) {
            if (!j.is_object() || !j.contains("format") || !j.contains("version")) {
                throw ParseError(path, lineno, "missing header record with format/version");
            }
            if (j["format"] != expected_format) {
                throw ParseError(path, lineno,
                                 "unexpected format '" + j["format"].dump() + "', expected '" +
                                     expected_format + "'");
            }
            if (j["version"] != 1) {
                throw ParseError(path, lineno, "unsupported schema version " + j["version"].dump());
            }
            header = std::move(j);
            continue;
        }
        records.emplace_back(lineno, std::move(j));
    }
    if (header.is_null()) {
        throw ParseError(path, "missing header record");
    }
    return {std::move(header), std::move(records)};
}

inline json make_header(const std::string& format, const json& config) {
    json h{{"format", format}, {"version", 1}};
    if (!config.is_null()) h["config"] = config;
    return h;
}

inline double get_number(const json& j, const std::filesystem::path& file, std::size_t lineno,
                         const std::string& field) {
    if (!j.is_number()) {
        throw ParseError(file, lineno, field + ": expected a number");
    }
    const double v = j.get<double>();
    require_finite(v, file, lineno, field);
    return v;
}

inline Rect get_rect(const json& j, const std::filesystem::path& file, std::size_t lineno,
                     const std::string& field) {
    if (!j.is_array() || j.size() != 4) {
        throw ParseError(file, lineno, field + ": expected [x,y,w,h]");
    }
    const double x = get_number(j[0], file, lineno, field + "[0]");
    const double y = get_number(j[1], file, lineno, field + "[1]");
    const double w = get_number(j[2], file, lineno, field + "[2]");
    const double h = get_number(j[3], file, lineno, field + "[3]");
    if (!(w > 0.0) || !(h > 0.0)) {
        throw ParseError(file, lineno, field + ": box size must be positive");
    }
    return Rect{x, y, w, h};
}

inline json rect_to_json(const Rect& r) { return json::array({r.x, r.y, r.w, r.h}); }

}  // namespace detail

// --- predictions -----------------------------------------------------------

inline constexpr const char* kPredictionsFormat = "kploc.predictions";

inline void save_predictions(const std::filesystem::path& path,
                             std::span<const PredictionSet> predictions,
                             const json& config = json()) {
    std::ofstream out = detail::open_output(path);
    out << detail::make_header(kPredictionsFormat, config).dump() << '\n';
    for (const PredictionSet& p : predictions) {
        if (p.loc.size() != p.vis.size()) {
            throw std::invalid_argument("save_predictions: loc/vis length mismatch");
        }
        json rec{{"image_id", p.image_id},
                 {"box", detail::rect_to_json(p.box)},
                 {"score", p.box_score}};
        json loc = json::array();
        json vis = json::array();
        for (std::size_t k = 0; k < p.loc.size(); ++k) {
            if (!std::isfinite(p.loc[k].u) || !std::isfinite(p.loc[k].v)) {
                throw std::invalid_argument("save_predictions: non-finite location");
            }
            if (!std::isfinite(p.vis[k]) || p.vis[k] < 0.0 || p.vis[k] > 1.0) {
                throw std::invalid_argument("save_predictions: confidence outside [0,1]");
            }
            loc.push_back(json::array({p.loc[k].u, p.loc[k].v}));
            vis.push_back(p.vis[k]);
        }
        rec["loc"] = std::move(loc);
        rec["vis"] = std::move(vis);
        out << rec.dump() << '\n';
    }
}

inline std::vector<PredictionSet> load_predictions(const std::filesystem::path& path) {
    const auto [header, records] = detail::read_jsonl(path, kPredictionsFormat);
    std::vector<PredictionSet> out;
    out.reserve(records.size());
    for (const auto& [lineno, rec] : records) {
        if (!rec.is_object() || !rec.contains("image_id") || !rec.contains("box") ||
            !rec.contains("score") || !rec.contains("loc") || !rec.contains("vis")) {
            throw ParseError(path, lineno, "prediction record missing required fields");
        }
        if (!rec["image_id"].is_number_integer()) {
            throw ParseError(path, lineno, "image_id: expected an integer");
        }
        PredictionSet p(rec["image_id"].get<long long>(),
                        detail::get_rect(rec["box"], path, lineno, "box"),
                        detail::get_number(rec["score"], path, lineno, "score"));
        const json& loc = rec["loc"];
        const json& vis = rec["vis"];
        if (!loc.is_array() || !vis.is_array() || loc.size() != vis.size()) {
            throw ParseError(path, lineno, "loc/vis must be arrays of equal length");
        }
        for (std::size_t k = 0; k < loc.size(); ++k) {
            const std::string lf = "loc[" + std::to_string(k) + "]";
            if (!loc[k].is_array() || loc[k].size() != 2) {
                throw ParseError(path, lineno, lf + ": expected [u,v]");
            }
            p.loc.push_back({detail::get_number(loc[k][0], path, lineno, lf + "[0]"),
                             detail::get_number(loc[k][1], path, lineno, lf + "[1]")});
            const std::string vf = "vis[" + std::to_string(k) + "]";
            const double conf = detail::get_number(vis[k], path, lineno, vf);
            detail::require_confidence(conf, path, lineno, vf);
            p.vis.push_back(conf);
        }
        out.push_back(std::move(p));
    }
    return out;
}

/// Proposal files are prediction files whose records carry empty loc/vis.
inline std::vector<ScoredBox> load_proposals(const std::filesystem::path& path, long long image_id) {
    std::vector<ScoredBox> out;
    for (const PredictionSet& p : load_predictions(path)) {
        if (p.image_id == image_id) out.push_back({p.box, p.box_score});
    }
    return out;
}

// --- consensus records ------------------------------------------------------

inline constexpr const char* kConsensusFormat = "kploc.consensus";

/// One serialized per-(image, keypoint) consensus decision.
struct ConsensusRecord {
    long long image_id = 0;
    std::size_t keypoint = 0;
    bool visible = false;
    std::optional<Point> location;
    std::vector<KeypointObservation> inliers;

    ConsensusResult to_result() const {
        ConsensusResult r;
        r.visible = visible;
        r.location = location;
        r.inliers = inliers;
        r.all_filtered = inliers;
        return r;
    }
};

inline void save_consensus(const std::filesystem::path& path,
                           std::span<const ConsensusRecord> records, const json& config = json()) {
    std::ofstream out = detail::open_output(path);
    out << detail::make_header(kConsensusFormat, config).dump() << '\n';
    for (const ConsensusRecord& r : records) {
        json rec{{"image_id", r.image_id},
                 {"keypoint", r.keypoint},
                 {"visible", r.visible}};
        rec["loc"] = r.location ? json::array({r.location->x, r.location->y}) : json();
        json inliers = json::array();
        for (const KeypointObservation& o : r.inliers) {
            inliers.push_back(
                json::array({o.source_box_id, o.location.x, o.location.y, o.confidence}));
        }
        rec["inliers"] = std::move(inliers);
        out << rec.dump() << '\n';
    }
}

inline std::vector<ConsensusRecord> load_consensus(const std::filesystem::path& path) {
    const auto [header, records] = detail::read_jsonl(path, kConsensusFormat);
    std::vector<ConsensusRecord> out;
    out.reserve(records.size());
    for (const auto& [lineno, rec] : records) {
        if (!rec.is_object() || !rec.contains("image_id") || !rec.contains("keypoint") ||
            !rec.contains("visible") || !rec.contains("loc") || !rec.contains("inliers")) {
            throw ParseError(path, lineno, "consensus record missing required fields");
        }
        ConsensusRecord r;
        if (!rec["image_id"].is_number_integer() || !rec["keypoint"].is_number_integer()) {
            throw ParseError(path, lineno, "image_id/keypoint: expected integers");
        }
        r.image_id = rec["image_id"].get<long long>();
        r.keypoint = rec["keypoint"].get<std::size_t>();
        if (!rec["visible"].is_boolean()) {
            throw ParseError(path, lineno, "visible: expected a boolean");
        }
        r.visible = rec["visible"].get<bool>();
        if (!rec["loc"].is_null()) {
            if (!rec["loc"].is_array() || rec["loc"].size() != 2) {
                throw ParseError(path, lineno, "loc: expected [x,y] or null");
            }
            r.location = Point{detail::get_number(rec["loc"][0], path, lineno, "loc[0]"),
                               detail::get_number(rec["loc"][1], path, lineno, "loc[1]")};
        }
        for (std::size_t i = 0; i < rec["inliers"].size(); ++i) {
            const json& o = rec["inliers"][i];
            const std::string f = "inliers[" + std::to_string(i) + "]";
            if (!o.is_array() || o.size() != 4) {
                throw ParseError(path, lineno, f + ": expected [box_id,x,y,confidence]");
            }
            KeypointObservation obs;
            obs.source_box_id = static_cast<int>(detail::get_number(o[0], path, lineno, f + "[0]"));
            obs.location = {detail::get_number(o[1], path, lineno, f + "[1]"),
                            detail::get_number(o[2], path, lineno, f + "[2]")};
            obs.confidence = detail::get_number(o[3], path, lineno, f + "[3]");
            detail::require_confidence(obs.confidence, path, lineno, f + "[3]");
            r.inliers.push_back(obs);
        }
        if (r.visible != r.location.has_value() || r.visible != !r.inliers.empty()) {
            throw ParseError(path, lineno,
                             "visible flag, location and inliers must be consistent");
        }
        out.push_back(std::move(r));
    }
    return out;
}

// --- part boxes --------------------------------------------------------------

inline constexpr const char* kPartBoxFormat = "kploc.partbox";

struct PartBoxRecord {
    long long image_id = 0;
    std::string part;
    std::optional<Rect> box;
};

inline void save_part_boxes(const std::filesystem::path& path,
                            std::span<const PartBoxRecord> records, const json& config = json()) {
    std::ofstream out = detail::open_output(path);
    out << detail::make_header(kPartBoxFormat, config).dump() << '\n';
    for (const PartBoxRecord& r : records) {
        json rec{{"image_id", r.image_id}, {"part", r.part}};
        rec["box"] = r.box ? detail::rect_to_json(*r.box) : json();
        out << rec.dump() << '\n';
    }
}

inline std::vector<PartBoxRecord> load_part_boxes(const std::filesystem::path& path) {
    const auto [header, records] = detail::read_jsonl(path, kPartBoxFormat);
    std::vector<PartBoxRecord> out;
    for (const auto& [lineno, rec] : records) {
        if (!rec.is_object() || !rec.contains("image_id") || !rec.contains("part") ||
            !rec.contains("box")) {
            throw ParseError(path, lineno, "part-box record missing required fields");
        }
        PartBoxRecord r;
        r.image_id = rec["image_id"].get<long long>();
        r.part = rec["part"].get<std::string>();
        if (!rec["box"].is_null()) {
            r.box = detail::get_rect(rec["box"], path, lineno, "box");
        }
        out.push_back(std::move(r));
    }
    return out;
}

// --- training manifest --------------------------------------------------------

inline constexpr const char* kManifestFormat = "kploc.manifest";

struct ManifestRecord {
    long long image_id = 0;
    TrainingExample example;
};

inline void save_manifest(const std::filesystem::path& path,
                          std::span<const ManifestRecord> records, const json& config = json()) {
    std::ofstream out = detail::open_output(path);
    out << detail::make_header(kManifestFormat, config).dump() << '\n';
    for (const ManifestRecord& r : records) {
        const TrainingExample& ex = r.example;
        json v = json::array();
        json l = json::array();
        for (std::size_t k = 0; k < ex.targets_v.size(); ++k) {
            v.push_back(static_cast<int>(ex.targets_v[k]));
            if (ex.targets_v[k] && ex.targets_l[k]) {
                l.push_back(json::array({ex.targets_l[k]->u, ex.targets_l[k]->v}));
            } else {
                l.push_back(json());  // masked targets carry no coordinates
            }
        }
        json rec{{"image_id", r.image_id},
                 {"box", detail::rect_to_json(ex.box)},
                 {"padded_box", detail::rect_to_json(ex.padded_box)},
                 {"v", std::move(v)},
                 {"l", std::move(l)},
                 {"background", ex.is_background},
                 {"flipped", ex.flipped}};
        out << rec.dump() << '\n';
    }
}

inline std::vector<ManifestRecord> load_manifest(const std::filesystem::path& path) {
    const auto [header, records] = detail::read_jsonl(path, kManifestFormat);
    std::vector<ManifestRecord> out;
    for (const auto& [lineno, rec] : records) {
        if (!rec.is_object() || !rec.contains("image_id") || !rec.contains("box") ||
            !rec.contains("padded_box") || !rec.contains("v") || !rec.contains("l") ||
            !rec.contains("background") || !rec.contains("flipped")) {
            throw ParseError(path, lineno, "manifest record missing required fields");
        }
        const json& v = rec["v"];
        const json& l = rec["l"];
        if (!v.is_array() || !l.is_array() || v.size() != l.size()) {
            throw ParseError(path, lineno, "v/l must be arrays of equal length");
        }
        TrainingExample ex{detail::get_rect(rec["box"], path, lineno, "box"),
                           detail::get_rect(rec["padded_box"], path, lineno, "padded_box"),
                           {},
                           {},
                           rec["background"].get<bool>(),
                           rec["flipped"].get<bool>()};
        for (std::size_t k = 0; k < v.size(); ++k) {
            const int flag = v[k].get<int>();
            if (flag != 0 && flag != 1) {
                throw ParseError(path, lineno, "v[" + std::to_string(k) + "]: must be 0 or 1");
            }
            ex.targets_v.push_back(static_cast<std::uint8_t>(flag));
            if (flag == 1) {
                if (!l[k].is_array() || l[k].size() != 2) {
                    throw ParseError(path, lineno,
                                     "l[" + std::to_string(k) + "]: expected [u,v] for a visible target");
                }
                const std::string f = "l[" + std::to_string(k) + "]";
                ex.targets_l.emplace_back(
                    NormalizedPoint{detail::get_number(l[k][0], path, lineno, f + "[0]"),
                                    detail::get_number(l[k][1], path, lineno, f + "[1]")});
            } else {
                if (!l[k].is_null()) {
                    throw ParseError(path, lineno,
                                     "l[" + std::to_string(k) + "]: masked target must be null");
                }
                ex.targets_l.emplace_back(std::nullopt);
            }
        }
        out.push_back({rec["image_id"].get<long long>(), std::move(ex)});
    }
    return out;
}

// --- evaluation report ---------------------------------------------------------

inline constexpr const char* kReportFormat = "kploc.report";

namespace detail {

inline json fraction_to_json(const Fraction& f) {
    json j{{"num", f.num}, {"den", f.den}};
    const std::optional<double> v = f.value();
    j["value"] = v ? json(*v) : json();
    return j;
}

}  // namespace detail

inline json report_to_json(const EvalReport& report, const json& config = json()) {
    json j{{"format", kReportFormat}, {"version", 1}};
    if (!config.is_null()) j["config"] = config;

    json per_keypoint = json::object();
    for (std::size_t k = 0; k < report.pcp.per_keypoint.size(); ++k) {
        const std::string name = report.pcp.per_keypoint.size() == kNumKeypoints
                                     ? std::string(kKeypointNames[k])
                                     : "keypoint_" + std::to_string(k);
        per_keypoint[name] = detail::fraction_to_json(report.pcp.per_keypoint[k]);
    }
    json merged = json::object();
    for (const auto& [name, f] : report.pcp.merged) {
        merged[name] = detail::fraction_to_json(f);
    }
    j["pcp"] = json{{"per_keypoint", std::move(per_keypoint)},
                    {"merged", std::move(merged)},
                    {"total", detail::fraction_to_json(report.pcp.total)}};

    if (report.ae) {
        j["ae"] = json{{"sum", report.ae->sum},
                       {"count", report.ae->count},
                       {"value", report.ae->value},
                       {"cap", report.ae_options.cap},
                       {"units", report.ae_options.std_normalized ? "annotator_std" : "pixels"}};
    } else {
        j["ae"] = json();
    }
    j["fvr"] = detail::fraction_to_json(report.visibility.fvr);
    j["fir"] = detail::fraction_to_json(report.visibility.fir);
    json parts = json::object();
    for (const auto& [name, f] : report.part_accuracy) {
        parts[name] = detail::fraction_to_json(f);
    }
    j["part_accuracy"] = std::move(parts);
    return j;
}

inline void save_report(const std::filesystem::path& path, const json& report) {
    std::ofstream out = detail::open_output(path);
    out << report.dump(2) << '\n';
}

// --- sweep table -----------------------------------------------------------------

/// Tab-delimited sweep table; the resolved config rides along as a '#'
/// comment so every number in the file is reproducible.
inline std::string format_sweep(std::span<const SweepRow> rows, const json& config = json()) {
    std::ostringstream out;
    if (!config.is_null()) {
        out << "# config " << config.dump() << '\n';
    }
    out << "box_count\thead_acc\ttorso_acc\tbody_acc\n";
    const auto cell = [](const Fraction& f) {
        const std::optional<double> v = f.value();
        if (!v) return std::string("nan");
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6f", *v);
        return std::string(buf);
    };
    for (const SweepRow& r : rows) {
        out << r.box_count << '\t' << cell(r.head_acc) << '\t' << cell(r.torso_acc) << '\t'
            << cell(r.body_acc) << '\n';
    }
    return out.str();
}

inline void save_sweep(const std::filesystem::path& path, std::span<const SweepRow> rows,
                       const json& config = json()) {
    std::ofstream out = detail::open_output(path);
    out << format_sweep(rows, config);
}

}  // namespace kploc::io
