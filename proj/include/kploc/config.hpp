#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "kploc/consensus.hpp"
#include "kploc/keypoints.hpp"
#include "kploc/metrics.hpp"
#include "kploc/simulator.hpp"

namespace kploc {

/// Pipeline-level default: the with-box thresholds, keeping the inlier
/// sets around since part boxes are built from them. The reported location
/// matches the plain medoid except in degenerate configurations.
inline ConsensusConfig default_run_consensus() {
    ConsensusConfig cfg = gt_box_preset();
    cfg.method = ConsensusMethod::InlierSet;
    return cfg;
}

/// Fully-resolved run configuration. One declarative document (plus CLI
/// overrides) resolves into this; the resolved copy is echoed into every
/// output so any reported number can be recomputed.
struct RunConfig {
    std::string preset = "gt-box";  // gt-box | no-gt-box | custom
    ConsensusConfig consensus = default_run_consensus();
    std::size_t top_k_boxes = 600;

    // With-annotation proposal prefilter.
    double prefilter_containment = 0.5;
    double prefilter_iou = 0.2;

    // Part-box construction.
    std::vector<PartDefinition> part_definitions = cub_part_definitions();
    double part_min_side = 1.0;
    double body_containment_min = 0.9;
    double body_iou_min = 0.5;

    AeOptions ae;

    // Training-crop selection.
    std::size_t max_background = 50;
    double train_containment_min = 0.5;
    double train_iou_min = 0.2;
    double crop_side = 227.0;
    double crop_buffer = 16.0;

    bool shift_cub_coords = false;

    SyntheticDatasetConfig synthetic;
    NoiseModel noise;
    std::vector<std::size_t> box_counts = {600, 300, 100, 50};

    std::uint64_t seed = 0;
};

/// Optional command-line overrides applied on top of the config document.
/// `default_preset` is the protocol-appropriate preset a command falls
/// back to when neither the document nor an explicit flag chose one
/// (with-annotations runs use gt-box, annotation-free runs no-gt-box).
struct ConfigOverrides {
    std::optional<std::string> preset;
    std::optional<std::string> method;
    std::optional<std::size_t> top_k;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> default_preset;
};

namespace detail {

inline void apply_preset(RunConfig& cfg, const std::string& preset) {
    const ConsensusMethod method = cfg.consensus.method;
    const bool report_inlier_medoid = cfg.consensus.report_inlier_medoid;
    const double bandwidth = cfg.consensus.medoid_shift_bandwidth;
    if (preset == "gt-box") {
        cfg.consensus = gt_box_preset();
    } else if (preset == "no-gt-box") {
        cfg.consensus = no_gt_box_preset();
    } else if (preset != "custom") {
        throw std::invalid_argument("config: unknown preset '" + preset + "'");
    }
    cfg.consensus.method = method;
    cfg.consensus.report_inlier_medoid = report_inlier_medoid;
    cfg.consensus.medoid_shift_bandwidth = bandwidth;
    cfg.preset = preset;
}

inline ConsensusMethod parse_method(const std::string& name) {
    if (name == "medoid") return ConsensusMethod::MedoidOnly;
    if (name == "inliers") return ConsensusMethod::InlierSet;
    if (name == "medoid-shift") return ConsensusMethod::MedoidShift;
    throw std::invalid_argument("config: unknown method '" + name + "'");
}

inline std::string method_name(ConsensusMethod m) {
    switch (m) {
        case ConsensusMethod::MedoidOnly: return "medoid";
        case ConsensusMethod::InlierSet: return "inliers";
        case ConsensusMethod::MedoidShift: return "medoid-shift";
    }
    return "medoid";
}

inline void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> known,
                                const std::string& scope) {
    for (const auto& [key, value] : j.items()) {
        bool found = false;
        for (const char* k : known) {
            if (key == k) {
                found = true;
                break;
            }
        }
        if (!found) {
            throw std::invalid_argument("config: unknown key '" + scope + key + "'");
        }
    }
}

}  // namespace detail

/// Resolves a config document plus overrides into a RunConfig. Unknown
/// keys are rejected rather than silently ignored.
inline RunConfig resolve_config(const nlohmann::json& doc,
                                const ConfigOverrides& overrides = {}) {
    using nlohmann::json;
    RunConfig cfg;
    if (!doc.is_null()) {
        if (!doc.is_object()) {
            throw std::invalid_argument("config: document must be a JSON object");
        }
        detail::reject_unknown_keys(
            doc,
            {"preset", "method", "visibility_threshold", "z_threshold", "lambda",
             "report_inlier_medoid", "medoid_shift_bandwidth", "top_k_boxes", "prefilter", "parts",
             "metrics", "training", "cub", "simulate", "seed"},
            "");
        if (doc.contains("preset")) detail::apply_preset(cfg, doc["preset"].get<std::string>());
        if (doc.contains("method")) {
            cfg.consensus.method = detail::parse_method(doc["method"].get<std::string>());
        }
        if (doc.contains("visibility_threshold")) {
            cfg.consensus.visibility_threshold = doc["visibility_threshold"].get<double>();
        }
        if (doc.contains("z_threshold")) cfg.consensus.z_threshold = doc["z_threshold"].get<double>();
        if (doc.contains("lambda")) cfg.consensus.lambda = doc["lambda"].get<double>();
        if (doc.contains("report_inlier_medoid")) {
            cfg.consensus.report_inlier_medoid = doc["report_inlier_medoid"].get<bool>();
        }
        if (doc.contains("medoid_shift_bandwidth")) {
            cfg.consensus.medoid_shift_bandwidth = doc["medoid_shift_bandwidth"].get<double>();
        }
        if (doc.contains("top_k_boxes")) cfg.top_k_boxes = doc["top_k_boxes"].get<std::size_t>();
        if (doc.contains("prefilter")) {
            const json& p = doc["prefilter"];
            detail::reject_unknown_keys(p, {"containment_min", "iou_min"}, "prefilter.");
            if (p.contains("containment_min")) {
                cfg.prefilter_containment = p["containment_min"].get<double>();
            }
            if (p.contains("iou_min")) cfg.prefilter_iou = p["iou_min"].get<double>();
        }
        if (doc.contains("parts")) {
            const json& p = doc["parts"];
            detail::reject_unknown_keys(
                p, {"min_side", "body_containment_min", "body_iou_min", "definitions"}, "parts.");
            if (p.contains("min_side")) cfg.part_min_side = p["min_side"].get<double>();
            if (p.contains("body_containment_min")) {
                cfg.body_containment_min = p["body_containment_min"].get<double>();
            }
            if (p.contains("body_iou_min")) cfg.body_iou_min = p["body_iou_min"].get<double>();
            if (p.contains("definitions")) {
                cfg.part_definitions.clear();
                for (const auto& [name, members] : p["definitions"].items()) {
                    PartDefinition def;
                    def.name = name;
                    for (const json& m : members) {
                        def.members.push_back(keypoint_index(m.get<std::string>()));
                    }
                    if (def.members.empty()) {
                        throw std::invalid_argument("config: part '" + name + "' has no members");
                    }
                    cfg.part_definitions.push_back(std::move(def));
                }
            }
        }
        if (doc.contains("metrics")) {
            const json& m = doc["metrics"];
            detail::reject_unknown_keys(m, {"ae_cap", "ae_units"}, "metrics.");
            if (m.contains("ae_cap")) cfg.ae.cap = m["ae_cap"].get<double>();
            if (m.contains("ae_units")) {
                const std::string units = m["ae_units"].get<std::string>();
                if (units == "annotator_std") {
                    cfg.ae.std_normalized = true;
                } else if (units == "pixels") {
                    cfg.ae.std_normalized = false;
                } else {
                    throw std::invalid_argument("config: unknown ae_units '" + units + "'");
                }
            }
        }
        if (doc.contains("training")) {
            const json& t = doc["training"];
            detail::reject_unknown_keys(
                t, {"max_background", "containment_min", "iou_min", "crop_side", "crop_buffer"},
                "training.");
            if (t.contains("max_background")) {
                cfg.max_background = t["max_background"].get<std::size_t>();
            }
            if (t.contains("containment_min")) {
                cfg.train_containment_min = t["containment_min"].get<double>();
            }
            if (t.contains("iou_min")) cfg.train_iou_min = t["iou_min"].get<double>();
            if (t.contains("crop_side")) cfg.crop_side = t["crop_side"].get<double>();
            if (t.contains("crop_buffer")) cfg.crop_buffer = t["crop_buffer"].get<double>();
        }
        if (doc.contains("cub")) {
            const json& c = doc["cub"];
            detail::reject_unknown_keys(c, {"shift_to_zero_indexed"}, "cub.");
            if (c.contains("shift_to_zero_indexed")) {
                cfg.shift_cub_coords = c["shift_to_zero_indexed"].get<bool>();
            }
        }
        if (doc.contains("simulate")) {
            const json& s = doc["simulate"];
            detail::reject_unknown_keys(
                s, {"images", "width", "height", "visible_prob", "box_counts", "noise"},
                "simulate.");
            if (s.contains("images")) cfg.synthetic.images = s["images"].get<std::size_t>();
            if (s.contains("width")) cfg.synthetic.width = s["width"].get<double>();
            if (s.contains("height")) cfg.synthetic.height = s["height"].get<double>();
            if (s.contains("visible_prob")) {
                cfg.synthetic.visible_prob = s["visible_prob"].get<double>();
            }
            if (s.contains("box_counts")) {
                cfg.box_counts = s["box_counts"].get<std::vector<std::size_t>>();
            }
            if (s.contains("noise")) {
                const json& n = s["noise"];
                detail::reject_unknown_keys(n,
                                            {"loc_sigma", "sigma_relative", "outlier_rate",
                                             "outlier_conf", "false_vis_rate", "conf_visible",
                                             "conf_invisible"},
                                            "simulate.noise.");
                if (n.contains("loc_sigma")) cfg.noise.loc_sigma = n["loc_sigma"].get<double>();
                if (n.contains("sigma_relative")) {
                    cfg.noise.sigma_relative = n["sigma_relative"].get<bool>();
                }
                if (n.contains("outlier_rate")) {
                    cfg.noise.outlier_rate = n["outlier_rate"].get<double>();
                }
                if (n.contains("outlier_conf")) {
                    cfg.noise.outlier_conf = n["outlier_conf"].get<double>();
                }
                if (n.contains("false_vis_rate")) {
                    cfg.noise.false_vis_rate = n["false_vis_rate"].get<double>();
                }
                if (n.contains("conf_visible")) {
                    cfg.noise.conf_visible = {n["conf_visible"][0].get<double>(),
                                              n["conf_visible"][1].get<double>()};
                }
                if (n.contains("conf_invisible")) {
                    cfg.noise.conf_invisible = {n["conf_invisible"][0].get<double>(),
                                                n["conf_invisible"][1].get<double>()};
                }
            }
        }
        if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
    }

    if (overrides.preset) detail::apply_preset(cfg, *overrides.preset);
    if (!overrides.preset && (doc.is_null() || !doc.contains("preset")) &&
        overrides.default_preset) {
        detail::apply_preset(cfg, *overrides.default_preset);
    }
    if (overrides.method) cfg.consensus.method = detail::parse_method(*overrides.method);
    if (overrides.top_k) cfg.top_k_boxes = *overrides.top_k;
    if (overrides.seed) cfg.seed = *overrides.seed;

    // Validate resolved values.
    const auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_unit(cfg.consensus.visibility_threshold)) {
        throw std::invalid_argument("config: visibility_threshold outside [0,1]");
    }
    if (!(cfg.consensus.z_threshold > 0.0)) {
        throw std::invalid_argument("config: z_threshold must be positive");
    }
    if (!(cfg.consensus.lambda > 0.0)) {
        throw std::invalid_argument("config: lambda must be positive");
    }
    cfg.noise.seed = cfg.seed;
    cfg.synthetic.seed = derive_seed(cfg.seed, 0x647354ULL);
    return cfg;
}

/// Canonical JSON echo of a resolved configuration.
inline nlohmann::json config_to_json(const RunConfig& cfg) {
    using nlohmann::json;
    json definitions = json::object();
    for (const PartDefinition& def : cfg.part_definitions) {
        json members = json::array();
        for (const std::size_t k : def.members) {
            members.push_back(std::string(kKeypointNames.at(k)));
        }
        definitions[def.name] = std::move(members);
    }
    return json{
        {"preset", cfg.preset},
        {"method", detail::method_name(cfg.consensus.method)},
        {"visibility_threshold", cfg.consensus.visibility_threshold},
        {"z_threshold", cfg.consensus.z_threshold},
        {"lambda", cfg.consensus.lambda},
        {"report_inlier_medoid", cfg.consensus.report_inlier_medoid},
        {"medoid_shift_bandwidth", cfg.consensus.medoid_shift_bandwidth},
        {"top_k_boxes", cfg.top_k_boxes},
        {"prefilter",
         json{{"containment_min", cfg.prefilter_containment}, {"iou_min", cfg.prefilter_iou}}},
        {"parts", json{{"min_side", cfg.part_min_side},
                       {"body_containment_min", cfg.body_containment_min},
                       {"body_iou_min", cfg.body_iou_min},
                       {"definitions", std::move(definitions)}}},
        {"metrics",
         json{{"ae_cap", cfg.ae.cap},
              {"ae_units", cfg.ae.std_normalized ? "annotator_std" : "pixels"},
              // Fixed conventions, echoed so reports are self-describing.
              {"pcp_boundary", "inclusive"},
              {"part_iou_boundary", "strict"}}},
        {"training", json{{"max_background", cfg.max_background},
                          {"containment_min", cfg.train_containment_min},
                          {"iou_min", cfg.train_iou_min},
                          {"crop_side", cfg.crop_side},
                          {"crop_buffer", cfg.crop_buffer}}},
        {"cub", json{{"shift_to_zero_indexed", cfg.shift_cub_coords}}},
        {"simulate",
         json{{"images", cfg.synthetic.images},
              {"width", cfg.synthetic.width},
              {"height", cfg.synthetic.height},
              {"visible_prob", cfg.synthetic.visible_prob},
              {"box_counts", cfg.box_counts},
              {"noise", json{{"loc_sigma", cfg.noise.loc_sigma},
                             {"sigma_relative", cfg.noise.sigma_relative},
                             {"outlier_rate", cfg.noise.outlier_rate},
                             {"outlier_conf", cfg.noise.outlier_conf},
                             {"false_vis_rate", cfg.noise.false_vis_rate},
                             {"conf_visible",
                              json::array({cfg.noise.conf_visible.alpha, cfg.noise.conf_visible.beta})},
                             {"conf_invisible", json::array({cfg.noise.conf_invisible.alpha,
                                                             cfg.noise.conf_invisible.beta})}}}}},
        {"seed", cfg.seed},
    };
}

}  // namespace kploc
