// Command-line front end for the keypoint-consensus pipeline: prepare
// training manifests, run consensus over per-proposal predictions, build
// part boxes, evaluate against annotations, and run simulator sweeps.

#include <algorithm>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "kploc/kploc.hpp"

namespace {

using kploc::ConsensusResult;
using kploc::ImageAnnotation;
using kploc::PredictionSet;
using kploc::Rect;
using kploc::RunConfig;
using nlohmann::json;

struct CommonArgs {
    std::string annotations;
    std::string predictions;
    std::string proposals;
    std::string consensus;
    std::string std_file;
    std::string config_file;
    std::string preset;
    std::string method;
    std::string out;
    std::size_t top_k = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    unsigned threads = 1;
};

RunConfig resolve(const CommonArgs& args, const std::string& default_preset = "") {
    json doc;
    if (!args.config_file.empty()) {
        std::ifstream in(args.config_file);
        if (!in) {
            throw std::runtime_error("cannot open config file: " + args.config_file);
        }
        doc = json::parse(in);
    }
    kploc::ConfigOverrides overrides;
    if (!args.preset.empty()) overrides.preset = args.preset;
    if (!args.method.empty()) overrides.method = args.method;
    if (args.top_k > 0) overrides.top_k = args.top_k;
    if (args.seed_set) overrides.seed = args.seed;
    if (!default_preset.empty()) overrides.default_preset = default_preset;
    return kploc::resolve_config(doc, overrides);
}

std::vector<ImageAnnotation> load_annotations_sorted(const std::string& path, bool shift) {
    std::vector<ImageAnnotation> anns = kploc::io::load_cub_annotations(path, shift);
    std::sort(anns.begin(), anns.end(),
              [](const ImageAnnotation& a, const ImageAnnotation& b) {
                  return a.image_id < b.image_id;
              });
    return anns;
}

std::map<long long, std::vector<PredictionSet>> group_by_image(std::vector<PredictionSet> preds) {
    std::map<long long, std::vector<PredictionSet>> groups;
    for (PredictionSet& p : preds) {
        groups[p.image_id].push_back(std::move(p));
    }
    return groups;
}

// Reassembles per-image consensus records into aligned result vectors,
// validating that every image carries a complete keypoint set.
std::map<long long, std::vector<ConsensusResult>> group_consensus(
    const std::vector<kploc::io::ConsensusRecord>& records) {
    std::size_t n = 0;
    for (const auto& r : records) n = std::max(n, r.keypoint + 1);
    std::map<long long, std::vector<ConsensusResult>> by_image;
    std::map<long long, std::vector<bool>> seen;
    for (const auto& r : records) {
        auto& results = by_image[r.image_id];
        auto& flags = seen[r.image_id];
        results.resize(n);
        flags.resize(n, false);
        if (flags[r.keypoint]) {
            throw std::runtime_error("consensus file: duplicate record for image " +
                                     std::to_string(r.image_id) + " keypoint " +
                                     std::to_string(r.keypoint));
        }
        flags[r.keypoint] = true;
        results[r.keypoint] = r.to_result();
    }
    for (const auto& [id, flags] : seen) {
        for (std::size_t k = 0; k < flags.size(); ++k) {
            if (!flags[k]) {
                throw std::runtime_error("consensus file: image " + std::to_string(id) +
                                         " missing keypoint " + std::to_string(k));
            }
        }
    }
    return by_image;
}

std::optional<Rect> find_part_box(const std::vector<ConsensusResult>& results,
                                  const RunConfig& cfg, const std::string& name) {
    for (const kploc::PartDefinition& def : cfg.part_definitions) {
        if (def.name == name) return kploc::part_box(results, def, cfg.part_min_side);
    }
    return std::nullopt;
}

int cmd_consensus(const CommonArgs& args) {
    // Without ground-truth boxes the aggressive thresholds apply.
    const RunConfig cfg = resolve(args, args.annotations.empty() ? "no-gt-box" : "gt-box");
    auto groups = group_by_image(kploc::io::load_predictions(args.predictions));

    std::optional<std::map<long long, const ImageAnnotation*>> ann_index;
    std::vector<ImageAnnotation> anns;
    if (!args.annotations.empty()) {
        anns = load_annotations_sorted(args.annotations, cfg.shift_cub_coords);
        ann_index.emplace();
        for (const ImageAnnotation& a : anns) (*ann_index)[a.image_id] = &a;
    }

    // Per-image proposal selection: annotation prefilter when ground-truth
    // boxes are available, otherwise top-k by objectness score.
    std::size_t num_keypoints = 0;
    for (auto& [id, preds] : groups) {
        if (ann_index) {
            const auto it = ann_index->find(id);
            if (it == ann_index->end()) {
                throw std::runtime_error("predictions reference unknown image id " +
                                         std::to_string(id));
            }
            const Rect& gt = it->second->object_box;
            std::vector<PredictionSet> kept;
            for (PredictionSet& p : preds) {
                if (kploc::containment_fraction(p.box, gt) >= cfg.prefilter_containment &&
                    kploc::iou(p.box, gt) >= cfg.prefilter_iou) {
                    kept.push_back(std::move(p));
                }
            }
            preds = std::move(kept);
        } else {
            std::stable_sort(preds.begin(), preds.end(),
                             [](const PredictionSet& a, const PredictionSet& b) {
                                 return a.box_score > b.box_score;
                             });
            if (preds.size() > cfg.top_k_boxes) {
                preds.erase(preds.begin() + static_cast<std::ptrdiff_t>(cfg.top_k_boxes),
                            preds.end());
            }
        }
        for (const PredictionSet& p : preds) {
            if (p.loc.empty()) {
                throw std::runtime_error("prediction record for image " + std::to_string(id) +
                                         " carries no keypoint predictions");
            }
            if (num_keypoints == 0) num_keypoints = p.loc.size();
            if (p.loc.size() != num_keypoints) {
                throw std::runtime_error("inconsistent keypoint counts across predictions");
            }
        }
    }
    if (num_keypoints == 0) num_keypoints = kploc::kNumKeypoints;

    std::vector<long long> ids;
    ids.reserve(groups.size());
    for (const auto& [id, preds] : groups) ids.push_back(id);

    std::vector<std::vector<kploc::io::ConsensusRecord>> per_image(ids.size());
    kploc::parallel_for(ids.size(), args.threads, [&](std::size_t i) {
        const std::vector<PredictionSet>& preds = groups.at(ids[i]);
        std::vector<Rect> boxes;
        boxes.reserve(preds.size());
        for (const PredictionSet& p : preds) boxes.push_back(p.box);
        const std::vector<ConsensusResult> results =
            kploc::consensus_image(preds, boxes, cfg.consensus, num_keypoints);
        per_image[i].reserve(results.size());
        for (std::size_t k = 0; k < results.size(); ++k) {
            kploc::io::ConsensusRecord rec;
            rec.image_id = ids[i];
            rec.keypoint = k;
            rec.visible = results[k].visible;
            rec.location = results[k].location;
            rec.inliers = results[k].inliers;
            per_image[i].push_back(std::move(rec));
        }
    });

    std::vector<kploc::io::ConsensusRecord> records;
    for (const auto& image_records : per_image) {
        records.insert(records.end(), image_records.begin(), image_records.end());
    }
    kploc::io::save_consensus(args.out, records, kploc::config_to_json(cfg));
    return 0;
}

int cmd_evaluate(const CommonArgs& args) {
    const RunConfig cfg = resolve(args);
    const auto by_image = group_consensus(kploc::io::load_consensus(args.consensus));
    const std::vector<ImageAnnotation> all_anns =
        load_annotations_sorted(args.annotations, cfg.shift_cub_coords);
    std::map<long long, const ImageAnnotation*> ann_index;
    for (const ImageAnnotation& a : all_anns) ann_index[a.image_id] = &a;

    std::vector<std::vector<ConsensusResult>> preds;
    std::vector<ImageAnnotation> gts;
    for (const auto& [id, results] : by_image) {
        const auto it = ann_index.find(id);
        if (it == ann_index.end()) {
            throw std::runtime_error("consensus references unknown image id " + std::to_string(id));
        }
        preds.push_back(results);
        gts.push_back(*it->second);
    }

    const std::size_t n = gts.empty() ? kploc::kNumKeypoints : gts[0].keypoints.size();
    const kploc::AnnotatorStd std_dev = kploc::io::load_annotator_std(args.std_file, n);

    kploc::EvalReport report;
    report.ae_options = cfg.ae;
    const auto& groups = kploc::cub_merged_groups();
    report.pcp = kploc::pcp(preds, gts, std_dev,
                            n == kploc::kNumKeypoints
                                ? std::span(groups)
                                : std::span<const std::pair<std::string, std::vector<std::size_t>>>{});

    long long qualifying = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            if (gts[i].keypoints[k].visible && preds[i][k].visible) ++qualifying;
        }
    }
    if (qualifying > 0) {
        report.ae = kploc::average_error(preds, gts, std_dev, cfg.ae);
    }
    report.visibility = kploc::visibility_rates(preds, gts);

    // Part localization against ground-truth part boxes built by the same
    // tightest-box rule; the whole body compares to the annotated object box.
    std::map<long long, std::vector<kploc::ScoredBox>> proposal_groups;
    if (!args.proposals.empty()) {
        for (const PredictionSet& p : kploc::io::load_predictions(args.proposals)) {
            proposal_groups[p.image_id].push_back({p.box, p.box_score});
        }
    }
    for (const kploc::PartDefinition& def : cfg.part_definitions) {
        std::vector<std::optional<Rect>> pred_boxes, gt_boxes;
        std::size_t i = 0;
        for (const auto& [id, results] : by_image) {
            pred_boxes.push_back(kploc::part_box(results, def, cfg.part_min_side));
            gt_boxes.push_back(kploc::gt_part_box(gts[i], def, cfg.part_min_side));
            ++i;
        }
        report.part_accuracy.emplace_back(def.name,
                                          kploc::part_localization_accuracy(pred_boxes, gt_boxes));
    }
    {
        std::vector<std::optional<Rect>> pred_boxes, gt_boxes;
        std::size_t i = 0;
        for (const auto& [id, results] : by_image) {
            const std::optional<Rect> head = find_part_box(results, cfg, "head");
            const std::optional<Rect> torso = find_part_box(results, cfg, "torso");
            if (head || torso) {
                const auto pit = proposal_groups.find(id);
                std::span<const kploc::ScoredBox> candidates;
                if (pit != proposal_groups.end()) candidates = pit->second;
                pred_boxes.push_back(kploc::whole_body_box(head, torso, candidates,
                                                           cfg.body_containment_min,
                                                           cfg.body_iou_min));
            } else {
                pred_boxes.push_back(std::nullopt);
            }
            gt_boxes.push_back(gts[i].object_box);
            ++i;
        }
        report.part_accuracy.emplace_back("whole_body",
                                          kploc::part_localization_accuracy(pred_boxes, gt_boxes));
    }

    kploc::io::save_report(args.out, kploc::io::report_to_json(report, kploc::config_to_json(cfg)));
    return 0;
}

int cmd_partbox(const CommonArgs& args) {
    const RunConfig cfg = resolve(args);
    const auto by_image = group_consensus(kploc::io::load_consensus(args.consensus));

    std::map<long long, std::vector<kploc::ScoredBox>> proposal_groups;
    if (!args.proposals.empty()) {
        for (const PredictionSet& p : kploc::io::load_predictions(args.proposals)) {
            proposal_groups[p.image_id].push_back({p.box, p.box_score});
        }
    }

    std::vector<kploc::io::PartBoxRecord> records;
    for (const auto& [id, results] : by_image) {
        std::optional<Rect> head, torso;
        for (const kploc::PartDefinition& def : cfg.part_definitions) {
            const std::optional<Rect> box = kploc::part_box(results, def, cfg.part_min_side);
            if (def.name == "head") head = box;
            if (def.name == "torso") torso = box;
            records.push_back({id, def.name, box});
        }
        std::optional<Rect> body;
        if (head || torso) {
            const auto pit = proposal_groups.find(id);
            std::span<const kploc::ScoredBox> candidates;
            if (pit != proposal_groups.end()) candidates = pit->second;
            body = kploc::whole_body_box(head, torso, candidates, cfg.body_containment_min,
                                         cfg.body_iou_min);
        }
        records.push_back({id, "whole_body", body});
    }
    kploc::io::save_part_boxes(args.out, records, kploc::config_to_json(cfg));
    return 0;
}

int cmd_prepare(const CommonArgs& args) {
    const RunConfig cfg = resolve(args);
    std::vector<ImageAnnotation> anns =
        load_annotations_sorted(args.annotations, cfg.shift_cub_coords);
    std::erase_if(anns, [](const ImageAnnotation& a) { return !a.is_training; });

    std::map<long long, std::vector<Rect>> proposal_groups;
    for (const PredictionSet& p : kploc::io::load_predictions(args.proposals)) {
        proposal_groups[p.image_id].push_back(p.box);
    }

    std::vector<std::vector<kploc::io::ManifestRecord>> per_image(anns.size());
    kploc::parallel_for(anns.size(), args.threads, [&](std::size_t i) {
        const ImageAnnotation& ann = anns[i];
        const auto pit = proposal_groups.find(ann.image_id);
        if (pit == proposal_groups.end()) return;  // no proposals, no crops
        if (!(ann.width > 0.0)) {
            throw std::runtime_error("image " + std::to_string(ann.image_id) +
                                     ": width unknown; flips need sizes.txt");
        }
        const auto selected = kploc::select_training_boxes(
            pit->second, ann.object_box,
            kploc::derive_seed(cfg.seed, static_cast<std::uint64_t>(ann.image_id)),
            cfg.max_background, cfg.train_containment_min, cfg.train_iou_min);

        std::vector<kploc::io::ManifestRecord>& records = per_image[i];
        std::vector<kploc::TrainingExample> flips;
        for (const auto& [box, is_background] : selected) {
            kploc::TrainingExample ex =
                kploc::make_targets(box, ann, is_background, cfg.crop_side, cfg.crop_buffer);
            if (!is_background) {
                flips.push_back(kploc::flip_example(ex, ann.width, kploc::cub_flip_map()));
            }
            records.push_back({ann.image_id, std::move(ex)});
        }
        for (kploc::TrainingExample& ex : flips) {
            records.push_back({ann.image_id, std::move(ex)});
        }
        // Backgrounds after positives+flips, preserving selection order.
        std::stable_partition(records.begin(), records.end(),
                              [](const kploc::io::ManifestRecord& r) {
                                  return !r.example.is_background;
                              });
    });

    std::vector<kploc::io::ManifestRecord> records;
    for (auto& image_records : per_image) {
        for (auto& r : image_records) records.push_back(std::move(r));
    }
    kploc::io::save_manifest(args.out, records, kploc::config_to_json(cfg));
    return 0;
}

int cmd_simulate(const CommonArgs& args) {
    // The sweep mimics the annotation-free protocol.
    const RunConfig cfg = resolve(args, "no-gt-box");
    const std::vector<ImageAnnotation> dataset = kploc::generate_synthetic_annotations(cfg.synthetic);
    const std::vector<kploc::SweepRow> rows = kploc::run_sweep(
        dataset, cfg.noise, cfg.box_counts, cfg.consensus, cfg.body_containment_min,
        cfg.body_iou_min);
    const std::string table = kploc::io::format_sweep(rows, kploc::config_to_json(cfg));
    if (args.out.empty()) {
        std::cout << table;
    } else {
        std::ofstream out(args.out, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write file: " + args.out);
        out << table;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-proposal keypoint consensus, part boxes, and evaluation"};
    app.require_subcommand(1);

    CommonArgs args;
    const auto add_common = [&args](CLI::App* sub) {
        sub->add_option("--config", args.config_file, "JSON run-config file");
        sub->add_option("--preset", args.preset, "consensus preset")
            ->check(CLI::IsMember({"gt-box", "no-gt-box", "custom"}));
        sub->add_option("--method", args.method, "consensus method")
            ->check(CLI::IsMember({"medoid", "inliers", "medoid-shift"}));
        sub->add_option("--top-k", args.top_k, "proposals kept per image without annotations");
        sub->add_option("--seed", args.seed, "run seed")->each([&args](const std::string&) {
            args.seed_set = true;
        });
        sub->add_option("--threads", args.threads, "worker threads (never changes output bytes)");
        sub->add_option("--out", args.out, "output file");
    };

    CLI::App* consensus = app.add_subcommand("consensus", "combine per-proposal predictions");
    consensus->add_option("--predictions", args.predictions, "predictions file")->required();
    consensus->add_option("--annotations", args.annotations,
                          "CUB annotation directory (enables the ground-truth-box prefilter)");
    add_common(consensus);
    consensus->get_option("--out")->required();

    CLI::App* evaluate = app.add_subcommand("evaluate", "score consensus against annotations");
    evaluate->add_option("--consensus", args.consensus, "consensus file")->required();
    evaluate->add_option("--annotations", args.annotations, "CUB annotation directory")->required();
    evaluate->add_option("--std", args.std_file, "per-keypoint annotator std file")->required();
    evaluate->add_option("--proposals", args.proposals, "scored proposal file (whole-body box)");
    add_common(evaluate);
    evaluate->get_option("--out")->required();

    CLI::App* partbox = app.add_subcommand("partbox", "build part boxes from consensus");
    partbox->add_option("--consensus", args.consensus, "consensus file")->required();
    partbox->add_option("--proposals", args.proposals, "scored proposal file");
    add_common(partbox);
    partbox->get_option("--out")->required();

    CLI::App* prepare = app.add_subcommand("prepare", "build training crops and targets");
    prepare->add_option("--annotations", args.annotations, "CUB annotation directory")->required();
    prepare->add_option("--proposals", args.proposals, "proposal file")->required();
    add_common(prepare);
    prepare->get_option("--out")->required();

    CLI::App* simulate = app.add_subcommand("simulate", "synthetic accuracy-vs-boxes sweep");
    add_common(simulate);

    CLI11_PARSE(app, argc, argv);

    try {
        if (consensus->parsed()) return cmd_consensus(args);
        if (evaluate->parsed()) return cmd_evaluate(args);
        if (partbox->parsed()) return cmd_partbox(args);
        if (prepare->parsed()) return cmd_prepare(args);
        if (simulate->parsed()) return cmd_simulate(args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
