#include <catch2/catch_amalgamated.hpp>

#include "kploc/config.hpp"

using Catch::Matchers::ContainsSubstring;
using namespace kploc;
using nlohmann::json;

TEST_CASE("config resolution") {
    SECTION("an empty document resolves to the documented defaults") {
        const RunConfig cfg = resolve_config(json());
        CHECK(cfg.preset == "gt-box");
        CHECK(cfg.consensus.visibility_threshold == 0.6);
        CHECK(cfg.consensus.z_threshold == 0.35);
        CHECK(cfg.consensus.lambda == 0.6745);
        CHECK(cfg.consensus.method == ConsensusMethod::InlierSet);
        CHECK(cfg.top_k_boxes == 600);
        CHECK(cfg.max_background == 50);
        CHECK(cfg.crop_side == 227.0);
        CHECK(cfg.crop_buffer == 16.0);
        CHECK(cfg.body_containment_min == 0.9);
        CHECK(cfg.body_iou_min == 0.5);
        REQUIRE(cfg.part_definitions.size() == 2);
        CHECK(cfg.part_definitions[0].name == "head");
        CHECK(cfg.part_definitions[1].name == "torso");
    }

    SECTION("unknown keys are rejected, including nested ones") {
        CHECK_THROWS_WITH(resolve_config(json{{"presett", "gt-box"}}),
                          ContainsSubstring("presett"));
        CHECK_THROWS_WITH(resolve_config(json{{"metrics", json{{"ae_capp", 5.0}}}}),
                          ContainsSubstring("metrics.ae_capp"));
        CHECK_THROWS_WITH(resolve_config(json{{"simulate", json{{"noise", json{{"sigma", 1.0}}}}}}),
                          ContainsSubstring("simulate.noise.sigma"));
    }

    SECTION("explicit thresholds override the preset") {
        const json doc{{"preset", "no-gt-box"}, {"z_threshold", 0.42}};
        const RunConfig cfg = resolve_config(doc);
        CHECK(cfg.consensus.visibility_threshold == 0.94);
        CHECK(cfg.consensus.z_threshold == 0.42);
    }

    SECTION("a flag preset beats the document preset") {
        ConfigOverrides overrides;
        overrides.preset = "no-gt-box";
        const RunConfig cfg = resolve_config(json{{"preset", "gt-box"}}, overrides);
        CHECK(cfg.consensus.visibility_threshold == 0.94);
    }

    SECTION("the situational default applies only when nothing chose a preset") {
        ConfigOverrides overrides;
        overrides.default_preset = "no-gt-box";
        CHECK(resolve_config(json(), overrides).consensus.visibility_threshold == 0.94);
        CHECK(resolve_config(json{{"preset", "gt-box"}}, overrides)
                  .consensus.visibility_threshold == 0.6);
        overrides.preset = "gt-box";
        CHECK(resolve_config(json(), overrides).consensus.visibility_threshold == 0.6);
    }

    SECTION("preset changes keep the selected method") {
        ConfigOverrides overrides;
        overrides.preset = "no-gt-box";
        overrides.method = "medoid-shift";
        const RunConfig cfg = resolve_config(json(), overrides);
        CHECK(cfg.consensus.method == ConsensusMethod::MedoidShift);
        CHECK(cfg.consensus.visibility_threshold == 0.94);
    }

    SECTION("unknown method and preset names are rejected") {
        CHECK_THROWS_WITH(resolve_config(json{{"method", "mean"}}), ContainsSubstring("mean"));
        CHECK_THROWS_WITH(resolve_config(json{{"preset", "fancy"}}), ContainsSubstring("fancy"));
    }

    SECTION("part definitions can be replaced from the document") {
        const json doc{{"parts", json{{"definitions",
                                       json{{"face", json::array({"beak", "left eye", "right_eye"})}}}}}};
        const RunConfig cfg = resolve_config(doc);
        REQUIRE(cfg.part_definitions.size() == 1);
        CHECK(cfg.part_definitions[0].name == "face");
        CHECK(cfg.part_definitions[0].members ==
              std::vector<std::size_t>{keypoint_index("beak"), keypoint_index("left_eye"),
                                       keypoint_index("right_eye")});
        CHECK_THROWS_WITH(
            resolve_config(json{{"parts", json{{"definitions", json{{"x", json::array()}}}}}}),
            ContainsSubstring("no members"));
        CHECK_THROWS_WITH(
            resolve_config(
                json{{"parts", json{{"definitions", json{{"x", json::array({"wingtip"})}}}}}}),
            ContainsSubstring("wingtip"));
    }

    SECTION("metric units are validated") {
        CHECK_FALSE(resolve_config(json{{"metrics", json{{"ae_units", "pixels"}}}})
                        .ae.std_normalized);
        CHECK_THROWS_WITH(resolve_config(json{{"metrics", json{{"ae_units", "furlongs"}}}}),
                          ContainsSubstring("furlongs"));
    }

    SECTION("out-of-range resolved thresholds are rejected") {
        CHECK_THROWS_AS(resolve_config(json{{"visibility_threshold", 1.5}}),
                        std::invalid_argument);
        CHECK_THROWS_AS(resolve_config(json{{"z_threshold", 0.0}}), std::invalid_argument);
        CHECK_THROWS_AS(resolve_config(json{{"lambda", -1.0}}), std::invalid_argument);
    }

    SECTION("the seed feeds the noise model and dataset generator") {
        const RunConfig cfg = resolve_config(json{{"seed", 99}});
        CHECK(cfg.seed == 99);
        CHECK(cfg.noise.seed == 99);
        CHECK(cfg.synthetic.seed != 99);  // derived substream
    }

    SECTION("the CUB shift flag is wired through") {
        CHECK(resolve_config(json{{"cub", json{{"shift_to_zero_indexed", true}}}}).shift_cub_coords);
    }
}

TEST_CASE("config echo is canonical and complete") {
    const RunConfig cfg = resolve_config(json{{"seed", 3}, {"method", "medoid"}});
    const json echo = config_to_json(cfg);
    CHECK(echo["method"] == "medoid");
    CHECK(echo["seed"] == 3);
    CHECK(echo["visibility_threshold"] == 0.6);
    CHECK(echo["parts"]["definitions"]["head"].size() == 7);
    CHECK(echo["metrics"]["pcp_boundary"] == "inclusive");
    CHECK(echo["metrics"]["part_iou_boundary"] == "strict");
    CHECK(echo.dump() == config_to_json(resolve_config(json{{"seed", 3}, {"method", "medoid"}})).dump());
}
