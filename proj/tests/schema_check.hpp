#pragma once

// Structural validators for every JSON document the tool emits. Each checker
// asserts the exact field set and value types, so format drift fails loudly.

#include <string>

#include "doctest.h"
#include "json.hpp"

namespace schema {

using nlohmann::json;

inline void expect_number(const json& j, const char* key) {
    REQUIRE(j.contains(key));
    CHECK(j[key].is_number());
}

inline void expect_behavior_or_null(const json& v) {
    if (v.is_null()) return;
    REQUIRE(v.is_string());
    std::string s = v.get<std::string>();
    CHECK((s == "attracting" || s == "repelling"));
}

inline void check_fixed_point_report(const json& j) {
    REQUIRE(j.contains("map"));
    CHECK(j["map"].is_string());
    REQUIRE(j.contains("domain"));
    REQUIRE(j["domain"].is_array());
    REQUIRE(j["domain"].size() == 2);
    CHECK(j["domain"][0].is_number());
    REQUIRE(j.contains("fixed_points"));
    REQUIRE(j["fixed_points"].is_array());
    for (const auto& fp : j["fixed_points"]) {
        expect_number(fp, "x");
        REQUIRE(fp.contains("left"));
        expect_behavior_or_null(fp["left"]);
        REQUIRE(fp.contains("right"));
        expect_behavior_or_null(fp["right"]);
        REQUIRE(fp.contains("kind"));
        std::string k = fp["kind"].get<std::string>();
        CHECK((k == "transverse" || k == "mixed"));
    }
    REQUIRE(j.contains("period2"));
    REQUIRE(j["period2"].is_array());
    for (const auto& orbit : j["period2"]) {
        expect_number(orbit, "xl");
        expect_number(orbit, "xr");
        REQUIRE(orbit.contains("stability"));
        expect_behavior_or_null(orbit["stability"]);
        CHECK_FALSE(orbit["stability"].is_null());
    }
}

inline void check_residual_report(const json& j) {
    expect_number(j, "sup");
    expect_number(j, "mean");
    expect_number(j, "n");
    expect_number(j, "exclusion");
    expect_number(j, "worst_x");
    REQUIRE(j.contains("pass"));
    CHECK(j["pass"].is_boolean());
}

inline void check_build_metadata(const json& j) {
    REQUIRE(j.contains("f"));
    CHECK(j["f"].is_string());
    REQUIRE(j.contains("g"));
    CHECK(j["g"].is_string());
    expect_number(j, "segments");
    REQUIRE(j.contains("reversed"));
    CHECK(j["reversed"].is_boolean());
    REQUIRE(j.contains("anchors"));
    REQUIRE(j["anchors"].is_array());
    for (const auto& a : j["anchors"]) {
        expect_number(a, "a");
        expect_number(a, "b");
    }
    expect_number(j, "max_steps");
    expect_number(j, "snap_tol");
}

inline void check_bifurcation_report(const json& j) {
    REQUIRE(j.contains("type"));
    std::string t = j["type"].get<std::string>();
    CHECK((t == "fold" || t == "transcritical" || t == "pitchfork" || t == "flip" ||
           t == "unclassified"));
    expect_number(j, "sigma");
    REQUIRE(j.contains("samples"));
    REQUIRE(j["samples"].is_array());
    for (const auto& s : j["samples"]) {
        expect_number(s, "mu");
        expect_number(s, "n_fixed");
        REQUIRE(s.contains("signature"));
        REQUIRE(s["signature"].is_array());
        REQUIRE(s.contains("period2"));
        REQUIRE(s["period2"].is_array());
    }
    REQUIRE(j.contains("windows"));
    REQUIRE(j["windows"].contains("x"));
    REQUIRE(j["windows"].contains("mu"));
}

}  // namespace schema
