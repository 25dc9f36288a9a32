// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "synthscan/errors.hpp"
#include "synthscan/geometry.hpp"
#include "synthscan/obj.hpp"
#include "synthscan/xml.hpp"

namespace synthscan {

inline constexpr Real deg_to_rad(Real deg) { return deg * std::numbers::pi / 180; }

/// How the scanner head sweeps. Angles are degrees: azimuth counter-clockwise
/// about +z from +x, elevation up from the horizontal.
struct ScannerSettings {
    Real horiz_start_deg = 0;
    Real horiz_end_deg = 360;
    Real horiz_res_deg = 0.1;
    Real vert_start_deg = -40;
    Real vert_end_deg = 60;
    Real vert_res_deg = 0.1;
    Real max_range_m = 100;
    Real range_noise_sigma_m = 0;
    /// Full cone angle.
    Real beam_divergence_mrad = 0;
    int beam_sample_quality = 1;

    friend bool operator==(const ScannerSettings&, const ScannerSettings&) = default;

    void validate() const {
        auto finite = [](Real v) { return std::isfinite(v); };
        if (!finite(horiz_start_deg) || !finite(horiz_end_deg) || !finite(vert_start_deg) || !finite(vert_end_deg) ||
            !finite(horiz_res_deg) || !finite(vert_res_deg) || !finite(max_range_m) || !finite(range_noise_sigma_m) ||
            !finite(beam_divergence_mrad))
            throw InvalidSettings("non-finite value");
        if (!(horiz_start_deg < horiz_end_deg)) throw InvalidSettings("horizontal start must be below end");
        if (horiz_end_deg - horiz_start_deg > 360 + 1e-9) throw InvalidSettings("horizontal sweep exceeds 360 degrees");
        if (!(vert_start_deg <= vert_end_deg)) throw InvalidSettings("vertical start must not exceed end");
        if (vert_start_deg < -90 || vert_end_deg > 90) throw InvalidSettings("elevation outside [-90, 90]");
        if (!(horiz_res_deg > 0) || !(vert_res_deg > 0)) throw InvalidSettings("resolutions must be positive");
        if (!(max_range_m > 0)) throw InvalidSettings("max range must be positive");
        if (range_noise_sigma_m < 0) throw InvalidSettings("noise sigma must be non-negative");
        if (beam_divergence_mrad < 0) throw InvalidSettings("beam divergence must be non-negative");
        if (beam_sample_quality < 1) throw InvalidSettings("beam sample quality must be at least 1");
        if (azimuth_steps() == 0) throw InvalidSettings("horizontal resolution exceeds the sweep");
    }

    /// round(span / res); the end angle is never sampled, so a full circle
    /// has no duplicate seam column.
    std::size_t azimuth_steps() const {
        return static_cast<std::size_t>(std::llround((horiz_end_deg - horiz_start_deg) / horiz_res_deg));
    }

    /// round(span / res) + 1; both end angles are sampled.
    std::size_t elevation_steps() const {
        return static_cast<std::size_t>(std::llround((vert_end_deg - vert_start_deg) / vert_res_deg)) + 1;
    }

    std::size_t pulse_count() const { return azimuth_steps() * elevation_steps(); }

    Real azimuth_rad(std::size_t i) const { return deg_to_rad(horiz_start_deg + static_cast<Real>(i) * horiz_res_deg); }
    Real elevation_rad(std::size_t j) const { return deg_to_rad(vert_start_deg + static_cast<Real>(j) * vert_res_deg); }
};

/// Named scanner configurations: "generic-lidar" and "tls-default".
inline ScannerSettings preset(std::string_view name) {
    ScannerSettings s;
    if (name == "generic-lidar") {
        s.horiz_start_deg = -180;
        s.horiz_end_deg = 180;
        s.horiz_res_deg = 0.05;
        s.vert_start_deg = 0;
        s.vert_end_deg = 0;
        s.vert_res_deg = 1;
        s.max_range_m = 100;
        s.range_noise_sigma_m = 0;
        s.beam_divergence_mrad = 0;
        s.beam_sample_quality = 1;
    } else if (name == "tls-default") {
        s.horiz_start_deg = 0;
        s.horiz_end_deg = 360;
        s.horiz_res_deg = 0.04;
        s.vert_start_deg = -40;
        s.vert_end_deg = 60;
        s.vert_res_deg = 0.04;
        s.max_range_m = 120;
        s.range_noise_sigma_m = 0.002;
        s.beam_divergence_mrad = 0.3;
        s.beam_sample_quality = 3;
    } else {
        throw UnknownPreset(std::string(name));
    }
    return s;
}

struct Leg {
    Vec3 position;
    std::optional<ScannerSettings> settings;
    int index = 0;

    friend bool operator==(const Leg&, const Leg&) = default;
};

struct Survey {
    std::string name;
    /// Scene file, relative paths resolved against the survey file.
    std::string scene_path;
    std::string scene_id;
    ScannerSettings settings;
    std::vector<Leg> legs;
    std::uint64_t seed = 42;

    const ScannerSettings& settings_for(const Leg& leg) const { return leg.settings ? *leg.settings : settings; }

    friend bool operator==(const Survey&, const Survey&) = default;
};

namespace detail {

inline std::string settings_attrs(const ScannerSettings& s) {
    using xml::attr;
    return attr("horizStart_deg", s.horiz_start_deg) + attr("horizEnd_deg", s.horiz_end_deg) +
           attr("horizRes_deg", s.horiz_res_deg) + attr("vertStart_deg", s.vert_start_deg) +
           attr("vertEnd_deg", s.vert_end_deg) + attr("vertRes_deg", s.vert_res_deg) +
           attr("maxRange_m", s.max_range_m) + attr("rangeNoiseSigma_m", s.range_noise_sigma_m) +
           attr("beamDivergence_mrad", s.beam_divergence_mrad) +
           attr("beamSampleQuality", std::to_string(s.beam_sample_quality));
}

inline ScannerSettings parse_settings(const xml::Tree& node) {
    using E = MalformedSurveyXml;
    const std::string el = "scannerSettings";
    ScannerSettings s;
    s.horiz_start_deg = xml::require_real<E>(node, el, "horizStart_deg");
    s.horiz_end_deg = xml::require_real<E>(node, el, "horizEnd_deg");
    s.horiz_res_deg = xml::require_real<E>(node, el, "horizRes_deg");
    s.vert_start_deg = xml::require_real<E>(node, el, "vertStart_deg");
    s.vert_end_deg = xml::require_real<E>(node, el, "vertEnd_deg");
    s.vert_res_deg = xml::require_real<E>(node, el, "vertRes_deg");
    s.max_range_m = xml::require_real<E>(node, el, "maxRange_m");
    s.range_noise_sigma_m = xml::require_real<E>(node, el, "rangeNoiseSigma_m");
    s.beam_divergence_mrad = xml::require_real<E>(node, el, "beamDivergence_mrad");
    s.beam_sample_quality = xml::require_int<E, int>(node, el, "beamSampleQuality");
    try {
        s.validate();
    } catch (const InvalidSettings& e) {
        throw E(el, e.what());
    }
    return s;
}

} // namespace detail

inline std::string write_survey_xml(const Survey& survey) {
    using xml::attr;
    if (survey.legs.empty()) throw NoLegs();
    std::string out(xml::kDeclaration);
    out += "<document>\n";
    out += "  <survey" + attr("name", survey.name) + attr("scene", survey.scene_path + "#" + survey.scene_id) +
           attr("seed", std::to_string(survey.seed)) + ">\n";
    out += "    <scannerSettings" + detail::settings_attrs(survey.settings) + "/>\n";
    for (const auto& leg : survey.legs) {
        out += "    <leg" + attr("index", std::to_string(leg.index)) + ">\n";
        out += "      <platformSettings" + attr("x", leg.position.x) + attr("y", leg.position.y) +
               attr("z", leg.position.z) + "/>\n";
        if (leg.settings) out += "      <scannerSettings" + detail::settings_attrs(*leg.settings) + "/>\n";
        out += "    </leg>\n";
    }
    out += "  </survey>\n";
    out += "</document>\n";
    return out;
}

inline Survey parse_survey_xml(std::string_view text) {
    using E = MalformedSurveyXml;
    const xml::Tree tree = xml::parse<E>(text);
    const auto doc = tree.get_child_optional("document");
    if (!doc) throw E("document", "missing root element");
    const auto node = doc->get_child_optional("survey");
    if (!node) throw E("survey", "missing element");

    Survey survey;
    survey.name = xml::find_attr(*node, "name").value_or("");
    const std::string scene_ref = xml::require_attr<E>(*node, "survey", "scene");
    if (const auto hash = scene_ref.rfind('#'); hash != std::string::npos) {
        survey.scene_path = scene_ref.substr(0, hash);
        survey.scene_id = scene_ref.substr(hash + 1);
    } else {
        survey.scene_path = scene_ref;
    }
    if (xml::find_attr(*node, "seed")) survey.seed = xml::require_int<E, std::uint64_t>(*node, "survey", "seed");

    bool have_settings = false;
    for (const auto& [tag, child] : *node) {
        if (tag == "<xmlattr>") continue;
        if (tag == "scannerSettings") {
            survey.settings = detail::parse_settings(child);
            have_settings = true;
        } else if (tag == "leg") {
            Leg leg;
            leg.index = static_cast<int>(survey.legs.size());
            if (auto idx = xml::find_attr(child, "index"); idx && *idx != std::to_string(leg.index))
                throw E("leg", "index " + *idx + " out of order, expected " + std::to_string(leg.index));
            bool have_position = false;
            for (const auto& [ltag, lchild] : child) {
                if (ltag == "<xmlattr>") continue;
                if (ltag == "platformSettings") {
                    leg.position = {xml::require_real<E>(lchild, ltag, "x"), xml::require_real<E>(lchild, ltag, "y"),
                                    xml::require_real<E>(lchild, ltag, "z")};
                    have_position = true;
                } else if (ltag == "scannerSettings") {
                    leg.settings = detail::parse_settings(lchild);
                } else {
                    throw E(ltag, "unexpected element in <leg>");
                }
            }
            if (!have_position) throw E("leg", "missing platformSettings");
            survey.legs.push_back(std::move(leg));
        } else {
            throw E(tag, "unexpected element in <survey>");
        }
    }
    if (!have_settings) throw E("survey", "missing scannerSettings");
    if (survey.legs.empty()) throw NoLegs();
    return survey;
}

inline Survey load_survey_file(const std::filesystem::path& path) { return parse_survey_xml(read_file(path)); }

} // namespace synthscan
