// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "synthscan/errors.hpp"
#include "synthscan/geometry.hpp"
#include "synthscan/obj.hpp"
#include "synthscan/xml.hpp"

namespace synthscan {

enum class Material { opaque, transmissive };

inline std::string_view to_string(Material m) { return m == Material::opaque ? "opaque" : "transmissive"; }

/// One placed asset. Parts are only ever translated, never rotated.
struct ScenePart {
    std::string asset_path;
    std::shared_ptr<const MeshAsset> mesh;
    Vec3 translation;
    ClassLabel label;
    Material material = Material::opaque;
    std::int32_t part_index = 0;

    Aabb bounds() const {
        Aabb b = mesh->bounds();
        return Aabb{b.min + translation, b.max + translation};
    }

    Rgb color() const { return mesh->color.value_or(palette_color(label.id)); }
};

/// Labeled parts on a ground plane. Part 0 is the ground.
struct Scene {
    std::string name;
    std::vector<ScenePart> parts;
    /// Centroid of the bounding-box centers of all non-ground parts.
    Vec3 center;
    LabelRegistry labels;

    const ScenePart& ground() const { return parts.front(); }
    Real ground_z() const { return ground().bounds().max.z; }
};

inline Vec3 scene_center(const std::vector<ScenePart>& parts) {
    Vec3 sum;
    std::size_t n = 0;
    for (std::size_t i = 1; i < parts.size(); ++i, ++n) sum += parts[i].bounds().center();
    if (n == 0) return parts.empty() ? Vec3{} : parts.front().bounds().center();
    return sum * (Real(1) / static_cast<Real>(n));
}

struct PlacementOptions {
    enum class Layout { grid, scatter };
    Layout layout = Layout::grid;
    std::uint64_t seed = 42;
    /// Class names whose parts let pulses pass through.
    std::set<std::string> transmissive_labels;
};

/// Places `num_objects` assets (round-robin) on the ground plane.
///
/// The grid layout is row-major with `ceil(sqrt(n))` columns, pitch `spacing`,
/// centered on the ground footprint; each object's footprint center sits on
/// its cell and its lowest point touches the top of the ground bounds. The
/// scatter layout draws object centers uniformly over the ground footprint.
inline Scene build_scene(const std::vector<LabeledAsset>& assets, const LabeledAsset& ground, int num_objects,
                         Real spacing, std::string name, const PlacementOptions& options = {}) {
    if (num_objects < 1) throw InputError("number of objects must be at least 1");
    if (assets.empty()) throw InputError("no object assets to place");

    Scene scene;
    scene.name = std::move(name);
    scene.parts.push_back({ground.path, ground.mesh, {}, {LabelRegistry::kGroundId, "ground"}, Material::opaque, 0});

    const Aabb ground_box = ground.mesh->bounds();
    const Vec3 ground_center = ground_box.center();
    const Real ground_z = ground_box.max.z;

    const auto n = static_cast<std::size_t>(num_objects);
    const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
    const std::size_t rows = (n + cols - 1) / cols;

    std::mt19937_64 rng(options.seed);
    for (std::size_t k = 0; k < n; ++k) {
        const LabeledAsset& asset = assets[k % assets.size()];
        const Aabb box = asset.mesh->bounds();
        const Vec3 half = box.extent() * Real(0.5);

        Real cx = 0, cy = 0;
        if (options.layout == PlacementOptions::Layout::grid) {
            const std::size_t r = k / cols, c = k % cols;
            cx = ground_center.x + (static_cast<Real>(c) - static_cast<Real>(cols - 1) / 2) * spacing;
            cy = ground_center.y + (static_cast<Real>(rows - 1) / 2 - static_cast<Real>(r)) * spacing;
        } else {
            const Real lo_x = ground_box.min.x + half.x, hi_x = ground_box.max.x - half.x;
            const Real lo_y = ground_box.min.y + half.y, hi_y = ground_box.max.y - half.y;
            if (lo_x > hi_x || lo_y > hi_y) throw GroundTooSmall("object '" + asset.label.name + "' is wider than the ground");
            cx = std::uniform_real_distribution<Real>(lo_x, hi_x)(rng);
            cy = std::uniform_real_distribution<Real>(lo_y, hi_y)(rng);
        }

        const Vec3 center = box.center();
        ScenePart part;
        part.asset_path = asset.path;
        part.mesh = asset.mesh;
        part.translation = {cx - center.x, cy - center.y, ground_z - box.min.z};
        part.label = scene.labels.insert(asset.label.id, asset.label.name);
        part.material = options.transmissive_labels.count(asset.label.name) ? Material::transmissive : Material::opaque;
        part.part_index = static_cast<std::int32_t>(scene.parts.size());

        const Aabb placed = part.bounds();
        if (placed.min.x < ground_box.min.x || placed.max.x > ground_box.max.x || placed.min.y < ground_box.min.y ||
            placed.max.y > ground_box.max.y)
            throw GroundTooSmall("object " + std::to_string(k) + " ('" + asset.label.name +
                                 "') extends past the ground footprint");
        scene.parts.push_back(std::move(part));
    }
    scene.center = scene_center(scene.parts);
    return scene;
}

struct ScanPosition {
    Vec3 position;
    int index = 0;
};

/// `segments` positions evenly spaced on a horizontal circle around `center`,
/// raised by `height`, starting on the +x axis and turning counter-clockwise.
inline std::vector<ScanPosition> generate_scan_positions(const Vec3& center, Real radius, int segments, Real height) {
    if (segments < 1) throw InputError("segments must be at least 1");
    if (!(radius > 0)) throw InputError("radius must be positive");
    std::vector<ScanPosition> out;
    out.reserve(static_cast<std::size_t>(segments));
    for (int i = 0; i < segments; ++i) {
        const Real theta = 2 * std::numbers::pi * i / segments;
        out.push_back({center + Vec3{radius * std::cos(theta), radius * std::sin(theta), height}, i});
    }
    return out;
}

inline std::string write_scene_xml(const Scene& scene) {
    using xml::attr;
    std::string out(xml::kDeclaration);
    out += "<document>\n";
    out += "  <scene" + attr("id", scene.name) + attr("name", scene.name) + ">\n";
    for (const auto& p : scene.parts) {
        out += "    <part" + attr("id", std::to_string(p.part_index)) + attr("classId", std::to_string(p.label.id)) +
               attr("label", p.label.name) + attr("material", to_string(p.material)) + ">\n";
        out += "      <filter type=\"objloader\">\n";
        out += "        <param type=\"string\" key=\"filepath\"" + attr("value", p.asset_path) + "/>\n";
        out += "      </filter>\n";
        out += "      <filter type=\"translate\">\n";
        out += "        <param type=\"vec3\" key=\"offset\"" + attr("value", xml::format_vec3(p.translation)) + "/>\n";
        out += "      </filter>\n";
        out += "    </part>\n";
    }
    out += "  </scene>\n";
    out += "</document>\n";
    return out;
}

/// Resolves an asset path from a scene file to a mesh; throws MissingAsset.
using AssetLoader = std::function<std::shared_ptr<const MeshAsset>(const std::string& path)>;

/// Loads asset paths relative to `base_dir`, caching repeated paths.
inline AssetLoader file_asset_loader(std::filesystem::path base_dir) {
    auto cache = std::make_shared<std::map<std::string, std::shared_ptr<const MeshAsset>>>();
    return [base_dir = std::move(base_dir), cache](const std::string& path) -> std::shared_ptr<const MeshAsset> {
        if (auto it = cache->find(path); it != cache->end()) return it->second;
        std::filesystem::path full(path);
        if (full.is_relative()) full = base_dir / full;
        if (!std::filesystem::is_regular_file(full)) throw MissingAsset(full.string());
        auto mesh = std::make_shared<const MeshAsset>(load_obj_file(full));
        cache->emplace(path, mesh);
        return mesh;
    };
}

inline Scene parse_scene_xml(std::string_view text, const AssetLoader& load) {
    using E = MalformedSceneXml;
    const xml::Tree tree = xml::parse<E>(text);
    const auto doc = tree.get_child_optional("document");
    if (!doc) throw E("document", "missing root element");
    const auto scene_node = doc->get_child_optional("scene");
    if (!scene_node) throw E("scene", "missing element");

    Scene scene;
    scene.name = xml::require_attr<E>(*scene_node, "scene", "id");

    for (const auto& [tag, node] : *scene_node) {
        if (tag == "<xmlattr>") continue;
        if (tag != "part") throw E(tag, "unexpected element in <scene>");

        ScenePart part;
        part.part_index = static_cast<std::int32_t>(scene.parts.size());
        if (auto id = xml::find_attr(node, "id"); id && *id != std::to_string(part.part_index))
            throw E("part", "id " + *id + " out of order, expected " + std::to_string(part.part_index));

        const auto class_id = xml::require_int<E, std::uint32_t>(node, "part", "classId");
        std::string label_name = xml::find_attr(node, "label").value_or("");
        if (label_name.empty()) label_name = class_id == 0 ? "ground" : "class" + std::to_string(class_id);
        try {
            part.label = scene.labels.insert(class_id, label_name);
        } catch (const InputError& e) {
            throw E("part", e.what());
        }
        if (part.part_index == 0 && class_id != LabelRegistry::kGroundId)
            throw E("part", "first part must be the ground (classId 0)");

        const std::string material = xml::find_attr(node, "material").value_or("opaque");
        if (material == "opaque") part.material = Material::opaque;
        else if (material == "transmissive") part.material = Material::transmissive;
        else throw E("part", "unknown material '" + material + "'");
        if (part.part_index == 0 && part.material != Material::opaque) throw E("part", "ground must be opaque");

        bool have_loader = false;
        for (const auto& [ftag, filter] : node) {
            if (ftag == "<xmlattr>") continue;
            if (ftag != "filter") throw E(ftag, "unexpected element in <part>");
            const std::string type = xml::require_attr<E>(filter, "filter", "type");
            if (type == "rotate") throw RotationUnsupported();

            std::map<std::string, std::string> params;
            for (const auto& [ptag, param] : filter) {
                if (ptag == "<xmlattr>") continue;
                if (ptag != "param") throw E(ptag, "unexpected element in <filter>");
                params[xml::require_attr<E>(param, "param", "key")] = xml::require_attr<E>(param, "param", "value");
            }

            if (type == "objloader") {
                auto it = params.find("filepath");
                if (it == params.end()) throw E("filter", "objloader needs a 'filepath' param");
                part.asset_path = it->second;
                have_loader = true;
            } else if (type == "translate") {
                auto it = params.find("offset");
                if (it == params.end()) throw E("filter", "translate needs an 'offset' param");
                part.translation = xml::parse_vec3<E>(it->second, "param");
            } else {
                throw E("filter", "unsupported filter type '" + type + "'");
            }
        }
        if (!have_loader) throw E("part", "missing objloader filter");
        part.mesh = load(part.asset_path);
        if (!part.mesh) throw MissingAsset(part.asset_path);
        scene.parts.push_back(std::move(part));
    }
    if (scene.parts.empty()) throw E("scene", "no parts");
    scene.center = scene_center(scene.parts);
    return scene;
}

inline Scene load_scene_file(const std::filesystem::path& path) {
    return parse_scene_xml(read_file(path), file_asset_loader(path.parent_path()));
}

} // namespace synthscan
