// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "synthscan/errors.hpp"
#include "synthscan/geometry.hpp"
#include "synthscan/text.hpp"

namespace synthscan {

struct Rgb {
    std::uint8_t r = 255, g = 255, b = 255;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Fixed color table indexed by class id. Id 0 (ground) is grey.
inline Rgb palette_color(std::uint32_t label_id) {
    static constexpr std::array<Rgb, 12> kPalette{{
        {160, 160, 160}, {230, 25, 75},  {60, 180, 75},  {255, 225, 25}, {0, 130, 200},  {245, 130, 48},
        {145, 30, 180},  {70, 240, 240}, {240, 50, 230}, {210, 245, 60}, {250, 190, 212}, {0, 128, 128},
    }};
    if (label_id == 0) return kPalette[0];
    return kPalette[1 + (label_id - 1) % (kPalette.size() - 1)];
}

/// A triangulated mesh read from one OBJ file.
struct MeshAsset {
    std::string name;
    std::vector<Vec3> vertices;
    std::vector<std::array<std::uint32_t, 3>> triangles;
    /// `vn` entries. Empty when the file carries no normals.
    std::vector<Vec3> normals;
    /// Normal index per triangle corner, parallel to `triangles`; -1 where the
    /// face had none. Empty when no face references a normal.
    std::vector<std::array<std::int32_t, 3>> triangle_normals;
    std::optional<Rgb> color;

    Aabb bounds() const {
        Aabb box;
        for (const auto& t : triangles)
            for (auto i : t) box.extend(vertices[i]);
        return box;
    }

    bool has_normals(std::size_t triangle) const {
        if (triangle_normals.empty()) return false;
        const auto& n = triangle_normals[triangle];
        return n[0] >= 0 && n[1] >= 0 && n[2] >= 0;
    }
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

// Resolves a 1-based or negative (relative) OBJ index against `count` entries.
inline std::optional<std::uint32_t> resolve_obj_index(std::string_view token, std::size_t count) {
    long long raw = 0;
    auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), raw);
    if (ec != std::errc{} || p != token.data() + token.size() || raw == 0) return std::nullopt;
    const long long idx = raw > 0 ? raw - 1 : static_cast<long long>(count) + raw;
    if (idx < 0 || idx >= static_cast<long long>(count)) return std::nullopt;
    return static_cast<std::uint32_t>(idx);
}

} // namespace detail

/// Parses Wavefront OBJ text. Supports `v`, `vn` and `f` (forms v, v/vt,
/// v//vn, v/vt/vn, negative indices); polygons are fan-triangulated from their
/// first corner. Groups and objects are concatenated, and anything else is
/// skipped.
inline MeshAsset parse_obj(std::string_view text) {
    MeshAsset mesh;
    std::size_t texcoords = 0;
    std::size_t line_no = 0;
    bool any_face_normal = false;

    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;

        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const auto tok = detail::split_ws(line);
        if (tok.empty()) continue;

        const std::string_view kw = tok[0];
        if (kw == "v" || kw == "vn") {
            if (tok.size() < 4) throw MalformedObj(line_no, "expected 3 coordinates");
            Vec3 p;
            for (int a = 0; a < 3; ++a) {
                auto value = parse_real(tok[1 + a]);
                if (!value || !std::isfinite(*value))
                    throw MalformedObj(line_no, "non-numeric coordinate '" + std::string(tok[1 + a]) + "'");
                p[a] = *value;
            }
            (kw == "v" ? mesh.vertices : mesh.normals).push_back(p);
        } else if (kw == "vt") {
            ++texcoords;
        } else if (kw == "f") {
            if (tok.size() < 4) throw MalformedObj(line_no, "face needs at least 3 vertices");
            std::vector<std::uint32_t> corners;
            std::vector<std::int32_t> corner_normals;
            for (std::size_t k = 1; k < tok.size(); ++k) {
                const std::string_view ref = tok[k];
                const auto s1 = ref.find('/');
                const std::string_view vtok = ref.substr(0, s1);
                auto vi = detail::resolve_obj_index(vtok, mesh.vertices.size());
                if (!vi) throw MalformedObj(line_no, "vertex index '" + std::string(vtok) + "' out of range");
                corners.push_back(*vi);

                std::int32_t ni = -1;
                if (s1 != std::string_view::npos) {
                    const auto s2 = ref.find('/', s1 + 1);
                    const std::string_view ttok = ref.substr(s1 + 1, s2 == std::string_view::npos ? ref.npos : s2 - s1 - 1);
                    if (!ttok.empty() && !detail::resolve_obj_index(ttok, texcoords))
                        throw MalformedObj(line_no, "texture index '" + std::string(ttok) + "' out of range");
                    if (s2 != std::string_view::npos) {
                        const std::string_view ntok = ref.substr(s2 + 1);
                        auto n = detail::resolve_obj_index(ntok, mesh.normals.size());
                        if (!n) throw MalformedObj(line_no, "normal index '" + std::string(ntok) + "' out of range");
                        ni = static_cast<std::int32_t>(*n);
                        any_face_normal = true;
                    }
                }
                corner_normals.push_back(ni);
            }
            for (std::size_t k = 1; k + 1 < corners.size(); ++k) {
                mesh.triangles.push_back({corners[0], corners[k], corners[k + 1]});
                mesh.triangle_normals.push_back({corner_normals[0], corner_normals[k], corner_normals[k + 1]});
            }
        } else if (kw == "o" && mesh.name.empty() && tok.size() > 1) {
            mesh.name = std::string(tok[1]);
        }
        // g, s, usemtl, mtllib and unknown directives carry nothing we use.
    }

    if (mesh.triangles.empty()) throw MalformedObj(line_no, "no faces");
    if (!any_face_normal) mesh.triangle_normals.clear();
    return mesh;
}

/// Serializes a mesh as OBJ. Reparsing yields the same triangles.
inline std::string write_obj(const MeshAsset& mesh) {
    std::string out;
    if (!mesh.name.empty()) out += "o " + mesh.name + "\n";
    for (const auto& v : mesh.vertices) out += "v " + format_exact(v.x) + " " + format_exact(v.y) + " " + format_exact(v.z) + "\n";
    for (const auto& n : mesh.normals) out += "vn " + format_exact(n.x) + " " + format_exact(n.y) + " " + format_exact(n.z) + "\n";
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        out += "f";
        for (int c = 0; c < 3; ++c) {
            out += " " + std::to_string(mesh.triangles[t][c] + 1);
            if (!mesh.triangle_normals.empty() && mesh.triangle_normals[t][c] >= 0)
                out += "//" + std::to_string(mesh.triangle_normals[t][c] + 1);
        }
        out += "\n";
    }
    return out;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFile(path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline MeshAsset load_obj_file(const std::filesystem::path& path) {
    MeshAsset mesh = parse_obj(read_file(path));
    if (mesh.name.empty()) mesh.name = path.stem().string();
    return mesh;
}

struct ClassLabel {
    std::uint32_t id = 0;
    std::string name;
    friend bool operator==(const ClassLabel&, const ClassLabel&) = default;
};

/// Class names keyed by id. Id 0 is always "ground"; new names take the next
/// free id.
class LabelRegistry {
public:
    static constexpr std::uint32_t kGroundId = 0;

    LabelRegistry() : labels_{{kGroundId, "ground"}} {}

    const ClassLabel& intern(const std::string& name) {
        for (const auto& l : labels_)
            if (l.name == name) return l;
        labels_.push_back({next_id(), name});
        return labels_.back();
    }

    /// Registers a label with a fixed id, as read back from a scene file.
    const ClassLabel& insert(std::uint32_t id, const std::string& name) {
        for (const auto& l : labels_) {
            if (l.id == id && l.name == name) return l;
            if (l.id == id || l.name == name)
                throw InputError("label conflict: " + std::to_string(id) + " '" + name + "' vs " +
                                 std::to_string(l.id) + " '" + l.name + "'");
        }
        labels_.push_back({id, name});
        return labels_.back();
    }

    const ClassLabel* find(std::uint32_t id) const {
        for (const auto& l : labels_)
            if (l.id == id) return &l;
        return nullptr;
    }

    const ClassLabel* find(std::string_view name) const {
        for (const auto& l : labels_)
            if (l.name == name) return &l;
        return nullptr;
    }

    const std::vector<ClassLabel>& labels() const { return labels_; }

    friend bool operator==(const LabelRegistry&, const LabelRegistry&) = default;

private:
    std::uint32_t next_id() const {
        std::uint32_t id = 0;
        for (const auto& l : labels_) id = std::max(id, l.id + 1);
        return id;
    }

    std::vector<ClassLabel> labels_;
};

/// "elbow_03.obj" -> "elbow": stem, lowercased, trailing digits and
/// separators removed. A stem made only of those characters is kept whole.
inline std::string label_name_from_filename(std::string_view filename) {
    std::string stem = std::filesystem::path(std::string(filename)).stem().string();
    std::transform(stem.begin(), stem.end(), stem.begin(), [](unsigned char c) { return std::tolower(c); });
    auto is_suffix_char = [](unsigned char c) { return std::isdigit(c) || c == '_' || c == '-' || c == ' ' || c == '.'; };
    std::size_t end = stem.size();
    while (end > 0 && is_suffix_char(static_cast<unsigned char>(stem[end - 1]))) --end;
    return end == 0 ? stem : stem.substr(0, end);
}

inline ClassLabel label_for_asset(std::string_view filename, LabelRegistry& registry) {
    return registry.intern(label_name_from_filename(filename));
}

/// A parsed mesh with its file path and class label.
struct LabeledAsset {
    std::string path;
    std::shared_ptr<const MeshAsset> mesh;
    ClassLabel label;
};

inline LabeledAsset load_ground_plane(const std::filesystem::path& path) {
    auto mesh = std::make_shared<MeshAsset>(load_obj_file(path));
    if (!mesh->color) mesh->color = palette_color(LabelRegistry::kGroundId);
    return {path.string(), std::move(mesh), {LabelRegistry::kGroundId, "ground"}};
}

/// Loads every `.obj` in `dir` in sorted filename order, labeling each by its
/// file name.
inline std::vector<LabeledAsset> load_asset_directory(const std::filesystem::path& dir, LabelRegistry& registry) {
    if (!std::filesystem::is_directory(dir)) throw MissingFile(dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext == ".obj") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    std::vector<LabeledAsset> assets;
    for (const auto& f : files) {
        auto mesh = std::make_shared<MeshAsset>(load_obj_file(f));
        ClassLabel label = label_for_asset(f.filename().string(), registry);
        if (!mesh->color) mesh->color = palette_color(label.id);
        assets.push_back({f.string(), std::move(mesh), std::move(label)});
    }
    return assets;
}

} // namespace synthscan
