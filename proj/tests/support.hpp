// SPDX-License-Identifier: Apache-2.0
// Shared fixtures and brute-force oracles for the test suites. Nothing here is
// used by the library.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "synthscan/synthscan.hpp"

namespace synthscan::testing {

inline Vec3 random_vec(std::mt19937_64& rng, Real lo, Real hi) {
    std::uniform_real_distribution<Real> d(lo, hi);
    return {d(rng), d(rng), d(rng)};
}

inline Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<Real> n(0, 1);
    for (;;) {
        Vec3 v{n(rng), n(rng), n(rng)};
        if (length(v) > 1e-6) return normalize(v);
    }
}

/// Random non-degenerate triangle with vertices near `center`.
inline Triangle random_triangle(std::mt19937_64& rng, const Vec3& center, Real size, std::int32_t part = 0) {
    for (;;) {
        Triangle t{center + random_vec(rng, -size, size), center + random_vec(rng, -size, size),
                   center + random_vec(rng, -size, size), part};
        if (t.area() > 1e-3 * size * size) return t;
    }
}

inline std::vector<Triangle> random_soup(std::mt19937_64& rng, std::size_t n, Real extent, Real size) {
    std::vector<Triangle> tris;
    tris.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        tris.push_back(random_triangle(rng, random_vec(rng, -extent, extent), size, static_cast<std::int32_t>(i % 7)));
    return tris;
}

/// Ray/plane intersection followed by dot-product barycentric coordinates.
/// Independent of the library's determinant formulation.
struct PlaneOracleResult {
    Real t = 0;
    Real b1 = 0, b2 = 0;  // weights of v1, v2
    /// Smallest distance of any barycentric weight to the [0, 1] boundary.
    Real margin = 0;
    bool inside = false;
};

inline std::optional<PlaneOracleResult> plane_oracle(const Ray& ray, const Triangle& tri) {
    const Vec3 n = cross(tri.v1 - tri.v0, tri.v2 - tri.v0);
    const Real denom = dot(n, ray.direction);
    if (std::abs(denom) < 1e-12) return std::nullopt;
    PlaneOracleResult r;
    r.t = dot(n, tri.v0 - ray.origin) / denom;
    const Vec3 p = ray.origin + ray.direction * r.t;
    const Vec3 a = tri.v1 - tri.v0, b = tri.v2 - tri.v0, c = p - tri.v0;
    const Real d00 = dot(a, a), d01 = dot(a, b), d11 = dot(b, b), d20 = dot(c, a), d21 = dot(c, b);
    const Real den = d00 * d11 - d01 * d01;
    r.b1 = (d11 * d20 - d01 * d21) / den;
    r.b2 = (d00 * d21 - d01 * d20) / den;
    const Real b0 = 1 - r.b1 - r.b2;
    r.margin = std::min({std::abs(b0), std::abs(r.b1), std::abs(r.b2)});
    r.inside = b0 >= 0 && r.b1 >= 0 && r.b2 >= 0 && r.t >= ray.t_min && r.t <= ray.t_max;
    return r;
}

/// Linear scan: nearest hit, ties to the smaller id.
inline std::optional<Hit> brute_first_hit(const std::vector<Triangle>& tris, const Ray& ray) {
    std::optional<Hit> best;
    for (std::uint32_t i = 0; i < tris.size(); ++i) {
        auto h = ray_triangle_intersect(ray, tris[i], i);
        if (h && (!best || h->t < best->t || (h->t == best->t && h->triangle_id < best->triangle_id))) best = h;
    }
    return best;
}

/// Linear scan of every hit, sorted, then grouped: a hit joins the current
/// group while it lies within kHitMergeDistance of the group's first hit; each
/// group reports its smallest triangle id.
inline std::vector<Hit> brute_ordered_hits(const std::vector<Triangle>& tris, const Ray& ray) {
    std::vector<Hit> all;
    for (std::uint32_t i = 0; i < tris.size(); ++i)
        if (auto h = ray_triangle_intersect(ray, tris[i], i)) all.push_back(*h);
    std::stable_sort(all.begin(), all.end(), [](const Hit& a, const Hit& b) { return a.t < b.t; });
    std::vector<Hit> out;
    std::size_t g = 0;
    while (g < all.size()) {
        std::size_t end = g;
        Hit keep = all[g];
        while (end < all.size() && all[end].t - all[g].t < kHitMergeDistance) {
            if (all[end].triangle_id < keep.triangle_id) keep = all[end];
            ++end;
        }
        out.push_back(keep);
        g = end;
    }
    return out;
}

inline MeshAsset make_mesh(std::vector<Vec3> vertices, std::vector<std::array<std::uint32_t, 3>> tris) {
    MeshAsset m;
    m.vertices = std::move(vertices);
    m.triangles = std::move(tris);
    return m;
}

/// Axis-aligned rectangle in the plane z = `z`, two triangles.
inline MeshAsset make_quad(Real x0, Real y0, Real x1, Real y1, Real z) {
    return make_mesh({{x0, y0, z}, {x1, y0, z}, {x1, y1, z}, {x0, y1, z}}, {{0, 1, 2}, {0, 2, 3}});
}

/// Rectangle in the plane x = `x`.
inline MeshAsset make_wall_x(Real x, Real y0, Real y1, Real z0, Real z1) {
    return make_mesh({{x, y0, z0}, {x, y1, z0}, {x, y1, z1}, {x, y0, z1}}, {{0, 1, 2}, {0, 2, 3}});
}

/// Closed axis-aligned box, 12 triangles.
inline MeshAsset make_box(const Vec3& lo, const Vec3& hi) {
    std::vector<Vec3> v;
    for (int i = 0; i < 8; ++i) v.push_back({(i & 1) ? hi.x : lo.x, (i & 2) ? hi.y : lo.y, (i & 4) ? hi.z : lo.z});
    return make_mesh(v, {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
                         {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}});
}

inline LabeledAsset labeled(MeshAsset mesh, std::uint32_t id, std::string name, std::string path = "") {
    if (path.empty()) path = name + ".obj";
    return {std::move(path), std::make_shared<const MeshAsset>(std::move(mesh)), {id, std::move(name)}};
}

/// Assembles a scene directly from placed parts; part 0 must be the ground.
inline Scene make_scene(std::vector<std::pair<LabeledAsset, Material>> parts, Vec3 translation_all = {}) {
    Scene s;
    s.name = "test";
    for (auto& [asset, material] : parts) {
        ScenePart p;
        p.asset_path = asset.path;
        p.mesh = asset.mesh;
        p.translation = translation_all;
        p.label = s.labels.insert(asset.label.id, asset.label.name);
        p.material = material;
        p.part_index = static_cast<std::int32_t>(s.parts.size());
        s.parts.push_back(std::move(p));
    }
    s.center = scene_center(s.parts);
    return s;
}

/// Distance from `p` to the closed triangle (exact, via region tests).
inline Real point_triangle_distance(const Vec3& p, const Triangle& t) {
    // Ericson, closest point on triangle.
    const Vec3 a = t.v0, b = t.v1, c = t.v2;
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const Real d1 = dot(ab, ap), d2 = dot(ac, ap);
    if (d1 <= 0 && d2 <= 0) return distance(p, a);
    const Vec3 bp = p - b;
    const Real d3 = dot(ab, bp), d4 = dot(ac, bp);
    if (d3 >= 0 && d4 <= d3) return distance(p, b);
    const Real vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0) return distance(p, a + ab * (d1 / (d1 - d3)));
    const Vec3 cp = p - c;
    const Real d5 = dot(ab, cp), d6 = dot(ac, cp);
    if (d6 >= 0 && d5 <= d6) return distance(p, c);
    const Real vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0) return distance(p, a + ac * (d2 / (d2 - d6)));
    const Real va = d3 * d6 - d5 * d4;
    if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0)
        return distance(p, b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6))));
    const Real denom = 1 / (va + vb + vc);
    return distance(p, a + ab * (vb * denom) + ac * (vc * denom));
}

/// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("synthscan-" + tag + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

} // namespace synthscan::testing
