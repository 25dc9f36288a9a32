// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <ranges>
#include <thread>
#include <vector>

#include "synthscan/bvh.hpp"
#include "synthscan/geometry.hpp"
#include "synthscan/pointcloud.hpp"
#include "synthscan/scene.hpp"
#include "synthscan/survey.hpp"

namespace synthscan {

/// Counter-based generator: SplitMix64 over a 64-bit state. Cheap to seed,
/// so every pulse can own an independent stream.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t state) : state_(state) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    static constexpr std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

/// Stream key of one pulse.
inline constexpr std::uint64_t pulse_seed(std::uint64_t seed, std::uint64_t leg, std::uint64_t azimuth,
                                          std::uint64_t elevation) {
    std::uint64_t h = SplitMix64::mix(seed + 0x9e3779b97f4a7c15ULL);
    h = SplitMix64::mix(h ^ (leg + 0x632be59bd9b4e019ULL));
    h = SplitMix64::mix(h ^ (azimuth + 0x8cb92ba72f3d8dd7ULL));
    return SplitMix64::mix(h ^ (elevation + 0xd6e8feb86659fd93ULL));
}

struct Pulse {
    int leg_index = 0;
    std::size_t azimuth_index = 0;
    std::size_t elevation_index = 0;
    Real azimuth_rad = 0;
    Real elevation_rad = 0;
    Vec3 direction;
};

inline Vec3 spherical_direction(Real azimuth, Real elevation) {
    const Real ce = std::cos(elevation);
    return {ce * std::cos(azimuth), ce * std::sin(azimuth), std::sin(elevation)};
}

/// Pulses of one leg, azimuth-major and elevation-minor.
inline auto pulse_grid(const ScannerSettings& settings, int leg_index = 0) {
    const std::size_t n_el = settings.elevation_steps();
    return std::views::iota(std::size_t{0}, settings.azimuth_steps() * n_el) |
           std::views::transform([settings, n_el, leg_index](std::size_t k) {
               Pulse p;
               p.leg_index = leg_index;
               p.azimuth_index = k / n_el;
               p.elevation_index = k % n_el;
               p.azimuth_rad = settings.azimuth_rad(p.azimuth_index);
               p.elevation_rad = settings.elevation_rad(p.elevation_index);
               p.direction = spherical_direction(p.azimuth_rad, p.elevation_rad);
               return p;
           });
}

/// Subray offsets covering the beam cone. Ring 0 is the axial ray; ring i
/// (1 <= i < q) sits i * (divergence / 2) / (q - 1) off axis and holds
/// max(1, round(2 pi i)) rays evenly spaced from ring azimuth 0, so that
/// neighboring rays stay roughly one ring spacing apart.
struct SubrayPattern {
    struct Offset {
        Real angle_rad = 0;
        Real azimuth_rad = 0;
        int ring = 0;
    };

    std::vector<Offset> offsets;
    Real ring_spacing_rad = 0;

    std::size_t size() const { return offsets.size(); }
};

inline SubrayPattern subray_pattern(Real divergence_mrad, int quality) {
    SubrayPattern pattern;
    pattern.offsets.push_back({});
    if (quality <= 1 || divergence_mrad <= 0) return pattern;

    const Real half_angle = divergence_mrad * 1e-3 / 2;
    pattern.ring_spacing_rad = half_angle / (quality - 1);
    for (int ring = 1; ring < quality; ++ring) {
        const long count = std::max(1L, std::lround(2 * std::numbers::pi * ring));
        for (long k = 0; k < count; ++k)
            pattern.offsets.push_back({ring * pattern.ring_spacing_rad, 2 * std::numbers::pi * k / count, ring});
    }
    return pattern;
}

/// Direction of a subray around the pulse axis. The cone frame is the local
/// east/up pair of the pulse's spherical coordinates.
inline Vec3 subray_direction(const Pulse& pulse, const SubrayPattern::Offset& offset) {
    if (offset.angle_rad == 0) return pulse.direction;
    const Vec3 east{-std::sin(pulse.azimuth_rad), std::cos(pulse.azimuth_rad), 0};
    const Vec3 up = cross(pulse.direction, east);
    const Vec3 radial = east * std::cos(offset.azimuth_rad) + up * std::sin(offset.azimuth_rad);
    return normalize(pulse.direction * std::cos(offset.angle_rad) + radial * std::sin(offset.angle_rad));
}

/// A scene flattened for ray casting: translated triangles in a BVH plus the
/// per-part label, color and material lookups.
class ScanTarget {
public:
    struct PartInfo {
        std::uint32_t label = 0;
        Rgb color;
        Material material = Material::opaque;
    };

    explicit ScanTarget(const Scene& scene, Bvh::Options options = {}) {
        std::vector<Triangle> triangles;
        for (const auto& part : scene.parts) {
            parts_.push_back({part.label.id, part.color(), part.part_index == 0 ? Material::opaque : part.material});
            if (parts_.back().material == Material::transmissive) has_transmissive_ = true;
            const MeshAsset& mesh = *part.mesh;
            for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
                const auto& idx = mesh.triangles[t];
                Triangle tri{mesh.vertices[idx[0]] + part.translation, mesh.vertices[idx[1]] + part.translation,
                             mesh.vertices[idx[2]] + part.translation, part.part_index};
                if (!(tri.area() > kDegenerateArea)) {
                    ++dropped_degenerate_;
                    continue;
                }
                triangles.push_back(tri);
                if (mesh.has_normals(t)) {
                    const auto& n = mesh.triangle_normals[t];
                    corner_normals_.push_back(std::array<Vec3, 3>{normalize(mesh.normals[n[0]]),
                                                                  normalize(mesh.normals[n[1]]),
                                                                  normalize(mesh.normals[n[2]])});
                } else {
                    corner_normals_.push_back(std::nullopt);
                }
            }
        }
        bvh_ = Bvh::build(std::move(triangles), options);
    }

    const Bvh& bvh() const { return bvh_; }
    const PartInfo& part(std::int32_t index) const { return parts_[static_cast<std::size_t>(index)]; }
    std::size_t part_count() const { return parts_.size(); }
    bool has_transmissive() const { return has_transmissive_; }
    /// Triangles with area <= kDegenerateArea skipped while flattening.
    std::size_t dropped_degenerate() const { return dropped_degenerate_; }

    void set_material(std::int32_t part_index, Material m) {
        if (part_index == 0) return;
        parts_[static_cast<std::size_t>(part_index)].material = m;
        has_transmissive_ = std::any_of(parts_.begin(), parts_.end(),
                                        [](const PartInfo& p) { return p.material == Material::transmissive; });
    }

    /// Nearest hit on an opaque part, passing through transmissive parts.
    std::optional<Hit> first_opaque_hit(const Ray& ray) const {
        if (!has_transmissive_) return bvh_.first_hit(ray);
        for (const Hit& h : bvh_.ordered_hits(ray))
            if (part(h.part_index).material == Material::opaque) return h;
        return std::nullopt;
    }

    /// Interpolated vertex normal where the mesh has one, else the geometric
    /// normal; either way facing against `direction`.
    Vec3 surface_normal(const Hit& hit, const Vec3& direction) const {
        Vec3 n = hit.normal;
        if (const auto& corners = corner_normals_[hit.triangle_id]) {
            const Vec3 smooth =
                normalize((*corners)[0] * (1 - hit.u - hit.v) + (*corners)[1] * hit.u + (*corners)[2] * hit.v);
            if (length(smooth) > 0.5) n = smooth;
        }
        return dot(n, direction) > 0 ? -n : n;
    }

private:
    Bvh bvh_;
    std::vector<PartInfo> parts_;
    std::vector<std::optional<std::array<Vec3, 3>>> corner_normals_;
    std::size_t dropped_degenerate_ = 0;
    bool has_transmissive_ = false;
};

/// Casts every subray of one pulse and returns the nearest opaque return
/// within range, with Gaussian range noise applied along its subray.
template <typename Rng>
std::optional<LabeledPoint> simulate_pulse(const ScanTarget& target, const Vec3& origin, const Pulse& pulse,
                                           const SubrayPattern& pattern, const ScannerSettings& settings, Rng& rng) {
    std::optional<Hit> best;
    Vec3 best_dir;
    for (const auto& offset : pattern.offsets) {
        const Vec3 dir = subray_direction(pulse, offset);
        const Ray ray{origin, dir, 0, settings.max_range_m};
        if (auto hit = target.first_opaque_hit(ray); hit && (!best || hit->t < best->t)) {
            best = hit;
            best_dir = dir;
        }
    }
    if (!best) return std::nullopt;

    Real range = best->t;
    if (settings.range_noise_sigma_m > 0)
        range += std::normal_distribution<Real>(0, settings.range_noise_sigma_m)(rng);

    const auto& part = target.part(best->part_index);
    LabeledPoint p;
    p.position = origin + best_dir * range;
    p.normal = target.surface_normal(*best, best_dir);
    p.label = part.label;
    p.color = part.color;
    return p;
}

/// Scans one leg. The output order is the pulse-grid order and the bytes do
/// not depend on `threads` (0 = hardware concurrency).
inline PointCloud simulate_leg(const ScanTarget& target, const Survey& survey, const Leg& leg, unsigned threads = 1) {
    const ScannerSettings& settings = survey.settings_for(leg);
    settings.validate();
    const SubrayPattern pattern = subray_pattern(settings.beam_divergence_mrad, settings.beam_sample_quality);
    const auto grid = pulse_grid(settings, leg.index);
    const std::size_t n_az = settings.azimuth_steps();
    const std::size_t n_el = settings.elevation_steps();

    std::vector<std::vector<LabeledPoint>> columns(n_az);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t az; (az = next.fetch_add(1, std::memory_order_relaxed)) < n_az;) {
            auto& column = columns[az];
            for (std::size_t el = 0; el < n_el; ++el) {
                const Pulse pulse = grid[az * n_el + el];
                SplitMix64 rng(pulse_seed(survey.seed, static_cast<std::uint64_t>(leg.index), az, el));
                if (auto p = simulate_pulse(target, leg.position, pulse, pattern, settings, rng)) column.push_back(*p);
            }
        }
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_az));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    }

    PointCloud cloud;
    cloud.provenance = PointCloud::Provenance{survey.name, leg.index};
    std::size_t total = 0;
    for (const auto& c : columns) total += c.size();
    cloud.points.reserve(total);
    for (auto& c : columns) cloud.points.insert(cloud.points.end(), c.begin(), c.end());
    return cloud;
}

/// One cloud per leg, in leg order.
inline std::vector<PointCloud> simulate_survey(const ScanTarget& target, const Survey& survey, unsigned threads = 1) {
    if (survey.legs.empty()) throw NoLegs();
    std::vector<PointCloud> clouds;
    clouds.reserve(survey.legs.size());
    for (const auto& leg : survey.legs) clouds.push_back(simulate_leg(target, survey, leg, threads));
    return clouds;
}

} // namespace synthscan
