// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>

namespace synthscan {

using Real = double;

/// A 3D vector. Positions are in meters, directions are unitless.
struct Vec3 {
    Real x = 0, y = 0, z = 0;

    constexpr Vec3() = default;
    constexpr Vec3(Real x, Real y, Real z) : x(x), y(y), z(z) {}

    constexpr Real operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    constexpr Real& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Vec3& operator*=(Real s) { x *= s; y *= s; z *= s; return *this; }

    friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
constexpr Vec3 operator*(Vec3 a, Real s) { return a *= s; }
constexpr Vec3 operator*(Real s, Vec3 a) { return a *= s; }

constexpr Real dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline Real length(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline Real distance(const Vec3& a, const Vec3& b) { return length(a - b); }

inline Vec3 normalize(const Vec3& v) {
    const Real len = length(v);
    return len > 0 ? v * (Real(1) / len) : v;
}

inline Vec3 min(const Vec3& a, const Vec3& b) {
    return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
}

inline Vec3 max(const Vec3& a, const Vec3& b) {
    return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
}

inline bool is_finite(const Vec3& v) {
    return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

/// Axis-aligned bounding box. A default-constructed box is empty (min > max).
struct Aabb {
    Vec3 min{std::numeric_limits<Real>::infinity(), std::numeric_limits<Real>::infinity(),
             std::numeric_limits<Real>::infinity()};
    Vec3 max{-std::numeric_limits<Real>::infinity(), -std::numeric_limits<Real>::infinity(),
             -std::numeric_limits<Real>::infinity()};

    bool empty() const { return min.x > max.x || min.y > max.y || min.z > max.z; }

    Aabb& extend(const Vec3& p) {
        min = synthscan::min(min, p);
        max = synthscan::max(max, p);
        return *this;
    }

    Aabb& extend(const Aabb& b) {
        min = synthscan::min(min, b.min);
        max = synthscan::max(max, b.max);
        return *this;
    }

    Vec3 center() const { return (min + max) * Real(0.5); }
    Vec3 extent() const { return max - min; }

    int longest_axis() const {
        const Vec3 e = extent();
        if (e.x >= e.y && e.x >= e.z) return 0;
        return e.y >= e.z ? 1 : 2;
    }

    bool contains(const Vec3& p) const {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z && p.z <= max.z;
    }

    bool contains(const Aabb& b) const { return contains(b.min) && contains(b.max); }

    friend bool operator==(const Aabb&, const Aabb&) = default;
};

/// A triangle of a scene soup. `part_index` names the scene part that owns it.
struct Triangle {
    Vec3 v0, v1, v2;
    std::int32_t part_index = 0;

    Aabb bounds() const { return Aabb{}.extend(v0).extend(v1).extend(v2); }
    Vec3 centroid() const { return (v0 + v1 + v2) * (Real(1) / 3); }
    Real area() const { return Real(0.5) * length(cross(v1 - v0, v2 - v0)); }
    Vec3 geometric_normal() const { return normalize(cross(v1 - v0, v2 - v0)); }
};

/// Triangles with an area at or below this are dropped at ingestion.
inline constexpr Real kDegenerateArea = 1e-12;

/// Determinant threshold of the ray/triangle test.
inline constexpr Real kDeterminantEpsilon = 1e-12;

struct Ray {
    Vec3 origin;
    Vec3 direction{0, 0, 1};
    Real t_min = 0;
    Real t_max = std::numeric_limits<Real>::infinity();

    Vec3 at(Real t) const { return origin + direction * t; }
};

/// Intersection record. `normal` faces back toward the ray origin; `u` and `v`
/// are the barycentric weights of v1 and v2.
struct Hit {
    Real t = 0;
    Vec3 point;
    Vec3 normal;
    std::uint32_t triangle_id = 0;
    std::int32_t part_index = 0;
    Real u = 0, v = 0;
};

/// Closed-triangle intersection: hits on edges and vertices count.
inline std::optional<Hit> ray_triangle_intersect(const Ray& ray, const Triangle& tri,
                                                 std::uint32_t triangle_id = 0) {
    const Vec3 e1 = tri.v1 - tri.v0;
    const Vec3 e2 = tri.v2 - tri.v0;
    const Vec3 p = cross(ray.direction, e2);
    const Real det = dot(e1, p);
    if (std::abs(det) < kDeterminantEpsilon) return std::nullopt;

    const Real inv_det = Real(1) / det;
    const Vec3 s = ray.origin - tri.v0;
    const Real u = dot(s, p) * inv_det;
    if (u < 0 || u > 1) return std::nullopt;

    const Vec3 q = cross(s, e1);
    const Real v = dot(ray.direction, q) * inv_det;
    if (v < 0 || u + v > 1) return std::nullopt;

    const Real t = dot(e2, q) * inv_det;
    if (!(t >= ray.t_min && t <= ray.t_max)) return std::nullopt;

    Vec3 n = normalize(cross(e1, e2));
    if (dot(n, ray.direction) > 0) n = -n;
    return Hit{t, ray.at(t), n, triangle_id, tri.part_index, u, v};
}

/// Precomputed reciprocal direction for repeated slab tests against one ray.
struct RayBoxTester {
    Vec3 origin;
    Vec3 inv_dir;
    bool zero[3];

    explicit RayBoxTester(const Ray& ray) : origin(ray.origin) {
        for (int a = 0; a < 3; ++a) {
            zero[a] = ray.direction[a] == 0;
            inv_dir[a] = zero[a] ? Real(0) : Real(1) / ray.direction[a];
        }
    }

    /// Returns the entry distance if the ray overlaps the box within [t_min, t_max].
    std::optional<Real> enter(const Aabb& box, Real t_min, Real t_max) const {
        // Padding of the far bound keeps rounding from rejecting hits that lie
        // exactly on a box face.
        constexpr Real kPad = 4 * std::numeric_limits<Real>::epsilon();
        Real t0 = t_min, t1 = t_max;
        for (int a = 0; a < 3; ++a) {
            if (zero[a]) {
                if (origin[a] < box.min[a] || origin[a] > box.max[a]) return std::nullopt;
                continue;
            }
            Real near = (box.min[a] - origin[a]) * inv_dir[a];
            Real far = (box.max[a] - origin[a]) * inv_dir[a];
            if (near > far) std::swap(near, far);
            far += std::abs(far) * kPad;
            t0 = near > t0 ? near : t0;
            t1 = far < t1 ? far : t1;
            if (t0 > t1) return std::nullopt;
        }
        return t0;
    }
};

} // namespace synthscan
