// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "synthscan/errors.hpp"
#include "synthscan/geometry.hpp"

namespace synthscan {

/// Hits of one ray closer than this along the ray collapse into one.
inline constexpr Real kHitMergeDistance = 1e-7;

/// Binary bounding volume hierarchy over a triangle soup.
///
/// Built by recursive median split on the longest axis of the centroid
/// bounds. Hits report the triangle's index in the input list, never its
/// position inside the tree. Immutable after build, so concurrent queries
/// are safe.
class Bvh {
public:
    struct Node {
        Aabb bounds;
        /// Leaf: first slot in the triangle order. Internal: index of the left
        /// child (the right child follows it).
        std::uint32_t first = 0;
        /// Triangle count of a leaf, 0 for internal nodes.
        std::uint32_t count = 0;

        bool is_leaf() const { return count != 0; }
    };

    struct Options {
        std::size_t max_leaf_size = 1;
    };

    static Bvh build(std::vector<Triangle> triangles) { return build(std::move(triangles), Options{}); }

    static Bvh build(std::vector<Triangle> triangles, Options options) {
        if (triangles.empty()) throw EmptyScene();
        if (options.max_leaf_size == 0) options.max_leaf_size = 1;

        Bvh bvh;
        const std::size_t n = triangles.size();
        std::vector<Aabb> boxes(n);
        std::vector<Vec3> centroids(n);
        for (std::size_t i = 0; i < n; ++i) {
            boxes[i] = triangles[i].bounds();
            centroids[i] = triangles[i].centroid();
        }

        bvh.order_.resize(n);
        std::iota(bvh.order_.begin(), bvh.order_.end(), std::uint32_t{0});
        bvh.nodes_.reserve(2 * n);
        bvh.nodes_.emplace_back();

        struct Task {
            std::uint32_t node, begin, end;
        };
        std::vector<Task> tasks{{0, 0, static_cast<std::uint32_t>(n)}};
        while (!tasks.empty()) {
            const Task task = tasks.back();
            tasks.pop_back();

            Aabb bounds, centroid_bounds;
            for (std::uint32_t k = task.begin; k < task.end; ++k) {
                bounds.extend(boxes[bvh.order_[k]]);
                centroid_bounds.extend(centroids[bvh.order_[k]]);
            }
            bvh.nodes_[task.node].bounds = bounds;

            const std::uint32_t count = task.end - task.begin;
            if (count <= options.max_leaf_size) {
                bvh.nodes_[task.node].first = task.begin;
                bvh.nodes_[task.node].count = count;
                continue;
            }

            const int axis = centroid_bounds.longest_axis();
            const std::uint32_t mid = task.begin + count / 2;
            auto first = bvh.order_.begin();
            std::nth_element(first + task.begin, first + mid, first + task.end,
                             [&](std::uint32_t a, std::uint32_t b) {
                                 const Real ca = centroids[a][axis], cb = centroids[b][axis];
                                 return ca < cb || (ca == cb && a < b);
                             });

            const auto left = static_cast<std::uint32_t>(bvh.nodes_.size());
            bvh.nodes_.emplace_back();
            bvh.nodes_.emplace_back();
            bvh.nodes_[task.node].first = left;
            bvh.nodes_[task.node].count = 0;
            tasks.push_back({left + 1, mid, task.end});
            tasks.push_back({left, task.begin, mid});
        }

        bvh.triangles_.reserve(n);
        bvh.slots_.resize(n);
        for (std::uint32_t k = 0; k < n; ++k) {
            bvh.triangles_.push_back(triangles[bvh.order_[k]]);
            bvh.slots_[bvh.order_[k]] = k;
        }
        return bvh;
    }

    std::span<const Node> nodes() const { return nodes_; }
    /// Slot k of the tree holds input triangle `order()[k]`.
    std::span<const std::uint32_t> order() const { return order_; }
    /// Triangles in tree order.
    std::span<const Triangle> triangles() const { return triangles_; }
    const Triangle& triangle(std::uint32_t id) const { return triangles_[slot_of(id)]; }
    std::size_t size() const { return triangles_.size(); }

    /// Nearest hit; equal ranges resolve to the smaller triangle id.
    std::optional<Hit> first_hit(const Ray& ray) const {
        return first_hit(ray, [](const Hit&) { return true; });
    }

    /// Nearest hit among those for which `accept(hit)` holds.
    template <typename Accept>
    std::optional<Hit> first_hit(const Ray& ray, Accept&& accept) const {
        std::optional<Hit> best;
        Ray clipped = ray;
        const RayBoxTester tester(ray);

        std::array<std::pair<std::uint32_t, Real>, kStackSize> stack;
        std::size_t top = 0;
        if (auto entry = tester.enter(nodes_[0].bounds, ray.t_min, ray.t_max)) stack[top++] = {0, *entry};

        while (top > 0) {
            const auto [index, entry] = stack[--top];
            // Slack keeps boxes that touch the current best range, so that
            // equal-range ties still reach the smaller triangle id.
            const Real limit = clipped.t_max + std::abs(clipped.t_max) * kPruneSlack;
            if (best && entry > limit) continue;
            const Node& node = nodes_[index];

            if (node.is_leaf()) {
                for (std::uint32_t k = node.first; k < node.first + node.count; ++k) {
                    auto hit = ray_triangle_intersect(clipped, triangles_[k], order_[k]);
                    if (!hit || !accept(*hit)) continue;
                    if (!best || hit->t < best->t || (hit->t == best->t && hit->triangle_id < best->triangle_id)) {
                        best = hit;
                        clipped.t_max = hit->t;
                    }
                }
                continue;
            }

            const auto l = tester.enter(nodes_[node.first].bounds, ray.t_min, limit);
            const auto r = tester.enter(nodes_[node.first + 1].bounds, ray.t_min, limit);
            if (l && r) {
                // Near child goes on top.
                if (*l <= *r) {
                    stack[top++] = {node.first + 1, *r};
                    stack[top++] = {node.first, *l};
                } else {
                    stack[top++] = {node.first, *l};
                    stack[top++] = {node.first + 1, *r};
                }
            } else if (l) {
                stack[top++] = {node.first, *l};
            } else if (r) {
                stack[top++] = {node.first + 1, *r};
            }
        }
        return best;
    }

    /// Calls `visit(hit)` for every triangle the ray crosses within its range,
    /// in no particular order.
    template <typename Visit>
    void for_each_hit(const Ray& ray, Visit&& visit) const {
        const RayBoxTester tester(ray);
        std::array<std::uint32_t, kStackSize> stack;
        std::size_t top = 0;
        stack[top++] = 0;
        while (top > 0) {
            const Node& node = nodes_[stack[--top]];
            if (!tester.enter(node.bounds, ray.t_min, ray.t_max)) continue;
            if (node.is_leaf()) {
                for (std::uint32_t k = node.first; k < node.first + node.count; ++k)
                    if (auto hit = ray_triangle_intersect(ray, triangles_[k], order_[k])) visit(*hit);
            } else {
                stack[top++] = node.first + 1;
                stack[top++] = node.first;
            }
        }
    }

    /// All hits sorted by ascending range. Hits within kHitMergeDistance of the
    /// first hit of their group collapse into the one with the smallest id.
    std::vector<Hit> ordered_hits(const Ray& ray) const {
        std::vector<Hit> hits;
        for_each_hit(ray, [&](const Hit& h) { hits.push_back(h); });
        return merge_sorted_hits(std::move(hits));
    }

    static std::vector<Hit> merge_sorted_hits(std::vector<Hit> hits) {
        std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
            return a.t < b.t || (a.t == b.t && a.triangle_id < b.triangle_id);
        });
        std::vector<Hit> merged;
        Real anchor = 0;
        for (const Hit& h : hits) {
            if (merged.empty() || h.t - anchor >= kHitMergeDistance) {
                merged.push_back(h);
                anchor = h.t;
            } else if (h.triangle_id < merged.back().triangle_id) {
                merged.back() = h;
            }
        }
        return merged;
    }

private:
    // Median splits bound the depth by log2(triangle count) + 1.
    static constexpr std::size_t kStackSize = 128;
    static constexpr Real kPruneSlack = 8 * std::numeric_limits<Real>::epsilon();

    std::uint32_t slot_of(std::uint32_t id) const { return slots_[id]; }

    std::vector<Node> nodes_;
    std::vector<std::uint32_t> order_;
    std::vector<Triangle> triangles_;
    std::vector<std::uint32_t> slots_;
};

} // namespace synthscan
