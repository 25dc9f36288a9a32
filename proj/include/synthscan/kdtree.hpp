// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "synthscan/geometry.hpp"

namespace synthscan {

/// Static 3D kd-tree answering nearest-neighbor queries over a point set.
/// The tree is an implicit balanced layout over a permuted index array.
class KdTree {
public:
    struct Neighbor {
        std::size_t index = std::numeric_limits<std::size_t>::max();
        Real distance = std::numeric_limits<Real>::infinity();

        bool found() const { return index != std::numeric_limits<std::size_t>::max(); }
    };

    KdTree() = default;

    explicit KdTree(std::vector<Vec3> points) : points_(std::move(points)), order_(points_.size()), axes_(points_.size()) {
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        build(0, order_.size());
    }

    std::size_t size() const { return points_.size(); }
    const Vec3& point(std::size_t i) const { return points_[i]; }

    /// Closest point to `query`, skipping the point with index `exclude`.
    Neighbor nearest(const Vec3& query, std::size_t exclude = std::numeric_limits<std::size_t>::max()) const {
        Neighbor best;
        Real best_sq = std::numeric_limits<Real>::infinity();
        if (!points_.empty()) search(0, order_.size(), query, exclude, best, best_sq);
        if (best.found()) best.distance = std::sqrt(best_sq);
        return best;
    }

private:
    void build(std::size_t begin, std::size_t end) {
        if (end - begin <= 1) return;
        Aabb box;
        for (std::size_t k = begin; k < end; ++k) box.extend(points_[order_[k]]);
        const int axis = box.longest_axis();
        const std::size_t mid = begin + (end - begin) / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](std::size_t a, std::size_t b) {
                             const Real pa = points_[a][axis], pb = points_[b][axis];
                             return pa < pb || (pa == pb && a < b);
                         });
        axes_[mid] = static_cast<std::uint8_t>(axis);
        build(begin, mid);
        build(mid + 1, end);
    }

    void search(std::size_t begin, std::size_t end, const Vec3& q, std::size_t exclude, Neighbor& best,
                Real& best_sq) const {
        if (begin >= end) return;
        const std::size_t mid = begin + (end - begin) / 2;
        const std::size_t idx = order_[mid];
        const Vec3 d = points_[idx] - q;
        const Real dist_sq = dot(d, d);
        if (idx != exclude && (dist_sq < best_sq || (dist_sq == best_sq && idx < best.index))) {
            best_sq = dist_sq;
            best.index = idx;
        }
        if (end - begin == 1) return;

        const int axis = axes_[mid];
        const Real delta = q[axis] - points_[idx][axis];
        if (delta < 0) {
            search(begin, mid, q, exclude, best, best_sq);
            if (delta * delta <= best_sq) search(mid + 1, end, q, exclude, best, best_sq);
        } else {
            search(mid + 1, end, q, exclude, best, best_sq);
            if (delta * delta <= best_sq) search(begin, mid, q, exclude, best, best_sq);
        }
    }

    std::vector<Vec3> points_;
    std::vector<std::size_t> order_;
    std::vector<std::uint8_t> axes_;
};

} // namespace synthscan
