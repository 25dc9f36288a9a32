// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "synthscan/errors.hpp"
#include "synthscan/pointcloud.hpp"
#include "synthscan/scanner.hpp"

namespace synthscan {

/// Sliding x-y window over full z columns.
struct BlockSpec {
    Real window_x = 1, window_y = 1;
    Real stride_x = 1, stride_y = 1;
    std::size_t min_points = 100;
    /// Resample every kept block to exactly this many points (with replacement).
    std::optional<std::size_t> sample_to;
    std::uint64_t seed = 42;

    void validate() const {
        if (!(window_x > 0) || !(window_y > 0)) throw InputError("block window must be positive");
        if (!(stride_x > 0) || !(stride_y > 0)) throw InputError("block stride must be positive");
        if (stride_x > window_x || stride_y > window_y) throw InputError("block stride must not exceed the window");
        if (min_points < 1) throw InputError("min points must be at least 1");
        if (sample_to && *sample_to < 1) throw InputError("sample count must be at least 1");
    }
};

/// Points with x0 <= x < x1 and y0 <= y < y1.
struct Block {
    std::size_t i = 0, j = 0;
    Real x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    std::vector<LabeledPoint> points;

    bool contains(const Vec3& p) const { return p.x >= x0 && p.x < x1 && p.y >= y0 && p.y < y1; }
};

namespace detail {

// Window positions along one axis, anchored at `origin`. With stride equal to
// the window, each upper bound is exactly the next lower bound, so the
// windows partition the axis.
class WindowAxis {
public:
    WindowAxis(Real origin, Real extent_max, Real window, Real stride)
        : origin_(origin), window_(window), stride_(stride) {
        count_ = static_cast<std::size_t>(std::floor((extent_max - origin) / stride)) + 1;
        while (lo(count_) <= extent_max) ++count_;
        while (count_ > 1 && lo(count_ - 1) > extent_max) --count_;
    }

    std::size_t count() const { return count_; }
    Real lo(std::size_t i) const { return origin_ + static_cast<Real>(i) * stride_; }
    Real hi(std::size_t i) const { return window_ == stride_ ? lo(i + 1) : lo(i) + window_; }

    /// Inclusive range [first, last] of windows holding coordinate `x`.
    std::pair<std::size_t, std::size_t> windows_of(Real x) const {
        auto last = static_cast<std::size_t>(std::max(Real(0), std::floor((x - origin_) / stride_)));
        last = std::min(last, count_ - 1);
        while (last + 1 < count_ && lo(last + 1) <= x) ++last;
        while (last > 0 && lo(last) > x) --last;
        std::size_t first = last;
        while (first > 0 && hi(first - 1) > x) --first;
        return {first, last};
    }

private:
    Real origin_, window_, stride_;
    std::size_t count_ = 1;
};

} // namespace detail

/// Tiles the cloud's x-y bounding box with windows anchored at its minimum
/// corner. Blocks come out row-major in (i, j); points keep cloud order.
inline std::vector<Block> partition_blocks(const PointCloud& cloud, const BlockSpec& spec) {
    spec.validate();
    if (cloud.empty()) throw EmptyCloud();
    Aabb box;
    for (const auto& p : cloud.points) box.extend(p.position);

    const detail::WindowAxis ax(box.min.x, box.max.x, spec.window_x, spec.stride_x);
    const detail::WindowAxis ay(box.min.y, box.max.y, spec.window_y, spec.stride_y);

    std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> members;
    for (std::size_t k = 0; k < cloud.size(); ++k) {
        const Vec3& p = cloud.points[k].position;
        const auto [ix0, ix1] = ax.windows_of(p.x);
        const auto [iy0, iy1] = ay.windows_of(p.y);
        for (std::size_t i = ix0; i <= ix1; ++i)
            for (std::size_t j = iy0; j <= iy1; ++j) members[{i, j}].push_back(k);
    }

    std::vector<Block> blocks;
    for (const auto& [key, indices] : members) {
        if (indices.size() < spec.min_points) continue;
        Block b;
        b.i = key.first;
        b.j = key.second;
        b.x0 = ax.lo(b.i);
        b.x1 = ax.hi(b.i);
        b.y0 = ay.lo(b.j);
        b.y1 = ay.hi(b.j);
        if (spec.sample_to) {
            SplitMix64 rng(pulse_seed(spec.seed, b.i, b.j, 0xb10c));
            std::uniform_int_distribution<std::size_t> pick(0, indices.size() - 1);
            b.points.reserve(*spec.sample_to);
            for (std::size_t s = 0; s < *spec.sample_to; ++s) b.points.push_back(cloud.points[indices[pick(rng)]]);
        } else {
            b.points.reserve(indices.size());
            for (auto k : indices) b.points.push_back(cloud.points[k]);
        }
        blocks.push_back(std::move(b));
    }
    return blocks;
}

struct ManifestEntry {
    std::string file;
    Real origin_x = 0, origin_y = 0;
    std::size_t count = 0;
};

inline std::string block_file_name(const std::string& base, const Block& b) {
    return base + "_" + std::to_string(b.i) + "_" + std::to_string(b.j) + ".txt";
}

inline std::string manifest_csv(const std::vector<ManifestEntry>& entries) {
    std::string out = "file,origin_x,origin_y,count\n";
    for (const auto& e : entries)
        out += e.file + "," + format_general(e.origin_x, kPointDigits) + "," + format_general(e.origin_y, kPointDigits) +
               "," + std::to_string(e.count) + "\n";
    return out;
}

/// Writes `{base}_{i}_{j}.txt` per block plus `{base}_manifest.csv`.
inline std::vector<ManifestEntry> write_blocks(const std::vector<Block>& blocks, const std::filesystem::path& dir,
                                               const std::string& base) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    std::vector<ManifestEntry> manifest;
    for (const auto& b : blocks) {
        const std::string name = block_file_name(base, b);
        write_text_file(dir / name, to_training_txt(std::span(b.points)));
        manifest.push_back({name, b.x0, b.y0, b.points.size()});
    }
    write_text_file(dir / (base + "_manifest.csv"), manifest_csv(manifest));
    return manifest;
}

} // namespace synthscan
