// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "synthscan/errors.hpp"
#include "synthscan/geometry.hpp"
#include "synthscan/kdtree.hpp"
#include "synthscan/obj.hpp"
#include "synthscan/text.hpp"

namespace synthscan {

struct LabeledPoint {
    Vec3 position;
    Vec3 normal{0, 0, 1};
    std::uint32_t label = 0;
    Rgb color;

    friend bool operator==(const LabeledPoint&, const LabeledPoint&) = default;
};

struct PointCloud {
    struct Provenance {
        std::string survey;
        int leg = 0;
        friend bool operator==(const Provenance&, const Provenance&) = default;
    };

    std::vector<LabeledPoint> points;
    std::optional<Provenance> provenance;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

/// Significant digits of coordinates and normals in `.xyz` and `.txt` files.
inline constexpr int kPointDigits = 9;

/// One `x y z nx ny nz label r g b` line per point.
inline std::string write_xyz(const PointCloud& cloud) {
    std::string out;
    out.reserve(cloud.size() * 96);
    for (const auto& p : cloud.points) {
        for (Real v : {p.position.x, p.position.y, p.position.z, p.normal.x, p.normal.y, p.normal.z}) {
            out += format_general(v, kPointDigits);
            out += ' ';
        }
        out += std::to_string(p.label);
        out += ' ';
        out += std::to_string(p.color.r);
        out += ' ';
        out += std::to_string(p.color.g);
        out += ' ';
        out += std::to_string(p.color.b);
        out += '\n';
    }
    return out;
}

namespace detail {

template <typename Int>
std::optional<Int> parse_uint(std::string_view token) {
    Int v{};
    auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc{} || p != token.data() + token.size()) return std::nullopt;
    return v;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::size_t pos = 0, line_no = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        fn(++line_no, line);
        pos = eol + 1;
    }
}

} // namespace detail

inline PointCloud read_xyz(std::string_view text) {
    PointCloud cloud;
    detail::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        const auto tok = detail::split_ws(line);
        if (tok.empty()) return;
        if (tok.size() != 10) throw MalformedXyz(line_no, "expected 10 fields, got " + std::to_string(tok.size()));
        LabeledPoint p;
        Real v[6];
        for (int i = 0; i < 6; ++i) {
            auto r = parse_real(tok[i]);
            if (!r || !std::isfinite(*r)) throw MalformedXyz(line_no, "field " + std::to_string(i + 1) + " is not a number");
            v[i] = *r;
        }
        p.position = {v[0], v[1], v[2]};
        p.normal = {v[3], v[4], v[5]};
        auto label = detail::parse_uint<std::uint32_t>(tok[6]);
        if (!label) throw MalformedXyz(line_no, "label must be a non-negative integer");
        p.label = *label;
        std::uint8_t* channels[3] = {&p.color.r, &p.color.g, &p.color.b};
        for (int c = 0; c < 3; ++c) {
            auto value = detail::parse_uint<unsigned>(tok[7 + c]);
            if (!value || *value > 255) throw MalformedXyz(line_no, "color channel must be an integer in [0, 255]");
            *channels[c] = static_cast<std::uint8_t>(*value);
        }
        cloud.points.push_back(p);
    });
    return cloud;
}

/// Concatenates clouds in order.
inline PointCloud merge(std::span<const PointCloud> clouds) {
    PointCloud out;
    std::size_t total = 0;
    for (const auto& c : clouds) total += c.size();
    out.points.reserve(total);
    for (const auto& c : clouds) out.points.insert(out.points.end(), c.points.begin(), c.points.end());
    return out;
}

/// `x y z label` per point: the training input keeps positions and classes only.
inline std::string to_training_txt(std::span<const LabeledPoint> points) {
    std::string out;
    out.reserve(points.size() * 48);
    for (const auto& p : points) {
        out += format_general(p.position.x, kPointDigits);
        out += ' ';
        out += format_general(p.position.y, kPointDigits);
        out += ' ';
        out += format_general(p.position.z, kPointDigits);
        out += ' ';
        out += std::to_string(p.label);
        out += '\n';
    }
    return out;
}

inline std::string to_training_txt(const PointCloud& cloud) { return to_training_txt(std::span(cloud.points)); }

struct CloudStats {
    std::size_t count = 0;
    Aabb bounds;
    std::map<std::uint32_t, std::size_t> per_label;
    /// Mean distance from each point to its nearest other point.
    Real mean_nn_spacing = 0;
    /// False when the cloud has fewer than two points.
    bool nn_spacing_defined = false;
};

inline std::vector<Vec3> positions(std::span<const LabeledPoint> points) {
    std::vector<Vec3> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(p.position);
    return out;
}

inline CloudStats stats(const PointCloud& cloud) {
    CloudStats s;
    s.count = cloud.size();
    for (const auto& p : cloud.points) {
        s.bounds.extend(p.position);
        ++s.per_label[p.label];
    }
    if (cloud.size() >= 2) {
        const KdTree tree(positions(cloud.points));
        Real sum = 0;
        for (std::size_t i = 0; i < cloud.size(); ++i) sum += tree.nearest(cloud.points[i].position, i).distance;
        s.mean_nn_spacing = sum / static_cast<Real>(cloud.size());
        s.nn_spacing_defined = true;
    }
    return s;
}

struct DistanceSummary {
    std::size_t count = 0;
    Real mean = 0, rms = 0, max = 0;
};

struct CloudComparison {
    DistanceSummary overall;
    /// Keyed by the label of the points of the first cloud.
    std::map<std::uint32_t, DistanceSummary> per_label;
};

/// Nearest-neighbor distances from every point of `a` to the points of `b`.
inline CloudComparison compare(const PointCloud& a, const PointCloud& b, unsigned threads = 1) {
    if (a.empty() || b.empty()) throw EmptyCloud();
    const KdTree tree(positions(b.points));
    std::vector<Real> dist(a.size());

    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(a.size())));
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) dist[i] = tree.nearest(a.points[i].position).distance;
    };
    if (threads == 1) {
        work(0, a.size());
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (a.size() + threads - 1) / threads;
        for (std::size_t begin = 0; begin < a.size(); begin += chunk)
            pool.emplace_back(work, begin, std::min(a.size(), begin + chunk));
    }

    CloudComparison out;
    auto add = [](DistanceSummary& s, Real d) {
        ++s.count;
        s.mean += d;
        s.rms += d * d;
        s.max = std::max(s.max, d);
    };
    for (std::size_t i = 0; i < a.size(); ++i) {
        add(out.overall, dist[i]);
        add(out.per_label[a.points[i].label], dist[i]);
    }
    auto finish = [](DistanceSummary& s) {
        s.mean /= static_cast<Real>(s.count);
        s.rms = std::sqrt(s.rms / static_cast<Real>(s.count));
    };
    finish(out.overall);
    for (auto& [label, s] : out.per_label) finish(s);
    return out;
}

inline void write_text_file(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

inline PointCloud load_xyz_file(const std::filesystem::path& path) { return read_xyz(read_file(path)); }

} // namespace synthscan
