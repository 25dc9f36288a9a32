// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <numbers>
#include <random>
#include <set>

#include "support.hpp"

using namespace synthscan;
using namespace synthscan::testing;

namespace {

constexpr Real kPi = std::numbers::pi;

ScannerSettings sector(Real h0, Real h1, Real hres, Real v0, Real v1, Real vres) {
    ScannerSettings s;
    s.horiz_start_deg = h0;
    s.horiz_end_deg = h1;
    s.horiz_res_deg = hres;
    s.vert_start_deg = v0;
    s.vert_end_deg = v1;
    s.vert_res_deg = vres;
    s.max_range_m = 100;
    return s;
}

Survey one_leg(const ScannerSettings& s, const Vec3& position, std::uint64_t seed = 42) {
    Survey survey;
    survey.name = "t";
    survey.settings = s;
    survey.seed = seed;
    survey.legs.push_back({position, std::nullopt, 0});
    return survey;
}

LabeledAsset big_ground() { return labeled(make_quad(-60, -60, 60, 60, 0), 0, "ground"); }

Pulse pulse_towards(Real azimuth, Real elevation) {
    Pulse p;
    p.azimuth_rad = azimuth;
    p.elevation_rad = elevation;
    p.direction = spherical_direction(azimuth, elevation);
    return p;
}

Real angle_between(const Vec3& a, const Vec3& b) { return std::atan2(length(cross(a, b)), dot(a, b)); }

// --- pulse grid ---------------------------------------------------------------

TEST(PulseGrid, GenericLidarColumns) {
    const auto grid = pulse_grid(preset("generic-lidar"));
    std::set<std::size_t> columns;
    Real first = 1e9, last = -1e9;
    std::size_t n = 0;
    for (const Pulse& p : grid) {
        ++n;
        columns.insert(p.azimuth_index);
        first = std::min(first, p.azimuth_rad);
        last = std::max(last, p.azimuth_rad);
    }
    EXPECT_EQ(n, 7200u);
    EXPECT_EQ(columns.size(), 7200u);
    EXPECT_NEAR(first, -kPi, 1e-12);
    EXPECT_NEAR(last, deg_to_rad(180 - 0.05), 1e-12);  // the +180 seam is not repeated
}

TEST(PulseGrid, QuarterSweep) { EXPECT_EQ(std::ranges::distance(pulse_grid(sector(0, 90, 1, 0, 0, 1))), 90); }

TEST(PulseGrid, InclusiveElevation) {
    const auto grid = pulse_grid(sector(0, 1, 1, 0, 10, 1));
    EXPECT_EQ(std::ranges::distance(grid), 11);
    EXPECT_NEAR((*std::ranges::prev(grid.end())).elevation_rad, deg_to_rad(10), 1e-15);
}

TEST(PulseGrid, DirectionsAreSpherical) {
    for (const Pulse& p : pulse_grid(sector(-30, 30, 7.5, -60, 60, 15), 3)) {
        EXPECT_EQ(p.leg_index, 3);
        EXPECT_NEAR(length(p.direction), 1, 1e-12);
        EXPECT_NEAR(std::asin(p.direction.z), p.elevation_rad, 1e-12);
        if (std::abs(p.elevation_rad) < kPi / 2 - 1e-6) {
            EXPECT_NEAR(std::atan2(p.direction.y, p.direction.x), p.azimuth_rad, 1e-12);
        }
    }
}

// --- subray pattern -----------------------------------------------------------

TEST(Subrays, SingleRay) {
    EXPECT_EQ(subray_pattern(0.3, 1).size(), 1u);
    EXPECT_EQ(subray_pattern(0, 5).size(), 1u);
}

TEST(Subrays, CountFormula) {
    EXPECT_EQ(subray_pattern(0.3, 3).size(), 20u);
    for (int q = 1; q <= 10; ++q) {
        std::size_t expect = 1;
        for (int i = 1; i < q; ++i) expect += static_cast<std::size_t>(std::max(1.0, std::round(2 * kPi * i)));
        EXPECT_EQ(subray_pattern(0.5, q).size(), expect) << "q=" << q;
    }
}

TEST(Subrays, RingAtHalfAngle) {
    const SubrayPattern pat = subray_pattern(0.3, 2);
    const Pulse pulse = pulse_towards(0.7, 0.2);
    ASSERT_EQ(pat.size(), 7u);
    for (std::size_t k = 1; k < pat.size(); ++k)
        EXPECT_NEAR(angle_between(subray_direction(pulse, pat.offsets[k]), pulse.direction), 0.15e-3, 1e-12);
}

// Measured on actual subray directions for several pulse orientations,
// including straight down.
TEST(Subrays, AdjacentRingSpacing) {
    for (int q = 2; q <= 8; ++q) {
        const Real div_mrad = 0.3;
        const Real nominal = div_mrad * 1e-3 / 2 / (q - 1);
        const SubrayPattern pat = subray_pattern(div_mrad, q);
        for (const Pulse& pulse : {pulse_towards(0, 0), pulse_towards(2.1, -1.2), pulse_towards(-0.4, -kPi / 2)}) {
            std::vector<Vec3> dirs;
            for (const auto& o : pat.offsets) dirs.push_back(subray_direction(pulse, o));
            Real worst = 0;
            for (std::size_t a = 1; a < pat.size(); ++a) {
                Real nearest_inner = 1e9;
                for (std::size_t b = 0; b < pat.size(); ++b)
                    if (pat.offsets[b].ring == pat.offsets[a].ring - 1)
                        nearest_inner = std::min(nearest_inner, angle_between(dirs[a], dirs[b]));
                worst = std::max(worst, std::abs(nearest_inner - nominal) / nominal);
                EXPECT_NEAR(angle_between(dirs[a], pulse.direction), pat.offsets[a].ring * nominal, 1e-12);
            }
            EXPECT_LT(worst, 0.25) << "q=" << q;
        }
    }
}

// --- simulate_pulse -----------------------------------------------------------

TEST(SimulatePulse, GroundStraightDown) {
    const ScanTarget target(make_scene({{big_ground(), Material::opaque}}));
    SplitMix64 rng(1);
    auto p = simulate_pulse(target, {0, 0, 10}, pulse_towards(0, -kPi / 2), subray_pattern(0, 1), sector(0, 1, 1, 0, 0, 1), rng);
    ASSERT_TRUE(p);
    EXPECT_LT(length(p->position), 1e-12);
    EXPECT_EQ(p->label, 0u);
    EXPECT_EQ(p->normal, (Vec3{0, 0, 1}));
    EXPECT_EQ(p->color, palette_color(0));
}

TEST(SimulatePulse, TransmissivePaneIsSkipped) {
    const ScanTarget target(make_scene({{big_ground(), Material::opaque},
                                        {labeled(make_quad(-5, -5, 5, 5, 5), 1, "glass"), Material::transmissive}}));
    ASSERT_TRUE(target.has_transmissive());
    SplitMix64 rng(1);
    auto p = simulate_pulse(target, {0, 0, 10}, pulse_towards(0, -kPi / 2), subray_pattern(0.3, 3), sector(0, 1, 1, 0, 0, 1), rng);
    ASSERT_TRUE(p);
    EXPECT_NEAR(p->position.z, 0, 1e-12);
    EXPECT_EQ(p->label, 0u);
}

TEST(SimulatePulse, BeyondMaxRange) {
    const ScanTarget target(make_scene({{labeled(make_quad(-1, -1, 1, 1, 0), 0, "ground"), Material::opaque},
                                        {labeled(make_wall_x(150, -50, 50, -50, 50), 1, "wall"), Material::opaque}}));
    SplitMix64 rng(1);
    ScannerSettings s = sector(0, 1, 1, 0, 0, 1);
    s.max_range_m = 100;
    EXPECT_FALSE(simulate_pulse(target, {0, 0, 1}, pulse_towards(0, 0), subray_pattern(0, 1), s, rng));
    s.max_range_m = 200;
    EXPECT_TRUE(simulate_pulse(target, {0, 0, 1}, pulse_towards(0, 0), subray_pattern(0, 1), s, rng));
}

TEST(SimulatePulse, NoiseAlongSubray) {
    const ScanTarget target(make_scene({{big_ground(), Material::opaque}}));
    ScannerSettings s = sector(0, 1, 1, 0, 0, 1);
    s.range_noise_sigma_m = 0.05;
    Real sum = 0, sum2 = 0;
    const int n = 4000;
    for (int i = 0; i < n; ++i) {
        SplitMix64 rng(pulse_seed(7, 0, static_cast<std::uint64_t>(i), 0));
        auto p = simulate_pulse(target, {0, 0, 10}, pulse_towards(0, -kPi / 2), subray_pattern(0, 1), s, rng);
        ASSERT_TRUE(p);
        EXPECT_LT(std::hypot(p->position.x, p->position.y), 1e-12);
        const Real err = -p->position.z;
        sum += err;
        sum2 += err * err;
    }
    const Real mean = sum / n, sd = std::sqrt(sum2 / n - mean * mean);
    EXPECT_LT(std::abs(mean), 4 * 0.05 / std::sqrt(n));
    EXPECT_NEAR(sd, 0.05, 0.05 * 0.06);
}

TEST(SimulatePulse, InterpolatedVertexNormals) {
    MeshAsset ground = make_quad(-10, -10, 10, 10, 0);
    ground.normals = {normalize(Vec3{1, 0, 1})};
    ground.triangle_normals = {{0, 0, 0}, {0, 0, 0}};
    const ScanTarget target(make_scene({{labeled(ground, 0, "ground"), Material::opaque}}));
    SplitMix64 rng(1);
    auto p = simulate_pulse(target, {1, 1, 5}, pulse_towards(0, -kPi / 2), subray_pattern(0, 1), sector(0, 1, 1, 0, 0, 1), rng);
    ASSERT_TRUE(p);
    EXPECT_LT(distance(p->normal, normalize(Vec3{1, 0, 1})), 1e-12);
}

TEST(ScanTargetTest, DegenerateTrianglesDropped) {
    MeshAsset ground = make_quad(-10, -10, 10, 10, 0);
    ground.vertices.push_back({3, 3, 0});
    ground.triangles.push_back({0, 0, 1});
    ground.triangles.push_back({0, 2, 4});  // collinear
    const ScanTarget target(make_scene({{labeled(ground, 0, "ground"), Material::opaque}}));
    EXPECT_EQ(target.dropped_degenerate(), 2u);
    EXPECT_EQ(target.bvh().size(), 2u);
}

TEST(ScanTargetTest, GroundStaysOpaque) {
    ScanTarget target(make_scene({{big_ground(), Material::opaque}}));
    target.set_material(0, Material::transmissive);
    EXPECT_FALSE(target.has_transmissive());
    EXPECT_EQ(target.part(0).material, Material::opaque);
}

// --- simulate_leg / survey ----------------------------------------------------

TEST(SimulateLeg, GroundOnlyEveryPulseReturns) {
    const ScanTarget target(make_scene({{big_ground(), Material::opaque}}));
    const ScannerSettings s = sector(0, 360, 10, -80, -40, 10);
    const PointCloud cloud = simulate_leg(target, one_leg(s, {0, 0, 10}), one_leg(s, {0, 0, 10}).legs[0]);
    EXPECT_EQ(cloud.size(), s.pulse_count());
    EXPECT_EQ(cloud.size(), 36u * 5u);
    for (const auto& p : cloud.points) {
        EXPECT_EQ(p.label, 0u);
        EXPECT_NEAR(p.position.z, 0, 1e-9);
    }
    ASSERT_TRUE(cloud.provenance);
    EXPECT_EQ(cloud.provenance->leg, 0);
}

TEST(SimulateLeg, CubePointsOnFaces) {
    const MeshAsset cube = make_box({9.5, -0.5, 0}, {10.5, 0.5, 1});
    const ScanTarget target(make_scene({{big_ground(), Material::opaque}, {labeled(cube, 1, "cube"), Material::opaque}}));
    ScannerSettings s = sector(-5, 5, 0.1, -5, 8, 0.1);
    s.beam_divergence_mrad = 2;
    s.beam_sample_quality = 3;
    const Survey survey = one_leg(s, {0, 0, 0.5});
    const PointCloud cloud = simulate_leg(target, survey, survey.legs[0]);
    std::size_t on_cube = 0;
    for (const auto& p : cloud.points) {
        if (p.label != 1) {
            EXPECT_NEAR(p.position.z, 0, 1e-9);
            continue;
        }
        ++on_cube;
        Real best = 1e9;
        for (const auto& t : cube.triangles)
            best = std::min(best, point_triangle_distance(p.position, {cube.vertices[t[0]], cube.vertices[t[1]], cube.vertices[t[2]], 1}));
        EXPECT_LT(best, 1e-6);
    }
    EXPECT_GT(on_cube, 1000u);
}

std::string scan_bytes(const ScanTarget& target, const Survey& survey, unsigned threads) {
    std::string out;
    for (const auto& cloud : simulate_survey(target, survey, threads)) out += write_xyz(cloud) + "--\n";
    return out;
}

TEST(SimulateLeg, ThreadCountDoesNotChangeBytes) {
    const ScanTarget target(make_scene({{big_ground(), Material::opaque},
                                        {labeled(make_box({3, -1, 0}, {4, 1, 2}), 1, "box"), Material::opaque},
                                        {labeled(make_box({-4, -1, 0}, {-3, 1, 2}), 2, "pane"), Material::transmissive}}));
    ScannerSettings s = sector(0, 360, 1, -30, 20, 1);
    s.range_noise_sigma_m = 0.01;
    s.beam_divergence_mrad = 0.3;
    s.beam_sample_quality = 2;
    Survey survey = one_leg(s, {0, 0, 1.5}, 42);
    survey.legs.push_back({{1, 1, 1.5}, std::nullopt, 1});
    const std::string one = scan_bytes(target, survey, 1);
    EXPECT_EQ(one, scan_bytes(target, survey, 8));
    EXPECT_EQ(one, scan_bytes(target, survey, 3));
    EXPECT_EQ(one, scan_bytes(target, survey, 1));
    survey.seed = 43;
    EXPECT_NE(one, scan_bytes(target, survey, 1));
}

TEST(SimulateSurvey, LegCountAndEmptyLegRetained) {
    const ScanTarget target(make_scene({{big_ground(), Material::opaque}}));
    const ScannerSettings down = sector(0, 360, 30, -60, -30, 10);
    Survey survey = one_leg(down, {0, 0, 2});
    ScannerSettings up = sector(0, 360, 30, 10, 80, 10);
    survey.legs.push_back({{5, 0, 2}, up, 1});
    survey.legs.push_back({{-5, 0, 2}, std::nullopt, 2});
    const auto clouds = simulate_survey(target, survey);
    ASSERT_EQ(clouds.size(), 3u);
    EXPECT_EQ(clouds[0].size(), down.pulse_count());
    EXPECT_TRUE(clouds[1].empty());
    EXPECT_EQ(clouds[1].provenance->leg, 1);
    EXPECT_EQ(clouds[2].size(), down.pulse_count());
    EXPECT_EQ(merge(clouds).size(), clouds[0].size() + clouds[1].size() + clouds[2].size());

    survey.legs.clear();
    EXPECT_THROW(simulate_survey(target, survey), NoLegs);
}

// On-surface, label, occlusion and range invariants on a cluttered scene,
// checked against brute-force scans of every scene triangle.
TEST(SimulateLeg, SurfaceLabelOcclusionRange) {
    std::mt19937_64 rng(5);
    std::vector<std::pair<LabeledAsset, Material>> parts{{big_ground(), Material::opaque}};
    for (int i = 0; i < 12; ++i) {
        const Vec3 lo{std::uniform_real_distribution<Real>(-15, 12)(rng), std::uniform_real_distribution<Real>(-15, 12)(rng), 0};
        parts.push_back({labeled(make_box(lo, lo + random_vec(rng, 0.5, 3)), static_cast<std::uint32_t>(1 + i % 4),
                                 "c" + std::to_string(i % 4), "c" + std::to_string(i) + ".obj"),
                         Material::opaque});
    }
    const Scene scene = make_scene(parts);
    const ScanTarget target(scene);
    std::vector<Triangle> all;
    for (const auto& part : scene.parts)
        for (const auto& t : part.mesh->triangles)
            all.push_back({part.mesh->vertices[t[0]] + part.translation, part.mesh->vertices[t[1]] + part.translation,
                           part.mesh->vertices[t[2]] + part.translation, part.part_index});

    ScannerSettings s = sector(0, 360, 2, -40, 30, 2);
    s.max_range_m = 25;
    s.beam_divergence_mrad = 3;
    s.beam_sample_quality = 2;
    const Vec3 origin{0.3, -0.2, 1.6};
    const Survey survey = one_leg(s, origin);
    const PointCloud cloud = simulate_leg(target, survey, survey.legs[0], 4);
    ASSERT_GT(cloud.size(), 1000u);

    for (const auto& p : cloud.points) {
        const Real range = distance(p.position, origin);
        EXPECT_LE(range, s.max_range_m + 1e-9);

        bool on_labeled_surface = false;
        Real nearest = 1e9;
        for (const auto& t : all) {
            const Real d = point_triangle_distance(p.position, t);
            nearest = std::min(nearest, d);
            if (d < 1e-6 && scene.parts[static_cast<std::size_t>(t.part_index)].label.id == p.label) on_labeled_surface = true;
        }
        EXPECT_LT(nearest, 1e-6);
        EXPECT_TRUE(on_labeled_surface);

        const Vec3 dir = normalize(p.position - origin);
        for (const auto& t : all) {
            auto h = ray_triangle_intersect(Ray{origin, dir, 0, range - 1e-6}, t);
            EXPECT_FALSE(h) << "segment blocked at t=" << h->t << " of " << range;
        }
        EXPECT_NEAR(length(p.normal), 1, 1e-9);
        EXPECT_LE(dot(p.normal, dir), 1e-12);
    }
}

// Halving both angular steps over a fully covered ground sector multiplies the
// point count by 4, up to the endpoint-inclusive elevation boundary.
TEST(SimulateLeg, MonotoneDensity) {
    const ScanTarget target(make_scene({{big_ground(), Material::opaque}}));
    const Survey coarse = one_leg(sector(0, 90, 0.5, -80, -40, 0.2), {0, 0, 10});
    const Survey fine = one_leg(sector(0, 90, 0.25, -80, -40, 0.1), {0, 0, 10});
    const auto n_coarse = static_cast<Real>(simulate_leg(target, coarse, coarse.legs[0]).size());
    const auto n_fine = static_cast<Real>(simulate_leg(target, fine, fine.legs[0]).size());
    EXPECT_EQ(n_coarse, 180.0 * 201.0);
    EXPECT_LT(std::abs(n_fine / n_coarse - 4) / 4, 0.01);
}

} // namespace
