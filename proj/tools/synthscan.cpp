// SPDX-License-Identifier: Apache-2.0
//
// synthscan: scene generation, virtual scanning and training-data preparation.
//
// Exit codes: 0 success, 1 usage, 2 input error, 3 internal error.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "synthscan/synthscan.hpp"

namespace fs = std::filesystem;
using namespace synthscan;

namespace {

enum ExitCode : int { kOk = 0, kUsage = 1, kInput = 2, kInternal = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr std::uint64_t kDefaultSeed = 42;

std::optional<std::uint64_t> env_seed() {
    const char* raw = std::getenv("SYNTHSCAN_SEED");
    if (!raw || !*raw) return std::nullopt;
    std::uint64_t v = 0;
    const std::string s(raw);
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw UsageError("SYNTHSCAN_SEED is not an unsigned integer: " + s);
    return v;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::string path_for_xml(const fs::path& target, const fs::path& xml_dir) {
    return fs::proximate(fs::absolute(target), fs::absolute(xml_dir)).generic_string();
}

// --- scene-gen --------------------------------------------------------------

struct SceneGenArgs {
    std::string objects_dir, ground_plane, name, out = ".";
    int num_objects = 0, segments = 0;
    double radius = 0, spacing = 10, height = 1.7;
    std::string preset_name = "tls-default", layout = "grid";
    std::optional<double> horiz_res, vert_res, max_range, sigma, divergence;
    std::optional<int> quality;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> transmissive;
};

int run_scene_gen(const SceneGenArgs& a) {
    LabelRegistry registry;
    const auto assets = load_asset_directory(a.objects_dir, registry);
    if (assets.empty()) throw InputError("no .obj files in " + a.objects_dir);
    const LabeledAsset ground = load_ground_plane(a.ground_plane);
    const std::uint64_t seed = a.seed ? *a.seed : env_seed().value_or(kDefaultSeed);

    PlacementOptions placement;
    placement.layout = a.layout == "scatter" ? PlacementOptions::Layout::scatter : PlacementOptions::Layout::grid;
    placement.seed = seed;
    placement.transmissive_labels.insert(a.transmissive.begin(), a.transmissive.end());
    Scene scene = build_scene(assets, ground, a.num_objects, a.spacing, a.name, placement);

    const fs::path out(a.out);
    ensure_dir(out);
    for (auto& part : scene.parts) part.asset_path = path_for_xml(part.asset_path, out);

    ScannerSettings settings = preset(a.preset_name);
    if (a.horiz_res) settings.horiz_res_deg = *a.horiz_res;
    if (a.vert_res) settings.vert_res_deg = *a.vert_res;
    if (a.max_range) settings.max_range_m = *a.max_range;
    if (a.sigma) settings.range_noise_sigma_m = *a.sigma;
    if (a.divergence) settings.beam_divergence_mrad = *a.divergence;
    if (a.quality) settings.beam_sample_quality = *a.quality;
    settings.validate();

    Survey survey;
    survey.name = a.name;
    survey.scene_path = "scene.xml";
    survey.scene_id = scene.name;
    survey.settings = settings;
    survey.seed = seed;
    // The ring is centered on the scene in x-y and sits at ground level, so
    // `height` is the tripod height above the ground.
    const Vec3 ring_center{scene.center.x, scene.center.y, scene.ground_z()};
    for (const auto& pos : generate_scan_positions(ring_center, a.radius, a.segments, a.height))
        survey.legs.push_back({pos.position, std::nullopt, pos.index});

    write_text_file(out / "scene.xml", write_scene_xml(scene));
    write_text_file(out / "survey.xml", write_survey_xml(survey));
    std::cout << "placed " << scene.parts.size() - 1 << " objects, generated " << survey.legs.size() << " legs\n"
              << "wrote " << (out / "scene.xml").string() << " and " << (out / "survey.xml").string() << "\n";
    return kOk;
}

// --- scan -------------------------------------------------------------------

struct ScanArgs {
    std::string survey, scene, out;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
};

std::string describe(const ScannerSettings& s) {
    std::ostringstream os;
    os << "horiz " << s.horiz_start_deg << ".." << s.horiz_end_deg << " @ " << s.horiz_res_deg << " deg ("
       << s.azimuth_steps() << " steps), vert " << s.vert_start_deg << ".." << s.vert_end_deg << " @ "
       << s.vert_res_deg << " deg (" << s.elevation_steps() << " steps), max range " << s.max_range_m
       << " m, sigma " << s.range_noise_sigma_m << " m, divergence " << s.beam_divergence_mrad << " mrad, quality "
       << s.beam_sample_quality;
    return os.str();
}

int run_scan(const ScanArgs& a) {
    const auto started = std::chrono::steady_clock::now();
    const fs::path survey_path(a.survey);
    Survey survey = load_survey_file(survey_path);
    if (a.seed) survey.seed = *a.seed;
    else if (auto s = env_seed()) survey.seed = *s;

    fs::path scene_path = a.scene.empty() ? fs::path(survey.scene_path) : fs::path(a.scene);
    if (a.scene.empty() && scene_path.is_relative()) scene_path = survey_path.parent_path() / scene_path;
    if (!fs::is_regular_file(scene_path)) throw MissingFile(scene_path.string());
    const Scene scene = load_scene_file(scene_path);
    if (!survey.scene_id.empty() && survey.scene_id != scene.name)
        throw InputError("survey references scene '" + survey.scene_id + "' but " + scene_path.string() +
                         " holds '" + scene.name + "'");

    const ScanTarget target(scene);
    if (target.dropped_degenerate() > 0)
        std::cerr << "warning: dropped " << target.dropped_degenerate() << " degenerate triangles\n";

    const fs::path out(a.out);
    ensure_dir(out);
    std::ostringstream log;
    log << "survey " << survey.name << " (" << survey_path.string() << ")\n"
        << "scene " << scene.name << " (" << scene_path.string() << "), " << scene.parts.size() << " parts, "
        << target.bvh().size() << " triangles, " << target.dropped_degenerate() << " degenerate dropped\n"
        << "seed " << survey.seed << ", threads " << a.threads << "\n";

    std::size_t total = 0;
    for (const auto& leg : survey.legs) {
        const PointCloud cloud = simulate_leg(target, survey, leg, a.threads);
        std::ostringstream name;
        name << "leg_" << std::setw(3) << std::setfill('0') << leg.index << ".xyz";
        write_text_file(out / name.str(), write_xyz(cloud));
        total += cloud.size();
        log << "leg " << leg.index << " at (" << leg.position.x << ", " << leg.position.y << ", " << leg.position.z
            << "): " << describe(survey.settings_for(leg)) << "; " << cloud.size() << " points -> " << name.str()
            << "\n";
        std::cout << name.str() << ": " << cloud.size() << " points\n";
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    log << "total " << total << " points in " << survey.legs.size() << " legs, wall time " << std::fixed
        << std::setprecision(3) << seconds << " s\n";
    write_text_file(out / "scan.log", log.str());
    return kOk;
}

// --- merge / blocks / stats / compare -----------------------------------------

int run_merge(const std::vector<std::string>& inputs, const std::string& out) {
    std::vector<PointCloud> clouds;
    for (const auto& in : inputs) clouds.push_back(load_xyz_file(in));
    const PointCloud merged = merge(clouds);
    write_text_file(out, write_xyz(merged));
    std::cout << "merged " << inputs.size() << " files, " << merged.size() << " points -> " << out << "\n";
    return kOk;
}

int run_to_txt(const std::string& in, const std::string& out) {
    const PointCloud cloud = load_xyz_file(in);
    write_text_file(out, to_training_txt(cloud));
    std::cout << cloud.size() << " points -> " << out << "\n";
    return kOk;
}

struct BlocksArgs {
    std::string in, out, base;
    double window = 1, stride = 1;
    std::size_t min_points = 100;
    std::optional<std::size_t> sample_to;
    std::optional<std::uint64_t> seed;
};

int run_blocks(const BlocksArgs& a) {
    BlockSpec spec;
    spec.window_x = spec.window_y = a.window;
    spec.stride_x = spec.stride_y = a.stride;
    spec.min_points = a.min_points;
    spec.sample_to = a.sample_to;
    spec.seed = a.seed ? *a.seed : env_seed().value_or(kDefaultSeed);
    const PointCloud cloud = load_xyz_file(a.in);
    const auto blocks = partition_blocks(cloud, spec);
    const std::string base = a.base.empty() ? fs::path(a.in).stem().string() : a.base;
    const auto manifest = write_blocks(blocks, a.out, base);
    std::cout << manifest.size() << " blocks -> " << a.out << "\n";
    return kOk;
}

std::string fmt_real(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

int run_stats(const std::string& in, const std::string& csv) {
    const PointCloud cloud = load_xyz_file(in);
    const CloudStats s = stats(cloud);
    std::cout << std::left << std::setw(18) << "points" << s.count << "\n";
    if (s.count > 0) {
        std::cout << std::setw(18) << "bbox min" << fmt_real(s.bounds.min.x) << " " << fmt_real(s.bounds.min.y) << " "
                  << fmt_real(s.bounds.min.z) << "\n"
                  << std::setw(18) << "bbox max" << fmt_real(s.bounds.max.x) << " " << fmt_real(s.bounds.max.y) << " "
                  << fmt_real(s.bounds.max.z) << "\n";
    }
    std::cout << std::setw(18) << "mean NN spacing"
              << (s.nn_spacing_defined ? fmt_real(s.mean_nn_spacing) + " m" : "undefined (0)") << "\n\n"
              << std::setw(10) << "label" << std::right << std::setw(12) << "count" << "\n";
    for (const auto& [label, count] : s.per_label)
        std::cout << std::left << std::setw(10) << label << std::right << std::setw(12) << count << "\n";
    if (!csv.empty()) {
        std::string text = "label,count\n";
        for (const auto& [label, count] : s.per_label) text += std::to_string(label) + "," + std::to_string(count) + "\n";
        write_text_file(csv, text);
    }
    return kOk;
}

int run_compare(const std::string& path_a, const std::string& path_b, const std::string& csv, unsigned threads) {
    const CloudComparison c = compare(load_xyz_file(path_a), load_xyz_file(path_b), threads == 0 ? 1 : threads);
    auto row = [](const std::string& name, const DistanceSummary& s) {
        std::cout << std::left << std::setw(10) << name << std::right << std::setw(10) << s.count << std::setw(14)
                  << fmt_real(s.mean) << std::setw(14) << fmt_real(s.rms) << std::setw(14) << fmt_real(s.max) << "\n";
    };
    std::cout << std::left << std::setw(10) << "label" << std::right << std::setw(10) << "count" << std::setw(14)
              << "mean" << std::setw(14) << "rms" << std::setw(14) << "max" << "\n";
    row("all", c.overall);
    for (const auto& [label, s] : c.per_label) row(std::to_string(label), s);
    if (!csv.empty()) {
        std::string text = "label,count,mean,rms,max\n";
        auto line = [&](const std::string& name, const DistanceSummary& s) {
            text += name + "," + std::to_string(s.count) + "," + format_exact(s.mean) + "," + format_exact(s.rms) + "," +
                    format_exact(s.max) + "\n";
        };
        line("all", c.overall);
        for (const auto& [label, s] : c.per_label) line(std::to_string(label), s);
        write_text_file(csv, text);
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Virtual terrestrial laser scanning of labeled mesh scenes"};
    app.require_subcommand(1);

    SceneGenArgs gen;
    auto* scene_gen = app.add_subcommand("scene-gen", "Place labeled OBJ assets on a ground plane and write scene.xml + survey.xml");
    scene_gen->add_option("--objects-dir", gen.objects_dir, "Folder with one OBJ per object")->required()->check(CLI::ExistingDirectory);
    scene_gen->add_option("--ground-plane", gen.ground_plane, "Ground plane OBJ")->required();
    scene_gen->add_option("--name", gen.name, "Scene name")->required();
    scene_gen->add_option("--num-objects", gen.num_objects, "Objects to distribute")->required()->check(CLI::PositiveNumber);
    scene_gen->add_option("--segments", gen.segments, "Scan positions on the circle")->required()->check(CLI::PositiveNumber);
    scene_gen->add_option("--radius", gen.radius, "Circle radius around the scene center (m)")->required()->check(CLI::PositiveNumber);
    scene_gen->add_option("--spacing", gen.spacing, "Grid pitch (m)")->capture_default_str()->check(CLI::PositiveNumber);
    scene_gen->add_option("--height", gen.height, "Scanner height above ground (m)")->capture_default_str();
    scene_gen->add_option("--out", gen.out, "Output directory")->capture_default_str();
    scene_gen->add_option("--preset", gen.preset_name, "Scanner preset")->capture_default_str()->check(CLI::IsMember({"generic-lidar", "tls-default"}));
    scene_gen->add_option("--horiz-res", gen.horiz_res, "Override azimuth resolution (deg)");
    scene_gen->add_option("--vert-res", gen.vert_res, "Override elevation resolution (deg)");
    scene_gen->add_option("--max-range", gen.max_range, "Override max range (m)");
    scene_gen->add_option("--sigma", gen.sigma, "Override range noise sigma (m)");
    scene_gen->add_option("--divergence", gen.divergence, "Override beam divergence (mrad)");
    scene_gen->add_option("--quality", gen.quality, "Override beam sample quality");
    scene_gen->add_option("--layout", gen.layout, "Object layout")->capture_default_str()->check(CLI::IsMember({"grid", "scatter"}));
    scene_gen->add_option("--seed", gen.seed, "Seed stored in the survey and used by --layout scatter");
    scene_gen->add_option("--transmissive", gen.transmissive, "Class names that pulses pass through");

    ScanArgs scan;
    auto* scan_cmd = app.add_subcommand("scan", "Simulate every leg of a survey; one .xyz per leg");
    scan_cmd->add_option("--survey", scan.survey, "Survey XML")->required();
    scan_cmd->add_option("--scene", scan.scene, "Scene XML (default: the survey's reference)");
    scan_cmd->add_option("--out", scan.out, "Output directory")->required();
    scan_cmd->add_option("--seed", scan.seed, "Override the survey seed");
    scan_cmd->add_option("--threads", scan.threads, "Worker threads (0 = all cores)")->capture_default_str();

    std::vector<std::string> merge_inputs;
    std::string merge_out;
    auto* merge_cmd = app.add_subcommand("merge", "Concatenate .xyz clouds");
    merge_cmd->add_option("inputs", merge_inputs, "Input .xyz files")->required();
    merge_cmd->add_option("--out", merge_out, "Output .xyz")->required();

    std::string txt_in, txt_out;
    auto* txt_cmd = app.add_subcommand("to-txt", "Convert .xyz to the 4-field training .txt");
    txt_cmd->add_option("--in", txt_in, "Input .xyz")->required();
    txt_cmd->add_option("--out", txt_out, "Output .txt")->required();

    BlocksArgs blk;
    auto* blocks_cmd = app.add_subcommand("blocks", "Split a cloud into sliding-window training blocks");
    blocks_cmd->add_option("--in", blk.in, "Input .xyz")->required();
    blocks_cmd->add_option("--window", blk.window, "Window size in x and y (m)")->capture_default_str()->check(CLI::PositiveNumber);
    blocks_cmd->add_option("--stride", blk.stride, "Stride in x and y (m)")->capture_default_str()->check(CLI::PositiveNumber);
    blocks_cmd->add_option("--min-points", blk.min_points, "Drop blocks with fewer points")->capture_default_str()->check(CLI::PositiveNumber);
    blocks_cmd->add_option("--sample-to", blk.sample_to, "Resample each block to this many points");
    blocks_cmd->add_option("--seed", blk.seed, "Sampling seed");
    blocks_cmd->add_option("--base", blk.base, "File name prefix (default: input stem)");
    blocks_cmd->add_option("--out", blk.out, "Output directory")->required();

    std::string stats_in, stats_csv;
    auto* stats_cmd = app.add_subcommand("stats", "Point counts, bounds and spacing of a cloud");
    stats_cmd->add_option("--in", stats_in, "Input .xyz")->required();
    stats_cmd->add_option("--csv", stats_csv, "Also write per-label counts as CSV");

    std::string cmp_a, cmp_b, cmp_csv;
    unsigned cmp_threads = 1;
    auto* compare_cmd = app.add_subcommand("compare", "Nearest-neighbor distances from cloud A to cloud B");
    compare_cmd->add_option("--a", cmp_a, "Cloud A (.xyz)")->required();
    compare_cmd->add_option("--b", cmp_b, "Cloud B (.xyz)")->required();
    compare_cmd->add_option("--csv", cmp_csv, "Also write the table as CSV");
    compare_cmd->add_option("--threads", cmp_threads, "Worker threads")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*scene_gen) return run_scene_gen(gen);
        if (*scan_cmd) return run_scan(scan);
        if (*merge_cmd) return run_merge(merge_inputs, merge_out);
        if (*txt_cmd) return run_to_txt(txt_in, txt_out);
        if (*blocks_cmd) return run_blocks(blk);
        if (*stats_cmd) return run_stats(stats_in, stats_csv);
        if (*compare_cmd) return run_compare(cmp_a, cmp_b, cmp_csv, cmp_threads);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInput;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kInternal;
    }
    return kUsage;
}
