// floorloc command line tool: synthetic scenario generation, correspondence
// mining, contrastive loss numerics, and ray-scan localization on floorplans.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include "floorloc/experiment.hpp"
#include "floorloc/io.hpp"

namespace fs = std::filesystem;
using namespace floorloc;

namespace {

struct GlobalArgs {
    std::uint64_t seed = 1;
    std::string config;
    std::string out_dir = "out";
};

ExperimentConfig load_config_or_default(const GlobalArgs& g) {
    ExperimentConfig c;
    if (!g.config.empty()) c = parse_experiment_config(g.config);
    if (g.seed != 1 || g.config.empty()) c.scenario.seed = g.seed;
    return c;
}

OccupancyGrid load_map(const std::string& raster, const std::string& meta,
                       const std::string& mask) {
    if (raster.empty() || meta.empty())
        throw IoError("need --map and --meta (or a --config driven run)");
    return load_floorplan(raster, meta, mask);
}

std::vector<std::string> sorted_depth_files(const std::string& dir) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = entry.path().extension().string();
        if (ext == ".png" || ext == ".PNG") files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw IoError("no .png depth images under " + dir);
    return files;
}

int cmd_simulate(const GlobalArgs& g, bool rgbd) {
    const ExperimentConfig c = load_config_or_default(g);
    fs::create_directories(g.out_dir);
    const fs::path dir(g.out_dir);
    const OccupancyGrid clean = gen_floorplan(c.scenario);
    const OccupancyGrid cluttered = add_clutter(clean, c.scenario);
    save_floorplan((dir / "map.pgm").string(), (dir / "map.txt").string(), clean);
    if (c.scenario.clutter_count > 0)
        save_floorplan((dir / "cluttered.pgm").string(), (dir / "cluttered.txt").string(),
                       cluttered);
    const Trajectory traj = gen_trajectory(clean, cluttered, c.scenario, c.obs);
    fs::create_directories(dir / "trajectory");
    save_trajectory((dir / "trajectory" / "trajectory.csv").string(), traj);

    if (rgbd) {  // depth frames, poses, intrinsics, surface cloud for mining
        const fs::path rgbd_dir = dir / "rgbd";
        fs::create_directories(rgbd_dir / "depth");
        const RgbdSequence seq = gen_rgbd_sequence(c.scenario);
        std::vector<RigidPose3> poses;
        for (std::size_t i = 0; i < seq.frames.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof(name), "depth_%04zu.png", i);
            save_depth_png((rgbd_dir / "depth" / name).string(), seq.frames[i].depth);
            poses.push_back(seq.frames[i].pose);
        }
        save_poses((rgbd_dir / "poses.txt").string(), poses);
        save_intrinsics((rgbd_dir / "intrinsics.txt").string(), seq.intrinsics);
        save_xyz((rgbd_dir / "surface.xyz").string(), seq.surface);
        std::cout << "wrote " << seq.frames.size() << " RGB-D frames to "
                  << (rgbd_dir).string() << "\n";
    }
    std::cout << "wrote map + " << traj.steps.size() << "-step trajectory to " << g.out_dir
              << "\n";
    return 0;
}

int cmd_mine(const GlobalArgs& g, const std::string& depth_dir, const std::string& intr,
             const std::string& poses_path, double min_ratio, int frame_stride,
             int pixel_stride, double threshold, const std::vector<int>& pair) {
    const CameraIntrinsics K = load_intrinsics(intr);
    const std::vector<RigidPose3> poses = load_poses(poses_path);
    const std::vector<std::string> files = sorted_depth_files(depth_dir);
    if (files.size() != poses.size())
        throw IoError("depth image count does not match pose count");
    std::vector<RgbdFrame> frames;
    frames.reserve(files.size());
    for (std::size_t i = 0; i < files.size(); ++i)
        frames.push_back({load_depth_png(files[i]), poses[i]});

    fs::create_directories(g.out_dir);
    const fs::path dir(g.out_dir);
    if (pair.size() == 2) {
        const int a = pair[0], b = pair[1];
        const auto set = find_correspondences(frames.at(a).depth, frames.at(b).depth, K,
                                              frames.at(a).pose, frames.at(b).pose,
                                              threshold, pixel_stride);
        const std::string out =
            (dir / ("correspondences_" + std::to_string(a) + "_" + std::to_string(b) + ".csv"))
                .string();
        save_correspondences_csv(out, set);
        std::cout << "frames " << a << "," << b << ": " << set.pairs.size()
                  << " pairs, ratio " << set.ratio << " -> " << out << "\n";
        return 0;
    }
    const auto mined = mine_pairs(frames, K, min_ratio, frame_stride, pixel_stride, threshold);
    save_pairs_csv((dir / "pairs.csv").string(), mined);
    std::cout << mined.size() << " frame pairs at ratio >= " << min_ratio << " -> "
              << (dir / "pairs.csv").string() << "\n";
    return 0;
}

int cmd_chunks(const GlobalArgs& g, const std::string& cloud_path, const std::string& intr,
               const std::string& poses_path, int frame, const std::string& depth_path,
               double resolution, double threshold) {
    const CameraIntrinsics K = load_intrinsics(intr);
    const std::vector<RigidPose3> poses = load_poses(poses_path);
    const PointCloud S = load_xyz(cloud_path);
    const DepthImage D = load_depth_png(depth_path);
    const RigidPose3& pose = poses.at(static_cast<std::size_t>(frame));

    FrustumChunk chunk = crop_frustum_chunk(S, K, pose, D, resolution);
    chunk.frame_id = frame;
    fs::create_directories(g.out_dir);
    const fs::path dir(g.out_dir);
    const std::string chunk_path = (dir / ("chunk_" + std::to_string(frame) + ".xyz")).string();
    save_xyz(chunk_path, chunk.points);

    const auto assoc = associate_pixels_points(D, K, pose, chunk, threshold);
    const std::string assoc_path =
        (dir / ("associations_" + std::to_string(frame) + ".csv")).string();
    std::ofstream out(assoc_path);
    out << "u,v,point\n";
    for (const auto& [px, idx] : assoc.pairs) out << px.u << "," << px.v << "," << idx << "\n";
    std::cout << chunk.points.size() << " chunk points, " << assoc.pairs.size()
              << " pixel-point pairs -> " << chunk_path << "\n";
    return 0;
}

int cmd_loss(const std::string& features_a, const std::string& features_b,
             const std::string& matches, double tau, bool exclude_self, bool widen_pool,
             const std::string& scan_path, const std::string& scan_gt_path, bool literal,
             double epsilon) {
    const bool nce = !features_a.empty();
    const bool floc = !scan_path.empty();
    if (nce == floc)
        throw CLI::ValidationError("loss",
                                   "give either --features-a/--features-b/--matches or "
                                   "--scan/--scan-gt");
    if (nce) {
        const FeatureMap A = load_features(features_a);
        const FeatureMap B = load_features(features_b);
        const MatchSet M = load_matches_csv(matches);
        InfoNceOptions opt;
        opt.exclude_self = exclude_self;
        opt.widen_pool = widen_pool;
        std::cout.precision(17);
        std::cout << point_info_nce(A, B, M, tau, opt) << "\n";
    } else {
        const RayScan d = load_scan_csv(scan_path);
        const RayScan d_star = load_scan_csv(scan_gt_path);
        std::cout.precision(17);
        std::cout << floc_loss(d, d_star, epsilon, literal) << "\n";
    }
    return 0;
}

int cmd_grad_check(const std::string& features_a, const std::string& features_b,
                   const std::string& matches, double tau, double h) {
    const FeatureMap A0 = load_features(features_a);
    const FeatureMap B0 = load_features(features_b);
    const MatchSet M = load_matches_csv(matches);
    const auto g = point_info_nce_grad(A0, B0, M, tau);
    double worst = 0.0;
    auto probe = [&](FeatureMap A, FeatureMap B, bool first) {
        std::vector<double>& data = first ? A.data : B.data;
        const std::vector<double>& grad = first ? g.grad_a : g.grad_b;
        for (std::size_t t = 0; t < data.size(); ++t) {
            const double keep = data[t];
            data[t] = keep + h;
            const double up = point_info_nce(A, B, M, tau);
            data[t] = keep - h;
            const double down = point_info_nce(A, B, M, tau);
            data[t] = keep;
            const double fd = (up - down) / (2.0 * h);
            worst = std::max(worst, std::abs(grad[t] - fd) /
                                        std::max({1.0, std::abs(fd), std::abs(grad[t])}));
        }
    };
    probe(A0, B0, true);
    probe(A0, B0, false);
    std::cout << "max relative gradient error: " << worst << "\n";
    return worst < 1e-4 ? 0 : 1;
}

int cmd_localize(const GlobalArgs& g, const std::string& map, const std::string& meta,
                 const std::string& mask, const std::string& scan_path, int bins,
                 double lambda_depth, double lambda_shape, double max_range) {
    const ExperimentConfig c = load_config_or_default(g);
    fs::create_directories(g.out_dir);
    const fs::path dir(g.out_dir);

    if (map.empty()) {  // config-driven synthetic experiment, single-frame mode
        ExperimentConfig cfg = c;
        cfg.mode = "single";
        const ExperimentResult result = run_experiment(cfg, g.out_dir);
        std::cout << result.report.to_text();
        return 0;
    }
    const OccupancyGrid grid = load_map(map, meta, mask);
    const RayScan obs = load_scan_csv(scan_path);
    LikelihoodParams params;
    params.lambda_depth = lambda_depth;
    params.lambda_shape = lambda_shape;
    const auto result = single_frame_localize(grid, obs, bins, params, max_range);
    save_posterior((dir / "scores.post").string(), result.scores);
    save_heatmap_pgm((dir / "scores.pgm").string(), result.scores);
    std::cout.precision(10);
    std::cout << "best pose: x=" << result.best.x << " y=" << result.best.y
              << " phi=" << result.best.phi << "\n";
    return 0;
}

int cmd_track(const GlobalArgs& g, const std::string& map, const std::string& meta,
              const std::string& mask, const std::string& traj_path, int bins,
              double lambda_depth, double lambda_shape, double max_range,
              double sigma_trans, double sigma_rot) {
    fs::create_directories(g.out_dir);
    const fs::path dir(g.out_dir);

    if (map.empty()) {  // config-driven synthetic experiment, tracking mode
        ExperimentConfig cfg = load_config_or_default(g);
        cfg.mode = "track";
        const ExperimentResult result = run_experiment(cfg, g.out_dir);
        std::cout << result.report.to_text();
        return 0;
    }
    const OccupancyGrid grid = load_map(map, meta, mask);
    const Trajectory traj = load_trajectory(traj_path);
    std::vector<RayScan> obs;
    std::vector<MotionDelta> deltas;
    for (const TrajectoryStep& step : traj.steps) {
        obs.push_back(step.observation);
        MotionDelta d = step.delta;
        d.sigma_trans = sigma_trans;
        d.sigma_rot = sigma_rot;
        deltas.push_back(d);
    }
    TrackParams params;
    params.bins = bins;
    params.like.lambda_depth = lambda_depth;
    params.like.lambda_shape = lambda_shape;
    params.max_range = max_range;
    const TrackResult result = track(grid, obs, deltas, params);

    std::vector<LocalizationRecord> records;
    for (std::size_t t = 0; t < result.steps.size(); ++t)
        records.push_back({0, static_cast<int>(t), result.steps[t].estimate, traj.steps[t].gt});
    save_records_csv((dir / "records.csv").string(), records);
    save_posterior((dir / "final.post").string(), result.posterior);
    save_heatmap_pgm((dir / "final.pgm").string(), result.posterior);
    const MetricReport report = make_report(records);
    std::ofstream(dir / "report.txt") << report.to_text();
    std::cout << report.to_text();
    return 0;
}

int cmd_mcl(const GlobalArgs& g, const std::string& map, const std::string& meta,
            const std::string& mask, const std::string& traj_path, int rays, int bins,
            double max_range, double sigma_trans, double sigma_rot) {
    const OccupancyGrid grid = load_map(map, meta, mask);
    const Trajectory traj = load_trajectory(traj_path);
    TrackParams params;
    params.bins = bins;
    params.max_range = max_range;
    const auto records = mcl_baseline(grid, traj, rays, params, sigma_trans, sigma_rot);
    fs::create_directories(g.out_dir);
    const fs::path dir(g.out_dir);
    save_records_csv((dir / "records.csv").string(), records);
    const MetricReport report = make_report(records);
    std::ofstream(dir / "report.txt") << report.to_text();
    std::cout << report.to_text();
    return 0;
}

int cmd_eval(const GlobalArgs& g, const std::string& records_path, double success_radius) {
    const auto records = load_records_csv(records_path);
    const MetricReport report = make_report(records, default_sr_thresholds(), success_radius);
    fs::create_directories(g.out_dir);
    const fs::path dir(g.out_dir);
    std::ofstream(dir / "report.txt") << report.to_text();
    std::ofstream(dir / "report.csv") << report.to_csv();
    std::cout << report.to_text();
    return 0;
}

int cmd_render(const std::string& posterior_path, const std::string& out_path) {
    save_heatmap_pgm(out_path, load_posterior(posterior_path));
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"floorplan localization toolkit"};
    app.require_subcommand(1);

    GlobalArgs g;
    app.add_option("--seed", g.seed, "master random seed");
    app.add_option("--config", g.config, "key=value experiment config file");
    app.add_option("--out-dir", g.out_dir, "output directory");

    // simulate
    CLI::App* simulate = app.add_subcommand("simulate", "generate a synthetic scenario");
    bool rgbd = false;
    simulate->add_flag("--rgbd", rgbd, "also render depth frames, poses, and a surface cloud");

    // mine
    CLI::App* mine = app.add_subcommand("mine", "mine multi-view pixel correspondences");
    std::string depth_dir, intr, poses_path;
    double min_ratio = 0.30, threshold = 0.02;
    int frame_stride = 1, pixel_stride = 4;
    std::vector<int> pair;
    mine->add_option("--depth-dir", depth_dir, "directory of 16-bit depth PNGs")->required();
    mine->add_option("--intrinsics", intr, "intrinsics key=value file")->required();
    mine->add_option("--poses", poses_path, "camera-to-world pose file")->required();
    mine->add_option("--min-ratio", min_ratio, "overlap ratio gate");
    mine->add_option("--frame-stride", frame_stride, "frame subsampling stride");
    mine->add_option("--pixel-stride", pixel_stride, "pixel subsampling stride");
    mine->add_option("--threshold", threshold, "match distance threshold [m]");
    mine->add_option("--pair", pair, "emit correspondences for one frame pair a b")
        ->expected(2);

    // chunks
    CLI::App* chunks = app.add_subcommand("chunks", "crop and associate frustum chunks");
    std::string cloud_path, depth_path;
    int frame = 0;
    double chunk_resolution = 0.02, chunk_threshold = 0.02;
    chunks->add_option("--cloud", cloud_path, "surface cloud .xyz")->required();
    chunks->add_option("--intrinsics", intr, "intrinsics key=value file")->required();
    chunks->add_option("--poses", poses_path, "camera-to-world pose file")->required();
    chunks->add_option("--frame", frame, "frame index")->required();
    chunks->add_option("--depth", depth_path, "frame depth PNG")->required();
    chunks->add_option("--resolution", chunk_resolution, "chunk voxel size [m]");
    chunks->add_option("--threshold", chunk_threshold, "association threshold [m]");

    // loss
    CLI::App* loss = app.add_subcommand("loss", "evaluate contrastive or ray-scan losses");
    std::string features_a, features_b, matches, scan_path, scan_gt_path;
    double tau = 0.07, epsilon = 1e-8;
    bool exclude_self = false, widen_pool = false, literal = false;
    loss->add_option("--features-a", features_a, "anchor feature file (FEAT)");
    loss->add_option("--features-b", features_b, "positive feature file (FEAT)");
    loss->add_option("--matches", matches, "match CSV (i,j)");
    loss->add_option("--tau", tau, "temperature");
    loss->add_flag("--exclude-self", exclude_self, "drop the anchor's own positive");
    loss->add_flag("--widen-pool", widen_pool, "use all of B as the negative pool");
    loss->add_option("--scan", scan_path, "predicted ray scan CSV");
    loss->add_option("--scan-gt", scan_gt_path, "reference ray scan CSV");
    loss->add_flag("--loss-literal", literal, "printed-sign form of the scan loss");
    loss->add_option("--epsilon", epsilon, "cosine denominator floor");

    // grad-check
    CLI::App* grad = app.add_subcommand("grad-check", "finite-difference gradient check");
    double h = 1e-6;
    grad->add_option("--features-a", features_a, "anchor feature file")->required();
    grad->add_option("--features-b", features_b, "positive feature file")->required();
    grad->add_option("--matches", matches, "match CSV")->required();
    grad->add_option("--tau", tau, "temperature");
    grad->add_option("--fd-step", h, "finite-difference step");

    // localize / track / mcl / eval / render
    std::string map, meta, mask, traj_path, records_path, posterior_path, out_path;
    int bins = 36, rays = 72;
    double lambda_depth = 3.0, lambda_shape = 1.0, max_range = 10.0;
    double sigma_trans = 0.05, sigma_rot = 0.035, success_radius = 1.0;

    CLI::App* localize = app.add_subcommand(
        "localize", "single-frame pose scoring (config-driven or file-driven)");
    localize->add_option("--map", map, "floorplan raster (.pgm/.png)");
    localize->add_option("--meta", meta, "floorplan metadata key=value file");
    localize->add_option("--mask", mask, "optional Unknown mask raster");
    localize->add_option("--scan", scan_path, "observation scan CSV");
    localize->add_option("--bins", bins, "orientation bins");
    localize->add_option("--lambda-depth", lambda_depth, "depth residual weight [1/m]");
    localize->add_option("--lambda-shape", lambda_shape, "shape residual weight");
    localize->add_option("--max-range", max_range, "ray range cap [m]");

    CLI::App* track_cmd = app.add_subcommand(
        "track", "histogram-filter tracking (config-driven or file-driven)");
    track_cmd->add_option("--map", map, "floorplan raster (.pgm/.png)");
    track_cmd->add_option("--meta", meta, "floorplan metadata key=value file");
    track_cmd->add_option("--mask", mask, "optional Unknown mask raster");
    track_cmd->add_option("--trajectory", traj_path, "trajectory CSV with scan references");
    track_cmd->add_option("--bins", bins, "orientation bins");
    track_cmd->add_option("--lambda-depth", lambda_depth, "depth residual weight [1/m]");
    track_cmd->add_option("--lambda-shape", lambda_shape, "shape residual weight");
    track_cmd->add_option("--max-range", max_range, "ray range cap [m]");
    track_cmd->add_option("--sigma-trans", sigma_trans, "filter motion blur [m]");
    track_cmd->add_option("--sigma-rot", sigma_rot, "filter motion blur [rad]");

    CLI::App* mcl = app.add_subcommand("mcl", "ground-truth LiDAR baseline tracker");
    mcl->add_option("--map", map, "floorplan raster")->required();
    mcl->add_option("--meta", meta, "floorplan metadata")->required();
    mcl->add_option("--mask", mask, "optional Unknown mask raster");
    mcl->add_option("--trajectory", traj_path, "trajectory CSV")->required();
    mcl->add_option("--rays", rays, "LiDAR ray count (full circle)");
    mcl->add_option("--bins", bins, "orientation bins");
    mcl->add_option("--max-range", max_range, "ray range cap [m]");
    mcl->add_option("--sigma-trans", sigma_trans, "filter motion blur [m]");
    mcl->add_option("--sigma-rot", sigma_rot, "filter motion blur [rad]");

    CLI::App* eval = app.add_subcommand("eval", "metrics from a records CSV");
    eval->add_option("--records", records_path, "records CSV")->required();
    eval->add_option("--success-radius", success_radius, "RMSE(Succ) gate [m]");

    CLI::App* render = app.add_subcommand("render", "posterior dump to PGM heatmap");
    render->add_option("--posterior", posterior_path, "posterior .post file")->required();
    render->add_option("--out", out_path, "output PGM path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(g, rgbd);
        if (mine->parsed())
            return cmd_mine(g, depth_dir, intr, poses_path, min_ratio, frame_stride,
                            pixel_stride, threshold, pair);
        if (chunks->parsed())
            return cmd_chunks(g, cloud_path, intr, poses_path, frame, depth_path,
                              chunk_resolution, chunk_threshold);
        if (loss->parsed())
            return cmd_loss(features_a, features_b, matches, tau, exclude_self, widen_pool,
                            scan_path, scan_gt_path, literal, epsilon);
        if (grad->parsed()) return cmd_grad_check(features_a, features_b, matches, tau, h);
        if (localize->parsed())
            return cmd_localize(g, map, meta, mask, scan_path, bins, lambda_depth,
                                lambda_shape, max_range);
        if (track_cmd->parsed())
            return cmd_track(g, map, meta, mask, traj_path, bins, lambda_depth, lambda_shape,
                             max_range, sigma_trans, sigma_rot);
        if (mcl->parsed())
            return cmd_mcl(g, map, meta, mask, traj_path, rays, bins, max_range, sigma_trans,
                           sigma_rot);
        if (eval->parsed()) return cmd_eval(g, records_path, success_radius);
        if (render->parsed()) return cmd_render(posterior_path, out_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
