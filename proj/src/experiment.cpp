#include "floorloc/experiment.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "floorloc/io.hpp"

namespace floorloc {

namespace {

double get_num(const KeyValueMap& kv, const std::string& key, double fallback) {
    const auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    return std::stod(it->second);
}

std::string get_str(const KeyValueMap& kv, const std::string& key, const std::string& fallback) {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& path) {
    const KeyValueMap kv = load_keyvalue(path);
    ExperimentConfig c;
    c.mode = get_str(kv, "mode", c.mode);
    if (c.mode != "single" && c.mode != "track")
        throw ParseError("mode must be 'single' or 'track': " + path);
    c.scenarios = static_cast<int>(get_num(kv, "scenarios", c.scenarios));

    ScenarioSpec& s = c.scenario;
    s.seed = static_cast<std::uint64_t>(get_num(kv, "seed", static_cast<double>(s.seed)));
    s.width_cells = static_cast<int>(get_num(kv, "width_cells", s.width_cells));
    s.height_cells = static_cast<int>(get_num(kv, "height_cells", s.height_cells));
    s.resolution = get_num(kv, "resolution_m", s.resolution);
    s.rooms = static_cast<int>(get_num(kv, "rooms", s.rooms));
    s.room_min = get_num(kv, "room_min_m", s.room_min);
    s.door_width = get_num(kv, "door_width_m", s.door_width);
    s.clutter_count = static_cast<int>(get_num(kv, "clutter_count", s.clutter_count));
    s.clutter_min = get_num(kv, "clutter_min_m", s.clutter_min);
    s.clutter_max = get_num(kv, "clutter_max_m", s.clutter_max);
    const std::string profile = get_str(kv, "profile", "general");
    if (profile == "forward")
        s.profile = TrajectoryProfile::ForwardOnly;
    else if (profile == "general")
        s.profile = TrajectoryProfile::General;
    else
        throw ParseError("profile must be 'forward' or 'general': " + path);
    s.steps = static_cast<int>(get_num(kv, "steps", s.steps));
    s.step_length = get_num(kv, "step_length_m", s.step_length);
    s.heading_jitter = get_num(kv, "heading_jitter_rad", s.heading_jitter);
    s.turn_sigma = get_num(kv, "turn_sigma_rad", s.turn_sigma);
    s.turn_prob = get_num(kv, "turn_prob", s.turn_prob);
    s.heading_quantum = get_num(kv, "heading_quantum_rad", s.heading_quantum);

    c.obs.rays = static_cast<int>(get_num(kv, "rays", c.obs.rays));
    c.obs.fov = get_num(kv, "fov_deg", c.obs.fov * 180.0 / M_PI) * M_PI / 180.0;
    c.obs.sigma_m = get_num(kv, "sigma_m", c.obs.sigma_m);
    c.obs.dropout = get_num(kv, "dropout", c.obs.dropout);
    c.obs.max_range = get_num(kv, "max_range_m", c.obs.max_range);

    c.bins = static_cast<int>(get_num(kv, "orientation_bins", c.bins));
    c.like.lambda_depth = get_num(kv, "lambda_depth", c.like.lambda_depth);
    c.like.lambda_shape = get_num(kv, "lambda_shape", c.like.lambda_shape);
    c.sigma_trans = get_num(kv, "sigma_trans_m", c.sigma_trans);
    c.sigma_rot = get_num(kv, "sigma_rot_rad", c.sigma_rot);

    c.write_maps = get_num(kv, "write_maps", c.write_maps ? 1 : 0) != 0;
    c.write_trajectories = get_num(kv, "write_trajectories", c.write_trajectories ? 1 : 0) != 0;
    c.write_posteriors = get_num(kv, "write_posteriors", c.write_posteriors ? 1 : 0) != 0;
    c.write_heatmaps = get_num(kv, "write_heatmaps", c.write_heatmaps ? 1 : 0) != 0;
    return c;
}

namespace {

void append_step_curve(const std::string& path,
                       const std::vector<LocalizationRecord>& records,
                       const std::vector<SrThreshold>& thresholds) {
    std::map<int, std::vector<LocalizationRecord>> by_step;
    for (const auto& r : records) by_step[r.step].push_back(r);
    std::ofstream out(path);
    out << "step";
    for (const auto& t : thresholds) {
        out << ",sr_" << t.radius << "m";
        if (t.max_angle) out << "_ang";
    }
    out << "\n";
    for (const auto& [step, rs] : by_step) {
        out << step;
        for (const auto& t : thresholds)
            out << "," << success_rate(rs, t.radius, t.max_angle);
        out << "\n";
    }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);

    std::vector<LocalizationRecord> records;
    for (int sc = 0; sc < config.scenarios; ++sc) {
        ScenarioSpec spec = config.scenario;
        spec.seed = config.scenario.seed + static_cast<std::uint64_t>(sc);
        const OccupancyGrid clean = gen_floorplan(spec);
        const OccupancyGrid cluttered = add_clutter(clean, spec);
        const Trajectory traj = gen_trajectory(clean, cluttered, spec, config.obs);

        char tag[32];
        std::snprintf(tag, sizeof(tag), "scenario_%03d", sc);
        if (config.write_maps)
            save_floorplan((dir / (std::string(tag) + "_map.pgm")).string(),
                           (dir / (std::string(tag) + "_map.txt")).string(), clean);
        if (config.write_trajectories) {
            fs::create_directories(dir / tag);
            save_trajectory((dir / tag / "trajectory.csv").string(), traj);
        }

        if (config.mode == "single") {
            const auto result = single_frame_localize(clean, traj.steps[0].observation,
                                                      config.bins, config.like,
                                                      config.obs.max_range);
            records.push_back({sc, 0, result.best, traj.steps[0].gt});
            if (config.write_posteriors)
                save_posterior((dir / (std::string(tag) + "_scores.post")).string(),
                               result.scores);
            if (config.write_heatmaps)
                save_heatmap_pgm((dir / (std::string(tag) + "_scores.pgm")).string(),
                                 result.scores);
        } else {
            std::vector<RayScan> obs;
            std::vector<MotionDelta> deltas;
            for (const TrajectoryStep& step : traj.steps) {
                obs.push_back(step.observation);
                MotionDelta d = step.delta;
                d.sigma_trans = config.sigma_trans;
                d.sigma_rot = config.sigma_rot;
                deltas.push_back(d);
            }
            TrackParams params;
            params.bins = config.bins;
            params.like = config.like;
            params.max_range = config.obs.max_range;
            const TrackResult result = track(clean, obs, deltas, params);
            for (std::size_t t = 0; t < result.steps.size(); ++t)
                records.push_back({sc, static_cast<int>(t), result.steps[t].estimate,
                                   traj.steps[t].gt});
            if (config.write_posteriors)
                save_posterior((dir / (std::string(tag) + "_final.post")).string(),
                               result.posterior);
            if (config.write_heatmaps)
                save_heatmap_pgm((dir / (std::string(tag) + "_final.pgm")).string(),
                                 result.posterior);
        }
    }

    ExperimentResult result;
    result.records = std::move(records);
    result.report = make_report(result.records);
    save_records_csv((dir / "records.csv").string(), result.records);
    append_step_curve((dir / "curve.csv").string(), result.records,
                      result.report.thresholds);
    std::ofstream(dir / "report.txt") << result.report.to_text();
    std::ofstream(dir / "report.csv") << result.report.to_csv();
    return result;
}

std::vector<LocalizationRecord> mcl_baseline(const OccupancyGrid& grid,
                                             const Trajectory& trajectory, int rays,
                                             const TrackParams& params, double sigma_trans,
                                             double sigma_rot, int sequence_id) {
    std::vector<RayScan> obs;
    std::vector<MotionDelta> deltas;
    obs.reserve(trajectory.steps.size());
    for (const TrajectoryStep& step : trajectory.steps) {
        obs.push_back(render_scan(grid, step.gt, rays, 2.0 * M_PI, params.max_range,
                                  params.unknown_blocks));
        MotionDelta d = step.delta;
        d.sigma_trans = sigma_trans;
        d.sigma_rot = sigma_rot;
        deltas.push_back(d);
    }
    const TrackResult result = track(grid, obs, deltas, params);
    std::vector<LocalizationRecord> records;
    for (std::size_t t = 0; t < result.steps.size(); ++t)
        records.push_back({sequence_id, static_cast<int>(t), result.steps[t].estimate,
                           trajectory.steps[t].gt});
    return records;
}

}  // namespace floorloc
