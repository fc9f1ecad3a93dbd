#pragma once

#include <string>
#include <vector>

#include "floorloc/filter.hpp"
#include "floorloc/metrics.hpp"
#include "floorloc/obsmodel.hpp"
#include "floorloc/sim.hpp"

namespace floorloc {

/// Full experiment description, loadable from a key=value config file.
struct ExperimentConfig {
    std::string mode = "track";  // "single" or "track"
    int scenarios = 1;
    ScenarioSpec scenario;
    OracleObservationConfig obs;

    int bins = 36;
    LikelihoodParams like;
    double sigma_trans = 0.05;  // filter motion blur, meters
    double sigma_rot = 0.035;   // filter motion blur, radians

    bool write_maps = true;
    bool write_trajectories = false;
    bool write_posteriors = false;
    bool write_heatmaps = true;
};

ExperimentConfig parse_experiment_config(const std::string& path);

struct ExperimentResult {
    std::vector<LocalizationRecord> records;
    MetricReport report;
};

/// Generate `scenarios` seeded worlds, localize (single-frame or tracking),
/// and write records, report, and optional artifacts under out_dir.
ExperimentResult run_experiment(const ExperimentConfig& config, const std::string& out_dir);

/// Reference tracker fed 72-ray 360-degree noiseless scans rendered from the
/// clean floorplan at the ground-truth poses (a simulated LiDAR), using the
/// same histogram filter. Trajectory observations are ignored.
std::vector<LocalizationRecord> mcl_baseline(const OccupancyGrid& grid,
                                             const Trajectory& trajectory, int rays = 72,
                                             const TrackParams& params = {},
                                             double sigma_trans = 0.05,
                                             double sigma_rot = 0.035, int sequence_id = 0);

}  // namespace floorloc
