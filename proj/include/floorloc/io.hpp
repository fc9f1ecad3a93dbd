#pragma once

#include <map>
#include <string>
#include <vector>

#include "floorloc/contrastive.hpp"
#include "floorloc/filter.hpp"
#include "floorloc/floorplan.hpp"
#include "floorloc/geom.hpp"
#include "floorloc/metrics.hpp"
#include "floorloc/mining.hpp"
#include "floorloc/obsmodel.hpp"
#include "floorloc/sim.hpp"

namespace floorloc {

// ---- plain-text key=value files ------------------------------------------

using KeyValueMap = std::map<std::string, std::string>;

KeyValueMap load_keyvalue(const std::string& path);
void save_keyvalue(const std::string& path, const KeyValueMap& kv);

/// fx, fy, cx, cy, width, height.
CameraIntrinsics load_intrinsics(const std::string& path);
void save_intrinsics(const std::string& path, const CameraIntrinsics& K);

// ---- poses: 4 lines per frame, row-major 4x4 camera-to-world --------------

/// Rotation blocks must be orthonormal within 1e-6, else loading fails.
std::vector<RigidPose3> load_poses(const std::string& path);
void save_poses(const std::string& path, const std::vector<RigidPose3>& poses);

// ---- depth images: 16-bit grayscale PNG, millimeters, 0 = invalid ---------

DepthImage load_depth_png(const std::string& path);
void save_depth_png(const std::string& path, const DepthImage& depth);

// ---- floorplans: 8-bit PGM/PNG (value < 128 Occupied, >= 128 Free) --------
// Image row 0 is the top of the map (highest world y). The optional mask
// marks Unknown cells with values >= 128. Metadata sidecar keys:
// resolution_m, origin_x_m, origin_y_m.

OccupancyGrid load_floorplan(const std::string& raster_path, const std::string& meta_path,
                             const std::string& mask_path = "");
void save_floorplan(const std::string& raster_path, const std::string& meta_path,
                    const OccupancyGrid& grid);

// ---- CSV ------------------------------------------------------------------

RayScan load_scan_csv(const std::string& path);           // angle_rad,depth_m
void save_scan_csv(const std::string& path, const RayScan& scan);

void save_correspondences_csv(const std::string& path, const PixelCorrespondenceSet& set);
void save_pairs_csv(const std::string& path, const std::vector<MinedPair>& pairs);

MatchSet load_matches_csv(const std::string& path);        // i,j
void save_matches_csv(const std::string& path, const MatchSet& matches);

std::vector<LocalizationRecord> load_records_csv(const std::string& path);
void save_records_csv(const std::string& path, std::span<const LocalizationRecord> records);

// ---- point clouds: XYZ text, meters, one point per line --------------------

PointCloud load_xyz(const std::string& path);
void save_xyz(const std::string& path, const PointCloud& cloud);

// ---- feature files: "FEAT", u32 N, u32 F, N*F float32, little-endian -------

FeatureMap load_features(const std::string& path);
void save_features(const std::string& path, const FeatureMap& features);

// ---- depth distributions: "PDEP", u32 V, u32 K, grid f32, probs f32 --------
// Rows are renormalized on load (the file stores float32).

DepthDistribution load_distribution(const std::string& path);
void save_distribution(const std::string& path, const DepthDistribution& dist);

// ---- posterior dumps: "POST", u32 H, u32 W, u32 O, H*W*O float32 ------------

struct PosteriorDump {
    int height = 0;
    int width = 0;
    int bins = 0;
    std::vector<float> probs;  // [H][W][O] row-major
};

PosteriorDump load_posterior(const std::string& path);
void save_posterior(const std::string& path, const PosteriorGrid& post);

/// 8-bit PGM heatmap of max-over-orientations, scaled to the peak.
void save_heatmap_pgm(const std::string& path, const PosteriorGrid& post);
void save_heatmap_pgm(const std::string& path, const PosteriorDump& dump);

// ---- trajectories: step,x,y,phi,dx,dy,dphi,scan ----------------------------
// Scan files are stored next to the CSV, one per step.

void save_trajectory(const std::string& csv_path, const Trajectory& traj);
Trajectory load_trajectory(const std::string& csv_path);

}  // namespace floorloc
