#pragma once

#include <cstdint>
#include <vector>

#include "floorloc/filter.hpp"
#include "floorloc/floorplan.hpp"
#include "floorloc/mining.hpp"
#include "floorloc/obsmodel.hpp"

namespace floorloc {

enum class TrajectoryProfile { ForwardOnly, General };

/// Everything a synthetic scenario needs: floorplan layout, clutter, and
/// trajectory shape. All generators are pure functions of (spec, seed).
struct ScenarioSpec {
    std::uint64_t seed = 1;

    // floorplan
    int width_cells = 64;
    int height_cells = 64;
    double resolution = 0.1;   // m/cell
    int rooms = 3;
    double room_min = 1.6;     // smallest interior side, meters
    double door_width = 0.8;   // meters

    // clutter (obstacles present in observations but not in the floorplan)
    int clutter_count = 0;
    double clutter_min = 0.2;
    double clutter_max = 0.5;

    // trajectory
    TrajectoryProfile profile = TrajectoryProfile::General;
    int steps = 40;
    double step_length = 0.15;     // meters per forward step
    double heading_jitter = 0.08;  // radians, forward-step heading noise
    double turn_sigma = 0.5;       // radians, in-place turn distribution
    double turn_prob = 0.4;        // General profile: chance of an in-place turn
    double heading_quantum = 0.0;  // > 0 snaps headings/turns to this grid

    void validate() const;
};

struct TrajectoryStep {
    Pose2 gt;
    MotionDelta delta;  // exact relative pose from the previous step
    RayScan observation;
};

struct Trajectory {
    std::vector<TrajectoryStep> steps;
};

/// Rectilinear multi-room floorplan with door gaps, connected free space,
/// and (for rooms >= 2) no D4 self-symmetry. Deterministic per seed.
OccupancyGrid gen_floorplan(const ScenarioSpec& spec);

/// Cluttered twin: rectangular obstacles dropped into Free space without
/// disconnecting it. The input grid is untouched.
OccupancyGrid add_clutter(const OccupancyGrid& grid, const ScenarioSpec& spec);

/// Simulate a trajectory on the clean grid with observations rendered from
/// the cluttered twin. Every pose stays in cells free in both grids.
Trajectory gen_trajectory(const OccupancyGrid& clean, const OccupancyGrid& cluttered,
                          const ScenarioSpec& spec, const OracleObservationConfig& obs);

struct RgbdRenderConfig {
    CameraIntrinsics intrinsics{16.0, 16.0, 16.0, 12.0, 32, 24};
    double camera_height = 1.25;
    double wall_height = 2.5;
    double max_depth = 10.0;
    double surface_spacing = 0.02;
};

struct RgbdSequence {
    std::vector<RgbdFrame> frames;
    PointCloud surface;  // wall faces sampled at surface_spacing
    CameraIntrinsics intrinsics;
};

/// Camera-to-world transform of a planar pose: camera z looks along the
/// heading, camera y points down, optical center at camera_height.
RigidPose3 camera_pose_from_pose2(const Pose2& pose, double camera_height);

/// Perfect depth image of the wall extrusion seen from `pose`. Pixels whose
/// rays exit the range or leave the wall slab vertically are invalid (0).
DepthImage render_depth(const OccupancyGrid& grid, const CameraIntrinsics& K,
                        const Pose2& pose, const RgbdRenderConfig& config);

/// Depth frames + camera poses along a simulated trajectory, plus a sampled
/// wall-surface cloud standing in for a scene reconstruction.
RgbdSequence gen_rgbd_sequence(const ScenarioSpec& spec, const RgbdRenderConfig& config = {});

/// Uniform lattice over all wall faces that border free space.
PointCloud sample_wall_surface(const OccupancyGrid& grid, double spacing, double wall_height);

/// True when every Free cell is 4-connected to every other.
bool free_space_connected(const OccupancyGrid& grid);

/// True when the cell raster equals one of its nontrivial rotations/reflections.
bool has_nontrivial_symmetry(const OccupancyGrid& grid);

/// Free cells whose full 8-neighborhood is also free (pose candidates with
/// wall clearance), as row-major linear indices.
std::vector<int> clear_free_cells(const OccupancyGrid& grid);

}  // namespace floorloc
