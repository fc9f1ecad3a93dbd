#include "floorloc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "floorloc/rng.hpp"

namespace floorloc {

void ScenarioSpec::validate() const {
    if (width_cells < 8 || height_cells < 8) throw InfeasibleSpec("grid too small");
    if (!(resolution > 0.0)) throw InfeasibleSpec("resolution must be positive");
    if (rooms < 1) throw InfeasibleSpec("need at least one room");
    if (!(room_min > 0.0) || !(door_width > 0.0)) throw InfeasibleSpec("bad room/door size");
    if (clutter_count < 0 || !(clutter_min > 0.0) || clutter_max < clutter_min)
        throw InfeasibleSpec("bad clutter spec");
    if (steps < 1 || !(step_length > 0.0)) throw InfeasibleSpec("bad trajectory spec");
}

bool free_space_connected(const OccupancyGrid& grid) {
    int start = -1, free_count = 0;
    for (int i = 0; i < grid.width * grid.height; ++i)
        if (grid.cells[static_cast<std::size_t>(i)] == Cell::Free) {
            if (start < 0) start = i;
            ++free_count;
        }
    if (free_count == 0) return false;
    std::vector<std::uint8_t> seen(grid.cells.size(), 0);
    std::deque<int> queue{start};
    seen[static_cast<std::size_t>(start)] = 1;
    int reached = 0;
    while (!queue.empty()) {
        const int i = queue.front();
        queue.pop_front();
        ++reached;
        const int cx = i % grid.width, cy = i / grid.width;
        const int nbr[4][2] = {{cx + 1, cy}, {cx - 1, cy}, {cx, cy + 1}, {cx, cy - 1}};
        for (auto [nx, ny] : nbr) {
            if (!grid.in_bounds(nx, ny)) continue;
            const int j = grid.cell_index(nx, ny);
            if (seen[static_cast<std::size_t>(j)] ||
                grid.cells[static_cast<std::size_t>(j)] != Cell::Free)
                continue;
            seen[static_cast<std::size_t>(j)] = 1;
            queue.push_back(j);
        }
    }
    return reached == free_count;
}

bool has_nontrivial_symmetry(const OccupancyGrid& grid) {
    const int w = grid.width, h = grid.height;
    auto equal_under = [&](auto&& map) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                auto [mx, my] = map(x, y);
                if (grid.at(x, y) != grid.at(mx, my)) return false;
            }
        return true;
    };
    using XY = std::pair<int, int>;
    if (equal_under([&](int x, int y) -> XY { return {w - 1 - x, y}; })) return true;
    if (equal_under([&](int x, int y) -> XY { return {x, h - 1 - y}; })) return true;
    if (equal_under([&](int x, int y) -> XY { return {w - 1 - x, h - 1 - y}; })) return true;
    if (w == h) {
        if (equal_under([&](int x, int y) -> XY { return {y, x}; })) return true;
        if (equal_under([&](int x, int y) -> XY { return {h - 1 - y, w - 1 - x}; })) return true;
        if (equal_under([&](int x, int y) -> XY { return {y, w - 1 - x}; })) return true;
        if (equal_under([&](int x, int y) -> XY { return {h - 1 - y, x}; })) return true;
    }
    return false;
}

std::vector<int> clear_free_cells(const OccupancyGrid& grid) {
    std::vector<int> out;
    for (int cy = 1; cy + 1 < grid.height; ++cy)
        for (int cx = 1; cx + 1 < grid.width; ++cx) {
            bool clear = true;
            for (int dy = -1; dy <= 1 && clear; ++dy)
                for (int dx = -1; dx <= 1 && clear; ++dx)
                    if (grid.at(cx + dx, cy + dy) != Cell::Free) clear = false;
            if (clear) out.push_back(grid.cell_index(cx, cy));
        }
    return out;
}

namespace {

constexpr std::uint64_t kClutterSalt = 0x9E3779B97F4A7C15ull;
constexpr std::uint64_t kTrajectorySalt = 0xD1B54A32D192ED03ull;
constexpr std::uint64_t kObservationSalt = 0x2545F4914F6CDD1Dull;

struct Region {  // interior cells, inclusive bounds
    int x0, y0, x1, y1;
    int width() const { return x1 - x0 + 1; }
    int height() const { return y1 - y0 + 1; }
};

OccupancyGrid build_floorplan_once(const ScenarioSpec& spec, std::uint64_t seed) {
    OccupancyGrid grid(spec.width_cells, spec.height_cells, spec.resolution);
    // boundary walls
    for (int x = 0; x < grid.width; ++x) {
        grid.at(x, 0) = Cell::Occupied;
        grid.at(x, grid.height - 1) = Cell::Occupied;
    }
    for (int y = 0; y < grid.height; ++y) {
        grid.at(0, y) = Cell::Occupied;
        grid.at(grid.width - 1, y) = Cell::Occupied;
    }

    const int min_cells = std::max(2, static_cast<int>(std::ceil(spec.room_min / spec.resolution)));
    const int door_cells = std::max(1, static_cast<int>(std::lround(spec.door_width / spec.resolution)));

    Rng rng(seed);
    std::vector<Region> regions{{1, 1, grid.width - 2, grid.height - 2}};
    while (static_cast<int>(regions.size()) < spec.rooms) {
        // largest splittable region first
        int pick = -1;
        for (std::size_t r = 0; r < regions.size(); ++r) {
            const Region& reg = regions[r];
            if (reg.width() < 2 * min_cells + 1 && reg.height() < 2 * min_cells + 1) continue;
            if (pick < 0 || reg.width() * reg.height() >
                                regions[static_cast<std::size_t>(pick)].width() *
                                    regions[static_cast<std::size_t>(pick)].height())
                pick = static_cast<int>(r);
        }
        if (pick < 0) throw InfeasibleSpec("rooms do not fit the grid");

        Region reg = regions[static_cast<std::size_t>(pick)];
        const bool can_v = reg.width() >= 2 * min_cells + 1;
        const bool can_h = reg.height() >= 2 * min_cells + 1;
        bool vertical;
        if (can_v && can_h)
            vertical = reg.width() == reg.height() ? rng.uniform() < 0.5
                                                   : reg.width() > reg.height();
        else
            vertical = can_v;

        if (vertical) {
            const int c = static_cast<int>(
                rng.uniform_int(reg.x0 + min_cells, reg.x1 - min_cells));
            const int dlen = std::min(door_cells, reg.height());
            const int d0 = static_cast<int>(rng.uniform_int(reg.y0, reg.y1 - dlen + 1));
            for (int y = reg.y0; y <= reg.y1; ++y)
                if (y < d0 || y >= d0 + dlen) grid.at(c, y) = Cell::Occupied;
            regions[static_cast<std::size_t>(pick)] = {reg.x0, reg.y0, c - 1, reg.y1};
            regions.push_back({c + 1, reg.y0, reg.x1, reg.y1});
        } else {
            const int c = static_cast<int>(
                rng.uniform_int(reg.y0 + min_cells, reg.y1 - min_cells));
            const int dlen = std::min(door_cells, reg.width());
            const int d0 = static_cast<int>(rng.uniform_int(reg.x0, reg.x1 - dlen + 1));
            for (int x = reg.x0; x <= reg.x1; ++x)
                if (x < d0 || x >= d0 + dlen) grid.at(x, c) = Cell::Occupied;
            regions[static_cast<std::size_t>(pick)] = {reg.x0, reg.y0, reg.x1, c - 1};
            regions.push_back({reg.x0, c + 1, reg.x1, reg.y1});
        }
    }
    return grid;
}

}  // namespace

OccupancyGrid gen_floorplan(const ScenarioSpec& spec) {
    spec.validate();
    for (int attempt = 0; attempt < 64; ++attempt) {
        const std::uint64_t seed = spec.seed + 0x100000001B3ull * static_cast<std::uint64_t>(attempt);
        OccupancyGrid grid = build_floorplan_once(spec, seed);
        if (!free_space_connected(grid)) continue;  // a later wall can dead-end a door
        if (spec.rooms >= 2 && has_nontrivial_symmetry(grid)) continue;
        return grid;
    }
    throw InfeasibleSpec("could not generate a connected asymmetric floorplan");
}

OccupancyGrid add_clutter(const OccupancyGrid& grid, const ScenarioSpec& spec) {
    OccupancyGrid out = grid;
    if (spec.clutter_count == 0) return out;
    Rng rng(spec.seed ^ kClutterSalt);
    for (int n = 0; n < spec.clutter_count; ++n) {
        bool placed = false;
        for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
            const double wm = rng.uniform(spec.clutter_min, spec.clutter_max);
            const double hm = rng.uniform(spec.clutter_min, spec.clutter_max);
            const int cw = std::max(1, static_cast<int>(std::lround(wm / grid.resolution)));
            const int ch = std::max(1, static_cast<int>(std::lround(hm / grid.resolution)));
            if (cw >= grid.width - 2 || ch >= grid.height - 2) continue;
            const int x0 = static_cast<int>(rng.uniform_int(1, grid.width - 1 - cw));
            const int y0 = static_cast<int>(rng.uniform_int(1, grid.height - 1 - ch));
            bool fits = true;
            for (int y = y0; y < y0 + ch && fits; ++y)
                for (int x = x0; x < x0 + cw && fits; ++x)
                    if (out.at(x, y) != Cell::Free) fits = false;
            if (!fits) continue;
            for (int y = y0; y < y0 + ch; ++y)
                for (int x = x0; x < x0 + cw; ++x) out.at(x, y) = Cell::Occupied;
            if (free_space_connected(out)) {
                placed = true;
            } else {  // undo and resample
                for (int y = y0; y < y0 + ch; ++y)
                    for (int x = x0; x < x0 + cw; ++x) out.at(x, y) = Cell::Free;
            }
        }
        if (!placed) throw PlacementFailed("could not place clutter obstacle");
    }
    return out;
}

namespace {

bool pose_cell_free(const OccupancyGrid& clean, const OccupancyGrid& cluttered, double x,
                    double y) {
    const auto [cx, cy] = clean.world_to_cell(x, y);
    return clean.in_bounds(cx, cy) && clean.at(cx, cy) == Cell::Free &&
           cluttered.at(cx, cy) == Cell::Free;
}

bool segment_free(const OccupancyGrid& clean, const OccupancyGrid& cluttered,
                  const Pose2& from, double x, double y) {
    // check the target and the midpoint (steps can cross a cell boundary)
    const double mx = 0.5 * (from.x + x), my = 0.5 * (from.y + y);
    return pose_cell_free(clean, cluttered, x, y) && pose_cell_free(clean, cluttered, mx, my);
}

}  // namespace

Trajectory gen_trajectory(const OccupancyGrid& clean, const OccupancyGrid& cluttered,
                          const ScenarioSpec& spec, const OracleObservationConfig& obs) {
    spec.validate();
    Rng rng(spec.seed ^ kTrajectorySalt);
    OracleObservationSource source(cluttered, obs, spec.seed ^ kObservationSalt);

    std::vector<int> candidates;
    for (int idx : clear_free_cells(clean)) {
        const int cx = idx % clean.width, cy = idx / clean.width;
        if (cluttered.at(cx, cy) == Cell::Free) candidates.push_back(idx);
    }
    if (candidates.empty()) throw TrajectoryStuck("no clear start cell");
    const double q = spec.heading_quantum;
    auto snap = [q](double angle) {
        return q > 0.0 ? wrap_angle(std::round(angle / q) * q) : wrap_angle(angle);
    };
    const int start = candidates[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(candidates.size()) - 1))];
    Pose2 pose{clean.cell_center_x(start % clean.width),
               clean.cell_center_y(start / clean.width), snap(rng.uniform(-M_PI, M_PI))};

    Trajectory traj;
    traj.steps.push_back({pose, MotionDelta{}, source.observe(pose)});

    for (int t = 1; t < spec.steps; ++t) {
        Pose2 next = pose;
        const bool turn = spec.profile == TrajectoryProfile::General &&
                          rng.uniform() < spec.turn_prob;
        if (turn) {
            double dphi = rng.normal(0.0, spec.turn_sigma);
            if (q > 0.0) {
                dphi = std::round(dphi / q) * q;
                if (dphi == 0.0) dphi = rng.uniform() < 0.5 ? q : -q;
            }
            next.phi = wrap_angle(pose.phi + dphi);
        } else {
            bool moved = false;
            for (int attempt = 0; attempt < 60 && !moved; ++attempt) {
                // after a few jittered tries, search headings broadly
                const double heading =
                    attempt < 10 ? snap(pose.phi + rng.normal(0.0, spec.heading_jitter))
                                 : snap(rng.uniform(-M_PI, M_PI));
                const double nx = pose.x + spec.step_length * std::cos(heading);
                const double ny = pose.y + spec.step_length * std::sin(heading);
                if (!segment_free(clean, cluttered, pose, nx, ny)) continue;
                next = {nx, ny, heading};
                moved = true;
            }
            if (!moved) throw TrajectoryStuck("no legal forward move");
        }
        const Delta2 d = relative(pose, next);
        traj.steps.push_back({next, MotionDelta{d.dx, d.dy, d.dphi, 0.0, 0.0},
                              source.observe(next)});
        pose = next;
    }
    return traj;
}

RigidPose3 camera_pose_from_pose2(const Pose2& pose, double camera_height) {
    // camera x -> right, y -> down, z -> heading
    const double c = std::cos(pose.phi), s = std::sin(pose.phi);
    RigidPose3 p;
    p.rotation << s, 0.0, c,
                 -c, 0.0, s,
                  0.0, -1.0, 0.0;
    p.translation = Vec3{pose.x, pose.y, camera_height};
    return p;
}

DepthImage render_depth(const OccupancyGrid& grid, const CameraIntrinsics& K,
                        const Pose2& pose, const RgbdRenderConfig& config) {
    K.validate();
    DepthImage depth(K.width, K.height, 0.0);
    const RigidPose3 cam = camera_pose_from_pose2(pose, config.camera_height);
    for (int v = 0; v < K.height; ++v) {
        for (int u = 0; u < K.width; ++u) {
            const Vec3 dir_cam{(u - K.cx) / K.fx, (v - K.cy) / K.fy, 1.0};
            const Vec3 w = cam.rotation * dir_cam;
            const double hn = std::hypot(w.x(), w.y());
            if (hn < 1e-12) continue;  // straight up/down
            const double plane_range = config.max_depth * hn;
            const double s2d = raycast(grid, pose.x, pose.y, std::atan2(w.y(), w.x()),
                                       plane_range);
            if (s2d >= plane_range) continue;  // no wall within range
            const double t = s2d / hn;  // camera-frame depth (dir_cam.z == 1)
            const double z_hit = config.camera_height + t * w.z();
            if (z_hit < 0.0 || z_hit > config.wall_height) continue;  // floor/ceiling
            depth.at(u, v) = t;
        }
    }
    return depth;
}

PointCloud sample_wall_surface(const OccupancyGrid& grid, double spacing, double wall_height) {
    PointCloud cloud;
    const double res = grid.resolution;
    const int n_side = std::max(1, static_cast<int>(std::floor(res / spacing)));
    const int n_up = std::max(1, static_cast<int>(std::floor(wall_height / spacing)));
    auto face_line = [&](double x, double y, double tx, double ty) {
        for (int i = 0; i < n_side; ++i) {
            const double s = (i + 0.5) * spacing;
            for (int k = 0; k < n_up; ++k)
                cloud.points.push_back(
                    Vec3{x + tx * s, y + ty * s, (k + 0.5) * spacing});
        }
    };
    for (int cy = 0; cy < grid.height; ++cy)
        for (int cx = 0; cx < grid.width; ++cx) {
            if (grid.at(cx, cy) != Cell::Occupied) continue;
            const double x0 = grid.origin_x + cx * res, y0 = grid.origin_y + cy * res;
            if (grid.in_bounds(cx - 1, cy) && grid.at(cx - 1, cy) == Cell::Free)
                face_line(x0, y0, 0.0, 1.0);  // west face
            if (grid.in_bounds(cx + 1, cy) && grid.at(cx + 1, cy) == Cell::Free)
                face_line(x0 + res, y0, 0.0, 1.0);  // east face
            if (grid.in_bounds(cx, cy - 1) && grid.at(cx, cy - 1) == Cell::Free)
                face_line(x0, y0, 1.0, 0.0);  // south face
            if (grid.in_bounds(cx, cy + 1) && grid.at(cx, cy + 1) == Cell::Free)
                face_line(x0, y0 + res, 1.0, 0.0);  // north face
        }
    return cloud;
}

RgbdSequence gen_rgbd_sequence(const ScenarioSpec& spec, const RgbdRenderConfig& config) {
    const OccupancyGrid grid = gen_floorplan(spec);
    OracleObservationConfig obs;  // scans unused here, keep them cheap
    obs.rays = 1;
    obs.max_range = config.max_depth;
    const Trajectory traj = gen_trajectory(grid, grid, spec, obs);

    RgbdSequence seq;
    seq.intrinsics = config.intrinsics;
    seq.frames.reserve(traj.steps.size());
    for (const TrajectoryStep& step : traj.steps)
        seq.frames.push_back({render_depth(grid, config.intrinsics, step.gt, config),
                              camera_pose_from_pose2(step.gt, config.camera_height)});
    seq.surface = sample_wall_surface(grid, config.surface_spacing, config.wall_height);
    return seq;
}

}  // namespace floorloc
