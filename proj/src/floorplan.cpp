#include "floorloc/floorplan.hpp"

#include <algorithm>
#include <limits>

namespace floorloc {

Pose2 compose(const Pose2& pose, double dx, double dy, double dphi) {
    const double c = std::cos(pose.phi), s = std::sin(pose.phi);
    return {pose.x + c * dx - s * dy, pose.y + s * dx + c * dy,
            wrap_angle(pose.phi + dphi)};
}

Delta2 relative(const Pose2& from, const Pose2& to) {
    const double c = std::cos(from.phi), s = std::sin(from.phi);
    const double wx = to.x - from.x, wy = to.y - from.y;
    return {c * wx + s * wy, -s * wx + c * wy, wrap_angle(to.phi - from.phi)};
}

void OccupancyGrid::validate() const {
    if (!(resolution > 0.0)) throw InvalidGrid("resolution must be positive");
    if (width < 1 || height < 1) throw InvalidGrid("empty grid");
    if (cells.size() != static_cast<std::size_t>(width) * height)
        throw InvalidGrid("cell buffer size mismatch");
}

void RayScan::validate() const {
    if (depths.empty() || angles.size() != depths.size())
        throw InvalidGrid("ray scan needs matching angles/depths, at least one ray");
    for (double d : depths)
        if (!(d >= 0.0) || !std::isfinite(d))
            throw InvalidGrid("ray depth out of range");
    if (angles.size() >= 2) {
        const double spacing = angles[1] - angles[0];
        for (std::size_t i = 1; i < angles.size(); ++i) {
            const double step = angles[i] - angles[i - 1];
            if (!(step > 0.0) || std::abs(step - spacing) > 1e-12)
                throw InvalidGrid("ray angles not equiangular increasing");
        }
    }
}

std::vector<double> scan_angles(int v, double fov) {
    if (v < 1) throw InvalidRange("need at least one ray");
    if (!(fov > 0.0) || fov > 2.0 * M_PI + 1e-12)
        throw InvalidRange("fov must lie in (0, 2*pi]");
    std::vector<double> angles(static_cast<std::size_t>(v));
    if (v == 1) {
        angles[0] = 0.0;
        return angles;
    }
    // Full-circle scans are periodic: spacing fov/v, no duplicated end ray.
    const bool full_circle = std::abs(fov - 2.0 * M_PI) <= 1e-12;
    const double spacing = full_circle ? fov / v : fov / (v - 1);
    for (int i = 0; i < v; ++i) angles[i] = -0.5 * fov + i * spacing;
    return angles;
}

double raycast(const OccupancyGrid& grid, double ox, double oy, double angle,
               double max_range, bool unknown_blocks) {
    if (!(max_range > 0.0)) throw InvalidRange("max_range must be positive");
    const double gx = (ox - grid.origin_x) / grid.resolution;
    const double gy = (oy - grid.origin_y) / grid.resolution;
    if (gx < 0.0 || gx > grid.width || gy < 0.0 || gy > grid.height)
        throw OutOfBounds("ray origin outside grid");

    const double dx = std::cos(angle), dy = std::sin(angle);

    // Starting cell under the half-open convention: a point exactly on a
    // boundary belongs to the cell in the direction of travel.
    double fx = std::floor(gx), fy = std::floor(gy);
    int cx = static_cast<int>(fx), cy = static_cast<int>(fy);
    if (gx == fx && dx < 0.0) --cx;
    if (gy == fy && dy < 0.0) --cy;
    if (!grid.in_bounds(cx, cy)) throw OutOfBounds("ray origin outside grid");
    if (grid.blocks(cx, cy, unknown_blocks))
        throw InvalidOrigin("ray origin in a blocked cell");

    // Amanatides-Woo traversal in grid units (world distance = t * resolution).
    const double inf = std::numeric_limits<double>::infinity();
    int step_x = 0, step_y = 0;
    double t_max_x = inf, t_max_y = inf, t_delta_x = inf, t_delta_y = inf;
    if (dx > 0.0) {
        step_x = 1;
        t_max_x = (cx + 1 - gx) / dx;
        t_delta_x = 1.0 / dx;
    } else if (dx < 0.0) {
        step_x = -1;
        t_max_x = (cx - gx) / dx;
        t_delta_x = -1.0 / dx;
    }
    if (dy > 0.0) {
        step_y = 1;
        t_max_y = (cy + 1 - gy) / dy;
        t_delta_y = 1.0 / dy;
    } else if (dy < 0.0) {
        step_y = -1;
        t_max_y = (cy - gy) / dy;
        t_delta_y = -1.0 / dy;
    }

    const double range_cells = max_range / grid.resolution;
    while (true) {
        double t;
        if (t_max_x <= t_max_y) {
            t = t_max_x;
            if (t >= range_cells) return max_range;
            cx += step_x;
            t_max_x += t_delta_x;
        } else {
            t = t_max_y;
            if (t >= range_cells) return max_range;
            cy += step_y;
            t_max_y += t_delta_y;
        }
        if (!grid.in_bounds(cx, cy)) return max_range;
        if (grid.blocks(cx, cy, unknown_blocks))
            return std::min(t * grid.resolution, max_range);
    }
}

RayScan render_scan(const OccupancyGrid& grid, const Pose2& pose, int v,
                    double fov, double max_range, bool unknown_blocks) {
    RayScan scan;
    scan.fov = fov;
    scan.angles = scan_angles(v, fov);
    scan.depths.resize(scan.angles.size());
    for (std::size_t i = 0; i < scan.angles.size(); ++i)
        scan.depths[i] = raycast(grid, pose.x, pose.y, pose.phi + scan.angles[i],
                                 max_range, unknown_blocks);
    return scan;
}

std::vector<int> free_poses(const OccupancyGrid& grid) {
    std::vector<int> idx;
    for (int i = 0; i < grid.width * grid.height; ++i)
        if (grid.cells[static_cast<std::size_t>(i)] == Cell::Free) idx.push_back(i);
    return idx;
}

}  // namespace floorloc
