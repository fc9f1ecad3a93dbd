#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "floorloc/floorplan.hpp"
#include "floorloc/rng.hpp"
#include "testutil.hpp"

using namespace floorloc;

TEST_CASE("wrap_angle lands in [-pi, pi)") {
    CHECK(wrap_angle(0.0) == 0.0);
    CHECK(wrap_angle(M_PI) == doctest::Approx(-M_PI));
    CHECK(wrap_angle(-M_PI) == doctest::Approx(-M_PI));
    CHECK(wrap_angle(3.0 * M_PI) == doctest::Approx(-M_PI));
    CHECK(wrap_angle(2.0 * M_PI + 0.25) == doctest::Approx(0.25));
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        const double w = wrap_angle(rng.uniform(-50.0, 50.0));
        CHECK(w >= -M_PI);
        CHECK(w < M_PI);
    }
}

TEST_CASE("compose and relative invert each other") {
    Rng rng(17);
    for (int i = 0; i < 500; ++i) {
        const Pose2 a{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-M_PI, M_PI)};
        const Pose2 b{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-M_PI, M_PI)};
        const Delta2 d = relative(a, b);
        const Pose2 c = compose(a, d.dx, d.dy, d.dphi);
        CHECK(std::abs(c.x - b.x) < 1e-12);
        CHECK(std::abs(c.y - b.y) < 1e-12);
        CHECK(std::abs(wrap_angle(c.phi - b.phi)) < 1e-12);
    }
}

TEST_CASE("raycast in an all-free grid returns max_range") {
    OccupancyGrid grid(20, 20, 0.1);
    for (double angle : {0.0, 0.7, 2.1, -2.9})
        CHECK(raycast(grid, 1.0, 1.0, angle, 5.0) == 5.0);
}

TEST_CASE("raycast hits a wall column at the right distance") {
    // occupied column covering world x in [1.0, 1.1)
    OccupancyGrid grid(40, 40, 0.1, Cell::Free, -2.0, -2.0);
    for (int cy = 0; cy < 40; ++cy) grid.at(30, cy) = Cell::Occupied;
    const double r = raycast(grid, 0.0, 0.0, 0.0, 10.0);
    CHECK(std::abs(r - 1.0) <= 0.05);  // within half a cell
    CHECK(std::abs(r - testutil::raycast_crossing_oracle(grid, 0.0, 0.0, 0.0, 10.0)) <
          1e-12);
    // the wall sits behind this ray
    CHECK(raycast(grid, 0.0, 0.0, M_PI, 10.0) == 10.0);
}

TEST_CASE("raycast error cases") {
    OccupancyGrid grid = testutil::box_room(10, 0.1);
    CHECK_THROWS_AS(raycast(grid, 0.05, 0.05, 0.0, 5.0), InvalidOrigin);  // in a wall
    CHECK_THROWS_AS(raycast(grid, -1.0, 0.5, 0.0, 5.0), OutOfBounds);
    CHECK_THROWS_AS(raycast(grid, 0.5, 0.5, 0.0, 0.0), InvalidRange);
}

TEST_CASE("unknown cells block by default and can be opened") {
    OccupancyGrid grid(20, 20, 0.1);
    for (int cy = 0; cy < 20; ++cy) grid.at(10, cy) = Cell::Unknown;
    CHECK(raycast(grid, 0.05, 0.55, 0.0, 5.0) < 5.0);
    CHECK(raycast(grid, 0.05, 0.55, 0.0, 5.0, false) == 5.0);
}

TEST_CASE("boundary start follows the direction of travel") {
    // wall at cell x = 5 (world [0.5, 0.6)); origin exactly on the x = 0.5 line
    OccupancyGrid grid(10, 10, 0.1);
    for (int cy = 0; cy < 10; ++cy) grid.at(5, cy) = Cell::Occupied;
    // moving -x: origin belongs to cell 4, free, ray travels away
    CHECK(raycast(grid, 0.5, 0.35, M_PI, 2.0) == 2.0);
    // moving +x: origin belongs to cell 5, the wall itself
    CHECK_THROWS_AS(raycast(grid, 0.5, 0.35, 0.0, 2.0), InvalidOrigin);
}

TEST_CASE("property: raycast equals the crossing oracle on random worlds") {
    Rng rng(314);
    for (int world = 0; world < 30; ++world) {
        OccupancyGrid grid(32, 32, 0.1, Cell::Free, rng.uniform(-2, 2), rng.uniform(-2, 2));
        for (int n = 0; n < 120; ++n) {
            const int cx = static_cast<int>(rng.uniform_int(0, 31));
            const int cy = static_cast<int>(rng.uniform_int(0, 31));
            grid.at(cx, cy) = rng.uniform() < 0.8 ? Cell::Occupied : Cell::Unknown;
        }
        for (int n = 0; n < 60; ++n) {
            const double x = grid.origin_x + rng.uniform(0.05, 3.15);
            const double y = grid.origin_y + rng.uniform(0.05, 3.15);
            const auto [cx, cy] = grid.world_to_cell(x, y);
            if (grid.blocks(cx, cy, true)) continue;
            const double angle = rng.uniform(-M_PI, M_PI);
            const double fast = raycast(grid, x, y, angle, 6.0);
            const double oracle = testutil::raycast_crossing_oracle(grid, x, y, angle, 6.0);
            CHECK(std::abs(fast - oracle) < 1e-9);
        }
    }
}

TEST_CASE("property: hit consistency") {
    Rng rng(2718);
    OccupancyGrid grid(32, 32, 0.05);
    for (int n = 0; n < 90; ++n)
        grid.at(static_cast<int>(rng.uniform_int(0, 31)),
                static_cast<int>(rng.uniform_int(0, 31))) = Cell::Occupied;
    int hits = 0;
    for (int n = 0; n < 500; ++n) {
        const double x = rng.uniform(0.01, 1.59), y = rng.uniform(0.01, 1.59);
        const auto [cx, cy] = grid.world_to_cell(x, y);
        if (grid.blocks(cx, cy, true)) continue;
        const double angle = rng.uniform(-M_PI, M_PI);
        const double r = raycast(grid, x, y, angle, 4.0);
        if (r >= 4.0) continue;
        ++hits;
        const double px = x + r * std::cos(angle) * (1.0 + 1e-9);
        const double py = y + r * std::sin(angle) * (1.0 + 1e-9);
        const auto [hx, hy] = grid.world_to_cell(px, py);
        CHECK(grid.blocks(hx, hy, true));
    }
    CHECK(hits > 100);
}

TEST_CASE("property: occlusion monotonicity") {
    Rng rng(55);
    OccupancyGrid base(24, 24, 0.1);
    for (int n = 0; n < 30; ++n)
        base.at(static_cast<int>(rng.uniform_int(0, 23)),
                static_cast<int>(rng.uniform_int(0, 23))) = Cell::Occupied;
    OccupancyGrid more = base;
    for (int n = 0; n < 30; ++n)
        more.at(static_cast<int>(rng.uniform_int(0, 23)),
                static_cast<int>(rng.uniform_int(0, 23))) = Cell::Occupied;
    for (int n = 0; n < 400; ++n) {
        const double x = rng.uniform(0.01, 2.39), y = rng.uniform(0.01, 2.39);
        const auto [cx, cy] = more.world_to_cell(x, y);
        if (more.blocks(cx, cy, true)) continue;
        const double angle = rng.uniform(-M_PI, M_PI);
        CHECK(raycast(more, x, y, angle, 5.0) <= raycast(base, x, y, angle, 5.0));
    }
}

TEST_CASE("scan angle conventions") {
    const auto one = scan_angles(1, 0.4);
    CHECK(one == std::vector<double>{0.0});

    const auto fan = scan_angles(4, 108.0 * M_PI / 180.0);
    CHECK(fan.front() == doctest::Approx(-54.0 * M_PI / 180.0));
    CHECK(fan.back() == doctest::Approx(54.0 * M_PI / 180.0));
    CHECK(fan[1] - fan[0] == doctest::Approx(36.0 * M_PI / 180.0));

    // full circle uses periodic spacing: 72 rays sit exactly 5 degrees apart
    const auto circle = scan_angles(72, 2.0 * M_PI);
    CHECK(circle[1] - circle[0] == doctest::Approx(5.0 * M_PI / 180.0).epsilon(1e-12));
    CHECK(circle.front() == doctest::Approx(-M_PI));
    CHECK(circle.back() == doctest::Approx(M_PI - 5.0 * M_PI / 180.0));
}

TEST_CASE("render_scan: single degenerate ray follows the heading") {
    OccupancyGrid grid = testutil::box_room(41, 0.1);
    // wall to the east at x = 4.0, pose in the middle
    const Pose2 pose{2.05, 2.05, 0.0};
    const RayScan scan = render_scan(grid, pose, 1, 1e-6, 10.0);
    REQUIRE(scan.size() == 1);
    CHECK(scan.angles[0] == 0.0);
    CHECK(scan.depths[0] == doctest::Approx(4.0 - 2.05).epsilon(1e-9));
}

TEST_CASE("render_scan matches the analytic box intersection") {
    // interior spans [0.1, 4.1) in both axes
    OccupancyGrid grid = testutil::box_room(42, 0.1);
    const Pose2 pose{2.05, 2.05, 0.3};
    const int v = 4;
    const double fov = 108.0 * M_PI / 180.0;
    const RayScan scan = render_scan(grid, pose, v, fov, 10.0);
    scan.validate();
    for (int i = 0; i < v; ++i) {
        const double a = pose.phi + scan.angles[static_cast<std::size_t>(i)];
        const double c = std::cos(a), s = std::sin(a);
        double t = 10.0;
        if (c > 0.0) t = std::min(t, (4.1 - pose.x) / c);
        if (c < 0.0) t = std::min(t, (0.1 - pose.x) / c);
        if (s > 0.0) t = std::min(t, (4.1 - pose.y) / s);
        if (s < 0.0) t = std::min(t, (0.1 - pose.y) / s);
        CHECK(scan.depths[static_cast<std::size_t>(i)] == doctest::Approx(t).epsilon(1e-9));
    }
}

TEST_CASE("render_scan: added obstacles never lengthen rays") {
    OccupancyGrid grid = testutil::box_room(42, 0.1);
    OccupancyGrid cluttered = grid;
    for (int x = 12; x < 16; ++x)
        for (int y = 20; y < 23; ++y) cluttered.at(x, y) = Cell::Occupied;
    const Pose2 pose{3.0, 1.0, 2.0};
    const RayScan a = render_scan(grid, pose, 80, 2.0 * M_PI, 10.0);
    const RayScan b = render_scan(cluttered, pose, 80, 2.0 * M_PI, 10.0);
    for (int i = 0; i < 80; ++i)
        CHECK(b.depths[static_cast<std::size_t>(i)] <= a.depths[static_cast<std::size_t>(i)]);
}

TEST_CASE("render_scan is deterministic") {
    OccupancyGrid grid = testutil::box_room(42, 0.1);
    const Pose2 pose{1.234, 2.345, -0.7};
    const RayScan a = render_scan(grid, pose, 40, 108.0 * M_PI / 180.0, 10.0);
    const RayScan b = render_scan(grid, pose, 40, 108.0 * M_PI / 180.0, 10.0);
    CHECK(a.depths == b.depths);
    CHECK(a.angles == b.angles);
}

TEST_CASE("render_scan rotation covariance on an all-free grid") {
    OccupancyGrid grid(50, 50, 0.1);
    const int v = 9;
    const double fov = 1.6;
    const double spacing = fov / (v - 1);
    const Pose2 pose{2.5, 2.5, 0.4};
    const RayScan a = render_scan(grid, pose, v, fov, 3.0);
    const RayScan b = render_scan(grid, {pose.x, pose.y, pose.phi + spacing}, v, fov, 3.0);
    for (int i = 0; i + 1 < v; ++i)
        CHECK(b.depths[static_cast<std::size_t>(i)] ==
              a.depths[static_cast<std::size_t>(i + 1)]);
}

TEST_CASE("render_scan rotation covariance in a box room") {
    OccupancyGrid grid = testutil::box_room(42, 0.1);
    const int v = 9;
    const double fov = 1.6;
    const double spacing = fov / (v - 1);
    const Pose2 pose{1.77, 2.31, 0.4};
    const RayScan a = render_scan(grid, pose, v, fov, 10.0);
    const RayScan b = render_scan(grid, {pose.x, pose.y, pose.phi + spacing}, v, fov, 10.0);
    for (int i = 0; i + 1 < v; ++i)
        CHECK(b.depths[static_cast<std::size_t>(i)] ==
              doctest::Approx(a.depths[static_cast<std::size_t>(i + 1)]).epsilon(1e-9));
}

TEST_CASE("free_poses enumerations") {
    OccupancyGrid all_occ(2, 2, 0.1, Cell::Occupied);
    CHECK(free_poses(all_occ).empty());

    OccupancyGrid all_free(2, 2, 0.1);
    CHECK(free_poses(all_free) == std::vector<int>{0, 1, 2, 3});

    OccupancyGrid checker(4, 4, 0.1);
    int expected = 0;
    for (int cy = 0; cy < 4; ++cy)
        for (int cx = 0; cx < 4; ++cx)
            if ((cx + cy) % 2 == 0)
                checker.at(cx, cy) = Cell::Occupied;
            else
                ++expected;  // enumeration oracle
    CHECK(expected == 8);
    const auto fp = free_poses(checker);
    CHECK(static_cast<int>(fp.size()) == expected);
    for (int idx : fp) CHECK(checker.cells[static_cast<std::size_t>(idx)] == Cell::Free);
}
